use serde::{Deserialize, Serialize};

use super::EvalError;

/// Largest coordinate on the normalized grid.
pub const GRID_MAX: i64 = 999;

/// Integer box on the inclusive `0..=999` grid with `x1 ≤ x2`, `y1 ≤ y2`.
///
/// Serialized as `[x1, y1, x2, y2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 4]", into = "[i64; 4]")]
pub struct NormalizedBox {
    x1: u16,
    y1: u16,
    x2: u16,
    y2: u16,
}

impl NormalizedBox {
    pub fn new(x1: i64, y1: i64, x2: i64, y2: i64) -> Result<Self, EvalError> {
        let coords = [x1, y1, x2, y2];
        if coords.iter().any(|c| !(0..=GRID_MAX).contains(c)) {
            return Err(EvalError::InvalidBox(format!("{coords:?} outside 0..={GRID_MAX}")));
        }
        if x1 > x2 || y1 > y2 {
            return Err(EvalError::InvalidBox(format!("{coords:?} is inverted")));
        }
        Ok(Self {
            x1: x1 as u16,
            y1: y1 as u16,
            x2: x2 as u16,
            y2: y2 as u16,
        })
    }

    pub fn coords(&self) -> [i64; 4] {
        [self.x1 as i64, self.y1 as i64, self.x2 as i64, self.y2 as i64]
    }

    /// Cell count on the inclusive grid.
    pub fn area(&self) -> u64 {
        (self.x2 - self.x1 + 1) as u64 * (self.y2 - self.y1 + 1) as u64
    }
}

impl TryFrom<[i64; 4]> for NormalizedBox {
    type Error = EvalError;

    fn try_from(c: [i64; 4]) -> Result<Self, Self::Error> {
        NormalizedBox::new(c[0], c[1], c[2], c[3])
    }
}

impl From<NormalizedBox> for [i64; 4] {
    fn from(b: NormalizedBox) -> Self {
        b.coords()
    }
}

/// Intersection over union on the inclusive integer grid, computed with
/// integer cell counts and a single final division.
pub fn iou(a: &NormalizedBox, b: &NormalizedBox) -> f64 {
    let ix1 = a.x1.max(b.x1);
    let iy1 = a.y1.max(b.y1);
    let ix2 = a.x2.min(b.x2);
    let iy2 = a.y2.min(b.y2);
    let inter = if ix1 > ix2 || iy1 > iy2 {
        0
    } else {
        (ix2 - ix1 + 1) as u64 * (iy2 - iy1 + 1) as u64
    };
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}
