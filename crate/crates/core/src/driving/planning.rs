use serde::{Deserialize, Serialize};

use super::EvalError;

pub const WAYPOINT_COUNT: usize = 6;
pub const WAYPOINT_INTERVAL_S: f64 = 0.5;
/// Waypoint index reached at 1 s, 2 s and 3 s.
pub const HORIZON_STEPS: [usize; 3] = [1, 3, 5];

/// Six future ego positions in meters, 0.5 s apart, starting at t = 0.5 s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct TrajectoryPlan {
    waypoints: [[f64; 2]; WAYPOINT_COUNT],
}

impl TrajectoryPlan {
    pub fn new(points: &[[f64; 2]]) -> Result<Self, EvalError> {
        if points.len() != WAYPOINT_COUNT {
            return Err(EvalError::InvalidSample(format!(
                "trajectory needs {WAYPOINT_COUNT} waypoints, got {}",
                points.len()
            )));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(EvalError::InvalidSample("non-finite waypoint".into()));
        }
        let mut waypoints = [[0.0; 2]; WAYPOINT_COUNT];
        waypoints.copy_from_slice(points);
        Ok(Self { waypoints })
    }

    pub fn waypoints(&self) -> &[[f64; 2]; WAYPOINT_COUNT] {
        &self.waypoints
    }

    /// Heading at every waypoint from the segment arriving at it; waypoint 0
    /// borrows the first segment. A zero-length segment keeps the previous
    /// heading (0 if no segment moves at all).
    pub fn headings(&self) -> [f64; WAYPOINT_COUNT] {
        let w = &self.waypoints;
        let seg = |i: usize| {
            let (dx, dy) = (w[i][0] - w[i - 1][0], w[i][1] - w[i - 1][1]);
            (dx != 0.0 || dy != 0.0).then(|| dy.atan2(dx))
        };
        let first = (1..WAYPOINT_COUNT).find_map(seg).unwrap_or(0.0);
        let mut out = [first; WAYPOINT_COUNT];
        for i in 1..WAYPOINT_COUNT {
            out[i] = seg(i).unwrap_or(out[i - 1]);
        }
        out
    }
}

impl TryFrom<Vec<[f64; 2]>> for TrajectoryPlan {
    type Error = EvalError;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self, Self::Error> {
        Self::new(&v)
    }
}

impl From<TrajectoryPlan> for Vec<[f64; 2]> {
    fn from(p: TrajectoryPlan) -> Self {
        p.waypoints.to_vec()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum L2Mode {
    /// Distance at the single waypoint reached at each horizon.
    #[default]
    AtHorizon,
    /// Mean distance over every waypoint up to and including the horizon.
    UpToHorizon,
}

/// One value per horizon plus their mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HorizonReport {
    #[serde(rename = "1s")]
    pub h1: f64,
    #[serde(rename = "2s")]
    pub h2: f64,
    #[serde(rename = "3s")]
    pub h3: f64,
    pub avg: f64,
}

impl HorizonReport {
    pub fn from_horizons(h: [f64; 3]) -> Self {
        Self {
            h1: h[0],
            h2: h[1],
            h3: h[2],
            avg: (h[0] + h[1] + h[2]) / 3.0,
        }
    }

    pub fn horizons(&self) -> [f64; 3] {
        [self.h1, self.h2, self.h3]
    }
}

pub fn l2_error(pred: &TrajectoryPlan, gt: &TrajectoryPlan, mode: L2Mode) -> HorizonReport {
    let d: Vec<f64> = pred
        .waypoints
        .iter()
        .zip(&gt.waypoints)
        .map(|(p, g)| (p[0] - g[0]).hypot(p[1] - g[1]))
        .collect();
    HorizonReport::from_horizons(HORIZON_STEPS.map(|h| match mode {
        L2Mode::AtHorizon => d[h],
        L2Mode::UpToHorizon => d[..=h].iter().sum::<f64>() / (h + 1) as f64,
    }))
}

/// Mean per-horizon L2 over a corpus of (prediction, ground truth) pairs.
pub fn l2_corpus(pairs: &[(TrajectoryPlan, TrajectoryPlan)], mode: L2Mode) -> Result<HorizonReport, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::NoGroundTruth);
    }
    let mut acc = [0.0; 3];
    for (p, g) in pairs {
        let r = l2_error(p, g, mode).horizons();
        for (a, v) in acc.iter_mut().zip(r) {
            *a += v;
        }
    }
    Ok(HorizonReport::from_horizons(acc.map(|a| a / pairs.len() as f64)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EgoDims {
    pub length: f64,
    pub width: f64,
}

impl Default for EgoDims {
    fn default() -> Self {
        Self { length: 4.084, width: 1.85 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentBox {
    pub x: f64,
    pub y: f64,
    pub length: f64,
    pub width: f64,
    pub heading: f64,
}

impl AgentBox {
    pub fn rect(&self) -> OrientedRect {
        OrientedRect {
            cx: self.x,
            cy: self.y,
            length: self.length,
            width: self.width,
            heading: self.heading,
        }
    }
}

/// Rectangle with `length` along `heading` and `width` across it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedRect {
    pub cx: f64,
    pub cy: f64,
    pub length: f64,
    pub width: f64,
    pub heading: f64,
}

impl OrientedRect {
    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.heading.sin_cos();
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)].map(|(u, v)| [self.cx + u * c - v * s, self.cy + u * s + v * c])
    }

    fn axes(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.heading.sin_cos();
        [[c, s], [-s, c]]
    }

    /// Separating-axis test. Rectangles that only touch do not overlap.
    pub fn overlaps(&self, other: &OrientedRect) -> bool {
        let (a, b) = (self.corners(), other.corners());
        let project = |pts: &[[f64; 2]; 4], ax: [f64; 2]| {
            pts.iter().map(|p| p[0] * ax[0] + p[1] * ax[1]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
        };
        self.axes().into_iter().chain(other.axes()).all(|ax| {
            let (amin, amax) = project(&a, ax);
            let (bmin, bmax) = project(&b, ax);
            amax > bmin && bmax > amin
        })
    }
}

/// A planned trajectory with the agents present at each waypoint time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionSample {
    pub plan: TrajectoryPlan,
    pub agents: Vec<Vec<AgentBox>>,
}

/// Waypoint index of the first overlap with any agent, if any.
fn first_collision(sample: &CollisionSample, idx: usize, ego: EgoDims) -> Result<Option<usize>, EvalError> {
    if sample.agents.len() != WAYPOINT_COUNT {
        return Err(EvalError::MisalignedTimesteps {
            sample: idx,
            expected: WAYPOINT_COUNT,
            actual: sample.agents.len(),
        });
    }
    let headings = sample.plan.headings();
    for (t, (wp, agents)) in sample.plan.waypoints().iter().zip(&sample.agents).enumerate() {
        let rect = OrientedRect {
            cx: wp[0],
            cy: wp[1],
            length: ego.length,
            width: ego.width,
            heading: headings[t],
        };
        for a in agents {
            if !(a.length > 0.0 && a.width > 0.0) || ![a.x, a.y, a.heading].iter().all(|v| v.is_finite()) {
                return Err(EvalError::InvalidSample(format!("sample {idx}: invalid agent box at step {t}")));
            }
            if rect.overlaps(&a.rect()) {
                return Ok(Some(t));
            }
        }
    }
    Ok(None)
}

/// Percentage of samples colliding at or before each horizon.
pub fn collision_rate(samples: &[CollisionSample], ego: EgoDims) -> Result<HorizonReport, EvalError> {
    if samples.is_empty() {
        return Err(EvalError::NoGroundTruth);
    }
    if !(ego.length > 0.0 && ego.width > 0.0) {
        return Err(EvalError::Config("ego dimensions must be positive".into()));
    }
    let mut hits = [0usize; 3];
    for (i, s) in samples.iter().enumerate() {
        if let Some(t) = first_collision(s, i, ego)? {
            for (h, step) in HORIZON_STEPS.iter().enumerate() {
                hits[h] += usize::from(t <= *step);
            }
        }
    }
    Ok(HorizonReport::from_horizons(hits.map(|n| 100.0 * n as f64 / samples.len() as f64)))
}
