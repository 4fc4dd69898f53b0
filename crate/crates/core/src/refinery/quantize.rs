use super::RefineError;
use crate::driving::{NormalizedBox, GRID_MAX};

/// Maps a pixel box onto the 0–999 grid. The last pixel index of each axis
/// lands exactly on 999.
pub fn normalize_box(px: [f64; 4], img_w: u32, img_h: u32) -> Result<NormalizedBox, RefineError> {
    if img_w < 2 || img_h < 2 {
        return Err(RefineError::InvalidBox(format!("image size {img_w}x{img_h} is below 2x2")));
    }
    if px.iter().any(|v| !v.is_finite()) {
        return Err(RefineError::InvalidBox(format!("non-finite coordinate in {px:?}")));
    }
    let [x1, y1, x2, y2] = px;
    if x2 < x1 || y2 < y1 {
        return Err(RefineError::InvalidBox(format!("inverted box {px:?}")));
    }
    let max = GRID_MAX as f64;
    let scale = |c: f64, size: u32| (c / f64::from(size - 1) * max).round().clamp(0.0, max) as i64;
    NormalizedBox::new(scale(x1, img_w), scale(y1, img_h), scale(x2, img_w), scale(y2, img_h))
        .map_err(|e| RefineError::InvalidBox(e.to_string()))
}

/// `round(value * unit_scale)`, ties away from zero.
///
/// When the scale is a power of ten the value is shifted in decimal, using
/// the shortest representation that round-trips to the same `f64`. This makes
/// 2.675 m become 268 cm as written, not 267 as its binary expansion would
/// suggest. Other scales multiply in floating point.
pub fn quantize_decimal(value: f64, unit_scale: f64) -> Result<i64, RefineError> {
    if !value.is_finite() {
        return Err(RefineError::InvalidValue(format!("non-finite value {value}")));
    }
    if !(unit_scale.is_finite() && unit_scale > 0.0) {
        return Err(RefineError::InvalidValue(format!("unit scale {unit_scale} must be positive")));
    }
    let overflow = || RefineError::Overflow { value, unit_scale };
    if let Some(k) = power_of_ten(unit_scale) {
        return decimal_shift_round(value, k).ok_or_else(overflow);
    }
    let r = (value * unit_scale).round();
    // 2^63 is the first float past i64::MAX.
    const LIMIT: f64 = 9_223_372_036_854_775_808.0;
    if !(-LIMIT..LIMIT).contains(&r) {
        return Err(overflow());
    }
    Ok(r as i64)
}

fn power_of_ten(s: f64) -> Option<u32> {
    (0..=18).find(|&k| 10f64.powi(k as i32) == s)
}

fn decimal_shift_round(value: f64, k: u32) -> Option<i64> {
    // `Display` for f64 never uses exponent notation.
    let text = format!("{}", value.abs());
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let k = k as usize;
    let mut digits = String::with_capacity(int.len() + k);
    digits.push_str(int);
    digits.extend(frac.chars().chain(std::iter::repeat('0')).take(k));
    let round_up = frac.as_bytes().get(k).is_some_and(|d| *d >= b'5');
    let significant = digits.trim_start_matches('0');
    if significant.len() > 20 {
        return None;
    }
    let mut magnitude: i128 = if significant.is_empty() { 0 } else { significant.parse().ok()? };
    magnitude += i128::from(round_up);
    let signed = if value.is_sign_negative() { -magnitude } else { magnitude };
    i64::try_from(signed).ok()
}
