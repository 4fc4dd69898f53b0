use super::RefineError;
use crate::driving::{TrajectoryPlan, WAYPOINT_COUNT, WAYPOINT_INTERVAL_S};

/// Resamples timestamped `(t, x, y)` points onto the 0.5 s … 3.0 s grid by
/// piecewise-linear interpolation. Grid times present in the input are
/// copied bit for bit.
pub fn unify_trajectory(points: &[[f64; 3]]) -> Result<TrajectoryPlan, RefineError> {
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(RefineError::Trajectory("non-finite trajectory point".into()));
    }
    if let Some(w) = points.windows(2).find(|w| w[1][0] <= w[0][0]) {
        return Err(RefineError::Trajectory(format!(
            "timestamps must strictly increase ({} then {})",
            w[0][0], w[1][0]
        )));
    }
    let grid: Vec<f64> = (1..=WAYPOINT_COUNT).map(|i| i as f64 * WAYPOINT_INTERVAL_S).collect();
    let missing: Vec<f64> = match (points.first(), points.last()) {
        (Some(first), Some(last)) => grid.iter().copied().filter(|&g| g < first[0] || g > last[0]).collect(),
        _ => grid.clone(),
    };
    if !missing.is_empty() {
        return Err(RefineError::Coverage { missing });
    }
    let mut out = Vec::with_capacity(WAYPOINT_COUNT);
    for g in grid {
        // First point at or after g; exists because coverage was checked.
        let j = points.partition_point(|p| p[0] < g);
        let b = points[j];
        if b[0] == g {
            out.push([b[1], b[2]]);
            continue;
        }
        let a = points[j - 1];
        let u = (g - a[0]) / (b[0] - a[0]);
        out.push([a[1] + (b[1] - a[1]) * u, a[2] + (b[2] - a[2]) * u]);
    }
    Ok(TrajectoryPlan::new(&out).expect("six finite waypoints"))
}
