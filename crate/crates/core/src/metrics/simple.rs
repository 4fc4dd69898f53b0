use super::MetricError;

/// Trims and lowercases.
pub fn default_normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Exact-match accuracy after [`default_normalize`], ×100.
pub fn accuracy(preds: &[String], gts: &[String]) -> Result<f64, MetricError> {
    accuracy_with(preds, gts, default_normalize)
}

pub fn accuracy_with(preds: &[String], gts: &[String], normalize: impl Fn(&str) -> String) -> Result<f64, MetricError> {
    if preds.len() != gts.len() {
        return Err(MetricError::LengthMismatch {
            preds: preds.len(),
            gts: gts.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let hits = preds.iter().zip(gts).filter(|(p, g)| normalize(p) == normalize(g)).count();
    Ok(100.0 * hits as f64 / preds.len() as f64)
}

/// Mean absolute error.
pub fn mae(preds: &[f64], gts: &[f64]) -> Result<f64, MetricError> {
    if preds.len() != gts.len() {
        return Err(MetricError::LengthMismatch {
            preds: preds.len(),
            gts: gts.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    Ok(preds.iter().zip(gts).map(|(p, g)| (p - g).abs()).sum::<f64>() / preds.len() as f64)
}
