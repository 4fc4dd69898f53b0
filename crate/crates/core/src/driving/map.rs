use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{iou, EvalError, NormalizedBox};

pub const RISK_TARGET_LABEL: &str = "risk-target";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: NormalizedBox,
    pub score: f64,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthBox {
    #[serde(rename = "box")]
    pub bbox: NormalizedBox,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageDetections {
    pub id: String,
    pub detections: Vec<Detection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageGroundTruth {
    pub id: String,
    pub boxes: Vec<GroundTruthBox>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApInterpolation {
    /// Area under the monotone precision envelope at every recall step.
    #[default]
    AllPoint,
    /// Mean interpolated precision at recall 0, 0.1, …, 1.
    ElevenPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapConfig {
    pub iou_thresholds: Vec<f64>,
    pub interpolation: ApInterpolation,
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            iou_thresholds: vec![0.5],
            interpolation: ApInterpolation::AllPoint,
        }
    }
}

impl MapConfig {
    fn validate(&self) -> Result<(), EvalError> {
        if self.iou_thresholds.is_empty() {
            return Err(EvalError::Config("no IoU thresholds".into()));
        }
        if let Some(t) = self.iou_thresholds.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(EvalError::Config(format!("IoU threshold {t} outside (0, 1]")));
        }
        Ok(())
    }
}

/// Pairs every ground-truth image with its predictions, by id.
fn align<'a>(
    preds: &'a [ImageDetections],
    gts: &'a [ImageGroundTruth],
) -> Result<Vec<(&'a ImageGroundTruth, Option<&'a ImageDetections>)>, EvalError> {
    let mut by_id: HashMap<&str, &ImageDetections> = HashMap::new();
    for p in preds {
        if by_id.insert(&p.id, p).is_some() {
            return Err(EvalError::IdMismatch(format!("duplicate prediction id '{}'", p.id)));
        }
    }
    let mut seen = BTreeSet::new();
    for g in gts {
        if !seen.insert(g.id.as_str()) {
            return Err(EvalError::IdMismatch(format!("duplicate ground-truth id '{}'", g.id)));
        }
    }
    let missing: Vec<&str> = by_id.keys().filter(|id| !seen.contains(*id)).copied().collect();
    let unpredicted: Vec<&str> = seen.iter().filter(|id| !by_id.contains_key(*id)).copied().collect();
    if !missing.is_empty() || !unpredicted.is_empty() {
        let mut missing = missing;
        missing.sort_unstable();
        return Err(EvalError::IdMismatch(format!(
            "predictions without ground truth: {missing:?}; ground truth without predictions: {unpredicted:?}"
        )));
    }
    for p in preds {
        if let Some(d) = p.detections.iter().find(|d| !(0.0..=1.0).contains(&d.score)) {
            return Err(EvalError::InvalidSample(format!("score {} outside [0, 1] in '{}'", d.score, p.id)));
        }
    }
    Ok(gts.iter().map(|g| (g, by_id.get(g.id.as_str()).copied())).collect())
}

/// Match decision for one detection of the evaluated class.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchOutcome {
    /// Position of the image in the ground-truth list.
    pub image: usize,
    /// Position of the detection within its image's prediction list.
    pub detection: usize,
    pub score: f64,
    /// Index of the matched box within its image's ground truth.
    pub matched: Option<usize>,
}

/// Greedy matching for one class at one threshold.
///
/// Detections are visited by descending score (ties in input order); each
/// takes the unmatched ground-truth box of the same label with the highest
/// IoU (lowest index on ties) provided that IoU reaches `threshold`.
/// Returns the outcomes in visiting order and the number of ground-truth
/// boxes of the class.
pub fn greedy_matches(
    preds: &[ImageDetections],
    gts: &[ImageGroundTruth],
    label: &str,
    threshold: f64,
) -> Result<(Vec<MatchOutcome>, usize), EvalError> {
    let aligned = align(preds, gts)?;
    Ok(match_aligned(&aligned, label, threshold))
}

fn match_aligned(
    aligned: &[(&ImageGroundTruth, Option<&ImageDetections>)],
    label: &str,
    threshold: f64,
) -> (Vec<MatchOutcome>, usize) {
    let mut order: Vec<MatchOutcome> = Vec::new();
    for (image, (_, p)) in aligned.iter().enumerate() {
        for (detection, d) in p.map(|p| p.detections.as_slice()).unwrap_or(&[]).iter().enumerate() {
            if d.label == label {
                order.push(MatchOutcome {
                    image,
                    detection,
                    score: d.score,
                    matched: None,
                });
            }
        }
    }
    order.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut taken: Vec<Vec<bool>> = aligned.iter().map(|(g, _)| vec![false; g.boxes.len()]).collect();
    let npos = aligned
        .iter()
        .map(|(g, _)| g.boxes.iter().filter(|b| b.label == label).count())
        .sum();
    for m in &mut order {
        let (g, p) = aligned[m.image];
        let det = &p.expect("detections come from predicted images").detections[m.detection];
        let mut best: Option<(usize, f64)> = None;
        for (j, gt) in g.boxes.iter().enumerate() {
            if gt.label != label || taken[m.image][j] {
                continue;
            }
            let v = iou(&det.bbox, &gt.bbox);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        if let Some((j, v)) = best {
            if v >= threshold {
                taken[m.image][j] = true;
                m.matched = Some(j);
            }
        }
    }
    (order, npos)
}

fn average_precision(outcomes: &[MatchOutcome], npos: usize, interp: ApInterpolation) -> f64 {
    let mut precision = Vec::with_capacity(outcomes.len());
    let mut recall = Vec::with_capacity(outcomes.len());
    let mut tp = 0usize;
    for (i, m) in outcomes.iter().enumerate() {
        if m.matched.is_some() {
            tp += 1;
        }
        precision.push(tp as f64 / (i + 1) as f64);
        recall.push(tp as f64 / npos as f64);
    }
    // Running maximum from the right: the precision envelope.
    let mut envelope = precision.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    match interp {
        // Recall grows by 1/npos exactly at each true positive.
        ApInterpolation::AllPoint => {
            outcomes
                .iter()
                .zip(&envelope)
                .filter(|(m, _)| m.matched.is_some())
                .map(|(_, p)| p)
                .sum::<f64>()
                / npos as f64
        }
        ApInterpolation::ElevenPoint => {
            (0..=10)
                .map(|t| {
                    let t = t as f64 / 10.0;
                    recall
                        .iter()
                        .zip(&precision)
                        .filter(|(r, _)| **r >= t)
                        .map(|(_, p)| *p)
                        .fold(0.0, f64::max)
                })
                .sum::<f64>()
                / 11.0
        }
    }
}

/// Mean average precision ×100, averaged over ground-truth classes and then
/// over IoU thresholds. Classes that appear only in predictions are ignored.
pub fn grounding_map(preds: &[ImageDetections], gts: &[ImageGroundTruth], cfg: &MapConfig) -> Result<f64, EvalError> {
    cfg.validate()?;
    let aligned = align(preds, gts)?;
    let classes: BTreeSet<&str> = gts.iter().flat_map(|g| g.boxes.iter().map(|b| b.label.as_str())).collect();
    if classes.is_empty() {
        return Err(EvalError::NoGroundTruth);
    }
    let mut total = 0.0;
    for &t in &cfg.iou_thresholds {
        let per_class: f64 = classes
            .iter()
            .map(|c| {
                let (outcomes, npos) = match_aligned(&aligned, c, t);
                average_precision(&outcomes, npos, cfg.interpolation)
            })
            .sum();
        total += per_class / classes.len() as f64;
    }
    Ok(100.0 * total / cfg.iou_thresholds.len() as f64)
}

/// mAP with every prediction and ground-truth box treated as one
/// `risk-target` class.
pub fn risk_grounding_map(preds: &[ImageDetections], gts: &[ImageGroundTruth], cfg: &MapConfig) -> Result<f64, EvalError> {
    let preds: Vec<ImageDetections> = preds
        .iter()
        .map(|p| ImageDetections {
            id: p.id.clone(),
            detections: p
                .detections
                .iter()
                .map(|d| Detection {
                    label: RISK_TARGET_LABEL.into(),
                    ..d.clone()
                })
                .collect(),
        })
        .collect();
    let gts: Vec<ImageGroundTruth> = gts
        .iter()
        .map(|g| ImageGroundTruth {
            id: g.id.clone(),
            boxes: g
                .boxes
                .iter()
                .map(|b| GroundTruthBox {
                    label: RISK_TARGET_LABEL.into(),
                    ..b.clone()
                })
                .collect(),
        })
        .collect();
    grounding_map(&preds, &gts, cfg)
}
