use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{accuracy, bleu, cider, mae, rouge_l, MetricError, BLEU_ZERO_PRECISION_EPS, ROUGE_BETA};

/// One candidate with its references.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPair {
    pub id: String,
    pub candidate: String,
    pub references: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_tag: Option<String>,
}

impl EvalPair {
    pub fn new(id: impl Into<String>, candidate: impl Into<String>, references: Vec<String>) -> Self {
        Self {
            id: id.into(),
            candidate: candidate.into(),
            references,
            task_tag: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub scores: BTreeMap<String, f64>,
    pub count: usize,
    /// Scores are percentages (0–100); CIDEr may exceed 100 only in principle.
    pub scale: String,
    pub metadata: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_task: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Column order of the caption CSV row.
pub const CAPTION_COLUMNS: [&str; 8] = ["BLEU1", "BLEU2", "BLEU3", "BLEU4", "CIDEr", "ROUGE_L", "ACC", "MAE"];

fn corpus_scores(pairs: &[EvalPair]) -> Result<BTreeMap<String, f64>, MetricError> {
    let mut scores = BTreeMap::new();
    for n in 1..=4 {
        scores.insert(format!("BLEU{n}"), bleu(pairs, n)?);
    }
    scores.insert("ROUGE_L".into(), rouge_l(pairs)?);
    match cider(pairs) {
        Ok(c) => {
            scores.insert("CIDEr".into(), c);
        }
        Err(MetricError::DegenerateIdf(_)) => {}
        Err(e) => return Err(e),
    }
    let preds: Vec<String> = pairs.iter().map(|p| p.candidate.clone()).collect();
    let gts: Vec<String> = pairs.iter().map(|p| p.references[0].clone()).collect();
    scores.insert("ACC".into(), accuracy(&preds, &gts)?);
    let numeric: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|p| p.task_tag.as_deref() == Some("numeric"))
        .filter_map(|p| Some((p.candidate.trim().parse().ok()?, p.references[0].trim().parse().ok()?)))
        .collect();
    if !numeric.is_empty() {
        let (p, g): (Vec<f64>, Vec<f64>) = numeric.into_iter().unzip();
        scores.insert("MAE".into(), mae(&p, &g)?);
    }
    Ok(scores)
}

/// Full caption report: corpus scores plus the same scores per task tag.
///
/// ACC compares each candidate against its first reference. MAE covers pairs
/// tagged `numeric` whose candidate and first reference parse as numbers.
/// CIDEr is omitted when the corpus has fewer than two distinct reference
/// documents.
pub fn caption_report(pairs: &[EvalPair]) -> Result<MetricReport, MetricError> {
    let scores = corpus_scores(pairs)?;
    let mut groups: BTreeMap<&str, Vec<EvalPair>> = BTreeMap::new();
    for p in pairs {
        if let Some(tag) = &p.task_tag {
            groups.entry(tag).or_default().push(p.clone());
        }
    }
    let per_task = groups
        .into_iter()
        .map(|(tag, ps)| corpus_scores(&ps).map(|s| (tag.to_string(), s)))
        .collect::<Result<_, _>>()?;
    let metadata = BTreeMap::from([
        ("bleu_smoothing".to_string(), format!("zero precision replaced by {BLEU_ZERO_PRECISION_EPS:e} for n >= 2")),
        ("rouge_beta".to_string(), ROUGE_BETA.to_string()),
        ("cider_scale".to_string(), "100 x mean cosine (plain TF-IDF, no clipping or length penalty)".to_string()),
        ("tokenizer".to_string(), "lowercase, punctuation split".to_string()),
    ]);
    Ok(MetricReport {
        scores,
        count: pairs.len(),
        scale: "0-100".into(),
        metadata,
        per_task,
    })
}

impl MetricReport {
    /// Header and one data row in [`CAPTION_COLUMNS`] order; absent metrics are `N/A`.
    pub fn to_csv(&self) -> String {
        let row: Vec<String> = CAPTION_COLUMNS
            .iter()
            .map(|c| self.scores.get(*c).map_or_else(|| "N/A".to_string(), |v| format!("{v:.2}")))
            .collect();
        format!("{}\n{}\n", CAPTION_COLUMNS.join(","), row.join(","))
    }
}
