//! Corpus-level language metrics on a 0–100 scale: BLEU-1..4, ROUGE-L,
//! CIDEr, exact-match accuracy and mean absolute error.

mod bleu;
mod cider;
mod report;
mod rouge;
mod simple;
mod tokenize;

pub use bleu::{bleu, BLEU_ZERO_PRECISION_EPS};
pub use cider::cider;
pub use report::{caption_report, EvalPair, MetricReport, CAPTION_COLUMNS};
pub use rouge::{rouge_l, ROUGE_BETA};
pub use simple::{accuracy, accuracy_with, default_normalize, mae};
pub use tokenize::tokenize;

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("pair '{0}' has no references")]
    NoReferences(String),
    #[error("BLEU order must be 1..=4, got {0}")]
    BleuOrder(usize),
    #[error("CIDEr needs at least two distinct reference documents, got {0}")]
    DegenerateIdf(usize),
    #[error("length mismatch: {preds} predictions vs {gts} ground truths")]
    LengthMismatch { preds: usize, gts: usize },
}

fn check_corpus(pairs: &[EvalPair]) -> Result<(), MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    if let Some(p) = pairs.iter().find(|p| p.references.is_empty()) {
        return Err(MetricError::NoReferences(p.id.clone()));
    }
    Ok(())
}

/// Counts of every `n`-gram in `tokens`.
fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut counts = BTreeMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}
