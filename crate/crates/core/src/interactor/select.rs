use std::cmp::Ordering;

use super::{InstructionEmbedding, InteractorError, Reduction, SelectionResult};
use crate::numerics::{cosine_similarity_matrix, Matrix};

/// Relevance of every row of `f` to the instruction: cosine similarity
/// against each instruction token, reduced by max or mean.
pub fn score_tokens(f: &Matrix, inst: &InstructionEmbedding, reduction: Reduction) -> Result<Vec<f64>, InteractorError> {
    let sim = cosine_similarity_matrix(f, inst.tokens())?;
    Ok(sim
        .row_iter()
        .map(|row| match reduction {
            Reduction::Max => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Reduction::Mean => row.iter().sum::<f64>() / row.len() as f64,
        })
        .collect())
}

fn rank(scores: &[f64], a: usize, b: usize) -> Ordering {
    scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
}

/// Keeps the `min(k, rows)` highest-scoring rows of `f`.
pub fn select_topk(f: &Matrix, scores: &[f64], k: usize) -> Result<SelectionResult, InteractorError> {
    if scores.len() != f.rows() {
        return Err(InteractorError::Precondition(format!(
            "{} scores for {} tokens",
            scores.len(),
            f.rows()
        )));
    }
    if k == 0 {
        return Err(InteractorError::Precondition("k must be at least 1".into()));
    }
    let take = k.min(f.rows());
    let mut order: Vec<usize> = (0..f.rows()).collect();
    if take < order.len() {
        order.select_nth_unstable_by(take - 1, |&a, &b| rank(scores, a, b));
        order.truncate(take);
    }
    order.sort_unstable_by(|&a, &b| rank(scores, a, b));
    let features = f.select_rows(&order)?;
    Ok(SelectionResult {
        indices: order,
        features,
        scores: scores.to_vec(),
    })
}
