use super::{check_corpus, tokenize, EvalPair, MetricError};

/// Recall weight of the LCS F-measure.
pub const ROUGE_BETA: f64 = 1.2;

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn f_measure(cand: &[String], reference: &[String]) -> f64 {
    let lcs = lcs_len(cand, reference);
    if lcs == 0 {
        return 0.0;
    }
    let p = lcs as f64 / cand.len() as f64;
    let r = lcs as f64 / reference.len() as f64;
    let b2 = ROUGE_BETA * ROUGE_BETA;
    (1.0 + b2) * p * r / (r + b2 * p)
}

/// Mean over pairs of the best-reference LCS F-measure, ×100.
pub fn rouge_l(pairs: &[EvalPair]) -> Result<f64, MetricError> {
    check_corpus(pairs)?;
    let total: f64 = pairs
        .iter()
        .map(|pair| {
            let cand = tokenize(&pair.candidate);
            pair.references
                .iter()
                .map(|r| f_measure(&cand, &tokenize(r)))
                .fold(0.0, f64::max)
        })
        .sum();
    Ok(100.0 * total / pairs.len() as f64)
}
