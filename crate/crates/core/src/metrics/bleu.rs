use super::{check_corpus, ngram_counts, tokenize, EvalPair, MetricError};

/// Stand-in for a zero modified precision at orders above one.
pub const BLEU_ZERO_PRECISION_EPS: f64 = 1e-9;

/// Corpus BLEU-`max_n`: clipped n-gram precisions pooled over the corpus,
/// geometric mean over orders `1..=max_n`, times the brevity penalty, ×100.
///
/// The effective reference length of a pair is the reference length closest
/// to the candidate's (shorter wins ties). A corpus with no unigram matches
/// scores 0; zero precisions at higher orders are replaced by
/// [`BLEU_ZERO_PRECISION_EPS`].
pub fn bleu(pairs: &[EvalPair], max_n: usize) -> Result<f64, MetricError> {
    if !(1..=4).contains(&max_n) {
        return Err(MetricError::BleuOrder(max_n));
    }
    check_corpus(pairs)?;
    let mut matched = [0usize; 4];
    let mut total = [0usize; 4];
    let (mut cand_len, mut ref_len) = (0usize, 0usize);
    for pair in pairs {
        let cand = tokenize(&pair.candidate);
        let refs: Vec<Vec<String>> = pair.references.iter().map(|r| tokenize(r)).collect();
        cand_len += cand.len();
        ref_len += refs
            .iter()
            .map(Vec::len)
            .min_by_key(|&l| (l.abs_diff(cand.len()), l))
            .unwrap_or(0);
        for n in 1..=max_n {
            let counts = ngram_counts(&cand, n);
            let ref_counts: Vec<_> = refs.iter().map(|r| ngram_counts(r, n)).collect();
            for (gram, &c) in &counts {
                let max_ref = ref_counts.iter().filter_map(|rc| rc.get(gram)).copied().max().unwrap_or(0);
                matched[n - 1] += c.min(max_ref);
            }
            total[n - 1] += cand.len().saturating_sub(n - 1);
        }
    }
    if cand_len == 0 || matched[0] == 0 {
        return Ok(0.0);
    }
    let log_sum: f64 = (0..max_n)
        .map(|i| {
            let p = if matched[i] == 0 {
                BLEU_ZERO_PRECISION_EPS
            } else {
                matched[i] as f64 / total[i] as f64
            };
            p.ln()
        })
        .sum();
    let bp = if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    Ok(100.0 * bp * (log_sum / max_n as f64).exp())
}
