use std::collections::{BTreeMap, BTreeSet};

use super::{check_corpus, ngram_counts, tokenize, EvalPair, MetricError};

type Vector<'a> = BTreeMap<&'a [String], f64>;

fn tfidf<'a>(counts: BTreeMap<&'a [String], usize>, df: &BTreeMap<&[String], usize>, log_docs: f64) -> Vector<'a> {
    counts
        .into_iter()
        .map(|(g, c)| {
            let d = df.get(g).copied().unwrap_or(0).max(1) as f64;
            (g, c as f64 * (log_docs - d.ln()))
        })
        .collect()
}

fn cos(a: &Vector, b: &Vector) -> f64 {
    let na: f64 = a.values().map(|v| v * v).sum();
    let nb: f64 = b.values().map(|v| v * v).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().filter_map(|(g, x)| b.get(g).map(|y| x * y)).sum();
    dot / (na * nb).sqrt()
}

/// Plain CIDEr (no clipping, no length penalty) reported as
/// `100 × mean over pairs of mean_n mean_refs cos(tfidf_n(cand), tfidf_n(ref))`
/// for `n = 1..=4`.
///
/// Document frequencies count the pairs whose references contain an n-gram;
/// IDF is `ln(N_pairs / max(1, df))`.
pub fn cider(pairs: &[EvalPair]) -> Result<f64, MetricError> {
    check_corpus(pairs)?;
    let cands: Vec<Vec<String>> = pairs.iter().map(|p| tokenize(&p.candidate)).collect();
    let refs: Vec<Vec<Vec<String>>> = pairs
        .iter()
        .map(|p| p.references.iter().map(|r| tokenize(r)).collect())
        .collect();
    let distinct: BTreeSet<&Vec<Vec<String>>> = refs.iter().collect();
    if distinct.len() < 2 {
        return Err(MetricError::DegenerateIdf(distinct.len()));
    }
    let log_docs = (pairs.len() as f64).ln();
    let mut total = 0.0;
    let mut per_pair = vec![0.0; pairs.len()];
    for n in 1..=4 {
        let mut df: BTreeMap<&[String], usize> = BTreeMap::new();
        for doc in &refs {
            let grams: BTreeSet<&[String]> = doc.iter().flat_map(|r| ngram_counts(r, n).into_keys()).collect();
            for g in grams {
                *df.entry(g).or_insert(0) += 1;
            }
        }
        for (i, (cand, doc)) in cands.iter().zip(&refs).enumerate() {
            let cv = tfidf(ngram_counts(cand, n), &df, log_docs);
            let mean_ref: f64 = doc
                .iter()
                .map(|r| cos(&cv, &tfidf(ngram_counts(r, n), &df, log_docs)))
                .sum::<f64>()
                / doc.len() as f64;
            per_pair[i] += mean_ref;
        }
    }
    for s in per_pair {
        total += s / 4.0;
    }
    Ok(100.0 * total / pairs.len() as f64)
}
