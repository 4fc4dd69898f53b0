use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng::{shuffle, stream};
use super::MaskError;
use crate::interactor::ViewFeatureSet;
use crate::numerics::Matrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskMode {
    #[default]
    Mask,
    Blind,
}

/// Which rows may be masked in each view, what share of them, and the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub candidates: Vec<Vec<usize>>,
    /// Percentage, 0–100.
    pub rate: u32,
    pub mode: MaskMode,
    pub seed: u64,
}

impl MaskSpec {
    pub fn validate(&self, f: &ViewFeatureSet) -> Result<(), MaskError> {
        if self.rate > 100 {
            return Err(MaskError::Spec(format!("rate {} exceeds 100", self.rate)));
        }
        if self.candidates.len() != f.len() {
            return Err(MaskError::Spec(format!(
                "{} candidate lists for {} views",
                self.candidates.len(),
                f.len()
            )));
        }
        for (v, (cands, n)) in self.candidates.iter().zip(f.token_counts()).enumerate() {
            let mut seen = vec![false; n];
            for &i in cands {
                if i >= n {
                    return Err(MaskError::IndexOutOfRange { view: v, index: i, tokens: n });
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(MaskError::Spec(format!("view {v}: candidate {i} listed twice")));
                }
            }
        }
        Ok(())
    }

    /// `⌊rate · |candidates| / 100⌋` for every view.
    pub fn masked_counts(&self) -> Vec<usize> {
        self.candidates.iter().map(|c| c.len() * self.rate as usize / 100).collect()
    }
}

/// Rows chosen for masking in each view: the candidates shuffled with the
/// view's stream, then the first `⌊rate · |candidates| / 100⌋`, sorted.
pub fn mask_indices(spec: &MaskSpec) -> Vec<Vec<usize>> {
    spec.candidates
        .iter()
        .zip(spec.masked_counts())
        .enumerate()
        .map(|(v, (cands, count))| {
            let mut order = cands.clone();
            shuffle(&mut order, &mut stream(spec.seed, &format!("mask/view{v}")));
            order.truncate(count);
            order.sort_unstable();
            order
        })
        .collect()
}

/// Zeroes the chosen candidate rows; every other value is copied bit for bit.
pub fn apply_token_mask(f: &ViewFeatureSet, spec: &MaskSpec) -> Result<ViewFeatureSet, MaskError> {
    spec.validate(f)?;
    if spec.mode != MaskMode::Mask {
        return Err(MaskError::Spec("apply_token_mask needs mode = mask".into()));
    }
    let views = f
        .views()
        .iter()
        .zip(mask_indices(spec))
        .map(|(m, rows)| {
            let mut out = m.clone();
            for r in rows {
                out.row_mut(r).fill(0.0);
            }
            out
        })
        .collect();
    Ok(f.replace_views(views)?)
}

/// Replaces every value by an independent standard-normal draw.
pub fn blind_input(f: &ViewFeatureSet, seed: u64) -> ViewFeatureSet {
    let views = f
        .views()
        .iter()
        .enumerate()
        .map(|(v, m)| {
            let mut rng = stream(seed, &format!("blind/view{v}"));
            let data = (0..m.rows() * m.cols()).map(|_| StandardNormal.sample(&mut rng)).collect();
            Matrix::from_parts(m.rows(), m.cols(), data)
        })
        .collect();
    f.replace_views(views).expect("shapes unchanged")
}
