use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::rng::derive_seed;
use super::{apply_token_mask, blind_input, MaskError, MaskMode, MaskSpec};
use crate::interactor::{project_features, ViewFeatureSet};
use crate::numerics::MlpParams;

pub const DEFAULT_MASK_RATES: [u32; 4] = [0, 10, 30, 50];
pub const MASK_CSV_HEADER: &str = "Exp,Mask Rate,MAE,ACC,mAP,BLEU";

/// Where masking happens relative to the projection MLP.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskStage {
    Pre,
    /// On projected tokens, i.e. what the interactor sees.
    #[default]
    Post,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskExperimentConfig {
    pub rates: Vec<u32>,
    pub blind: bool,
    pub seed: u64,
    pub stage: MaskStage,
}

impl Default for MaskExperimentConfig {
    fn default() -> Self {
        Self {
            rates: DEFAULT_MASK_RATES.to_vec(),
            blind: true,
            seed: 0,
            stage: MaskStage::Post,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskMetrics {
    pub mae: f64,
    pub acc: f64,
    pub map: f64,
    pub bleu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskRunRow {
    pub exp: usize,
    pub mode: MaskMode,
    /// `None` for the blind row.
    pub rate: Option<u32>,
    /// SHA-256 of the tokens handed to the downstream evaluation.
    pub input_digest: String,
    pub metrics: Option<MaskMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl MaskRunRow {
    pub fn label(&self) -> String {
        self.rate.map_or_else(|| "blind".to_string(), |r| r.to_string())
    }

    pub fn row_id(&self) -> String {
        self.rate.map_or_else(|| "blind".to_string(), |r| format!("rate-{r}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskRunReport {
    pub rows: Vec<MaskRunRow>,
    pub baseline_digest: String,
}

impl MaskRunReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(MASK_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},", r.exp, r.label());
            match &r.metrics {
                Some(m) => {
                    let _ = writeln!(out, "{:.2},{:.2},{:.2},{:.2}", m.mae, m.acc, m.map, m.bleu);
                }
                None => out.push_str("failed,failed,failed,failed\n"),
            }
        }
        out
    }
}

/// SHA-256 over view shapes and the little-endian bytes of every value.
pub fn features_digest(f: &ViewFeatureSet) -> String {
    let mut h = Sha256::new();
    for m in f.views() {
        h.update((m.rows() as u64).to_le_bytes());
        h.update((m.cols() as u64).to_le_bytes());
        for v in m.data() {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn project(f: &ViewFeatureSet, p: &MlpParams) -> Result<ViewFeatureSet, MaskError> {
    let views = f
        .views()
        .iter()
        .map(|m| project_features(m, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ViewFeatureSet::with_names(views, f.view_names().to_vec())?)
}

/// Runs the blind control (when enabled) then every distinct rate in
/// ascending order, numbering rows from 1. Each row draws from its own seed
/// derived from the run seed and the row id, so row order and parallelism do
/// not affect results. A failing downstream call marks its row failed.
pub fn run_mask_experiment<D>(
    cfg: &MaskExperimentConfig,
    features: &ViewFeatureSet,
    candidates: &[Vec<usize>],
    projection: Option<&MlpParams>,
    downstream: D,
) -> Result<MaskRunReport, MaskError>
where
    D: Fn(&ViewFeatureSet) -> Result<MaskMetrics, String> + Sync,
{
    let mut rates = cfg.rates.clone();
    rates.sort_unstable();
    rates.dedup();
    let mut plan: Vec<Option<u32>> = Vec::new();
    if cfg.blind {
        plan.push(None);
    }
    plan.extend(rates.into_iter().map(Some));

    // Validate once up front so spec errors abort instead of failing rows.
    MaskSpec {
        candidates: candidates.to_vec(),
        rate: plan.iter().flatten().copied().max().unwrap_or(0),
        mode: MaskMode::Mask,
        seed: cfg.seed,
    }
    .validate(features)?;

    let projected = match projection {
        Some(p) if cfg.stage == MaskStage::Post => Some(project(features, p)?),
        _ => None,
    };
    let baseline = projected.as_ref().unwrap_or(features);
    let baseline_input = match (projection, cfg.stage) {
        (Some(p), MaskStage::Pre) => project(features, p)?,
        _ => baseline.clone(),
    };

    let rows = plan
        .par_iter()
        .enumerate()
        .map(|(i, rate)| -> Result<MaskRunRow, MaskError> {
            let row_id = rate.map_or_else(|| "blind".to_string(), |r| format!("rate-{r}"));
            let seed = derive_seed(cfg.seed, &row_id);
            let mut input = match rate {
                None => blind_input(baseline, seed),
                Some(r) => apply_token_mask(
                    baseline,
                    &MaskSpec {
                        candidates: candidates.to_vec(),
                        rate: *r,
                        mode: MaskMode::Mask,
                        seed,
                    },
                )?,
            };
            if let (Some(p), MaskStage::Pre) = (projection, cfg.stage) {
                input = project(&input, p)?;
            }
            let (metrics, error) = match downstream(&input) {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e)),
            };
            Ok(MaskRunRow {
                exp: i + 1,
                mode: if rate.is_some() { MaskMode::Mask } else { MaskMode::Blind },
                rate: *rate,
                input_digest: features_digest(&input),
                metrics,
                error,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MaskRunReport {
        rows,
        baseline_digest: features_digest(&baseline_input),
    })
}
