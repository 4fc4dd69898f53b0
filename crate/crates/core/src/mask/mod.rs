//! Token-redundancy ablation: zero a seeded share of caller-chosen token
//! rows (or replace the whole input with noise) and re-run a downstream
//! evaluation for each setting.

mod apply;
mod experiment;
pub mod rng;

pub use apply::{apply_token_mask, blind_input, mask_indices, MaskMode, MaskSpec};
pub use experiment::{
    features_digest, run_mask_experiment, MaskExperimentConfig, MaskMetrics, MaskRunReport, MaskRunRow, MaskStage,
    DEFAULT_MASK_RATES, MASK_CSV_HEADER,
};

use thiserror::Error;

use crate::interactor::InteractorError;

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("invalid mask spec: {0}")]
    Spec(String),
    #[error("view {view}: candidate index {index} out of range for {tokens} tokens")]
    IndexOutOfRange { view: usize, index: usize, tokens: usize },
    #[error(transparent)]
    Interactor(#[from] InteractorError),
}
