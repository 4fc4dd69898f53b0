//! Instruction-guided interactor.
//!
//! Each visual source (every camera view, and the BEV map) is scored against
//! the instruction embeddings by cosine similarity, the top-k tokens are kept,
//! and the kept tokens query the source's full token set through
//! cross-attention. The per-source outputs are concatenated, views first in
//! view order, then BEV. The output length is fixed by the budget
//! `Σ min(k_img, N_view) + min(k_bev, N_bev)` regardless of token values.

mod budget;
mod fuse;
mod select;
mod toy;
mod types;

pub use budget::{token_budget, TokenBudget};
pub use fuse::{fuse, interact, project_features, ViewAttention};
pub use select::{score_tokens, select_topk};
pub use toy::toy_pipeline;
pub use types::{
    BevFeatureMap, FusedTokenSequence, InstructionEmbedding, Reduction, SelectionConfig, SelectionResult,
    TokenSource, ToyDecoderOutput, ViewFeatureSet, DEFAULT_K_BEV, DEFAULT_K_IMG,
};

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum InteractorError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("{source_label}: {inner}")]
    Source {
        source_label: String,
        #[source]
        inner: Box<InteractorError>,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl InteractorError {
    pub(crate) fn labelled(self, label: &str) -> Self {
        InteractorError::Source {
            source_label: label.to_string(),
            inner: Box::new(self),
        }
    }
}
