//! Dense `f64` matrix kernel: products, softmax, the projection MLP,
//! multi-layer cross-attention with analytic backward passes, and a
//! finite-difference gradient oracle.

mod attention;
mod gradcheck;
pub mod io;
mod matrix;
mod mlp;
mod ops;

pub use attention::{
    attention_weights, cross_attention, cross_attention_backward, AttnLayer, AttnLayerGrads, CrossAttnGrads,
    CrossAttnParams, DEFAULT_ATTN_LAYERS,
};
pub use gradcheck::{finite_diff_grad, relative_error, DEFAULT_FD_EPS};
pub use matrix::Matrix;
pub use mlp::{mlp_backward, mlp_forward, MlpGrads, MlpParams};
pub use ops::{cosine, cosine_similarity_matrix, matmul, softmax_rows};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix must have positive dimensions, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("data length {actual} does not match expected {expected}")]
    DataLength { expected: usize, actual: usize },
    #[error("row {row} has {actual} entries, expected {expected}")]
    RaggedRow { row: usize, expected: usize, actual: usize },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("row index {index} out of range for {rows} rows")]
    RowIndex { index: usize, rows: usize },
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("matrix format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
