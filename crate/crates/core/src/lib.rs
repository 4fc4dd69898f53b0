//! Instruction-guided visual token selection and cross-attention pre-fusion,
//! plus the dataset and evaluation tooling around it: tag-grammar refinement
//! of driving QA corpora, two-step risk QA generation against a chat model,
//! token-masking experiments, and caption/grounding/planning/risk metrics.

pub mod camera;
pub mod driving;
pub mod interactor;
pub mod mask;
pub mod metrics;
pub mod numerics;
pub mod refinery;
pub mod riskqa;

pub use camera::CameraView;
pub use driving::NormalizedBox;
pub use numerics::{Matrix, NumericsError};
