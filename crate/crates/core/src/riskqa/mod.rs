//! Two-step risk question generation. Step one asks a chat model for a
//! per-object risk assessment of a scene; step two turns that assessment
//! into question/answer pairs, which are then typed and paired with
//! grounding boxes for the high-risk objects.

mod categorize;
mod client;
mod grounding;
mod parse;
mod pipeline;
mod prompts;
mod types;

pub use categorize::categorize_qa;
#[cfg(feature = "http")]
pub use client::HttpChatClient;
pub use client::{
    ChatClient, ChatMessage, ChatRequest, ClientError, FnClient, RecordingClient, ReplayClient, API_KEY_ENV,
    ENDPOINT_ENV,
};
pub use grounding::{derive_grounding_targets, GroundingDerivation, GroundingTarget};
pub use parse::{parse_qa_response, parse_risk_response};
pub use pipeline::{
    run_pipeline, PipelineConfig, PipelineOutput, RunReport, SceneFailure, SceneGroundingTarget, SceneResult,
    STEP_QA, STEP_RISK,
};
pub use prompts::{build_qa_prompt, build_risk_prompt, object_subject, REPAIR_INSTRUCTION};
pub use types::{Bearing, ObjectRisks, QaCategory, QaPair, RiskAssessmentDoc, RiskEntry, Scene, SceneObject};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RiskQaError {
    #[error("invalid input: {0}")]
    EmptyInput(String),
    #[error("no JSON found: {0}")]
    NoJson(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("schema violation at {path}: {message}")]
    Validation { path: String, message: String },
    #[error(transparent)]
    Client(#[from] ClientError),
}
