//! Driving-specific evaluation: grounding mAP on the 0–999 box grid,
//! exist-gated risk-assessment accuracies, and open-loop planning metrics
//! (L2 displacement and collision rate).

mod boxes;
mod map;
mod ora;
mod planning;

pub use boxes::{iou, NormalizedBox, GRID_MAX};
pub use map::{
    greedy_matches, grounding_map, risk_grounding_map, ApInterpolation, Detection, GroundTruthBox, ImageDetections,
    ImageGroundTruth, MapConfig, MatchOutcome, RISK_TARGET_LABEL,
};
pub use ora::{ora_score, GatingMode, OraReport, OraSample, RiskCategory, RiskLevel};
pub use planning::{
    collision_rate, l2_corpus, l2_error, AgentBox, CollisionSample, EgoDims, HorizonReport, L2Mode,
    OrientedRect, TrajectoryPlan, HORIZON_STEPS, WAYPOINT_COUNT, WAYPOINT_INTERVAL_S,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("id mismatch: {0}")]
    IdMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no ground truth to evaluate against")]
    NoGroundTruth,
    #[error("sample {sample}: expected {expected} agent timesteps, got {actual}")]
    MisalignedTimesteps { sample: usize, expected: usize, actual: usize },
    #[error("invalid sample: {0}")]
    InvalidSample(String),
}
