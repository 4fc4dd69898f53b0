//! Dataset refinement: one tag grammar for every source, boxes on the 0–999
//! grid, integer-only numbers, a fixed 6-waypoint trajectory and a
//! text-encoded ego status, emitted as LLaVA-style conversation records.

mod ego;
mod filter;
mod pipeline;
mod quantize;
mod record;
mod tags;
mod trajectory;

pub use ego::{encode_ego_status, DrivingCommand, EgoStatus, EGO_STATUS_PREFIX};
pub use filter::{box_violation, filter_invalid_boxes, BoxViolation, RefineReport, DROP_GROUNDING_WITHOUT_BOXES};
pub use pipeline::{
    camera_from_alias, canonicalize_camera_tags, integerize_decimals, refine_jsonl, RefineConfig, RefineOutput,
};
pub use quantize::{normalize_box, quantize_decimal};
pub use record::{
    classify_answer_length, AnswerClass, Role, SourceDataset, Turn, UnifiedRecord, DEFAULT_SHORT_THRESHOLD,
};
pub use tags::{parse_tags, serialize_tags, BoxSpan, Segment, TaggedText};
pub use trajectory::unify_trajectory;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RefineError {
    #[error("tag parse error at byte {offset}: {message}")]
    TagParse { offset: usize, message: String },
    #[error("unknown camera '{0}'")]
    UnknownCamera(String),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("{value} x {unit_scale} does not fit in a 64-bit integer")]
    Overflow { value: f64, unit_scale: f64 },
    #[error("trajectory does not cover horizons {}", fmt_horizons(.missing))]
    Coverage { missing: Vec<f64> },
    #[error("invalid trajectory: {0}")]
    Trajectory(String),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
}

fn fmt_horizons(h: &[f64]) -> String {
    h.iter().map(|t| format!("{t:.1} s")).collect::<Vec<_>>().join(", ")
}
