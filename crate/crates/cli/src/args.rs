use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fusekit_core::driving::{ApInterpolation, GatingMode, L2Mode};
use fusekit_core::interactor::Reduction;
use fusekit_core::mask::MaskStage;
use fusekit_core::refinery::SourceDataset;
use serde::de::DeserializeOwned;

use crate::config::MetricScale;

/// Parses a flag value with the same spelling the JSON config uses.
fn serde_value<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "fusekit", version, about = "Driving-QA dataset tooling, evaluation and token-fusion demos")]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel stages. Outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a source dataset into unified JSONL records.
    Refine(RefineArgs),
    /// Generate risk QA pairs and grounding targets from scene descriptions.
    GenRiskQa(GenArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Run token selection and fusion on matrix inputs.
    InteractorDemo(DemoArgs),
    /// Sky-token masking ablation.
    MaskExp(MaskArgs),
    /// Fused sequence length against the unfused total.
    Budget(BudgetArgs),
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
    /// nuscenes-qa, nuscenes-mqa, omnidrive, nuinstruct or ora.
    #[arg(long, value_parser = serde_value::<SourceDataset>)]
    pub source: SourceDataset,
    /// Answers with at most this many words are short.
    #[arg(long, value_name = "WORDS")]
    pub short_threshold: Option<usize>,
    /// Report path; defaults to `<output>.report.json`.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Scene JSONL: `{"id": ..., "objects": [...]}` per line.
    #[arg(long, value_name = "PATH")]
    pub scenes: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out_pairs: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out_grounding: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub report: PathBuf,
    /// Replay directory of `<request-hash>.txt` responses instead of a live endpoint.
    #[arg(long, value_name = "DIR")]
    pub mock: Option<PathBuf>,
    /// Store live responses here for later replay.
    #[arg(long, value_name = "DIR", conflicts_with = "mock")]
    pub record: Option<PathBuf>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub risk_model: Option<String>,
    #[arg(long)]
    pub qa_model: Option<String>,
    #[arg(long)]
    pub retries: Option<u32>,
    #[arg(long)]
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(subcommand)]
    pub task: EvalTask,
}

#[derive(Debug, Subcommand)]
pub enum EvalTask {
    /// BLEU, ROUGE_L, CIDEr, accuracy and MAE over captions.
    Caption(EvalCommon),
    /// mAP of predicted boxes on the normalized grid.
    Grounding(GroundingArgs),
    /// L2 error and collision rate of planned trajectories.
    Planning(PlanningArgs),
    /// Exist-gated risk assessment accuracy.
    Ora(OraArgs),
}

#[derive(Debug, Args)]
pub struct EvalCommon {
    #[arg(long, value_name = "PATH")]
    pub pred: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub gt: PathBuf,
    /// JSON report.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Optional CSV with a header and one row of scores.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// percent (0–100) or fraction (0–1).
    #[arg(long, value_parser = serde_value::<MetricScale>)]
    pub scale: Option<MetricScale>,
}

#[derive(Debug, Args)]
pub struct GroundingArgs {
    #[command(flatten)]
    pub common: EvalCommon,
    /// Comma-separated IoU thresholds; mAP is averaged over them.
    #[arg(long, value_delimiter = ',')]
    pub iou: Option<Vec<f64>>,
    #[arg(long, value_parser = serde_value::<ApInterpolation>)]
    pub interpolation: Option<ApInterpolation>,
    /// Treat every box as the single risk-target class.
    #[arg(long)]
    pub risk: bool,
}

#[derive(Debug, Args)]
pub struct PlanningArgs {
    #[command(flatten)]
    pub common: EvalCommon,
    /// at-horizon or up-to-horizon.
    #[arg(long, value_parser = serde_value::<L2Mode>)]
    pub l2_mode: Option<L2Mode>,
}

#[derive(Debug, Args)]
pub struct OraArgs {
    #[command(flatten)]
    pub common: EvalCommon,
    /// correct-present or ground-truth-present.
    #[arg(long, value_parser = serde_value::<GatingMode>)]
    pub gating: Option<GatingMode>,
}

/// Interactor parameters shared by the demo and the mask experiment.
#[derive(Debug, Args)]
pub struct InteractorArgs {
    /// Camera view matrices (FKMX), in view order.
    #[arg(long, value_delimiter = ',', value_name = "PATHS", required_unless_present = "synthetic")]
    pub views: Vec<PathBuf>,
    #[arg(long, value_name = "PATH", required_unless_present = "synthetic")]
    pub bev: Option<PathBuf>,
    #[arg(long, value_name = "PATH", required_unless_present = "synthetic")]
    pub instruction: Option<PathBuf>,
    /// Generate seeded inputs: 6 views of 576 tokens, 2,500 BEV tokens, D = 64.
    #[arg(long, conflicts_with_all = ["views", "bev", "instruction"])]
    pub synthetic: bool,
    #[arg(long)]
    pub k_img: Option<usize>,
    #[arg(long)]
    pub k_bev: Option<usize>,
    /// max or mean over instruction tokens.
    #[arg(long, value_parser = serde_value::<Reduction>)]
    pub reduction: Option<Reduction>,
    #[arg(long)]
    pub heads: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[command(flatten)]
    pub interactor: InteractorArgs,
    /// Fused tokens (FKMX).
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// JSON sidecar with budget and provenance; defaults to `<out>.json`.
    #[arg(long, value_name = "PATH")]
    pub sidecar: Option<PathBuf>,
    /// Leave wall-clock timing out of the sidecar so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[command(flatten)]
    pub interactor: InteractorArgs,
    /// Mask rates in percent.
    #[arg(long, value_delimiter = ',', default_value = "0,10,30,50")]
    pub rates: Vec<u32>,
    /// Include the random-input control row.
    #[arg(long, overrides_with = "no_blind")]
    pub blind: bool,
    #[arg(long, overrides_with = "blind")]
    pub no_blind: bool,
    /// JSON array of per-view candidate token indices. Synthetic runs
    /// default to the top third of each view's token grid.
    #[arg(long, value_name = "PATH", required_unless_present = "synthetic")]
    pub candidates: Option<PathBuf>,
    /// pre or post the projection MLP.
    #[arg(long, value_parser = serde_value::<MaskStage>, default_value = "post")]
    pub mask_stage: MaskStage,
    /// CSV table.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// JSON report; defaults to `<out>.json`.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Number of camera views.
    #[arg(long, default_value_t = 6)]
    pub views: usize,
    #[arg(long, default_value_t = 576)]
    pub tokens_per_view: usize,
    /// Explicit per-view token counts; overrides `--views`/`--tokens-per-view`.
    #[arg(long, value_delimiter = ',', value_name = "N,N,...")]
    pub view_tokens: Option<Vec<usize>>,
    #[arg(long, default_value_t = 2500)]
    pub bev_tokens: usize,
    #[arg(long)]
    pub k_img: Option<usize>,
    #[arg(long)]
    pub k_bev: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
