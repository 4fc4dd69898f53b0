use std::path::Path;
use std::time::Duration;

use fusekit_core::driving::{ApInterpolation, EgoDims, GatingMode, L2Mode, MapConfig};
use fusekit_core::interactor::{Reduction, SelectionConfig, DEFAULT_K_BEV, DEFAULT_K_IMG};
use fusekit_core::refinery::DEFAULT_SHORT_THRESHOLD;
use fusekit_core::riskqa::PipelineConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Whether percentage-valued scores are reported on 0–100 or 0–1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricScale {
    #[default]
    Percent,
    Fraction,
}

impl MetricScale {
    pub fn apply(self, percent: f64) -> f64 {
        match self {
            MetricScale::Percent => percent,
            MetricScale::Fraction => percent / 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EgoSection {
    pub length: f64,
    pub width: f64,
}

impl Default for EgoSection {
    fn default() -> Self {
        let d = EgoDims::default();
        Self { length: d.length, width: d.width }
    }
}

/// LLM client settings. The API key is only ever read from the environment
/// so it never lands in a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClientSection {
    /// Overrides `FK_API_ENDPOINT`.
    pub endpoint: Option<String>,
    pub timeout_s: u64,
    pub risk_model: String,
    pub qa_model: String,
    pub temperature: f64,
    pub seed: Option<u64>,
    pub retries: u32,
    pub max_in_flight: usize,
}

impl Default for ClientSection {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            endpoint: None,
            timeout_s: 60,
            risk_model: p.risk_model,
            qa_model: p.qa_model,
            temperature: p.temperature,
            seed: p.seed,
            retries: p.retries,
            max_in_flight: p.max_in_flight,
        }
    }
}

impl ClientSection {
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            risk_model: self.risk_model.clone(),
            qa_model: self.qa_model.clone(),
            temperature: self.temperature,
            seed: self.seed,
            retries: self.retries,
            max_in_flight: self.max_in_flight,
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_s)
    }
}

/// Effective settings for every subcommand. Loaded from an optional JSON
/// file, then overridden by flags; echoed into each report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub k_img: usize,
    pub k_bev: usize,
    pub reduction: Reduction,
    pub attn_heads: usize,
    pub attn_layers: usize,
    pub short_threshold: usize,
    pub iou_thresholds: Vec<f64>,
    pub ap_interpolation: ApInterpolation,
    pub l2_mode: L2Mode,
    pub ora_gating: GatingMode,
    pub ego: EgoSection,
    pub metric_scale: MetricScale,
    pub client: ClientSection,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        let map = MapConfig::default();
        Self {
            k_img: DEFAULT_K_IMG,
            k_bev: DEFAULT_K_BEV,
            reduction: Reduction::default(),
            attn_heads: 4,
            attn_layers: 1,
            short_threshold: DEFAULT_SHORT_THRESHOLD,
            iou_thresholds: map.iou_thresholds,
            ap_interpolation: map.interpolation,
            l2_mode: L2Mode::default(),
            ora_gating: GatingMode::default(),
            ego: EgoSection::default(),
            metric_scale: MetricScale::default(),
            client: ClientSection::default(),
            seed: 0,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }

    pub fn selection(&self) -> SelectionConfig {
        SelectionConfig {
            k_img: self.k_img,
            k_bev: self.k_bev,
            reduction: self.reduction,
        }
    }

    pub fn map(&self) -> MapConfig {
        MapConfig {
            iou_thresholds: self.iou_thresholds.clone(),
            interpolation: self.ap_interpolation,
        }
    }

    pub fn ego_dims(&self) -> EgoDims {
        EgoDims {
            length: self.ego.length,
            width: self.ego.width,
        }
    }
}
