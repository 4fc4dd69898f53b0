use std::fmt;

use serde::{Deserialize, Serialize};

use crate::driving::{NormalizedBox, RiskCategory, RiskLevel};
use crate::CameraView;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bearing {
    Ahead,
    AheadLeft,
    AheadRight,
    Left,
    Right,
    Behind,
    BehindLeft,
    BehindRight,
}

impl Bearing {
    pub fn phrase(self) -> &'static str {
        match self {
            Bearing::Ahead => "ahead",
            Bearing::AheadLeft => "ahead to the left",
            Bearing::AheadRight => "ahead to the right",
            Bearing::Left => "to the left",
            Bearing::Right => "to the right",
            Bearing::Behind => "behind",
            Bearing::BehindLeft => "behind to the left",
            Bearing::BehindRight => "behind to the right",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub category: String,
    pub bearing: Bearing,
    /// Whole meters from the ego vehicle.
    pub distance: u32,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<NormalizedBox>,
    pub view: CameraView,
}

impl SceneObject {
    /// The phrase used for this object in prompts and model answers.
    pub fn phrase(&self) -> String {
        format!("the {} located {} meters {}", self.category, self.distance, self.bearing.phrase())
    }
}

/// Objects visible in one camera image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub id: String,
    pub objects: Vec<SceneObject>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskEntry {
    pub category: RiskCategory,
    pub level: RiskLevel,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectRisks {
    pub object: String,
    pub risks: Vec<RiskEntry>,
}

impl ObjectRisks {
    pub fn max_level(&self) -> Option<RiskLevel> {
        self.risks.iter().map(|r| r.level).max()
    }
}

/// Per-object risk assessment, in response order. Objects without any
/// risk and risks with status None are never stored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RiskAssessmentDoc {
    pub objects: Vec<ObjectRisks>,
}

impl RiskAssessmentDoc {
    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn risk_count(&self) -> usize {
        self.objects.iter().map(|o| o.risks.len()).sum()
    }

    /// The JSON shape the extraction prompt asks the model for.
    pub fn to_response_json(&self) -> serde_json::Value {
        let mut root = serde_json::Map::new();
        for o in &self.objects {
            let mut risks = serde_json::Map::new();
            for r in &o.risks {
                risks.insert(
                    r.category.label().to_string(),
                    serde_json::json!({ "Status": status_label(r.level), "Reason": r.reason }),
                );
            }
            root.insert(o.object.clone(), serde_json::Value::Object(risks));
        }
        serde_json::Value::Object(root)
    }
}

pub(crate) fn status_label(level: RiskLevel) -> &'static str {
    match level {
        RiskLevel::Low => "Low",
        RiskLevel::Medium => "Medium",
        RiskLevel::High => "High",
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QaCategory {
    Exist,
    Level,
    Category,
    Object,
    Reason,
    Grounding,
}

impl QaCategory {
    pub const ALL: [QaCategory; 6] = [
        QaCategory::Exist,
        QaCategory::Level,
        QaCategory::Category,
        QaCategory::Object,
        QaCategory::Reason,
        QaCategory::Grounding,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QaCategory::Exist => "exist",
            QaCategory::Level => "level",
            QaCategory::Category => "category",
            QaCategory::Object => "object",
            QaCategory::Reason => "reason",
            QaCategory::Grounding => "grounding",
        }
    }
}

impl fmt::Display for QaCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaPair {
    pub question: String,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qa_category: Option<QaCategory>,
    pub scene_id: String,
    /// Which generation step produced the pair.
    pub step: String,
}
