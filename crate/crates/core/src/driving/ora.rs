use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use super::{EvalError, NormalizedBox};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskLevel {
    Low,
    Medium,
    High,
}

impl RiskLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskLevel::Low => "low",
            RiskLevel::Medium => "medium",
            RiskLevel::High => "high",
        }
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RiskLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(RiskLevel::Low),
            "medium" => Ok(RiskLevel::Medium),
            "high" => Ok(RiskLevel::High),
            other => Err(format!("unknown risk level '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskCategory {
    ViewObstruction,
    CollisionPossibility,
    TrafficRuleViolation,
    PotentialRisk,
}

impl RiskCategory {
    pub const ALL: [RiskCategory; 4] = [
        RiskCategory::ViewObstruction,
        RiskCategory::CollisionPossibility,
        RiskCategory::TrafficRuleViolation,
        RiskCategory::PotentialRisk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RiskCategory::ViewObstruction => "view_obstruction",
            RiskCategory::CollisionPossibility => "collision_possibility",
            RiskCategory::TrafficRuleViolation => "traffic_rule_violation",
            RiskCategory::PotentialRisk => "potential_risk",
        }
    }

    /// Heading used in generation prompts and model responses.
    pub fn label(self) -> &'static str {
        match self {
            RiskCategory::ViewObstruction => "View obstruction",
            RiskCategory::CollisionPossibility => "Collision possibility",
            RiskCategory::TrafficRuleViolation => "Traffic rule violations",
            RiskCategory::PotentialRisk => "Potential risk",
        }
    }

    /// Lenient lookup: accepts the snake-case id, the response heading, and
    /// the singular "violation" spelling, in any case.
    pub fn from_label(s: &str) -> Option<Self> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c == '_' || c == '-' { ' ' } else { c })
            .collect();
        match key.split_whitespace().collect::<Vec<_>>().join(" ").as_str() {
            "view obstruction" => Some(RiskCategory::ViewObstruction),
            "collision possibility" => Some(RiskCategory::CollisionPossibility),
            "traffic rule violation" | "traffic rule violations" => Some(RiskCategory::TrafficRuleViolation),
            "potential risk" => Some(RiskCategory::PotentialRisk),
            _ => None,
        }
    }
}

impl fmt::Display for RiskCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OraSample {
    pub id: String,
    pub exist: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<RiskLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<RiskCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grounding: Option<NormalizedBox>,
}

impl OraSample {
    pub fn absent(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            exist: false,
            level: None,
            category: None,
            object: None,
            reason: None,
            grounding: None,
        }
    }

    pub fn present(
        id: impl Into<String>,
        level: RiskLevel,
        category: RiskCategory,
        object: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            exist: true,
            level: Some(level),
            category: Some(category),
            object: Some(object.into()),
            reason: None,
            grounding: None,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if !self.exist && (self.level.is_some() || self.category.is_some() || self.object.is_some()) {
            return Err(EvalError::InvalidSample(format!(
                "'{}' has risk attributes but exist = false",
                self.id
            )));
        }
        Ok(())
    }
}

/// Which samples the level / category / object accuracies are computed over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GatingMode {
    /// Exist predicted correctly and ground truth says a risk exists.
    #[default]
    CorrectPresent,
    /// Every sample whose ground truth says a risk exists, regardless of the
    /// exist prediction. Wrong exist predictions then count as misses.
    GroundTruthPresent,
}

fn na_or_value<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("N/A"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OraReport {
    pub exist_acc: f64,
    /// `None` when the gated subset is empty; serialized as "N/A".
    #[serde(serialize_with = "na_or_value")]
    pub level_acc: Option<f64>,
    #[serde(serialize_with = "na_or_value")]
    pub cate_acc: Option<f64>,
    #[serde(serialize_with = "na_or_value")]
    pub object_acc: Option<f64>,
    pub total: usize,
    pub gated: usize,
    pub gating: GatingMode,
}

impl OraReport {
    pub const CSV_HEADER: &'static str = "exist,level,cate,object";

    pub fn to_csv_row(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "N/A".to_string(), |x| format!("{x:.2}"));
        format!(
            "{},{},{},{}",
            cell(Some(self.exist_acc)),
            cell(self.level_acc),
            cell(self.cate_acc),
            cell(self.object_acc)
        )
    }
}

/// Case, surrounding punctuation, whitespace runs and a leading article are
/// ignored when comparing object names.
fn normalize_object(s: &str) -> String {
    let lowered = s.to_lowercase();
    let trimmed = lowered.trim_matches(|c: char| c.is_whitespace() || c.is_ascii_punctuation());
    let mut words: Vec<&str> = trimmed.split_whitespace().collect();
    if words.len() > 1 && matches!(words[0], "the" | "a" | "an") {
        words.remove(0);
    }
    words.join(" ")
}

pub fn ora_score(preds: &[OraSample], gts: &[OraSample], mode: GatingMode) -> Result<OraReport, EvalError> {
    if gts.is_empty() {
        return Err(EvalError::NoGroundTruth);
    }
    let mut by_id: HashMap<&str, &OraSample> = HashMap::with_capacity(preds.len());
    for p in preds {
        p.validate()?;
        if by_id.insert(&p.id, p).is_some() {
            return Err(EvalError::IdMismatch(format!("duplicate prediction id '{}'", p.id)));
        }
    }
    if preds.len() != gts.len() {
        return Err(EvalError::IdMismatch(format!(
            "{} predictions for {} ground-truth samples",
            preds.len(),
            gts.len()
        )));
    }
    let mut exist_ok = 0usize;
    let (mut gated, mut level_ok, mut cate_ok, mut object_ok) = (0usize, 0usize, 0usize, 0usize);
    for g in gts {
        g.validate()?;
        let p = by_id
            .get(g.id.as_str())
            .ok_or_else(|| EvalError::IdMismatch(format!("no prediction for '{}'", g.id)))?;
        let exist_correct = p.exist == g.exist;
        exist_ok += usize::from(exist_correct);
        let in_gate = g.exist
            && match mode {
                GatingMode::CorrectPresent => exist_correct,
                GatingMode::GroundTruthPresent => true,
            };
        if !in_gate {
            continue;
        }
        gated += 1;
        if !p.exist {
            continue;
        }
        level_ok += usize::from(p.level.is_some() && p.level == g.level);
        cate_ok += usize::from(p.category.is_some() && p.category == g.category);
        object_ok += usize::from(match (&p.object, &g.object) {
            (Some(a), Some(b)) => normalize_object(a) == normalize_object(b),
            _ => false,
        });
    }
    let pct = |n: usize| (gated > 0).then(|| 100.0 * n as f64 / gated as f64);
    Ok(OraReport {
        exist_acc: 100.0 * exist_ok as f64 / gts.len() as f64,
        level_acc: pct(level_ok),
        cate_acc: pct(cate_ok),
        object_acc: pct(object_ok),
        total: gts.len(),
        gated,
        gating: mode,
    })
}
