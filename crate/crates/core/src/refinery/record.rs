use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EgoStatus, RefineError, TaggedText};
use crate::driving::TrajectoryPlan;
use crate::CameraView;

pub const DEFAULT_SHORT_THRESHOLD: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "human", alias = "user")]
    Human,
    #[serde(rename = "gpt", alias = "assistant")]
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    #[serde(rename = "from")]
    pub role: Role,
    pub value: TaggedText,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceDataset {
    NuscenesQa,
    NuscenesMqa,
    Omnidrive,
    Nuinstruct,
    Ora,
}

impl SourceDataset {
    pub const ALL: [SourceDataset; 5] = [
        SourceDataset::NuscenesQa,
        SourceDataset::NuscenesMqa,
        SourceDataset::Omnidrive,
        SourceDataset::Nuinstruct,
        SourceDataset::Ora,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceDataset::NuscenesQa => "nuscenes-qa",
            SourceDataset::NuscenesMqa => "nuscenes-mqa",
            SourceDataset::Omnidrive => "omnidrive",
            SourceDataset::Nuinstruct => "nuinstruct",
            SourceDataset::Ora => "ora",
        }
    }
}

impl fmt::Display for SourceDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceDataset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| format!("unknown source dataset '{s}'"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerClass {
    Short,
    Long,
}

/// Short iff the answer has at most `threshold` tokens (tags count as one).
pub fn classify_answer_length(answer: &TaggedText, threshold: usize) -> AnswerClass {
    if answer.token_count() <= threshold {
        AnswerClass::Short
    } else {
        AnswerClass::Long
    }
}

/// One conversation sample in LLaVA style.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnifiedRecord {
    pub id: String,
    #[serde(default)]
    pub images: BTreeMap<CameraView, String>,
    pub conversations: Vec<Turn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectoryPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ego_status: Option<EgoStatus>,
    pub source_dataset: SourceDataset,
    pub answer_class: AnswerClass,
}

impl UnifiedRecord {
    /// Turns must alternate human, assistant, human, … and not be empty.
    pub fn validate(&self) -> Result<(), RefineError> {
        if self.conversations.is_empty() {
            return Err(RefineError::InvalidRecord(format!("'{}': empty conversation", self.id)));
        }
        for (i, t) in self.conversations.iter().enumerate() {
            let expected = if i % 2 == 0 { Role::Human } else { Role::Assistant };
            if t.role != expected {
                return Err(RefineError::InvalidRecord(format!(
                    "'{}': turn {i} should be {expected:?}, found {:?}",
                    self.id, t.role
                )));
            }
        }
        Ok(())
    }

    pub fn turns(&self, role: Role) -> impl Iterator<Item = &Turn> {
        self.conversations.iter().filter(move |t| t.role == role)
    }

    /// Long if any assistant turn is long.
    pub fn classify(&self, threshold: usize) -> AnswerClass {
        self.turns(Role::Assistant)
            .map(|t| classify_answer_length(&t.value, threshold))
            .max()
            .unwrap_or(AnswerClass::Short)
    }
}
