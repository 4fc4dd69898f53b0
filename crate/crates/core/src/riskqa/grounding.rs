use serde::{Deserialize, Serialize};

use super::{RiskAssessmentDoc, SceneObject};
use crate::driving::{NormalizedBox, RiskLevel};
use crate::CameraView;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundingTarget {
    pub object: String,
    #[serde(rename = "box")]
    pub bbox: NormalizedBox,
    pub view: CameraView,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundingDerivation {
    pub targets: Vec<GroundingTarget>,
    /// High-risk object phrases with no scene object carrying a box.
    pub unmatched: Vec<String>,
}

/// Boxes of the objects whose highest risk is High. The object phrase must
/// equal a scene object's rendered phrase exactly; the first such object
/// with a box wins.
pub fn derive_grounding_targets(doc: &RiskAssessmentDoc, objects: &[SceneObject]) -> GroundingDerivation {
    let mut out = GroundingDerivation::default();
    for o in doc.objects.iter().filter(|o| o.max_level() == Some(RiskLevel::High)) {
        let hit = objects
            .iter()
            .filter(|s| s.bbox.is_some())
            .find(|s| s.phrase() == o.object);
        match hit {
            Some(s) => out.targets.push(GroundingTarget {
                object: o.object.clone(),
                bbox: s.bbox.expect("filtered on box"),
                view: s.view,
            }),
            None => out.unmatched.push(o.object.clone()),
        }
    }
    out
}
