use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnswerClass, BoxSpan, Role, Segment, SourceDataset, TaggedText, UnifiedRecord};
use crate::driving::GRID_MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxViolation {
    OutOfRange,
    Inverted,
    ZeroArea,
}

impl BoxViolation {
    pub fn as_str(self) -> &'static str {
        match self {
            BoxViolation::OutOfRange => "out_of_range",
            BoxViolation::Inverted => "inverted",
            BoxViolation::ZeroArea => "zero_area",
        }
    }
}

/// First rule the box breaks, checked in the order range, ordering, area.
pub fn box_violation(b: &BoxSpan) -> Option<BoxViolation> {
    if [b.x1, b.y1, b.x2, b.y2].iter().any(|c| !(0..=GRID_MAX).contains(c)) {
        Some(BoxViolation::OutOfRange)
    } else if b.x2 < b.x1 || b.y2 < b.y1 {
        Some(BoxViolation::Inverted)
    } else if b.x1 == b.x2 || b.y1 == b.y2 {
        Some(BoxViolation::ZeroArea)
    } else {
        None
    }
}

/// Reason a whole record was dropped by the box filter.
pub const DROP_GROUNDING_WITHOUT_BOXES: &str = "grounding_without_boxes";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RefineReport {
    pub input: usize,
    pub kept: usize,
    pub dropped: usize,
    pub drop_reasons: BTreeMap<String, usize>,
    pub boxes_dropped: BTreeMap<BoxViolation, usize>,
    pub boxes_normalized: usize,
    pub decimals_converted: usize,
    pub answer_classes: BTreeMap<AnswerClass, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_threshold: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceDataset>,
}

impl RefineReport {
    pub fn record_drop(&mut self, reason: &str) {
        self.dropped += 1;
        *self.drop_reasons.entry(reason.to_string()).or_default() += 1;
    }

    /// Dropped records not caused by the box filter.
    pub fn validation_drops(&self) -> usize {
        self.drop_reasons
            .iter()
            .filter(|(k, _)| k.as_str() != DROP_GROUNDING_WITHOUT_BOXES)
            .map(|(_, v)| v)
            .sum()
    }
}

fn strip_invalid(text: &TaggedText, dropped: &mut BTreeMap<BoxViolation, usize>) -> Option<TaggedText> {
    if text.boxes().all(|b| box_violation(b).is_none()) {
        return None;
    }
    let kept = text.segments().iter().filter(|s| match s {
        Segment::Box(b) => match box_violation(b) {
            Some(v) => {
                *dropped.entry(v).or_default() += 1;
                false
            }
            None => true,
        },
        _ => true,
    });
    Some(TaggedText::from_segments(kept.cloned()))
}

/// Removes boxes that are out of the grid, inverted or zero-area. A record
/// whose assistant turns had boxes and lost all of them is dropped when its
/// question refers to an object, since it can no longer be answered.
/// Records with no invalid box come back untouched.
pub fn filter_invalid_boxes(records: Vec<UnifiedRecord>) -> (Vec<UnifiedRecord>, RefineReport) {
    let mut report = RefineReport {
        input: records.len(),
        ..Default::default()
    };
    let mut out = Vec::with_capacity(records.len());
    for mut rec in records {
        let before = rec.turns(Role::Assistant).map(|t| t.value.boxes().count()).sum::<usize>();
        let mut changed = false;
        for turn in &mut rec.conversations {
            if let Some(t) = strip_invalid(&turn.value, &mut report.boxes_dropped) {
                turn.value = t;
                changed = true;
            }
        }
        if changed {
            let after = rec.turns(Role::Assistant).map(|t| t.value.boxes().count()).sum::<usize>();
            let grounding = rec.turns(Role::Human).any(|t| t.value.has_ref());
            if before > 0 && after == 0 && grounding {
                report.record_drop(DROP_GROUNDING_WITHOUT_BOXES);
                continue;
            }
        }
        out.push(rec);
    }
    report.kept = out.len();
    for r in &out {
        *report.answer_classes.entry(r.answer_class).or_default() += 1;
    }
    (out, report)
}
