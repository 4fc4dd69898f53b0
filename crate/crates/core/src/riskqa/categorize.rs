use std::sync::LazyLock;

use regex::Regex;

use super::prompts::object_subject;
use super::{QaCategory, QaPair, RiskAssessmentDoc};

static GROUNDING: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"<\s*box\s*>|\b(where|locate|localize|location|bounding box|coordinates)\b").unwrap()
});
static YES_NO: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(is|are|does|do|did|can|could|will|would|should|might|may|has|have)\b").unwrap()
});
static RISK_WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b(risks?|risky|danger\w*|hazard\w*|threat\w*|safe\w*)\b").unwrap());
static LEVEL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(low|medium|high|highest|level|severity|severe|serious)\b").unwrap());
static CATEGORY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(view obstruction|collision possibility|traffic rule violations?|potential risk|type of|kind of|category|categories)\b")
        .unwrap()
});
static OBJECT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(which|what)\s+(object|vehicle|target|road user|agent|entity|participant)s?\b|\bwhat is causing\b").unwrap()
});

/// Assigns one of the six question types from surface cues in the question,
/// testing grounding, exist, level, category, object in that order and
/// falling back to reason. "Which car" style questions count as object
/// questions when the noun is an object class from `doc`.
pub fn categorize_qa(pair: &QaPair, doc: &RiskAssessmentDoc) -> QaPair {
    let q = pair.question.trim().to_lowercase();
    let names_object_class = || {
        doc.objects.iter().any(|o| {
            let subject = object_subject(&o.object).to_lowercase();
            q.contains(&format!("which {subject}")) || q.contains(&format!("what {subject}"))
        })
    };
    let category = if GROUNDING.is_match(&q) {
        QaCategory::Grounding
    } else if YES_NO.is_match(&q) && RISK_WORD.is_match(&q) {
        QaCategory::Exist
    } else if LEVEL.is_match(&q) {
        QaCategory::Level
    } else if CATEGORY.is_match(&q) {
        QaCategory::Category
    } else if OBJECT.is_match(&q) || names_object_class() {
        QaCategory::Object
    } else {
        QaCategory::Reason
    };
    QaPair {
        qa_category: Some(category),
        ..pair.clone()
    }
}
