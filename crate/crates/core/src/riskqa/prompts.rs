use std::sync::LazyLock;

use regex::Regex;

use super::{RiskAssessmentDoc, SceneObject};
use crate::CameraView;

const RISK_INSTRUCTION_HEAD: &str = "and please provide a risk assessment of the given object to ego vehicle. \
The driving risk categories include: 1. View obstruction. 2. Collision possibility. 3. Traffic rule violations. \
4. Potential risk. You are now a driver, and from the perspective of driving safety, you need to conduct a driving \
risk analysis.Please consider the state of the target when analyzing, e.g. Whether the vehicle is stationary, \
whether pedestrians are crossing the road, whether it is in the same lane as ego vehicle, etc. \
The current scene contains the following objects: ";

const RISK_INSTRUCTION_TAIL: &str = ". Choose the object you believe poses a risk and provide your reasons. \
If all risks of object are None, ignore this object! If some risk is None, do not output all context relate to \
this risk! Answer in the following format without providing additional information:";

const RISK_FORMAT: &[&str] = &[
    "{",
    "    \"[obj]\": {",
    "        \"View obstruction\": {",
    "            \"Status\": \"[High/Medium/Low/None]\", ",
    "            \"Reason\": \"[Reason]\"",
    "        },",
    "        \"Collision possibility\": {",
    "            \"Status\": \"[High/Medium/Low/None]\", ",
    "            \"Reason\": \"[Reason]\"",
    "        }, ",
    "        ...",
    "        }, ",
    "    \"[obj]\": {",
    "        ...",
    "    }, ",
    "    ...",
    "} ",
];

const QA_INSTRUCTION_HEAD: &str = "This is a description of object-level traffic risks: ";

const QA_INSTRUCTION_TAIL: &str = " Please generate multiple Q&A pairs about traffic risks based on this \
information and output them in JSON format as follows:";

const QA_FORMAT: &[&str] = &[
    " [",
    "     {",
    "        \"question\": [question1], ",
    "        \"answer\": [answer1]},",
    "     {",
    "        \"question\": [question2], ",
    "        \"answer\": [answer2]",
    "     },",
    "     ...",
    " ]",
];

/// Appended as a follow-up user turn when a response fails validation.
pub const REPAIR_INSTRUCTION: &str = "Your previous answer could not be parsed as the requested JSON ({error}). \
Answer again with only the JSON in the requested format and no other text.";

/// Step-one prompt. The camera named is the first object's view.
pub fn build_risk_prompt(objects: &[SceneObject]) -> String {
    let view = objects.first().map_or(CameraView::Front, |o| o.view);
    let list: Vec<String> = objects.iter().map(SceneObject::phrase).collect();
    format!(
        "The image is from the {} view camera of ego vehicle, {RISK_INSTRUCTION_HEAD}[{}]{RISK_INSTRUCTION_TAIL}\n{}",
        view.phrase(),
        list.join("; "),
        RISK_FORMAT.join("\n")
    )
}

static OBJECT_PHRASE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^the (.+?) located \d+ meters\b").unwrap());

/// Short subject for an object key: the category out of a rendered phrase,
/// otherwise the key itself.
pub fn object_subject(key: &str) -> &str {
    OBJECT_PHRASE
        .captures(key)
        .and_then(|c| c.get(1))
        .map_or(key, |m| m.as_str())
}

/// Lower-cases the first letter of a reason so it reads on after "due to",
/// unless it starts an acronym.
fn reason_clause(reason: &str) -> String {
    let reason = reason.trim();
    let mut chars = reason.chars();
    let mut out = match (chars.next(), chars.clone().next()) {
        (Some(first), second) if !second.is_some_and(char::is_uppercase) => {
            first.to_lowercase().chain(chars).collect::<String>()
        }
        _ => reason.to_string(),
    };
    if !out.ends_with(['.', '!', '?']) {
        out.push('.');
    }
    out
}

/// Step-two prompt: every stored risk as one numbered sentence.
pub fn build_qa_prompt(doc: &RiskAssessmentDoc) -> String {
    let mut lines = Vec::new();
    for o in &doc.objects {
        for r in &o.risks {
            lines.push(format!(
                "{}. {} causes {} {} risk due to {}",
                lines.len() + 1,
                object_subject(&o.object),
                r.level.as_str(),
                r.category.label().to_lowercase(),
                reason_clause(&r.reason)
            ));
        }
    }
    format!("{QA_INSTRUCTION_HEAD}{}{QA_INSTRUCTION_TAIL}\n{}", lines.join(" "), QA_FORMAT.join("\n"))
}
