use serde_json::Value;

use super::{ObjectRisks, QaPair, RiskAssessmentDoc, RiskEntry, RiskQaError};
use crate::driving::{RiskCategory, RiskLevel};

fn strip_code_fence(text: &str) -> &str {
    let Some(start) = text.find("```") else {
        return text;
    };
    // Skip the info string ("json") on the opening fence line.
    let body = &text[start + 3..];
    let body = body.find('\n').map_or(body, |nl| &body[nl + 1..]);
    body.find("```").map_or(body, |end| &body[..end])
}

/// Undoes hard line wrapping inside string literals: a line break plus the
/// indentation around it becomes one space, and a word hyphenated across
/// the break is joined back together. Text outside strings is untouched.
fn unwrap_string_breaks(json: &str) -> String {
    let mut out = String::with_capacity(json.len());
    let mut chars = json.chars().peekable();
    let (mut in_string, mut escaped) = (false, false);
    while let Some(c) = chars.next() {
        if !in_string {
            in_string = c == '"';
            out.push(c);
            continue;
        }
        if escaped {
            escaped = false;
            out.push(c);
            continue;
        }
        match c {
            '\\' => {
                escaped = true;
                out.push(c);
            }
            '"' => {
                in_string = false;
                out.push(c);
            }
            '\r' | '\n' => {
                while out.ends_with([' ', '\t']) {
                    out.pop();
                }
                while chars.peek().is_some_and(|c| c.is_whitespace()) {
                    chars.next();
                }
                let hyphenated = out.ends_with('-')
                    && out[..out.len() - 1].chars().next_back().is_some_and(char::is_alphabetic);
                if hyphenated {
                    out.pop();
                } else {
                    out.push(' ');
                }
            }
            '\t' => out.push(' '),
            _ => out.push(c),
        }
    }
    out
}

/// Finds the outermost `open … close` span, tolerating code fences, chatter
/// around the JSON and hard-wrapped strings.
fn extract_json(text: &str, open: char, close: char) -> Result<Value, RiskQaError> {
    let body = strip_code_fence(text);
    let (Some(start), Some(end)) = (body.find(open), body.rfind(close)) else {
        return Err(RiskQaError::NoJson(format!("no {open}…{close} block in response")));
    };
    if end < start {
        return Err(RiskQaError::NoJson(format!("no {open}…{close} block in response")));
    }
    let span = &body[start..=end];
    serde_json::from_str(span)
        .or_else(|_| serde_json::from_str(&unwrap_string_breaks(span)))
        .map_err(|e| RiskQaError::Json(e.to_string()))
}

fn invalid(path: String, message: impl Into<String>) -> RiskQaError {
    RiskQaError::Validation {
        path,
        message: message.into(),
    }
}

fn key_path(parent: &str, key: &str) -> String {
    format!("{parent}[{}]", serde_json::to_string(key).unwrap())
}

fn field<'a>(map: &'a serde_json::Map<String, Value>, name: &str) -> Option<&'a Value> {
    map.get(name).or_else(|| map.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v))
}

/// Validates a step-one answer. Status None entries are discarded and so are
/// objects left with no risk.
pub fn parse_risk_response(text: &str) -> Result<RiskAssessmentDoc, RiskQaError> {
    let root = extract_json(text, '{', '}')?;
    let Value::Object(objects) = root else {
        return Err(invalid("$".into(), "expected an object keyed by object phrase"));
    };
    let mut doc = RiskAssessmentDoc::default();
    for (object, risks) in &objects {
        let opath = key_path("$", object);
        if object.trim().is_empty() {
            return Err(invalid(opath, "empty object phrase"));
        }
        let Value::Object(risks) = risks else {
            return Err(invalid(opath, "expected an object keyed by risk type"));
        };
        let mut entries: Vec<RiskEntry> = Vec::new();
        for (kind, entry) in risks {
            let rpath = key_path(&opath, kind);
            let category = RiskCategory::from_label(kind).ok_or_else(|| invalid(rpath.clone(), "unknown risk type"))?;
            if entries.iter().any(|e| e.category == category) {
                return Err(invalid(rpath, "risk type repeated"));
            }
            let Value::Object(entry) = entry else {
                return Err(invalid(rpath, "expected {\"Status\", \"Reason\"}"));
            };
            let status = field(entry, "Status")
                .and_then(Value::as_str)
                .ok_or_else(|| invalid(format!("{rpath}.Status"), "missing or not a string"))?;
            if status.trim().eq_ignore_ascii_case("none") {
                continue;
            }
            let level: RiskLevel = status
                .parse()
                .map_err(|_| invalid(format!("{rpath}.Status"), format!("'{status}' is not High/Medium/Low/None")))?;
            let reason = field(entry, "Reason")
                .and_then(Value::as_str)
                .filter(|r| !r.trim().is_empty())
                .ok_or_else(|| invalid(format!("{rpath}.Reason"), "missing or empty"))?;
            entries.push(RiskEntry {
                category,
                level,
                reason: reason.to_string(),
            });
        }
        if !entries.is_empty() {
            doc.objects.push(ObjectRisks {
                object: object.clone(),
                risks: entries,
            });
        }
    }
    Ok(doc)
}

/// Validates a step-two answer into uncategorised pairs.
pub fn parse_qa_response(text: &str) -> Result<Vec<QaPair>, RiskQaError> {
    let root = extract_json(text, '[', ']')?;
    let Value::Array(items) = root else {
        return Err(invalid("$".into(), "expected an array of question/answer objects"));
    };
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let Value::Object(map) = item else {
                return Err(invalid(format!("$[{i}]"), "expected an object"));
            };
            let get = |name: &str| {
                field(map, name)
                    .and_then(Value::as_str)
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .ok_or_else(|| invalid(format!("$[{i}].{name}"), "missing or empty"))
            };
            Ok(QaPair {
                question: get("question")?,
                answer: get("answer")?,
                qa_category: None,
                scene_id: String::new(),
                step: String::new(),
            })
        })
        .collect()
}
