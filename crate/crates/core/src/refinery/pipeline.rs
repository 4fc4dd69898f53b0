use std::collections::BTreeMap;
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;
use serde::Deserialize;
use serde_json::Value;

use super::{
    encode_ego_status, filter_invalid_boxes, normalize_box, parse_tags, quantize_decimal, unify_trajectory,
    EgoStatus, RefineError, RefineReport, Role, Segment, SourceDataset, TaggedText, Turn, UnifiedRecord,
    DEFAULT_SHORT_THRESHOLD, EGO_STATUS_PREFIX,
};
use crate::driving::TrajectoryPlan;
use crate::CameraView;

/// Keep at most this many per-record error messages in the report.
const MAX_ERROR_MESSAGES: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefineConfig {
    pub source: SourceDataset,
    pub short_threshold: usize,
}

impl RefineConfig {
    pub fn new(source: SourceDataset) -> Self {
        Self {
            source,
            short_threshold: DEFAULT_SHORT_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOutput {
    pub records: Vec<UnifiedRecord>,
    pub report: RefineReport,
    /// First few "line N: message" diagnostics for dropped input.
    pub errors: Vec<String>,
}

static CAMERA_ALIAS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)<\s*\|?\s*cam(?:era)?_([a-z_]+?)\s*\|?\s*>").unwrap());
static DECIMAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[-+]?\d+\.\d+").unwrap());
static METRIC_UNIT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(\s*)(m/s\^2|m/s²|m/s|m)").unwrap());

/// Resolves a camera name in any of the spellings the sources use
/// ("front_left", "CAM_FRONT_LEFT", "camera_front_left").
pub fn camera_from_alias(name: &str) -> Option<CameraView> {
    let lower = name.trim().to_ascii_lowercase();
    let bare = lower
        .strip_prefix("camera_")
        .or_else(|| lower.strip_prefix("cam_"))
        .unwrap_or(&lower);
    bare.parse().ok()
}

/// Rewrites every camera-tag spelling to the canonical `<|camera_x|>` form.
/// A camera tag naming a view outside the six-camera rig is an error.
pub fn canonicalize_camera_tags(text: &str) -> Result<String, RefineError> {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for c in CAMERA_ALIAS.captures_iter(text) {
        let m = c.get(0).unwrap();
        let view = camera_from_alias(&c[1]).ok_or_else(|| RefineError::UnknownCamera(c[1].to_string()))?;
        out.push_str(&text[last..m.start()]);
        out.push_str("<|camera_");
        out.push_str(view.as_str());
        out.push_str("|>");
        last = m.end();
    }
    out.push_str(&text[last..]);
    Ok(out)
}

/// Replaces decimal numbers in free text by integers. A value followed by a
/// metre unit is converted to centimetres, anything else is rounded.
/// Returns the new text and the number of values converted.
pub fn integerize_decimals(text: &str) -> Result<(String, usize), RefineError> {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    let mut count = 0;
    for m in DECIMAL.find_iter(text) {
        let value: f64 = m.as_str().parse().expect("regex admits only decimals");
        out.push_str(&text[last..m.start()]);
        last = m.end();
        count += 1;
        let tail = &text[m.end()..];
        let unit = METRIC_UNIT.captures(tail).filter(|c| {
            let end = c.get(0).unwrap().end();
            !tail[end..].chars().next().is_some_and(|ch| ch.is_alphanumeric())
        });
        match unit {
            Some(c) => {
                let cm = quantize_decimal(value, 100.0)?;
                let suffix = match &c[2] {
                    "m" => "cm",
                    "m/s" => "cm/s",
                    _ => "cm/s^2",
                };
                out.push_str(&format!("{cm}{}{suffix}", &c[1]));
                last += c.get(0).unwrap().end();
            }
            None => out.push_str(&quantize_decimal(value, 1.0)?.to_string()),
        }
    }
    out.push_str(&text[last..]);
    Ok((out, count))
}

#[derive(Deserialize)]
struct RawTurn {
    #[serde(alias = "role")]
    from: String,
    #[serde(alias = "content")]
    value: String,
}

#[derive(Deserialize)]
struct RawRecord {
    id: Value,
    #[serde(default, alias = "image")]
    images: Value,
    #[serde(alias = "conversation")]
    conversations: Vec<RawTurn>,
    #[serde(default)]
    trajectory: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    trajectory_points: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    ego_status: Option<EgoStatus>,
    #[serde(default)]
    image_size: Option<[u32; 2]>,
}

/// Why an input line was rejected, with a stable reason key for the report.
#[derive(Debug)]
struct Rejection {
    reason: &'static str,
    message: String,
}

impl Rejection {
    fn new(reason: &'static str, message: impl ToString) -> Self {
        Self {
            reason,
            message: message.to_string(),
        }
    }
}

impl From<RefineError> for Rejection {
    fn from(e: RefineError) -> Self {
        let reason = match &e {
            RefineError::TagParse { .. } => "tag_parse",
            RefineError::UnknownCamera(_) => "unknown_camera",
            RefineError::Coverage { .. } | RefineError::Trajectory(_) => "invalid_trajectory",
            RefineError::InvalidRecord(_) => "invalid_record",
            _ => "invalid_value",
        };
        Self::new(reason, e)
    }
}

#[derive(Default)]
struct LineStats {
    boxes_normalized: usize,
    decimals_converted: usize,
}

fn parse_images(v: &Value) -> Result<BTreeMap<CameraView, String>, Rejection> {
    let bad = |m: String| Rejection::new("invalid_images", m);
    let mut out = BTreeMap::new();
    match v {
        Value::Null => {}
        Value::String(s) => {
            out.insert(CameraView::Front, s.clone());
        }
        Value::Array(items) => {
            if items.len() != CameraView::ALL.len() {
                return Err(bad(format!("image list needs {} entries, got {}", CameraView::ALL.len(), items.len())));
            }
            for (view, item) in CameraView::ALL.into_iter().zip(items) {
                let path = item.as_str().ok_or_else(|| bad("image path must be a string".into()))?;
                out.insert(view, path.to_string());
            }
        }
        Value::Object(map) => {
            for (k, item) in map {
                let view = camera_from_alias(k).ok_or_else(|| Rejection::new("unknown_camera", format!("unknown camera '{k}'")))?;
                let path = item.as_str().ok_or_else(|| bad("image path must be a string".into()))?;
                out.insert(view, path.to_string());
            }
        }
        _ => return Err(bad("images must be a map, list or string".into())),
    }
    Ok(out)
}

fn convert_text(raw: &str, image_size: Option<[u32; 2]>, stats: &mut LineStats) -> Result<TaggedText, RefineError> {
    let parsed = parse_tags(&canonicalize_camera_tags(raw)?)?;
    let mut segments = Vec::with_capacity(parsed.segments().len());
    for s in parsed.into_segments() {
        segments.push(match s {
            Segment::Plain(p) => {
                let (text, n) = integerize_decimals(&p)?;
                stats.decimals_converted += n;
                Segment::Plain(text)
            }
            Segment::Box(b) => match image_size {
                Some([w, h]) => {
                    let px = [b.x1, b.y1, b.x2, b.y2].map(|c| c as f64);
                    // An inverted pixel box stays as written for the filter to report.
                    match normalize_box(px, w, h) {
                        Ok(n) => {
                            stats.boxes_normalized += 1;
                            let [x1, y1, x2, y2] = n.coords().map(i64::from);
                            Segment::Box(super::BoxSpan::new(x1, y1, x2, y2))
                        }
                        Err(_) => Segment::Box(b),
                    }
                }
                None => Segment::Box(b),
            },
            other => other,
        });
    }
    Ok(TaggedText::from_segments(segments))
}

fn refine_line(line: &str, cfg: &RefineConfig) -> Result<(UnifiedRecord, LineStats), Rejection> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| Rejection::new("invalid_json", e))?;
    let id = match raw.id {
        Value::String(s) => s,
        Value::Number(n) => n.to_string(),
        other => return Err(Rejection::new("invalid_record", format!("id must be a string or number, got {other}"))),
    };
    let images = parse_images(&raw.images)?;
    if raw.image_size.is_some_and(|[w, h]| w < 2 || h < 2) {
        return Err(Rejection::new("invalid_value", "image_size must be at least 2x2"));
    }
    let mut stats = LineStats::default();
    let mut conversations = Vec::with_capacity(raw.conversations.len());
    for t in &raw.conversations {
        let role = match t.from.to_ascii_lowercase().as_str() {
            "human" | "user" => Role::Human,
            "gpt" | "assistant" => Role::Assistant,
            other => return Err(Rejection::new("invalid_record", format!("unknown role '{other}'"))),
        };
        conversations.push(Turn {
            role,
            value: convert_text(&t.value, raw.image_size, &mut stats)?,
        });
    }

    let trajectory = match (raw.trajectory_points, raw.trajectory) {
        (Some(points), _) => Some(unify_trajectory(&points)?),
        (None, Some(wps)) => Some(TrajectoryPlan::new(&wps).map_err(|e| Rejection::new("invalid_trajectory", e))?),
        (None, None) => None,
    };

    if let (Some(ego), Some(first)) = (raw.ego_status.as_ref(), conversations.first_mut()) {
        if first.role == Role::Human && !first.value.canonical().contains(EGO_STATUS_PREFIX) {
            let mut segs = first.value.segments().to_vec();
            let needs_space = first.value.canonical().chars().last().is_some_and(|c| !c.is_whitespace());
            let sentence = encode_ego_status(ego);
            segs.push(Segment::Plain(if needs_space { format!(" {sentence}") } else { sentence }));
            first.value = TaggedText::from_segments(segs);
        }
    }

    let mut record = UnifiedRecord {
        id,
        images,
        conversations,
        trajectory,
        ego_status: raw.ego_status,
        source_dataset: cfg.source,
        answer_class: super::AnswerClass::Short,
    };
    record.validate().map_err(|e| Rejection::new("role_alternation", e))?;
    record.answer_class = record.classify(cfg.short_threshold);
    Ok((record, stats))
}

/// Runs the whole refinement over JSONL input: per-source text adapters,
/// tag standardisation, decimal conversion, box normalisation, ego-status
/// encoding, trajectory unification, answer classification and finally the
/// invalid-box filter. Output order follows input order.
pub fn refine_jsonl(input: &str, cfg: &RefineConfig) -> RefineOutput {
    let lines: Vec<(usize, &str)> = input
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    let results: Vec<_> = lines.par_iter().map(|(_, l)| refine_line(l, cfg)).collect();

    let mut report = RefineReport::default();
    let mut errors = Vec::new();
    let mut kept = Vec::with_capacity(results.len());
    for ((line_no, _), r) in lines.iter().zip(results) {
        match r {
            Ok((rec, stats)) => {
                report.boxes_normalized += stats.boxes_normalized;
                report.decimals_converted += stats.decimals_converted;
                kept.push(rec);
            }
            Err(rej) => {
                report.record_drop(rej.reason);
                if errors.len() < MAX_ERROR_MESSAGES {
                    errors.push(format!("line {line_no}: {}", rej.message));
                }
            }
        }
    }
    let (records, filtered) = filter_invalid_boxes(kept);
    report.input = lines.len();
    report.kept = filtered.kept;
    report.dropped += filtered.dropped;
    for (k, v) in filtered.drop_reasons {
        *report.drop_reasons.entry(k).or_default() += v;
    }
    report.boxes_dropped = filtered.boxes_dropped;
    report.answer_classes = filtered.answer_classes;
    report.short_threshold = Some(cfg.short_threshold);
    report.source = Some(cfg.source);
    RefineOutput { records, report, errors }
}
