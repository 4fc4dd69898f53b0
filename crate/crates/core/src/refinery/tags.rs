use std::fmt::Write as _;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::RefineError;
use crate::CameraView;

/// Raw box coordinates as written in the text. Range and ordering are not
/// enforced here so that invalid boxes survive parsing and can be audited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoxSpan {
    pub x1: i64,
    pub y1: i64,
    pub x2: i64,
    pub y2: i64,
}

impl BoxSpan {
    pub fn new(x1: i64, y1: i64, x2: i64, y2: i64) -> Self {
        Self { x1, y1, x2, y2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    Plain(String),
    Ref(String),
    Box(BoxSpan),
    Camera(CameraView),
}

/// Text split into plain runs and tags. Equality compares segments only, so
/// two spellings of the same tags are equal.
#[derive(Clone, Debug)]
pub struct TaggedText {
    raw: String,
    segments: Vec<Segment>,
}

impl PartialEq for TaggedText {
    fn eq(&self, other: &Self) -> bool {
        self.segments == other.segments
    }
}

impl Eq for TaggedText {}

impl TaggedText {
    /// Builds from segments, merging adjacent plain runs and dropping empty
    /// ones so the result is what parsing its canonical form would give.
    pub fn from_segments(segments: impl IntoIterator<Item = Segment>) -> Self {
        let mut merged: Vec<Segment> = Vec::new();
        for s in segments {
            match (merged.last_mut(), s) {
                (_, Segment::Plain(p)) if p.is_empty() => {}
                (Some(Segment::Plain(prev)), Segment::Plain(p)) => prev.push_str(&p),
                (_, s) => merged.push(s),
            }
        }
        let raw = render(&merged);
        Self { raw, segments: merged }
    }

    pub fn plain(text: impl Into<String>) -> Self {
        Self::from_segments([Segment::Plain(text.into())])
    }

    /// The text this value was parsed from (canonical form when built).
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<Segment> {
        self.segments
    }

    pub fn canonical(&self) -> String {
        render(&self.segments)
    }

    pub fn boxes(&self) -> impl Iterator<Item = &BoxSpan> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Box(b) => Some(b),
            _ => None,
        })
    }

    pub fn has_ref(&self) -> bool {
        self.segments.iter().any(|s| matches!(s, Segment::Ref(_)))
    }

    /// Whitespace-separated words of the plain runs, plus one per tag.
    pub fn token_count(&self) -> usize {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::Plain(p) => p.split_whitespace().count(),
                _ => 1,
            })
            .sum()
    }
}

impl Serialize for TaggedText {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.canonical())
    }
}

impl<'de> Deserialize<'de> for TaggedText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_tags(&s).map_err(serde::de::Error::custom)
    }
}

fn render(segments: &[Segment]) -> String {
    let mut out = String::new();
    for s in segments {
        match s {
            Segment::Plain(p) => out.push_str(p),
            Segment::Ref(r) => {
                let _ = write!(out, "<ref>{r}</ref>");
            }
            Segment::Box(b) => {
                let _ = write!(out, "<box>({},{}),({},{})</box>", b.x1, b.y1, b.x2, b.y2);
            }
            Segment::Camera(v) => {
                let _ = write!(out, "<|camera_{}|>", v.as_str());
            }
        }
    }
    out
}

pub fn serialize_tags(t: &TaggedText) -> String {
    t.canonical()
}

static CAMERA: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^<\s*\|\s*camera_([A-Za-z_]+)\s*\|\s*>").unwrap());
static REF_OPEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^<\s*ref\s*>").unwrap());
static REF_CLOSE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<\s*/\s*ref\s*>").unwrap());
static BOX_OPEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^<\s*box\s*>").unwrap());
static BOX_CLOSE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<\s*/\s*box\s*>").unwrap());
static BOX_PAYLOAD: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*\(\s*([+-]?\d+)\s*,\s*([+-]?\d+)\s*\)\s*,\s*\(\s*([+-]?\d+)\s*,\s*([+-]?\d+)\s*\)\s*$").unwrap()
});

/// Parses the tag grammar. Anything that is not a recognised tag stays plain
/// text, including an opening tag with no matching close. The only failure is
/// a closed `<box>` whose payload is not two integer points.
pub fn parse_tags(raw: &str) -> Result<TaggedText, RefineError> {
    let mut segments = Vec::new();
    let mut plain = String::new();
    let mut i = 0;
    let flush = |plain: &mut String, segments: &mut Vec<Segment>| {
        if !plain.is_empty() {
            segments.push(Segment::Plain(std::mem::take(plain)));
        }
    };
    while i < raw.len() {
        let rest = &raw[i..];
        let Some(lt) = rest.find('<') else {
            plain.push_str(rest);
            break;
        };
        plain.push_str(&rest[..lt]);
        i += lt;
        let rest = &raw[i..];

        if let Some(c) = CAMERA.captures(rest) {
            if let Ok(view) = c[1].parse::<CameraView>() {
                flush(&mut plain, &mut segments);
                segments.push(Segment::Camera(view));
                i += c[0].len();
                continue;
            }
        } else if let Some(open) = REF_OPEN.find(rest) {
            if let Some(close) = REF_CLOSE.find(&rest[open.end()..]) {
                flush(&mut plain, &mut segments);
                let inner = &rest[open.end()..open.end() + close.start()];
                segments.push(Segment::Ref(inner.to_string()));
                i += open.end() + close.end();
                continue;
            }
        } else if let Some(open) = BOX_OPEN.find(rest) {
            if let Some(close) = BOX_CLOSE.find(&rest[open.end()..]) {
                let inner = &rest[open.end()..open.end() + close.start()];
                let offset = i + open.end();
                let caps = BOX_PAYLOAD.captures(inner).ok_or_else(|| RefineError::TagParse {
                    offset,
                    message: format!("malformed box payload '{inner}'"),
                })?;
                let mut v = [0i64; 4];
                for (k, slot) in v.iter_mut().enumerate() {
                    *slot = caps[k + 1].parse().map_err(|_| RefineError::TagParse {
                        offset,
                        message: format!("box coordinate '{}' out of range", &caps[k + 1]),
                    })?;
                }
                flush(&mut plain, &mut segments);
                segments.push(Segment::Box(BoxSpan::new(v[0], v[1], v[2], v[3])));
                i += open.end() + close.end();
                continue;
            }
        }
        plain.push('<');
        i += 1;
    }
    flush(&mut plain, &mut segments);
    Ok(TaggedText {
        raw: raw.to_string(),
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_and_boundary_box() {
        assert_eq!(parse_tags("hello").unwrap().segments(), &[Segment::Plain("hello".into())]);
        assert_eq!(
            parse_tags("<box>(0,0),(999,999)</box>").unwrap().segments(),
            &[Segment::Box(BoxSpan::new(0, 0, 999, 999))]
        );
        assert!(parse_tags("").unwrap().segments().is_empty());
    }

    #[test]
    fn mixed_fixture() {
        let s = "<|camera_front|><ref>the red car</ref> at <box>(10,20),(30,40)</box>";
        let t = parse_tags(s).unwrap();
        assert_eq!(
            t.segments(),
            &[
                Segment::Camera(CameraView::Front),
                Segment::Ref("the red car".into()),
                Segment::Plain(" at ".into()),
                Segment::Box(BoxSpan::new(10, 20, 30, 40)),
            ]
        );
        assert_eq!(serialize_tags(&t), s);
        assert_eq!(t.token_count(), 4);
    }

    #[test]
    fn legacy_spacing_normalizes() {
        let t = parse_tags("see < box >( 1 , 2 ), (3,4)< /box > and < ref >x</ ref >< | camera_back_left | >").unwrap();
        assert_eq!(t.canonical(), "see <box>(1,2),(3,4)</box> and <ref>x</ref><|camera_back_left|>");
        assert_eq!(serialize_tags(&TaggedText::from_segments([Segment::Box(BoxSpan::new(1, 2, 3, 4))])), "<box>(1,2),(3,4)</box>");
    }

    #[test]
    fn unknown_and_unterminated_tags_stay_plain() {
        for s in ["a <b> c", "<|camera_roof|> x", "<ref>never closed", "<box>(1,2),(3,4)", "x < y", "<"] {
            let t = parse_tags(s).unwrap();
            assert_eq!(t.segments(), &[Segment::Plain(s.into())], "{s}");
        }
    }

    #[test]
    fn malformed_box_reports_offset() {
        match parse_tags("ab<box>(1,2),(x,4)</box>") {
            Err(RefineError::TagParse { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("{other:?}"),
        }
        assert!(parse_tags("<box>(1,2),(99999999999999999999,4)</box>").is_err());
    }

    #[test]
    fn negative_coordinates_parse() {
        let t = parse_tags("<box>(-5,0),(10,+20)</box>").unwrap();
        assert_eq!(t.boxes().next(), Some(&BoxSpan::new(-5, 0, 10, 20)));
        assert_eq!(t.canonical(), "<box>(-5,0),(10,20)</box>");
    }

    #[test]
    fn from_segments_merges_plain() {
        let t = TaggedText::from_segments([
            Segment::Plain("a".into()),
            Segment::Plain(String::new()),
            Segment::Plain("b".into()),
        ]);
        assert_eq!(t.segments(), &[Segment::Plain("ab".into())]);
    }

    #[test]
    fn serde_uses_canonical_string() {
        let t = parse_tags("< ref >car</ref>").unwrap();
        assert_eq!(serde_json::to_string(&t).unwrap(), "\"<ref>car</ref>\"");
        assert!(serde_json::from_str::<TaggedText>("\"<box>bad</box>\"").is_err());
    }
}
