use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The six surround-view cameras, in canonical view order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraView {
    Front,
    FrontLeft,
    FrontRight,
    Back,
    BackLeft,
    BackRight,
}

impl CameraView {
    pub const ALL: [CameraView; 6] = [
        CameraView::Front,
        CameraView::FrontLeft,
        CameraView::FrontRight,
        CameraView::Back,
        CameraView::BackLeft,
        CameraView::BackRight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CameraView::Front => "front",
            CameraView::FrontLeft => "front_left",
            CameraView::FrontRight => "front_right",
            CameraView::Back => "back",
            CameraView::BackLeft => "back_left",
            CameraView::BackRight => "back_right",
        }
    }

    /// Human wording, e.g. "front left".
    pub fn phrase(self) -> String {
        self.as_str().replace('_', " ")
    }
}

impl fmt::Display for CameraView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CameraView {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CameraView::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown camera view '{s}'"))
    }
}
