use std::fmt;

use serde::{Deserialize, Serialize};

use super::{quantize_decimal, RefineError};

/// Largest magnitude accepted for any ego quantity, in SI units. Keeps the
/// centimetre conversion far from integer overflow.
const EGO_LIMIT: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DrivingCommand {
    #[serde(rename = "TURN LEFT")]
    TurnLeft,
    #[serde(rename = "TURN RIGHT")]
    TurnRight,
    #[serde(rename = "GO STRAIGHT")]
    GoStraight,
}

impl DrivingCommand {
    pub fn as_str(self) -> &'static str {
        match self {
            DrivingCommand::TurnLeft => "TURN LEFT",
            DrivingCommand::TurnRight => "TURN RIGHT",
            DrivingCommand::GoStraight => "GO STRAIGHT",
        }
    }
}

impl fmt::Display for DrivingCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Velocities in m/s and accelerations in m/s².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EgoRepr", into = "EgoRepr")]
pub struct EgoStatus {
    lateral_velocity: f64,
    longitudinal_velocity: f64,
    lateral_acceleration: f64,
    longitudinal_acceleration: f64,
    command: DrivingCommand,
}

#[derive(Serialize, Deserialize)]
struct EgoRepr {
    lateral_velocity: f64,
    longitudinal_velocity: f64,
    lateral_acceleration: f64,
    longitudinal_acceleration: f64,
    command: DrivingCommand,
}

impl TryFrom<EgoRepr> for EgoStatus {
    type Error = RefineError;

    fn try_from(r: EgoRepr) -> Result<Self, Self::Error> {
        EgoStatus::new(
            r.lateral_velocity,
            r.longitudinal_velocity,
            r.lateral_acceleration,
            r.longitudinal_acceleration,
            r.command,
        )
    }
}

impl From<EgoStatus> for EgoRepr {
    fn from(s: EgoStatus) -> Self {
        EgoRepr {
            lateral_velocity: s.lateral_velocity,
            longitudinal_velocity: s.longitudinal_velocity,
            lateral_acceleration: s.lateral_acceleration,
            longitudinal_acceleration: s.longitudinal_acceleration,
            command: s.command,
        }
    }
}

impl EgoStatus {
    pub fn new(
        lateral_velocity: f64,
        longitudinal_velocity: f64,
        lateral_acceleration: f64,
        longitudinal_acceleration: f64,
        command: DrivingCommand,
    ) -> Result<Self, RefineError> {
        for v in [lateral_velocity, longitudinal_velocity, lateral_acceleration, longitudinal_acceleration] {
            if !(v.is_finite() && v.abs() <= EGO_LIMIT) {
                return Err(RefineError::InvalidValue(format!("ego quantity {v} is not a finite value within ±{EGO_LIMIT}")));
            }
        }
        Ok(Self {
            lateral_velocity,
            longitudinal_velocity,
            lateral_acceleration,
            longitudinal_acceleration,
            command,
        })
    }

    pub fn command(&self) -> DrivingCommand {
        self.command
    }

    /// The four quantities in centimetres, in template order.
    pub fn centimetres(&self) -> [i64; 4] {
        [
            self.lateral_velocity,
            self.longitudinal_velocity,
            self.lateral_acceleration,
            self.longitudinal_acceleration,
        ]
        .map(|v| quantize_decimal(v, 100.0).expect("bounded at construction"))
    }
}

/// Prefix shared by every encoded status sentence.
pub const EGO_STATUS_PREFIX: &str = "Given the ego status:";

pub fn encode_ego_status(s: &EgoStatus) -> String {
    let [a, b, c, d] = s.centimetres();
    format!(
        "{EGO_STATUS_PREFIX} lateral velocity is {a} cm/s; longitudinal velocity is {b} cm/s; \
         lateral acceleration is {c} cm/s^2; longitudinal acceleration is {d} cm/s^2; \
         The ego car will {}. Output planning results.",
        s.command
    )
}
