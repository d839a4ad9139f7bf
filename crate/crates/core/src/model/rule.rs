//! Lane-level driving rules and their closed vocabularies.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

macro_rules! vocabulary {
    (
        $(#[$meta:meta])*
        $name:ident { $($variant:ident => $text:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(
                #[serde(rename = $text)]
                $variant,
            )+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            pub fn parse(text: &str) -> Option<Self> {
                match text {
                    $($text => Some($name::$variant),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

vocabulary! {
    /// `LaneType` property.
    LaneType {
        DirectionLane => "DirectionLane",
        BusLane => "BusLane",
        EmergencyLane => "EmergencyLane",
        VariableDirectionLane => "VariableDirectionLane",
        NonMotorizedLane => "Non-MotorizedLane",
        VehicleLane => "VehicleLane",
        TidalFlowLane => "TidalFlowLane",
        MultiLane => "MultiLane",
        SpeedLimitedLane => "SpeedLimitedLane",
    }
}

vocabulary! {
    /// One basic direction of the multi-select `LaneDirection` property.
    Direction {
        None => "None",
        GoStraight => "GoStraight",
        TurnLeft => "TurnLeft",
        TurnRight => "TurnRight",
        TurnAround => "TurnAround",
        Forbidden => "Forbidden",
    }
}

vocabulary! {
    /// `AllowedTransport` property.
    Transport {
        None => "None",
        Bus => "Bus",
        Vehicle => "Vehicle",
        NonMotor => "Non-Motor",
        Truck => "Truck",
    }
}

vocabulary! {
    /// `EffectiveDate` property.
    EffectiveDate {
        None => "None",
        WorkDays => "WorkDays",
    }
}

/// The property keys of `attr_info`, in the order they appear in label files.
pub const PROPERTY_KEYS: [&str; 8] = [
    "LaneType",
    "RuleIndex",
    "LaneDirection",
    "EffectiveTime",
    "AllowedTransport",
    "EffectiveDate",
    "LowSpeedLimit",
    "HighSpeedLimit",
];

/// One lane-level driving rule: eight `{key: value}` properties.
///
/// `lane_direction` is a set; the `None` direction may only appear alone.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub lane_type: LaneType,
    pub rule_index: String,
    pub lane_direction: BTreeSet<Direction>,
    pub allowed_transport: Transport,
    pub effective_date: EffectiveDate,
    pub effective_time: String,
    pub low_speed_limit: String,
    pub high_speed_limit: String,
}

impl Rule {
    /// A rule that restricts nothing beyond its lane type and index.
    pub fn unrestricted(lane_type: LaneType, rule_index: impl Into<String>) -> Self {
        Rule {
            lane_type,
            rule_index: rule_index.into(),
            lane_direction: BTreeSet::from([Direction::None]),
            allowed_transport: Transport::None,
            effective_date: EffectiveDate::None,
            effective_time: "None".to_owned(),
            low_speed_limit: "None".to_owned(),
            high_speed_limit: "None".to_owned(),
        }
    }

    pub fn with_directions(mut self, dirs: impl IntoIterator<Item = Direction>) -> Self {
        self.lane_direction = dirs.into_iter().collect();
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.lane_direction.is_empty() {
            return Err(ModelError::EmptyLaneDirection);
        }
        if self.lane_direction.contains(&Direction::None) && self.lane_direction.len() > 1 {
            return Err(ModelError::NoneNotAlone);
        }
        Ok(())
    }

    /// Text properties in `PROPERTY_KEYS` order, paired with their key.
    pub fn text_properties(&self) -> [(&'static str, &str); 4] {
        [
            ("RuleIndex", &self.rule_index),
            ("EffectiveTime", &self.effective_time),
            ("LowSpeedLimit", &self.low_speed_limit),
            ("HighSpeedLimit", &self.high_speed_limit),
        ]
    }
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Trims text properties and collapses internal whitespace runs to one space.
///
/// Enumerated values are left alone and comparison stays case-sensitive.
pub fn normalize_rule(rule: &Rule) -> Rule {
    Rule {
        rule_index: collapse_whitespace(&rule.rule_index),
        effective_time: collapse_whitespace(&rule.effective_time),
        low_speed_limit: collapse_whitespace(&rule.low_speed_limit),
        high_speed_limit: collapse_whitespace(&rule.high_speed_limit),
        ..rule.clone()
    }
}

/// Exact equality of all eight normalized properties.
pub fn rules_equal(a: &Rule, b: &Rule) -> bool {
    normalize_rule(a) == normalize_rule(b)
}
