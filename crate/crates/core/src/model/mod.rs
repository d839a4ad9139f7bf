//! Domain types shared by every other module.

mod clip;
mod graph;
mod prediction;
mod rule;

pub use clip::{
    CameraIntrinsics, CameraPose, ClipData, FrameRef, LaneVector, OcrObservation, OcrPolygon,
    Point3, VecType, QUATERNION_TOLERANCE,
};
pub use graph::{compare_rule_keys, CorrespondenceGraph, LabeledRule};
pub use prediction::{canonical_order, EdgeScore, PredictedRule, PredictionSet};
pub use rule::{
    normalize_rule, rules_equal, Direction, EffectiveDate, LaneType, Rule, Transport, PROPERTY_KEYS,
};
