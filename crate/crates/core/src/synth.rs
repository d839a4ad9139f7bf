//! Seeded synthetic clips, labels and corrupted predictions whose metric
//! values are known by construction.
//!
//! Scenes are straight roads running along +x. Lanes are numbered left to
//! right for a driver heading +x (left is +y), and rule `i` (RuleIndex
//! `"i"`, 1-based) governs the i-th lane. Vector ids are shuffled per seed
//! so the lateral order is not recoverable from ids alone.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{rotation_to_quat, QuaternionOrder, Rotation};
use crate::metrics::ratio;
use crate::model::{
    CameraIntrinsics, CameraPose, ClipData, CorrespondenceGraph, Direction, EdgeScore,
    EffectiveDate, LabeledRule, LaneType, LaneVector, Point3, PredictedRule, PredictionSet, Rule,
    Transport, VecType,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid scene config: {0}")]
    Config(String),
    #[error("invalid corruption spec: {0}")]
    Corruption(String),
    #[error("RuleIndex {0:?} is used by more than one label")]
    DuplicateRuleIndex(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub lane_count: usize,
    pub rule_count: usize,
    pub lane_width: f64,
    pub clip_length: f64,
    pub frame_spacing: f64,
    /// Distance of the sign ahead of the first frame, meters.
    pub sign_distance: f64,
    /// Sampling weights over `LaneType::ALL`.
    pub lane_type_weights: [f64; 9],
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            lane_count: 3,
            rule_count: 2,
            lane_width: 3.5,
            clip_length: 80.0,
            frame_spacing: 2.0,
            sign_distance: 90.0,
            lane_type_weights: [1.0; 9],
        }
    }
}

impl SceneConfig {
    pub fn new(lane_count: usize, rule_count: usize) -> Self {
        SceneConfig {
            lane_count,
            rule_count,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if !(1..=8).contains(&self.lane_count) {
            return bad(format!("lane_count {} outside [1, 8]", self.lane_count));
        }
        if !(1..=self.lane_count).contains(&self.rule_count) {
            return bad(format!(
                "rule_count {} outside [1, {}]",
                self.rule_count, self.lane_count
            ));
        }
        for (name, v) in [
            ("lane_width", self.lane_width),
            ("clip_length", self.clip_length),
            ("frame_spacing", self.frame_spacing),
            ("sign_distance", self.sign_distance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.frame_spacing > self.clip_length {
            return bad("frame_spacing exceeds clip_length".into());
        }
        let w = &self.lane_type_weights;
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
            return bad("lane_type_weights must be non-negative with a positive sum".into());
        }
        Ok(())
    }

    /// Lane and rule counts drawn from `seed`, other fields at defaults.
    pub fn sampled(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ce9_e5ca_1e00_0000);
        let lane_count = rng.gen_range(1..=8);
        SceneConfig::new(lane_count, rng.gen_range(1..=lane_count))
    }

    pub fn frame_count(&self) -> usize {
        ((self.clip_length / self.frame_spacing).floor() as usize).max(1)
    }
}

/// A generated clip with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    pub clip: ClipData,
    pub labels: Vec<LabeledRule>,
    pub graph: CorrespondenceGraph,
    /// Centerline ids from left to right, as generated.
    pub lateral: Vec<u32>,
}

const TIME_VALUES: [&str; 4] = ["None", "7:00-9:00", "17:00-19:00", "7:00-20:00"];
const SPEED_VALUES: [&str; 7] = ["None", "30", "40", "60", "80", "100", "120"];
const MOVING: [Direction; 5] = [
    Direction::GoStraight,
    Direction::TurnLeft,
    Direction::TurnRight,
    Direction::TurnAround,
    Direction::Forbidden,
];
const SIGN_BOTTOM: f64 = 5.0;
const SIGN_TOP: f64 = 7.0;
const CAMERA_HEIGHT: f64 = 1.5;
const BASE_TIMESTAMP: u64 = 1_700_000_000_000_000_000;
const FRAME_INTERVAL_NS: u64 = 200_000_000;

fn random_directions(rng: &mut ChaCha8Rng) -> BTreeSet<Direction> {
    if rng.gen_bool(0.25) {
        return BTreeSet::from([Direction::None]);
    }
    loop {
        let set: BTreeSet<Direction> = MOVING
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.4))
            .collect();
        if !set.is_empty() {
            return set;
        }
    }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

fn random_rule(rng: &mut ChaCha8Rng, index: usize, weights: &[f64; 9]) -> Rule {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen::<f64>() * total;
    let mut lane_type = *LaneType::ALL.last().expect("nine lane types");
    for (t, w) in LaneType::ALL.iter().zip(weights) {
        if draw < *w {
            lane_type = *t;
            break;
        }
        draw -= w;
    }
    Rule {
        lane_type,
        rule_index: index.to_string(),
        lane_direction: random_directions(rng),
        allowed_transport: *pick(rng, Transport::ALL),
        effective_date: *pick(rng, EffectiveDate::ALL),
        effective_time: pick(rng, &TIME_VALUES).to_string(),
        low_speed_limit: pick(rng, &SPEED_VALUES).to_string(),
        high_speed_limit: pick(rng, &SPEED_VALUES).to_string(),
    }
}

/// Camera-to-world rotation of a camera looking along +x with +y_cam down.
pub fn forward_camera_rotation() -> Rotation {
    Rotation::from_columns(
        Point3::new(0.0, -1.0, 0.0),
        Point3::new(0.0, 0.0, -1.0),
        Point3::new(1.0, 0.0, 0.0),
    )
}

/// Generates one clip. Deterministic per `(cfg, seed)`.
pub fn generate_clip(cfg: &SceneConfig, seed: u64) -> Result<SynthScene, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = cfg.lane_count;
    let w = cfg.lane_width;

    // Each clip lives in its own local frame.
    let origin = Point3::new(
        rng.gen_range(-8000.0..8000.0),
        rng.gen_range(-30000.0..30000.0),
        rng.gen_range(-80.0..80.0),
    );
    let half_road = k as f64 * w / 2.0;
    let lane_y = |i: usize| origin.y + ((k as f64 - 1.0) / 2.0 - i as f64) * w;
    let sign_x = origin.x + cfg.sign_distance;
    let x_start = origin.x - 10.0;
    let x_end = sign_x + 20.0;
    let steps = ((x_end - x_start) / 5.0).ceil() as usize;
    let line = |y: f64| -> Vec<Point3> {
        (0..=steps)
            .map(|s| Point3::new((x_start + s as f64 * 5.0).min(x_end), y, origin.z))
            .collect()
    };

    let mut shapes: Vec<(VecType, Vec<Point3>)> = Vec::new();
    for i in 0..k {
        shapes.push((VecType::Centerline, line(lane_y(i))));
    }
    for j in 0..=k {
        shapes.push((VecType::Divider, line(origin.y + half_road - j as f64 * w)));
    }
    shapes.push((VecType::RoadBoundary, line(origin.y + half_road + 0.5)));
    shapes.push((VecType::RoadBoundary, line(origin.y - half_road - 0.5)));

    let mut ids: Vec<u32> = (0..shapes.len() as u32).collect();
    ids.shuffle(&mut rng);
    let vectors = ids
        .iter()
        .zip(shapes)
        .map(|(&id, (vec_type, points))| {
            (
                id,
                LaneVector {
                    id,
                    vec_type,
                    points,
                },
            )
        })
        .collect();
    let lateral: Vec<u32> = ids[..k].to_vec();

    let sign_quad = [
        Point3::new(sign_x, origin.y + half_road, origin.z + SIGN_TOP),
        Point3::new(sign_x, origin.y + half_road, origin.z + SIGN_BOTTOM),
        Point3::new(sign_x, origin.y - half_road, origin.z + SIGN_BOTTOM),
        Point3::new(sign_x, origin.y - half_road, origin.z + SIGN_TOP),
    ];

    let ego_y = lane_y((k - 1) / 2);
    let rvec = rotation_to_quat(&forward_camera_rotation(), QuaternionOrder::Xyzw);
    let t0 = BASE_TIMESTAMP + rng.gen_range(0..1_000_000u64) * 1_000_000_000;
    let poses = (0..cfg.frame_count())
        .map(|j| {
            let ts = (t0 + j as u64 * FRAME_INTERVAL_NS).to_string();
            let pose = CameraPose {
                timestamp: ts.clone(),
                tvec: Point3::new(
                    origin.x + j as f64 * cfg.frame_spacing,
                    ego_y,
                    origin.z + CAMERA_HEIGHT,
                ),
                rvec,
            };
            (ts, pose)
        })
        .collect();

    let labels: Vec<LabeledRule> = (0..cfg.rule_count)
        .map(|i| {
            let y = lane_y(i);
            LabeledRule {
                key: i.to_string(),
                rule: random_rule(&mut rng, i + 1, &cfg.lane_type_weights),
                centerline_ids: vec![lateral[i]],
                semantic_polygon: vec![
                    Point3::new(sign_x, y + 1.0, origin.z + SIGN_TOP - 0.3),
                    Point3::new(sign_x, y + 1.0, origin.z + SIGN_BOTTOM + 0.3),
                    Point3::new(sign_x, y - 1.0, origin.z + SIGN_BOTTOM + 0.3),
                    Point3::new(sign_x, y - 1.0, origin.z + SIGN_TOP - 0.3),
                ],
            }
        })
        .collect();

    let clip = ClipData {
        sign_quad,
        vectors,
        intrinsics: CameraIntrinsics {
            fx: 1000.0,
            fy: 1000.0,
            cx: 960.0,
            cy: 620.0,
        },
        poses,
        frames: Vec::new(),
    };
    let graph = CorrespondenceGraph::from_labels(&labels, Some(&clip))
        .expect("generated edges target generated centerlines");
    Ok(SynthScene {
        clip,
        labels,
        graph,
        lateral,
    })
}

/// Corruption probabilities and the confidence model for predicted edges.
///
/// Edges present in the ground truth get confidence uniform in
/// `[correct_conf_min, 1]`; spurious edges get uniform in `[0, wrong_conf_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub drop_rule_p: f64,
    pub perturb_property_p: f64,
    pub drop_edge_p: f64,
    pub add_edge_p: f64,
    pub correct_conf_min: f64,
    pub wrong_conf_max: f64,
}

impl CorruptionSpec {
    /// No corruption, every confidence 1.
    pub const CLEAN: CorruptionSpec = CorruptionSpec {
        drop_rule_p: 0.0,
        perturb_property_p: 0.0,
        drop_edge_p: 0.0,
        add_edge_p: 0.0,
        correct_conf_min: 1.0,
        wrong_conf_max: 0.0,
    };

    /// Named specs: `clean`, `drop`, `perturb`, `noisy`. All of them have a
    /// separating threshold.
    pub const PRESETS: [(&'static str, CorruptionSpec); 4] = [
        ("clean", CorruptionSpec::CLEAN),
        (
            "drop",
            CorruptionSpec {
                drop_rule_p: 0.2,
                perturb_property_p: 0.0,
                drop_edge_p: 0.2,
                add_edge_p: 0.0,
                correct_conf_min: 0.6,
                wrong_conf_max: 0.4,
            },
        ),
        (
            "perturb",
            CorruptionSpec {
                drop_rule_p: 0.0,
                perturb_property_p: 0.4,
                drop_edge_p: 0.0,
                add_edge_p: 0.1,
                correct_conf_min: 0.7,
                wrong_conf_max: 0.3,
            },
        ),
        (
            "noisy",
            CorruptionSpec {
                drop_rule_p: 0.15,
                perturb_property_p: 0.3,
                drop_edge_p: 0.15,
                add_edge_p: 0.15,
                correct_conf_min: 0.55,
                wrong_conf_max: 0.45,
            },
        ),
    ];

    pub fn preset(name: &str) -> Option<CorruptionSpec> {
        Self::PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| *s)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, p) in [
            ("drop_rule_p", self.drop_rule_p),
            ("perturb_property_p", self.perturb_property_p),
            ("drop_edge_p", self.drop_edge_p),
            ("add_edge_p", self.add_edge_p),
            ("correct_conf_min", self.correct_conf_min),
            ("wrong_conf_max", self.wrong_conf_max),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::Corruption(format!(
                    "{name} = {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// A threshold that keeps every correct edge and no spurious one, when
    /// the two confidence ranges are disjoint.
    pub fn separating_threshold(&self) -> Option<f64> {
        (self.correct_conf_min > self.wrong_conf_max)
            .then(|| (self.correct_conf_min + self.wrong_conf_max) / 2.0)
    }
}

/// Totals recorded while corrupting, independent of the metric engine.
///
/// `gated_pred_edges` and `subgraph_hits` hold at the separating threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedCounts {
    pub gt_rules: usize,
    pub pred_rules: usize,
    pub rule_matches: usize,
    pub gt_edges: usize,
    pub pred_edges: usize,
    pub edge_hits: usize,
    pub gated_pred_edges: usize,
    pub subgraph_hits: usize,
}

/// Metric values implied by a set of expected counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedMetrics {
    pub p_re: f64,
    pub r_re: f64,
    pub p_cr: f64,
    pub r_cr: f64,
    pub p_all: f64,
    pub r_all: f64,
}

impl ExpectedCounts {
    pub fn metrics(&self) -> ExpectedMetrics {
        ExpectedMetrics {
            p_re: ratio(self.rule_matches, self.pred_rules, self.gt_rules),
            r_re: ratio(self.rule_matches, self.gt_rules, self.pred_rules),
            p_cr: ratio(self.edge_hits, self.pred_edges, self.gt_edges),
            r_cr: ratio(self.edge_hits, self.gt_edges, self.pred_edges),
            p_all: ratio(self.subgraph_hits, self.gated_pred_edges, self.gt_edges),
            r_all: ratio(self.subgraph_hits, self.gt_edges, self.gated_pred_edges),
        }
    }
}

impl std::ops::Add for ExpectedCounts {
    type Output = ExpectedCounts;

    fn add(self, o: ExpectedCounts) -> ExpectedCounts {
        ExpectedCounts {
            gt_rules: self.gt_rules + o.gt_rules,
            pred_rules: self.pred_rules + o.pred_rules,
            rule_matches: self.rule_matches + o.rule_matches,
            gt_edges: self.gt_edges + o.gt_edges,
            pred_edges: self.pred_edges + o.pred_edges,
            edge_hits: self.edge_hits + o.edge_hits,
            gated_pred_edges: self.gated_pred_edges + o.gated_pred_edges,
            subgraph_hits: self.subgraph_hits + o.subgraph_hits,
        }
    }
}

fn other<T: Copy + PartialEq>(rng: &mut ChaCha8Rng, all: &[T], current: T) -> T {
    let rest: Vec<T> = all.iter().copied().filter(|v| *v != current).collect();
    *pick(rng, &rest)
}

fn other_text(rng: &mut ChaCha8Rng, all: &[&str], current: &str) -> String {
    let current = current.split_whitespace().collect::<Vec<_>>().join(" ");
    let rest: Vec<&str> = all.iter().copied().filter(|v| *v != current).collect();
    pick(rng, &rest).to_string()
}

/// Changes exactly one property other than `RuleIndex` to a different
/// in-vocabulary value.
pub fn perturb_rule(rule: &Rule, rng: &mut ChaCha8Rng) -> Rule {
    let mut r = rule.clone();
    match rng.gen_range(0..7) {
        0 => r.lane_type = other(rng, LaneType::ALL, r.lane_type),
        1 => loop {
            let dirs = random_directions(rng);
            if dirs != r.lane_direction {
                r.lane_direction = dirs;
                break;
            }
        },
        2 => r.allowed_transport = other(rng, Transport::ALL, r.allowed_transport),
        3 => r.effective_date = other(rng, EffectiveDate::ALL, r.effective_date),
        4 => r.effective_time = other_text(rng, &TIME_VALUES, &r.effective_time),
        5 => r.low_speed_limit = other_text(rng, &SPEED_VALUES, &r.low_speed_limit),
        _ => r.high_speed_limit = other_text(rng, &SPEED_VALUES, &r.high_speed_limit),
    }
    r
}

/// Builds a prediction from ground truth by seeded corruption, counting the
/// outcome as it goes.
///
/// Labels must carry pairwise distinct `RuleIndex` values so that every
/// prediction can be traced back to its source rule.
pub fn corrupt(
    labels: &[LabeledRule],
    clip: &ClipData,
    spec: &CorruptionSpec,
    seed: u64,
) -> Result<(PredictionSet, ExpectedCounts), SynthError> {
    spec.validate()?;
    let mut seen = BTreeSet::new();
    for l in labels {
        let idx = crate::model::normalize_rule(&l.rule).rule_index;
        if !seen.insert(idx.clone()) {
            return Err(SynthError::DuplicateRuleIndex(idx));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centerlines = clip.centerline_ids();
    let mut counts = ExpectedCounts {
        gt_rules: labels.len(),
        gt_edges: labels.iter().map(|l| l.centerline_ids.len()).sum(),
        ..Default::default()
    };
    let mut rules = Vec::new();
    for label in labels {
        if rng.gen::<f64>() < spec.drop_rule_p {
            continue;
        }
        let perturbed = rng.gen::<f64>() < spec.perturb_property_p;
        let rule = if perturbed {
            perturb_rule(&label.rule, &mut rng)
        } else {
            label.rule.clone()
        };
        let mut edges = Vec::new();
        for &id in &label.centerline_ids {
            if rng.gen::<f64>() < spec.drop_edge_p {
                continue;
            }
            let c = spec.correct_conf_min + (1.0 - spec.correct_conf_min) * rng.gen::<f64>();
            edges.push(EdgeScore { id, confidence: c });
            counts.edge_hits += 1;
            counts.gated_pred_edges += 1;
            if !perturbed {
                counts.subgraph_hits += 1;
            }
        }
        for &id in &centerlines {
            if label.centerline_ids.contains(&id) {
                continue;
            }
            if rng.gen::<f64>() < spec.add_edge_p {
                let c = spec.wrong_conf_max * rng.gen::<f64>();
                edges.push(EdgeScore { id, confidence: c });
            }
        }
        counts.pred_rules += 1;
        if !perturbed {
            counts.rule_matches += 1;
        }
        counts.pred_edges += edges.len();
        rules.push(PredictedRule {
            rule,
            confidence: 1.0,
            centerlines: edges,
        });
    }
    Ok((PredictionSet { rules }, counts))
}

/// Concrete ground truth and prediction for the worked scoring example: five
/// rules over eight centerlines with six edges, six predicted rules (three
/// exact) and five predicted edges (three on annotated pairs, one of them
/// under an exactly right rule).
#[derive(Debug, Clone, PartialEq)]
pub struct WorkedExample {
    pub clip: ClipData,
    pub labels: Vec<LabeledRule>,
    pub graph: CorrespondenceGraph,
    pub prediction: PredictionSet,
}

pub fn worked_example() -> WorkedExample {
    let scene = generate_clip(&SceneConfig::new(8, 5), 0).expect("fixed config is valid");
    let lane = |i: usize| scene.lateral[i];

    let mut rules = vec![
        Rule::unrestricted(LaneType::DirectionLane, "1").with_directions([Direction::TurnLeft]),
        Rule::unrestricted(LaneType::DirectionLane, "2").with_directions([Direction::GoStraight]),
        Rule::unrestricted(LaneType::DirectionLane, "3")
            .with_directions([Direction::GoStraight, Direction::TurnRight]),
        Rule::unrestricted(LaneType::BusLane, "4").with_directions([Direction::GoStraight]),
        Rule::unrestricted(LaneType::SpeedLimitedLane, "5"),
    ];
    rules[3].allowed_transport = Transport::Bus;
    rules[3].effective_date = EffectiveDate::WorkDays;
    rules[3].effective_time = "7:00-9:00".into();
    rules[4].low_speed_limit = "60".into();
    rules[4].high_speed_limit = "120".into();

    let mut labels = scene.labels.clone();
    for (label, rule) in labels.iter_mut().zip(&rules) {
        label.rule = rule.clone();
    }
    labels[4].centerline_ids.push(lane(5));
    let graph = CorrespondenceGraph::from_labels(&labels, Some(&scene.clip))
        .expect("fixture edges target centerlines");

    let mut wrong_time = rules[3].clone();
    wrong_time.effective_time = "7:00-10:00".into();
    let mut wrong_speed = rules[4].clone();
    wrong_speed.high_speed_limit = "100".into();
    let extra =
        Rule::unrestricted(LaneType::VehicleLane, "6").with_directions([Direction::GoStraight]);

    let sure = |ids: &[u32]| -> Vec<EdgeScore> {
        ids.iter()
            .map(|&id| EdgeScore {
                id,
                confidence: 1.0,
            })
            .collect()
    };
    let predicted = |rule: Rule, ids: &[u32]| PredictedRule {
        rule,
        confidence: 1.0,
        centerlines: sure(ids),
    };
    let prediction = PredictionSet {
        rules: vec![
            predicted(rules[0].clone(), &[lane(0)]),
            predicted(rules[1].clone(), &[lane(6)]),
            predicted(rules[2].clone(), &[]),
            predicted(wrong_time, &[lane(3)]),
            predicted(wrong_speed, &[lane(4)]),
            predicted(extra, &[lane(7)]),
        ],
    };

    WorkedExample {
        clip: scene.clip,
        labels,
        graph,
        prediction,
    }
}

/// One entry of a generated corpus manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub clip_id: String,
    pub seed: u64,
    pub scene: SceneConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub corruption: Option<CorruptionSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub separating_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub expected: Option<ExpectedCounts>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub clips: Vec<ManifestEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lateral_order;
    use crate::metrics::{evaluate_clip, EvalConfig};

    #[test]
    fn default_scene_counts() {
        let s = generate_clip(&SceneConfig::new(3, 2), 7).unwrap();
        assert_eq!(s.clip.centerlines().count(), 3);
        assert_eq!(s.labels.len(), 2);
        assert_eq!(s.graph.len(), 2);
        assert_eq!(s.clip.poses.len(), 40);
        assert_eq!(s.clip.vectors.len(), 3 + 4 + 2);
        assert!(s.clip.validate().is_ok());
        for l in &s.labels {
            assert!(l.validate().is_ok());
        }
    }

    #[test]
    fn minimal_scene() {
        let s = generate_clip(&SceneConfig::new(1, 1), 0).unwrap();
        assert_eq!(s.graph.len(), 1);
        assert_eq!(s.labels[0].rule.rule_index, "1");
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SceneConfig::new(4, 3);
        assert_eq!(
            generate_clip(&cfg, 11).unwrap(),
            generate_clip(&cfg, 11).unwrap()
        );
        assert_ne!(
            generate_clip(&cfg, 11).unwrap(),
            generate_clip(&cfg, 12).unwrap()
        );
    }

    #[test]
    fn config_validation() {
        assert!(generate_clip(&SceneConfig::new(0, 0), 0).is_err());
        assert!(generate_clip(&SceneConfig::new(3, 4), 0).is_err());
        assert!(generate_clip(&SceneConfig::new(9, 1), 0).is_err());
        let cfg = SceneConfig {
            lane_width: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn lateral_order_recovers_generation_order() {
        for seed in 0..20 {
            let s = generate_clip(&SceneConfig::new(5, 3), seed).unwrap();
            let lines: Vec<&LaneVector> = s.clip.centerlines().collect();
            assert_eq!(lateral_order(&lines, &s.clip.sign_quad).unwrap(), s.lateral);
        }
    }

    #[test]
    fn clean_corruption_is_identity() {
        let s = generate_clip(&SceneConfig::new(4, 4), 3).unwrap();
        let (pred, counts) = corrupt(&s.labels, &s.clip, &CorruptionSpec::CLEAN, 9).unwrap();
        assert_eq!(pred.rules.len(), 4);
        for (p, l) in pred.rules.iter().zip(&s.labels) {
            assert_eq!(p.rule, l.rule);
            let ids: Vec<u32> = p.centerlines.iter().map(|e| e.id).collect();
            assert_eq!(ids, l.centerline_ids);
            assert!(p.centerlines.iter().all(|e| e.confidence == 1.0));
        }
        let m = counts.metrics();
        assert_eq!(
            (m.p_re, m.r_re, m.p_cr, m.r_cr, m.p_all, m.r_all),
            (1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn perturbation_always_breaks_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = generate_clip(&SceneConfig::new(8, 8), 1).unwrap();
        for _ in 0..200 {
            for l in &s.labels {
                let p = perturb_rule(&l.rule, &mut rng);
                assert!(!crate::model::rules_equal(&p, &l.rule));
                assert_eq!(p.rule_index, l.rule.rule_index);
                assert!(p.validate().is_ok());
            }
        }
    }

    #[test]
    fn worked_example_scores() {
        let ex = worked_example();
        assert_eq!(ex.labels.len(), 5);
        assert_eq!(ex.clip.centerlines().count(), 8);
        assert_eq!(ex.graph.len(), 6);
        assert_eq!(ex.prediction.rules.len(), 6);
        assert_eq!(ex.prediction.edge_count(), 5);
        let r = evaluate_clip(
            &ex.labels,
            &ex.graph,
            &ex.prediction,
            Some(&ex.clip),
            &EvalConfig::default(),
        )
        .unwrap();
        assert_eq!((r.p_re, r.r_re), (3.0 / 6.0, 3.0 / 5.0));
        assert_eq!((r.p_cr, r.r_cr), (3.0 / 5.0, 3.0 / 6.0));
        assert_eq!((r.p_all, r.r_all), (1.0 / 5.0, 1.0 / 6.0));
        assert_eq!(worked_example(), ex);
    }

    #[test]
    fn presets_separate() {
        for (name, spec) in CorruptionSpec::PRESETS {
            assert!(spec.validate().is_ok(), "{name}");
            assert!(spec.separating_threshold().is_some(), "{name}");
        }
        assert_eq!(CorruptionSpec::preset("clean"), Some(CorruptionSpec::CLEAN));
        assert_eq!(CorruptionSpec::preset("nope"), None);
    }

    #[test]
    fn sampled_configs_are_valid() {
        for seed in 0..200 {
            assert!(SceneConfig::sampled(seed).validate().is_ok());
        }
    }

    #[test]
    fn duplicate_rule_index_rejected() {
        let s = generate_clip(&SceneConfig::new(3, 2), 0).unwrap();
        let mut labels = s.labels.clone();
        labels[1].rule.rule_index = labels[0].rule.rule_index.clone();
        assert!(matches!(
            corrupt(&labels, &s.clip, &CorruptionSpec::CLEAN, 0),
            Err(SynthError::DuplicateRuleIndex(_))
        ));
    }
}
