//! Rule-extraction, correspondence and overall precision/recall, plus AP
//! over an association-confidence threshold sweep.
//!
//! Conventions used throughout:
//!
//! * A ratio with an empty denominator is 1 when the other side is empty too
//!   and 0 otherwise.
//! * Rule matching is one-to-one under exact equality of all eight
//!   normalized properties. Ties go to the lowest label key and the earliest
//!   prediction in canonical order, so listing order never matters.
//! * Correspondence is scored against ground-truth rule keys. A predicted
//!   rule is attached to the label it matches exactly, or failing that to an
//!   unmatched label with the same `RuleIndex`. Edges of predicted rules with
//!   no such label can never be correct.
//! * Correspondence counts every emitted edge; the overall metric counts only
//!   edges whose confidence reaches the threshold.
//! * The overall unit is a positive (rule, centerline) pair. A predicted pair
//!   is correct iff its rule matched a label exactly and that label is
//!   annotated on the same centerline.
//! * AP is the trapezoidal area under precision over recall, points taken
//!   from a uniform threshold grid over [0, 1] inclusive.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ModelError;

use crate::model::{
    canonical_order, compare_rule_keys, normalize_rule, ClipData, CorrespondenceGraph, LabeledRule,
    PredictedRule, PredictionSet, Rule,
};

pub const DEFAULT_THRESHOLD_COUNT: usize = 100;
pub const DEFAULT_OPERATING_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("threshold grid needs at least 2 points, got {0}")]
    ThresholdCount(usize),
    #[error("threshold {0} outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("invalid prediction: {0}")]
    InvalidPrediction(#[from] ModelError),
    #[error("cannot aggregate reports computed on different threshold grids")]
    GridMismatch,
    #[error("nothing to aggregate")]
    EmptyAggregate,
}

/// `hits / denominator` under the empty-set convention.
pub fn ratio(hits: usize, denominator: usize, other_side: usize) -> f64 {
    if denominator == 0 {
        if other_side == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        hits as f64 / denominator as f64
    }
}

/// Hit, prediction and ground-truth totals for one precision/recall pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub hits: usize,
    pub predicted: usize,
    pub truth: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.hits, self.predicted, self.truth)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.hits, self.truth, self.predicted)
    }
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            hits: self.hits + o.hits,
            predicted: self.predicted + o.predicted,
            truth: self.truth + o.truth,
        }
    }
}

/// One-to-one pairing of label keys with predicted rule positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleMatching {
    /// `(label key, prediction position)`, ordered by label key.
    pub pairs: Vec<(String, usize)>,
    pub unmatched_gt: Vec<String>,
    pub unmatched_pred: Vec<usize>,
}

impl RuleMatching {
    pub fn counts(&self) -> Counts {
        Counts {
            hits: self.pairs.len(),
            predicted: self.pairs.len() + self.unmatched_pred.len(),
            truth: self.pairs.len() + self.unmatched_gt.len(),
        }
    }

    /// Label key matched to each prediction position.
    pub fn key_of(&self, pred_len: usize) -> Vec<Option<&str>> {
        let mut out = vec![None; pred_len];
        for (key, pos) in &self.pairs {
            out[*pos] = Some(key.as_str());
        }
        out
    }
}

fn sorted_labels(gt: &[LabeledRule]) -> Vec<&LabeledRule> {
    let mut v: Vec<&LabeledRule> = gt.iter().collect();
    v.sort_by(|a, b| compare_rule_keys(&a.key, &b.key));
    v
}

/// Maximum one-to-one matching under exact rule equality.
///
/// Equality is an equivalence relation, so pairing greedily within each
/// class is maximal.
pub fn match_rules(gt: &[LabeledRule], pred: &[PredictedRule]) -> RuleMatching {
    let order = canonical_order(pred);
    let normalized: Vec<Rule> = pred.iter().map(|p| normalize_rule(&p.rule)).collect();
    let mut used = vec![false; pred.len()];
    let mut m = RuleMatching::default();
    for label in sorted_labels(gt) {
        let target = normalize_rule(&label.rule);
        let found = order
            .iter()
            .copied()
            .find(|&pos| !used[pos] && normalized[pos] == target);
        match found {
            Some(pos) => {
                used[pos] = true;
                m.pairs.push((label.key.clone(), pos));
            }
            None => m.unmatched_gt.push(label.key.clone()),
        }
    }
    m.unmatched_pred = order.into_iter().filter(|&p| !used[p]).collect();
    m.unmatched_pred.sort_unstable();
    m
}

/// `(P, R)` of rule extraction.
pub fn rule_extraction_pr(matching: &RuleMatching) -> (f64, f64) {
    let c = matching.counts();
    (c.precision(), c.recall())
}

/// `(P, R)` of two edge sets keyed by label key and centerline id.
pub fn correspondence_pr(gt: &CorrespondenceGraph, pred: &CorrespondenceGraph) -> (f64, f64) {
    let c = edge_counts(gt, pred);
    (c.precision(), c.recall())
}

pub fn edge_counts(gt: &CorrespondenceGraph, pred: &CorrespondenceGraph) -> Counts {
    Counts {
        hits: pred.edges().filter(|(k, id)| gt.contains(k, *id)).count(),
        predicted: pred.len(),
        truth: gt.len(),
    }
}

/// Label key each predicted rule speaks for: its exact match, else an
/// unmatched label sharing its `RuleIndex`.
pub fn align_predictions(
    gt: &[LabeledRule],
    pred: &[PredictedRule],
    matching: &RuleMatching,
) -> Vec<Option<String>> {
    let mut aligned: Vec<Option<String>> = matching
        .key_of(pred.len())
        .into_iter()
        .map(|k| k.map(str::to_owned))
        .collect();
    let by_key: BTreeMap<&str, &LabeledRule> = gt.iter().map(|l| (l.key.as_str(), l)).collect();
    let mut free_gt: Vec<&str> = matching.unmatched_gt.iter().map(String::as_str).collect();
    let free_pred: Vec<usize> = canonical_order(pred)
        .into_iter()
        .filter(|p| matching.unmatched_pred.contains(p))
        .collect();
    for pos in free_pred {
        let index = normalize_rule(&pred[pos].rule).rule_index;
        let slot = free_gt
            .iter()
            .position(|k| normalize_rule(&by_key[k].rule).rule_index == index);
        if let Some(i) = slot {
            aligned[pos] = Some(free_gt.remove(i).to_owned());
        }
    }
    aligned
}

/// Correspondence totals for a full prediction: every emitted edge counts as
/// predicted, hits need an aligned rule and an annotated edge.
pub fn prediction_edge_counts(
    gt: &[LabeledRule],
    graph: &CorrespondenceGraph,
    pred: &PredictionSet,
    matching: &RuleMatching,
) -> Counts {
    let aligned = align_predictions(gt, &pred.rules, matching);
    let hits = pred
        .edges()
        .filter(|(pos, id, _)| {
            aligned[*pos]
                .as_deref()
                .is_some_and(|k| graph.contains(k, *id))
        })
        .count();
    Counts {
        hits,
        predicted: pred.edge_count(),
        truth: graph.len(),
    }
}

/// Overall subgraph totals at confidence threshold `threshold`.
pub fn overall_counts(
    graph: &CorrespondenceGraph,
    pred: &PredictionSet,
    matching: &RuleMatching,
    threshold: f64,
) -> Counts {
    let keys = matching.key_of(pred.rules.len());
    let mut c = Counts {
        truth: graph.len(),
        ..Counts::default()
    };
    for (pos, id, conf) in pred.edges() {
        if conf >= threshold {
            c.predicted += 1;
            if keys[pos].is_some_and(|k| graph.contains(k, id)) {
                c.hits += 1;
            }
        }
    }
    c
}

/// `(P_all, R_all)` at `threshold`.
pub fn overall_pr(
    gt: &[LabeledRule],
    graph: &CorrespondenceGraph,
    pred: &PredictionSet,
    threshold: f64,
) -> Result<(f64, f64), MetricError> {
    check_threshold(threshold)?;
    let matching = match_rules(gt, &pred.rules);
    let c = overall_counts(graph, pred, &matching, threshold);
    Ok((c.precision(), c.recall()))
}

fn check_threshold(t: f64) -> Result<(), MetricError> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(MetricError::ThresholdOutOfRange(t))
    }
}

/// `count` evenly spaced thresholds from 0 to 1 inclusive.
pub fn threshold_grid(count: usize) -> Result<Vec<f64>, MetricError> {
    if count < 2 {
        return Err(MetricError::ThresholdCount(count));
    }
    let last = (count - 1) as f64;
    Ok((0..count).map(|i| i as f64 / last).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub p: f64,
    pub r: f64,
    pub hits: usize,
    pub predicted: usize,
}

/// Area under precision over recall.
///
/// Points are sorted by recall; equal recalls keep their best precision;
/// when recall 0 is absent, `(0, precision at the highest threshold)` is
/// prepended. Integration is trapezoidal with no precision envelope.
pub fn area_under_curve(curve: &[CurvePoint]) -> f64 {
    let Some(top) = curve.iter().max_by(|a, b| a.t.total_cmp(&b.t)) else {
        return 0.0;
    };
    let mut pts: Vec<(f64, f64)> = curve.iter().map(|c| (c.r, c.p)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|later, first| later.0 == first.0);
    if pts[0].0 != 0.0 {
        pts.insert(0, (0.0, top.p));
    }
    let area: f64 = pts
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    area.clamp(0.0, 1.0)
}

fn curve_from_counts(grid: &[f64], counts: &[Counts]) -> Vec<CurvePoint> {
    grid.iter()
        .zip(counts)
        .map(|(&t, c)| CurvePoint {
            t,
            p: c.precision(),
            r: c.recall(),
            hits: c.hits,
            predicted: c.predicted,
        })
        .collect()
}

/// `(AP, curve)` over a uniform grid of `threshold_count` thresholds.
pub fn average_precision(
    gt: &[LabeledRule],
    graph: &CorrespondenceGraph,
    pred: &PredictionSet,
    threshold_count: usize,
) -> Result<(f64, Vec<CurvePoint>), MetricError> {
    let grid = threshold_grid(threshold_count)?;
    let matching = match_rules(gt, &pred.rules);
    let counts: Vec<Counts> = grid
        .iter()
        .map(|&t| overall_counts(graph, pred, &matching, t))
        .collect();
    let curve = curve_from_counts(&grid, &counts);
    Ok((area_under_curve(&curve), curve))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub threshold_count: usize,
    /// Threshold at which the single `p_all`/`r_all` pair is reported.
    pub operating_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            threshold_count: DEFAULT_THRESHOLD_COUNT,
            operating_threshold: DEFAULT_OPERATING_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportCounts {
    pub gt_rules: usize,
    pub pred_rules: usize,
    pub rule_matches: usize,
    pub gt_edges: usize,
    pub pred_edges: usize,
    pub edge_hits: usize,
    pub gt_subgraphs: usize,
    pub pred_subgraphs: usize,
    pub subgraph_hits: usize,
}

impl ReportCounts {
    fn rules(&self) -> Counts {
        Counts {
            hits: self.rule_matches,
            predicted: self.pred_rules,
            truth: self.gt_rules,
        }
    }

    fn edges(&self) -> Counts {
        Counts {
            hits: self.edge_hits,
            predicted: self.pred_edges,
            truth: self.gt_edges,
        }
    }

    fn subgraphs(&self) -> Counts {
        Counts {
            hits: self.subgraph_hits,
            predicted: self.pred_subgraphs,
            truth: self.gt_subgraphs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub counts: ReportCounts,
    pub p_re: f64,
    pub r_re: f64,
    pub p_cr: f64,
    pub r_cr: f64,
    /// Operating threshold for `p_all` / `r_all` and the subgraph counts.
    pub threshold: f64,
    pub p_all: f64,
    pub r_all: f64,
    pub curve: Vec<CurvePoint>,
    pub ap: f64,
}

impl MetricReport {
    fn from_counts(counts: ReportCounts, threshold: f64, grid: &[f64], per_t: &[Counts]) -> Self {
        let curve = curve_from_counts(grid, per_t);
        MetricReport {
            counts,
            p_re: counts.rules().precision(),
            r_re: counts.rules().recall(),
            p_cr: counts.edges().precision(),
            r_cr: counts.edges().recall(),
            threshold,
            p_all: counts.subgraphs().precision(),
            r_all: counts.subgraphs().recall(),
            ap: area_under_curve(&curve),
            curve,
        }
    }

    fn per_threshold(&self) -> Vec<Counts> {
        self.curve
            .iter()
            .map(|c| Counts {
                hits: c.hits,
                predicted: c.predicted,
                truth: self.counts.gt_subgraphs,
            })
            .collect()
    }
}

/// Scores one clip. When `clip` is given, predicted edges must target its
/// centerlines.
pub fn evaluate_clip(
    gt: &[LabeledRule],
    graph: &CorrespondenceGraph,
    pred: &PredictionSet,
    clip: Option<&ClipData>,
    cfg: &EvalConfig,
) -> Result<MetricReport, MetricError> {
    check_threshold(cfg.operating_threshold)?;
    match clip {
        Some(clip) => pred.validate_against(clip)?,
        None => pred.validate()?,
    }
    let grid = threshold_grid(cfg.threshold_count)?;
    let matching = match_rules(gt, &pred.rules);
    let rules = matching.counts();
    let edges = prediction_edge_counts(gt, graph, pred, &matching);
    let operating = overall_counts(graph, pred, &matching, cfg.operating_threshold);
    let per_t: Vec<Counts> = grid
        .iter()
        .map(|&t| overall_counts(graph, pred, &matching, t))
        .collect();
    let counts = ReportCounts {
        gt_rules: rules.truth,
        pred_rules: rules.predicted,
        rule_matches: rules.hits,
        gt_edges: edges.truth,
        pred_edges: edges.predicted,
        edge_hits: edges.hits,
        gt_subgraphs: operating.truth,
        pred_subgraphs: operating.predicted,
        subgraph_hits: operating.hits,
    };
    Ok(MetricReport::from_counts(
        counts,
        cfg.operating_threshold,
        &grid,
        &per_t,
    ))
}

/// Micro-average: numerators and denominators are summed across clips, and
/// AP is recomputed from pooled per-threshold counts.
pub fn aggregate<'a>(
    reports: impl IntoIterator<Item = &'a MetricReport>,
) -> Result<MetricReport, MetricError> {
    let mut iter = reports.into_iter();
    let first = iter.next().ok_or(MetricError::EmptyAggregate)?;
    let grid: Vec<f64> = first.curve.iter().map(|c| c.t).collect();
    let mut counts = first.counts;
    let mut per_t = first.per_threshold();
    for r in iter {
        if r.threshold != first.threshold
            || r.curve.len() != grid.len()
            || r.curve.iter().zip(&grid).any(|(c, t)| c.t != *t)
        {
            return Err(MetricError::GridMismatch);
        }
        let c = r.counts;
        counts.gt_rules += c.gt_rules;
        counts.pred_rules += c.pred_rules;
        counts.rule_matches += c.rule_matches;
        counts.gt_edges += c.gt_edges;
        counts.pred_edges += c.pred_edges;
        counts.edge_hits += c.edge_hits;
        counts.gt_subgraphs += c.gt_subgraphs;
        counts.pred_subgraphs += c.pred_subgraphs;
        counts.subgraph_hits += c.subgraph_hits;
        for (acc, add) in per_t.iter_mut().zip(r.per_threshold()) {
            *acc = *acc + add;
        }
    }
    Ok(MetricReport::from_counts(
        counts,
        first.threshold,
        &grid,
        &per_t,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Direction, EdgeScore, LaneType, Point3};

    fn label(key: &str, rule: Rule, centerlines: &[u32]) -> LabeledRule {
        LabeledRule {
            key: key.into(),
            rule,
            centerline_ids: centerlines.to_vec(),
            semantic_polygon: vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
        }
    }

    fn predicted(rule: Rule, edges: &[(u32, f64)]) -> PredictedRule {
        PredictedRule {
            rule,
            confidence: 1.0,
            centerlines: edges
                .iter()
                .map(|&(id, confidence)| EdgeScore { id, confidence })
                .collect(),
        }
    }

    fn rule(i: &str) -> Rule {
        Rule::unrestricted(LaneType::DirectionLane, i).with_directions([Direction::GoStraight])
    }

    fn graph(labels: &[LabeledRule]) -> CorrespondenceGraph {
        CorrespondenceGraph::from_labels(labels, None).unwrap()
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0, 0, 0), 1.0);
        assert_eq!(ratio(0, 0, 3), 0.0);
        assert_eq!(ratio(2, 4, 1), 0.5);
    }

    #[test]
    fn identical_sets_match_completely() {
        let gt = [label("0", rule("1"), &[]), label("1", rule("2"), &[])];
        let pred = [predicted(rule("2"), &[]), predicted(rule("1"), &[])];
        let m = match_rules(&gt, &pred);
        assert_eq!(m.pairs, vec![("0".to_owned(), 1), ("1".to_owned(), 0)]);
        assert_eq!(rule_extraction_pr(&m), (1.0, 1.0));
    }

    #[test]
    fn matching_is_one_to_one() {
        let gt = [label("0", rule("1"), &[])];
        let pred = [predicted(rule("1"), &[]), predicted(rule("1"), &[])];
        let m = match_rules(&gt, &pred);
        assert_eq!(m.pairs.len(), 1);
        assert_eq!(m.unmatched_pred.len(), 1);
        assert_eq!(rule_extraction_pr(&m), (0.5, 1.0));
    }

    #[test]
    fn empty_prediction_scores_zero() {
        let gt = [label("0", rule("1"), &[3])];
        let m = match_rules(&gt, &[]);
        assert_eq!(rule_extraction_pr(&m), (0.0, 0.0));
        let g = graph(&gt);
        assert_eq!(
            correspondence_pr(&g, &CorrespondenceGraph::default()),
            (0.0, 0.0)
        );
        let (ap, _) = average_precision(&gt, &g, &PredictionSet::default(), 100).unwrap();
        assert_eq!(ap, 0.0);
    }

    #[test]
    fn correspondence_counts() {
        let keys = ["a", "b", "c"].map(String::from).into_iter().collect();
        let ids = (0..8).collect();
        let gt = CorrespondenceGraph::from_edges(
            [("a", 0), ("a", 1), ("b", 2), ("b", 3), ("c", 4), ("c", 5)]
                .map(|(k, i)| (k.to_owned(), i)),
            &keys,
            &ids,
        )
        .unwrap();
        let pred = CorrespondenceGraph::from_edges(
            [("a", 0), ("b", 2), ("c", 4), ("a", 6), ("c", 7)].map(|(k, i)| (k.to_owned(), i)),
            &keys,
            &ids,
        )
        .unwrap();
        assert_eq!(correspondence_pr(&gt, &pred), (3.0 / 5.0, 3.0 / 6.0));
        assert_eq!(correspondence_pr(&gt, &gt), (1.0, 1.0));
    }

    #[test]
    fn wrong_property_kills_the_subgraph() {
        let gt = [label("0", rule("1"), &[5])];
        let mut wrong = rule("1");
        wrong.high_speed_limit = "60".into();
        let pred = PredictionSet {
            rules: vec![predicted(wrong, &[(5, 1.0)])],
        };
        let g = graph(&gt);
        assert_eq!(overall_pr(&gt, &g, &pred, 0.5).unwrap(), (0.0, 0.0));
        let m = match_rules(&gt, &pred.rules);
        // Topology is still right, via the shared RuleIndex.
        assert_eq!(prediction_edge_counts(&gt, &g, &pred, &m).hits, 1);
    }

    #[test]
    fn two_edge_curve_matches_enumeration() {
        // Enumerated by hand over all 100 grid thresholds:
        // t <= 0.4 -> (p, r) = (1/2, 1/2); 0.4 < t <= 0.9 -> (1, 1/2); t > 0.9 -> (0, 0).
        // Deduplicated points (0, 0), (1/2, 1) give an area of 1/4.
        let gt = [label("0", rule("1"), &[1, 2])];
        let pred = PredictionSet {
            rules: vec![predicted(rule("1"), &[(1, 0.9), (3, 0.4)])],
        };
        let (ap, curve) = average_precision(&gt, &graph(&gt), &pred, 100).unwrap();
        assert_eq!(ap, 0.25);
        assert_eq!(curve.len(), 100);
        assert_eq!((curve[0].p, curve[0].r), (0.5, 0.5));
        assert_eq!((curve[50].p, curve[50].r), (1.0, 0.5));
        assert_eq!((curve[99].p, curve[99].r), (0.0, 0.0));
    }

    #[test]
    fn perfect_prediction_has_unit_ap() {
        let gt = [label("0", rule("1"), &[1]), label("1", rule("2"), &[2, 3])];
        let pred = PredictionSet {
            rules: vec![
                predicted(rule("1"), &[(1, 1.0)]),
                predicted(rule("2"), &[(2, 1.0), (3, 1.0)]),
            ],
        };
        let g = graph(&gt);
        let (ap, curve) = average_precision(&gt, &g, &pred, 100).unwrap();
        assert_eq!(ap, 1.0);
        assert!(curve.iter().all(|c| c.p == 1.0 && c.r == 1.0));
        assert_eq!(overall_pr(&gt, &g, &pred, 0.5).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn prepends_recall_zero_point() {
        let pts = [
            CurvePoint {
                t: 0.0,
                p: 0.5,
                r: 1.0,
                hits: 0,
                predicted: 0,
            },
            CurvePoint {
                t: 1.0,
                p: 1.0,
                r: 0.5,
                hits: 0,
                predicted: 0,
            },
        ];
        // (0, 1) -> (0.5, 1) -> (1, 0.5)
        assert_eq!(area_under_curve(&pts), 0.5 + 0.375);
    }

    #[test]
    fn grid_and_threshold_checks() {
        assert_eq!(threshold_grid(1), Err(MetricError::ThresholdCount(1)));
        let g = threshold_grid(100).unwrap();
        assert_eq!((g[0], g[99]), (0.0, 1.0));
        assert!(overall_pr(
            &[],
            &CorrespondenceGraph::default(),
            &PredictionSet::default(),
            1.5
        )
        .is_err());
    }

    #[test]
    fn aggregate_pools_counts() {
        let gt = [label("0", rule("1"), &[1, 2])];
        let half = PredictionSet {
            rules: vec![predicted(rule("1"), &[(1, 1.0), (4, 1.0)])],
        };
        let g = graph(&gt);
        let r = evaluate_clip(&gt, &g, &half, None, &EvalConfig::default()).unwrap();
        assert_eq!((r.p_all, r.r_all), (0.5, 0.5));
        let single = aggregate([&r]).unwrap();
        assert_eq!(single, r);
        let pooled = aggregate([&r, &r]).unwrap();
        assert_eq!(pooled.counts.subgraph_hits, 2);
        assert_eq!(pooled.counts.pred_subgraphs, 4);
        assert_eq!(pooled.p_all, 0.5);
        assert!(matches!(aggregate([]), Err(MetricError::EmptyAggregate)));
    }
}
