use std::collections::BTreeSet;

use super::clip::ClipData;
use super::rule::{normalize_rule, Rule};
use crate::error::ModelError;

/// A predicted association to one centerline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeScore {
    pub id: u32,
    pub confidence: f64,
}

/// A predicted rule plus the centerlines it was associated with.
///
/// Predicted rules are addressed by their position in [`PredictionSet::rules`].
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedRule {
    pub rule: Rule,
    pub confidence: f64,
    pub centerlines: Vec<EdgeScore>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionSet {
    pub rules: Vec<PredictedRule>,
}

fn check_confidence(c: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(ModelError::ConfidenceOutOfRange(c))
    }
}

impl PredictionSet {
    /// All predicted edges as `(rule position, centerline id, confidence)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, u32, f64)> + '_ {
        self.rules
            .iter()
            .enumerate()
            .flat_map(|(pos, r)| r.centerlines.iter().map(move |e| (pos, e.id, e.confidence)))
    }

    pub fn edge_count(&self) -> usize {
        self.rules.iter().map(|r| r.centerlines.len()).sum()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (pos, r) in self.rules.iter().enumerate() {
            r.rule.validate()?;
            check_confidence(r.confidence)?;
            let mut seen = BTreeSet::new();
            for e in &r.centerlines {
                check_confidence(e.confidence)?;
                if !seen.insert(e.id) {
                    return Err(ModelError::DuplicateEdge {
                        rule: pos.to_string(),
                        centerline: e.id,
                    });
                }
            }
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus: every edge targets a centerline of `clip`.
    pub fn validate_against(&self, clip: &ClipData) -> Result<(), ModelError> {
        self.validate()?;
        for (_, id, _) in self.edges() {
            if !clip.vectors.contains_key(&id) {
                return Err(ModelError::UnknownVector(id));
            }
            if !clip.is_centerline(id) {
                return Err(ModelError::NotCenterline(id));
            }
        }
        Ok(())
    }

    /// Positions of `rules` sorted into a canonical order that does not depend
    /// on the order in which the predictions were listed. Entries that compare
    /// equal are indistinguishable for every metric.
    pub fn canonical_order(&self) -> Vec<usize> {
        canonical_order(&self.rules)
    }
}

/// See [`PredictionSet::canonical_order`].
pub fn canonical_order(rules: &[PredictedRule]) -> Vec<usize> {
    let keys: Vec<_> = rules
        .iter()
        .map(|r| {
            let mut edges: Vec<(u32, u64)> = r
                .centerlines
                .iter()
                .map(|e| (e.id, e.confidence.to_bits()))
                .collect();
            edges.sort_unstable();
            (normalize_rule(&r.rule), edges, r.confidence.to_bits())
        })
        .collect();
    let mut order: Vec<usize> = (0..rules.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
    order
}
