use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::clip::{count_distinct, ClipData, Point3};
use super::rule::Rule;
use crate::error::ModelError;

/// An annotated rule: its properties, the centerlines it governs and the
/// outline of the sign region that expresses it.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRule {
    pub key: String,
    pub rule: Rule,
    pub centerline_ids: Vec<u32>,
    pub semantic_polygon: Vec<Point3>,
}

impl LabeledRule {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.rule.validate()?;
        if self.semantic_polygon.iter().any(|p| !p.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        if count_distinct(self.semantic_polygon.iter().map(|p| p.to_array().to_vec())) < 3 {
            return Err(ModelError::DegeneratePolygon);
        }
        Ok(())
    }
}

/// Orders label keys numerically when both parse as integers, textually otherwise.
pub fn compare_rule_keys(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Bipartite rule-to-centerline edges. Rule endpoints are label keys,
/// centerline endpoints are vector ids, so same-side edges cannot be expressed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorrespondenceGraph {
    edges: BTreeSet<(String, u32)>,
}

impl CorrespondenceGraph {
    /// Builds the graph from the labels' centerline lists, checking every
    /// endpoint against the label keys and, when given, the clip's centerlines.
    pub fn from_labels(
        labels: &[LabeledRule],
        clip: Option<&ClipData>,
    ) -> Result<Self, ModelError> {
        let mut edges = BTreeSet::new();
        for label in labels {
            for &id in &label.centerline_ids {
                if let Some(clip) = clip {
                    if !clip.vectors.contains_key(&id) {
                        return Err(ModelError::UnknownVector(id));
                    }
                    if !clip.is_centerline(id) {
                        return Err(ModelError::NotCenterline(id));
                    }
                }
                if !edges.insert((label.key.clone(), id)) {
                    return Err(ModelError::DuplicateEdge {
                        rule: label.key.clone(),
                        centerline: id,
                    });
                }
            }
        }
        Ok(CorrespondenceGraph { edges })
    }

    pub fn from_edges(
        edges: impl IntoIterator<Item = (String, u32)>,
        rule_keys: &BTreeSet<String>,
        centerline_ids: &BTreeSet<u32>,
    ) -> Result<Self, ModelError> {
        let mut out = BTreeSet::new();
        for (rule, id) in edges {
            if !rule_keys.contains(&rule) {
                return Err(ModelError::UnknownRule(rule));
            }
            if !centerline_ids.contains(&id) {
                return Err(ModelError::UnknownVector(id));
            }
            if out.contains(&(rule.clone(), id)) {
                return Err(ModelError::DuplicateEdge {
                    rule,
                    centerline: id,
                });
            }
            out.insert((rule, id));
        }
        Ok(CorrespondenceGraph { edges: out })
    }

    pub fn contains(&self, rule_key: &str, centerline: u32) -> bool {
        self.edges.contains(&(rule_key.to_owned(), centerline))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, u32)> {
        self.edges.iter().map(|(k, id)| (k.as_str(), *id))
    }

    /// Number of edges incident to `rule_key`.
    pub fn degree(&self, rule_key: &str) -> usize {
        self.edges.iter().filter(|(k, _)| k == rule_key).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LaneType;

    fn label(key: &str, ids: &[u32]) -> LabeledRule {
        LabeledRule {
            key: key.into(),
            rule: Rule::unrestricted(LaneType::BusLane, key),
            centerline_ids: ids.to_vec(),
            semantic_polygon: vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 1.0),
            ],
        }
    }

    #[test]
    fn keys_sort_numerically() {
        let mut keys = vec!["10", "2", "b", "0", "a"];
        keys.sort_by(|a, b| compare_rule_keys(a, b));
        assert_eq!(keys, ["0", "2", "10", "a", "b"]);
    }

    #[test]
    fn graph_from_labels() {
        let g = CorrespondenceGraph::from_labels(&[label("0", &[17]), label("1", &[16, 3])], None)
            .unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.contains("0", 17));
        assert!(!g.contains("0", 16));
        assert_eq!(g.degree("1"), 2);
    }

    #[test]
    fn duplicate_edge_rejected() {
        let err = CorrespondenceGraph::from_labels(&[label("0", &[1, 1])], None).unwrap_err();
        assert!(matches!(err, ModelError::DuplicateEdge { .. }));
    }

    #[test]
    fn from_edges_checks_endpoints() {
        let keys = BTreeSet::from(["0".to_owned()]);
        let ids = BTreeSet::from([4]);
        assert!(CorrespondenceGraph::from_edges([("0".to_owned(), 4)], &keys, &ids).is_ok());
        assert_eq!(
            CorrespondenceGraph::from_edges([("1".to_owned(), 4)], &keys, &ids),
            Err(ModelError::UnknownRule("1".into()))
        );
        assert_eq!(
            CorrespondenceGraph::from_edges([("0".to_owned(), 5)], &keys, &ids),
            Err(ModelError::UnknownVector(5))
        );
    }

    #[test]
    fn degenerate_semantic_polygon() {
        let mut l = label("0", &[]);
        l.semantic_polygon.truncate(2);
        assert_eq!(l.validate(), Err(ModelError::DegeneratePolygon));
    }
}
