//! Non-learned reference predictor.
//!
//! Rules are tied to lanes by reading `RuleIndex` as a 1-based position in
//! the left-to-right order of centerlines. That holds for the synthetic
//! scenes by construction and roughly for real signs that print one column
//! per lane; it is a floor for exercising the metrics, not a model.

use thiserror::Error;

use crate::geometry::{lateral_order, GeometryError};
use crate::model::{
    ClipData, EdgeScore, LaneVector, OcrObservation, OcrPolygon, PredictedRule, PredictionSet, Rule,
};

pub const DEFAULT_CLUSTER_THRESHOLD: f64 = 0.5;
const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("similarity matrix row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("similarity[{0}][{1}] is not symmetric")]
    Asymmetric(usize, usize),
    #[error("similarity[{0}][{1}] = {2} outside [-1, 1]")]
    OutOfRange(usize, usize, f64),
    #[error("similarity[{0}][{0}] = {1}, expected 1")]
    Diagonal(usize, f64),
    #[error("threshold {0} outside (-1, 1)")]
    Threshold(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Validated pairwise similarity, e.g. cosine similarity of embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self, BaselineError> {
        let n = values.len();
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(BaselineError::NotSquare {
                    row: i,
                    len: row.len(),
                    n,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !(-1.0..=1.0).contains(&v) {
                    return Err(BaselineError::OutOfRange(i, j, v));
                }
            }
            if row[i] != 1.0 {
                return Err(BaselineError::Diagonal(i, row[i]));
            }
        }
        for (i, row) in values.iter().enumerate() {
            for (j, v) in row.iter().enumerate().skip(i + 1) {
                if (v - values[j][i]).abs() > SYMMETRY_TOLERANCE {
                    return Err(BaselineError::Asymmetric(i, j));
                }
            }
        }
        Ok(SimilarityMatrix { values })
    }

    pub fn identity(n: usize) -> Self {
        let values = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        SimilarityMatrix { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Connected components of the graph linking `i` and `j` when
/// `sim[i][j] >= tau`. Clusters are listed by smallest member, members in
/// ascending order.
pub fn cluster_by_similarity(
    sim: &SimilarityMatrix,
    tau: f64,
) -> Result<Vec<Vec<usize>>, BaselineError> {
    if !(tau > -1.0 && tau < 1.0) {
        return Err(BaselineError::Threshold(tau));
    }
    let n = sim.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            // Upper triangle only, so rounding asymmetry cannot matter.
            if sim.get(i, j) >= tau {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[slot[root]].push(i);
    }
    Ok(clusters)
}

/// Predicts one rule per input rule, each linked to the centerline whose
/// 1-based left-to-right position equals its `RuleIndex`. Rules whose index
/// is not such a position get no edges.
pub fn infer_correspondence(
    rules: &[Rule],
    clip: &ClipData,
) -> Result<PredictionSet, BaselineError> {
    let lines: Vec<&LaneVector> = clip.centerlines().collect();
    let order = lateral_order(&lines, &clip.sign_quad)?;
    let rules = rules
        .iter()
        .map(|rule| {
            let target = rule
                .rule_index
                .trim()
                .parse::<usize>()
                .ok()
                .and_then(|i| i.checked_sub(1))
                .and_then(|i| order.get(i).copied());
            PredictedRule {
                rule: rule.clone(),
                confidence: 1.0,
                centerlines: target
                    .map(|id| EdgeScore {
                        id,
                        confidence: 1.0,
                    })
                    .into_iter()
                    .collect(),
            }
        })
        .collect();
    Ok(PredictionSet { rules })
}

type Bbox = ([f64; 2], [f64; 2]);

fn bbox(points: impl Iterator<Item = [f64; 2]>) -> Bbox {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn iou(a: &Bbox, b: &Bbox) -> f64 {
    let area = |lo: [f64; 2], hi: [f64; 2]| (hi[0] - lo[0]).max(0.0) * (hi[1] - lo[1]).max(0.0);
    let inter = area(
        [a.0[0].max(b.0[0]), a.0[1].max(b.0[1])],
        [a.1[0].min(b.1[0]), a.1[1].min(b.1[1])],
    );
    let union = area(a.0, a.1) + area(b.0, b.1) - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// Axis-aligned boxes of every observation in a shared 2D frame. World
/// polygons drop the coordinate axis with the smallest spread over all
/// world points, which for a planar sign is the one normal to it.
fn boxes(obs: &[OcrObservation]) -> Vec<Bbox> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for o in obs {
        if let OcrPolygon::World(pts) = &o.polygon {
            for p in pts {
                for (k, c) in p.to_array().into_iter().enumerate() {
                    lo[k] = lo[k].min(c);
                    hi[k] = hi[k].max(c);
                }
            }
        }
    }
    let flat = (0..3)
        .min_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap_or(2);
    let keep: Vec<usize> = (0..3).filter(|&k| k != flat).collect();
    obs.iter()
        .map(|o| match &o.polygon {
            OcrPolygon::Pixel(pts) => bbox(pts.iter().copied()),
            OcrPolygon::World(pts) => bbox(pts.iter().map(|p| {
                let a = p.to_array();
                [a[keep[0]], a[keep[1]]]
            })),
        })
        .collect()
}

/// Groups sign elements whose boxes overlap with IoU at least `tau`.
/// Mixed pixel and world polygons are compared only within their own kind.
pub fn group_observations(
    obs: &[OcrObservation],
    tau: f64,
) -> Result<Vec<Vec<usize>>, BaselineError> {
    let b = boxes(obs);
    let same_kind = |i: usize, j: usize| {
        matches!(
            (&obs[i].polygon, &obs[j].polygon),
            (OcrPolygon::World(_), OcrPolygon::World(_))
                | (OcrPolygon::Pixel(_), OcrPolygon::Pixel(_))
        )
    };
    let values = (0..obs.len())
        .map(|i| {
            (0..obs.len())
                .map(|j| {
                    if i == j {
                        1.0
                    } else if same_kind(i, j) {
                        iou(&b[i], &b[j])
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    cluster_by_similarity(&SimilarityMatrix::new(values)?, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LaneType, Point3};
    use crate::synth::{generate_clip, SceneConfig};

    fn matrix(v: &[&[f64]]) -> SimilarityMatrix {
        SimilarityMatrix::new(v.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn identity_gives_singletons() {
        let c = cluster_by_similarity(&SimilarityMatrix::identity(4), 0.5).unwrap();
        assert_eq!(c, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn all_ones_gives_one_cluster() {
        let m = matrix(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]);
        assert_eq!(cluster_by_similarity(&m, 0.5).unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn forced_components() {
        let m = matrix(&[&[1.0, 0.8, 0.1], &[0.8, 1.0, 0.1], &[0.1, 0.1, 1.0]]);
        assert_eq!(
            cluster_by_similarity(&m, 0.5).unwrap(),
            vec![vec![0, 1], vec![2]]
        );
    }

    #[test]
    fn transitive_chain_labels_by_smallest_member() {
        let m = matrix(&[
            &[1.0, 0.0, 0.9, 0.0],
            &[0.0, 1.0, 0.0, 0.9],
            &[0.9, 0.0, 1.0, 0.0],
            &[0.0, 0.9, 0.0, 1.0],
        ]);
        assert_eq!(
            cluster_by_similarity(&m, 0.5).unwrap(),
            vec![vec![0, 2], vec![1, 3]]
        );
    }

    #[test]
    fn invalid_matrices_rejected() {
        let asym = vec![vec![1.0, 0.5], vec![0.4, 1.0]];
        assert_eq!(
            SimilarityMatrix::new(asym),
            Err(BaselineError::Asymmetric(0, 1))
        );
        let range = vec![vec![1.0, 1.5], vec![1.5, 1.0]];
        assert!(matches!(
            SimilarityMatrix::new(range),
            Err(BaselineError::OutOfRange(..))
        ));
        let diag = vec![vec![0.9]];
        assert!(matches!(
            SimilarityMatrix::new(diag),
            Err(BaselineError::Diagonal(..))
        ));
        let ragged = vec![vec![1.0, 0.0], vec![1.0]];
        assert!(matches!(
            SimilarityMatrix::new(ragged),
            Err(BaselineError::NotSquare { .. })
        ));
        assert!(cluster_by_similarity(&SimilarityMatrix::identity(2), 1.0).is_err());
    }

    #[test]
    fn clean_scene_reproduces_ground_truth() {
        let s = generate_clip(&SceneConfig::new(5, 4), 2).unwrap();
        let rules: Vec<Rule> = s.labels.iter().map(|l| l.rule.clone()).collect();
        let pred = infer_correspondence(&rules, &s.clip).unwrap();
        for (p, l) in pred.rules.iter().zip(&s.labels) {
            assert_eq!(p.rule, l.rule);
            assert_eq!(p.confidence, 1.0);
            let ids: Vec<u32> = p.centerlines.iter().map(|e| e.id).collect();
            assert_eq!(ids, l.centerline_ids);
        }
    }

    #[test]
    fn unusable_index_gets_no_edges() {
        let s = generate_clip(&SceneConfig::new(3, 1), 0).unwrap();
        let rules = [
            Rule::unrestricted(LaneType::BusLane, "None"),
            Rule::unrestricted(LaneType::BusLane, "7"),
            Rule::unrestricted(LaneType::BusLane, "0"),
            Rule::unrestricted(LaneType::BusLane, "3"),
        ];
        let pred = infer_correspondence(&rules, &s.clip).unwrap();
        let counts: Vec<usize> = pred.rules.iter().map(|r| r.centerlines.len()).collect();
        assert_eq!(counts, vec![0, 0, 0, 1]);
        assert_eq!(pred.rules[3].centerlines[0].id, s.lateral[2]);
    }

    #[test]
    fn no_centerlines_is_an_error() {
        let mut s = generate_clip(&SceneConfig::new(2, 1), 0).unwrap();
        let ids = s.clip.centerline_ids();
        for id in ids {
            s.clip.vectors.remove(&id);
        }
        assert_eq!(
            infer_correspondence(&[], &s.clip),
            Err(BaselineError::Geometry(GeometryError::NoCenterlines))
        );
    }

    #[test]
    fn overlapping_boxes_group() {
        let px = |x0: f64, y0: f64, x1: f64, y1: f64| OcrObservation {
            polygon: OcrPolygon::Pixel(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]),
            text: String::new(),
        };
        let wd = |y0: f64, y1: f64| OcrObservation {
            polygon: OcrPolygon::World(vec![
                Point3::new(50.0, y0, 5.0),
                Point3::new(50.0, y1, 5.0),
                Point3::new(50.0, y1, 6.0),
                Point3::new(50.0, y0, 6.0),
            ]),
            text: String::new(),
        };
        let obs = [
            px(0.0, 0.0, 10.0, 10.0),
            px(1.0, 1.0, 10.0, 10.0),
            px(20.0, 20.0, 30.0, 30.0),
            wd(0.0, 2.0),
            wd(0.2, 2.0),
        ];
        let groups = group_observations(&obs, 0.5).unwrap();
        assert_eq!(groups, vec![vec![0, 1], vec![2], vec![3, 4]]);
    }
}
