//! Brute-force reference scorers shared by the integration tests. They are
//! written against the definitions directly and share no code with the
//! metrics module.

#![allow(dead_code)]

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use mapdr_core::{rules_equal, LabeledRule, PredictionSet};

pub fn sample_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/sample"))
}

fn frac(n: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Empty denominators: 1 when the other side is empty too, else 0.
fn exact_ratio(hits: usize, den: usize, other: usize) -> BigRational {
    match (den, other) {
        (0, 0) => frac(1, 1),
        (0, _) => frac(0, 1),
        _ => frac(hits, den),
    }
}

/// Overall `(hits, predicted)` at one threshold, recounted from scratch.
/// Assumes ground-truth rules are pairwise distinct, as are predicted rules.
pub fn subgraph_counts(gt: &[LabeledRule], pred: &PredictionSet, t: f64) -> (usize, usize) {
    let mut hits = 0;
    let mut predicted = 0;
    for r in &pred.rules {
        let label = gt.iter().find(|l| rules_equal(&l.rule, &r.rule));
        for e in &r.centerlines {
            if e.confidence < t {
                continue;
            }
            predicted += 1;
            if label.is_some_and(|l| l.centerline_ids.contains(&e.id)) {
                hits += 1;
            }
        }
    }
    (hits, predicted)
}

/// AP over `n` thresholds `i / (n - 1)`, in exact rational arithmetic.
pub fn brute_force_ap(gt: &[LabeledRule], pred: &PredictionSet, n: usize) -> f64 {
    let truth: usize = gt.iter().map(|l| l.centerline_ids.len()).sum();
    let mut points: Vec<(BigRational, BigRational)> = Vec::new();
    let mut p_top = frac(0, 1);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let (hits, predicted) = subgraph_counts(gt, pred, t);
        let p = exact_ratio(hits, predicted, truth);
        let r = exact_ratio(hits, truth, predicted);
        if i == n - 1 {
            p_top = p.clone();
        }
        points.push((r, p));
    }
    // Highest precision per distinct recall.
    points.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    points.dedup_by(|later, first| later.0 == first.0);
    if !points[0].0.is_zero() {
        points.insert(0, (frac(0, 1), p_top));
    }
    let two = frac(2, 1);
    let mut area = frac(0, 1);
    for w in points.windows(2) {
        area += (&w[1].0 - &w[0].0) * (&w[0].1 + &w[1].1) / &two;
    }
    area.to_f64().expect("finite")
}
