use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

use mapdr_core::baseline::infer_correspondence;
use mapdr_core::geometry::lateral_order;
use mapdr_core::io::{parse_clip, write_clip};
use mapdr_core::metrics::{aggregate, evaluate_clip};
use mapdr_core::synth::{corrupt, generate_clip, CorruptionSpec, SceneConfig};
use mapdr_core::{EvalConfig, LaneVector};

fn corpus(n: u64) -> Vec<(mapdr_core::synth::SynthScene, mapdr_core::PredictionSet)> {
    let spec = CorruptionSpec::preset("noisy").expect("preset");
    (0..n)
        .map(|seed| {
            let s = generate_clip(&SceneConfig::new(8, 8), seed).expect("valid config");
            let (p, _) = corrupt(&s.labels, &s.clip, &spec, seed).expect("distinct indices");
            (s, p)
        })
        .collect()
}

fn metrics(c: &mut Criterion) {
    let data = corpus(64);
    let cfg = EvalConfig::default();
    c.bench_function("evaluate_clip 8 lanes", |b| {
        let (s, p) = &data[0];
        b.iter(|| evaluate_clip(&s.labels, &s.graph, black_box(p), Some(&s.clip), &cfg))
    });
    c.bench_function("evaluate + aggregate 64 clips", |b| {
        b.iter(|| {
            let reports: Vec<_> = data
                .iter()
                .map(|(s, p)| evaluate_clip(&s.labels, &s.graph, p, Some(&s.clip), &cfg).unwrap())
                .collect();
            aggregate(&reports).unwrap()
        })
    });
}

fn formats(c: &mut Criterion) {
    let s = generate_clip(&SceneConfig::new(8, 8), 1).expect("valid config");
    let bytes = write_clip(&s.clip);
    c.bench_function("parse_clip", |b| {
        b.iter(|| parse_clip(black_box(&bytes)).unwrap())
    });
    c.bench_function("write_clip", |b| b.iter(|| write_clip(black_box(&s.clip))));
}

fn geometry(c: &mut Criterion) {
    let s = generate_clip(&SceneConfig::new(8, 8), 2).expect("valid config");
    let rules: Vec<_> = s.labels.iter().map(|l| l.rule.clone()).collect();
    c.bench_function("lateral_order 8 lanes", |b| {
        let lines: Vec<&LaneVector> = s.clip.centerlines().collect();
        b.iter(|| lateral_order(black_box(&lines), &s.clip.sign_quad).unwrap())
    });
    c.bench_function("baseline 8 rules", |b| {
        b.iter(|| infer_correspondence(black_box(&rules), &s.clip).unwrap())
    });
    c.bench_function("generate_clip", |b| {
        b.iter_batched(
            || SceneConfig::new(8, 8),
            |cfg| generate_clip(&cfg, 3).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, metrics, formats, geometry);
criterion_main!(benches);
