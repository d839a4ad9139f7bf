mod common;

use std::fs;

use mapdr_core::io::{
    list_clip_dirs, parse_clip, parse_labels, parse_prediction, read_clip_dir, write_clip,
    write_clip_dir, write_labels, write_prediction, Severity, DATA_FILE, LABEL_FILE,
};
use mapdr_core::synth::{corrupt, worked_example, generate_clip, CorruptionSpec, SceneConfig};
use mapdr_core::{Direction, LaneType, VecType};
use serde_json::Value;

fn sample_bytes(name: &str) -> Vec<u8> {
    fs::read(common::sample_dir().join(name)).unwrap()
}

/// Every number in a document, in traversal order.
fn numbers(v: &Value, out: &mut Vec<f64>) {
    match v {
        Value::Number(n) => out.push(n.as_f64().unwrap()),
        Value::Array(a) => a.iter().for_each(|x| numbers(x, out)),
        Value::Object(m) => m.values().for_each(|x| numbers(x, out)),
        _ => {}
    }
}

#[test]
fn sample_clip_parses_strictly() {
    let parsed = parse_clip(&sample_bytes(DATA_FILE)).unwrap();
    assert!(parsed.warnings.is_empty(), "{:?}", parsed.warnings);
    let clip = parsed.value;
    assert_eq!(clip.vectors.len(), 3);
    assert_eq!(clip.vectors[&0].vec_type, VecType::RoadBoundary);
    assert_eq!(clip.vectors[&0].points.len(), 8);
    assert_eq!(clip.centerline_ids(), vec![16, 17]);
    assert_eq!(clip.intrinsics.fx.to_bits(), 904.9299114165748f64.to_bits());
    assert_eq!(clip.intrinsics.cy.to_bits(), 623.7475554790544f64.to_bits());
    let pose = &clip.poses["1710907374739989000"];
    assert_eq!(pose.tvec.x.to_bits(), 6217.6643413086995f64.to_bits());
    assert_eq!(pose.rvec[3].to_bits(), 0.2707879063036554f64.to_bits());
    assert_eq!(
        clip.sign_quad[1].z.to_bits(),
        (-53.601367057301104f64).to_bits()
    );
}

#[test]
fn sample_labels_parse_strictly() {
    let clip = parse_clip(&sample_bytes(DATA_FILE)).unwrap().value;
    let parsed = parse_labels(&sample_bytes(LABEL_FILE), &clip, true).unwrap();
    assert!(parsed.warnings.is_empty());
    let labels = parsed.value;
    assert_eq!(labels.rules.len(), 2);
    let first = &labels.rules[0];
    assert_eq!(first.key, "0");
    assert_eq!(first.rule.lane_type, LaneType::DirectionLane);
    assert_eq!(first.rule.rule_index, "1");
    assert_eq!(
        first
            .rule
            .lane_direction
            .iter()
            .copied()
            .collect::<Vec<_>>(),
        vec![Direction::GoStraight, Direction::TurnLeft]
    );
    assert_eq!(first.centerline_ids, vec![17]);
    assert_eq!(labels.rules[1].centerline_ids, vec![16]);
    assert!(labels.graph.contains("0", 17));
    assert!(labels.graph.contains("1", 16));
    assert_eq!(labels.graph.len(), 2);
}

#[test]
fn sample_round_trip_is_stable_and_lossless() {
    let raw = sample_bytes(DATA_FILE);
    let clip = parse_clip(&raw).unwrap().value;
    let once = write_clip(&clip);
    let twice = write_clip(&parse_clip(&once).unwrap().value);
    assert_eq!(once, twice);

    let mut before = Vec::new();
    let mut after = Vec::new();
    numbers(&serde_json::from_slice(&raw).unwrap(), &mut before);
    numbers(&serde_json::from_slice(&once).unwrap(), &mut after);
    let bits = |v: &[f64]| {
        let mut b: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
        b.sort_unstable();
        b
    };
    assert_eq!(bits(&before), bits(&after));
    assert!(String::from_utf8(once)
        .unwrap()
        .contains("904.9299114165748"));

    let labels = parse_labels(&sample_bytes(LABEL_FILE), &clip, true)
        .unwrap()
        .value;
    let once = write_labels(&labels.rules);
    let again = parse_labels(&once, &clip, true).unwrap().value;
    assert_eq!(again.rules, labels.rules);
    assert_eq!(write_labels(&again.rules), once);
}

#[test]
fn truncated_file_reports_location() {
    let raw = sample_bytes(DATA_FILE);
    let err = parse_clip(&raw[..raw.len() / 2]).unwrap_err();
    let first = err.errors().next().unwrap();
    assert_eq!(first.severity, Severity::Error);
    assert!(first.message.contains("line"), "{}", first.message);
}

#[test]
fn sample_labels_without_their_centerlines() {
    let mut doc: Value = serde_json::from_slice(&sample_bytes(DATA_FILE)).unwrap();
    doc["vector"].as_object_mut().unwrap().remove("17");
    let clip = parse_clip(&serde_json::to_vec(&doc).unwrap())
        .unwrap()
        .value;
    let err = parse_labels(&sample_bytes(LABEL_FILE), &clip, true).unwrap_err();
    assert_eq!(err.errors().next().unwrap().path, "/0/centerline/0");
    let lenient = parse_labels(&sample_bytes(LABEL_FILE), &clip, false).unwrap();
    assert_eq!(lenient.warnings.len(), 1);
    assert!(lenient.value.rules[0].centerline_ids.is_empty());
}

#[test]
fn worked_example_survives_the_file_layout() {
    let ex = worked_example();
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("clip");
    write_clip_dir(&dir, &ex.clip, Some(&ex.labels), Some(&ex.prediction)).unwrap();
    let bundle = read_clip_dir(&dir, true).unwrap();
    assert!(bundle.warnings.is_empty());
    assert_eq!(bundle.clip, ex.clip);
    let labels = bundle.labels.unwrap();
    assert_eq!(labels.rules, ex.labels);
    assert_eq!(labels.graph, ex.graph);
    assert_eq!(bundle.prediction.unwrap(), ex.prediction);
    assert_eq!(list_clip_dirs(tmp.path()).unwrap(), vec![dir.clone()]);
    assert_eq!(list_clip_dirs(&dir).unwrap(), vec![dir]);
}

#[test]
fn generated_files_round_trip() {
    for seed in 0..20 {
        let s = generate_clip(&SceneConfig::sampled(seed), seed).unwrap();
        let bytes = write_clip(&s.clip);
        let clip = parse_clip(&bytes).unwrap().value;
        assert_eq!(clip, s.clip);
        let labels = parse_labels(&write_labels(&s.labels), &clip, true)
            .unwrap()
            .value;
        assert_eq!(labels.rules, s.labels);
        let spec = CorruptionSpec::preset("noisy").unwrap();
        let (pred, _) = corrupt(&s.labels, &s.clip, &spec, seed).unwrap();
        let bytes = write_prediction(&pred);
        assert_eq!(parse_prediction(&bytes).unwrap().value, pred);
        assert_eq!(
            write_prediction(&parse_prediction(&bytes).unwrap().value),
            bytes
        );
    }
}

#[test]
fn unknown_prediction_keys_are_errors() {
    let bad = br#"{"rules": [], "extra": 1}"#;
    let err = parse_prediction(bad).unwrap_err();
    assert_eq!(err.errors().next().unwrap().path, "/extra");
}
