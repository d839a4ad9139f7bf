use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::{number, point_value, to_canonical_bytes, Issues, ParseError, Parsed, Pointer};
use crate::model::{
    CameraIntrinsics, CameraPose, ClipData, LaneVector, Point3, VecType, QUATERNION_TOLERANCE,
};

const CLIP_KEYS: [&str; 4] = [
    "traffic_board_pose",
    "vector",
    "camera_intrinsic_matrix",
    "camera_pose",
];

/// Parses a clip data file. Frames are not part of the document; see
/// [`read_clip_dir`](super::read_clip_dir).
pub fn parse_clip(bytes: &[u8]) -> Result<Parsed<ClipData>, ParseError> {
    let mut issues = Issues::default();
    let clip = issues
        .parse_document(bytes)
        .and_then(|doc| clip_from_value(&doc, &mut issues));
    issues.finish(clip)
}

fn clip_from_value(doc: &Value, iss: &mut Issues) -> Option<ClipData> {
    let root = Pointer::root();
    let obj = iss.object(doc, &root)?;
    iss.warn_unknown_keys(obj, &CLIP_KEYS, &root);

    let sign_quad = iss
        .field(obj, "traffic_board_pose", &root)
        .and_then(|v| sign_quad(v, &root.push("traffic_board_pose"), iss));
    let vectors = iss
        .field(obj, "vector", &root)
        .and_then(|v| vectors(v, &root.push("vector"), iss));
    let intrinsics = iss
        .field(obj, "camera_intrinsic_matrix", &root)
        .and_then(|v| intrinsics(v, &root.push("camera_intrinsic_matrix"), iss));
    let poses = iss
        .field(obj, "camera_pose", &root)
        .and_then(|v| poses(v, &root.push("camera_pose"), iss));

    Some(ClipData {
        sign_quad: sign_quad?,
        vectors: vectors?,
        intrinsics: intrinsics?,
        poses: poses?,
        frames: Vec::new(),
    })
}

fn sign_quad(v: &Value, at: &Pointer, iss: &mut Issues) -> Option<[Point3; 4]> {
    let pts = iss.points(v, at, 0)?;
    match <[Point3; 4]>::try_from(pts) {
        Ok(quad) => Some(quad),
        Err(pts) => {
            iss.error(
                at,
                format!("expected exactly 4 points, found {}", pts.len()),
            );
            None
        }
    }
}

pub(super) fn decimal_id(key: &str, at: &Pointer, iss: &mut Issues) -> Option<u32> {
    match key.parse::<u32>() {
        Ok(id) if key.bytes().all(|b| b.is_ascii_digit()) => {
            if id.to_string() != key {
                iss.warn(at, format!("non-canonical id {key:?} read as {id}"));
            }
            Some(id)
        }
        _ => {
            iss.error(at, format!("vector key {key:?} is not a decimal id"));
            None
        }
    }
}

fn vec_type(v: &Value, at: &Pointer, iss: &mut Issues) -> Option<VecType> {
    let code = match v {
        Value::String(s) => s
            .parse::<u8>()
            .ok()
            .filter(|_| s.bytes().all(|b| b.is_ascii_digit())),
        Value::Number(n) => {
            iss.warn(at, "vector type should be a string code");
            n.as_u64().and_then(|c| u8::try_from(c).ok())
        }
        _ => None,
    };
    let parsed = code.and_then(VecType::from_code);
    if parsed.is_none() {
        iss.error(at, format!("unknown vector type {v}"));
    }
    parsed
}

fn vectors(v: &Value, at: &Pointer, iss: &mut Issues) -> Option<BTreeMap<u32, LaneVector>> {
    let obj = iss.object(v, at)?;
    let mut out = BTreeMap::new();
    let mut ok = true;
    for (key, entry) in obj {
        let here = at.push(key);
        let parsed = vector_entry(key, entry, &here, iss);
        match parsed {
            Some(vector) => {
                if let std::collections::btree_map::Entry::Vacant(slot) = out.entry(vector.id) {
                    slot.insert(vector);
                } else {
                    iss.error(&here, format!("duplicate vector id {}", vector.id));
                    ok = false;
                }
            }
            None => ok = false,
        }
    }
    ok.then_some(out)
}

fn vector_entry(key: &str, v: &Value, at: &Pointer, iss: &mut Issues) -> Option<LaneVector> {
    let id = decimal_id(key, at, iss);
    let obj: &Map<String, Value> = iss.object(v, at)?;
    iss.warn_unknown_keys(obj, &["type", "vec_geo"], at);
    let vec_type = iss
        .field(obj, "type", at)
        .and_then(|t| vec_type(t, &at.push("type"), iss));
    let points = iss
        .field(obj, "vec_geo", at)
        .and_then(|g| iss.points(g, &at.push("vec_geo"), 2));
    Some(LaneVector {
        id: id?,
        vec_type: vec_type?,
        points: points?,
    })
}

fn intrinsics(v: &Value, at: &Pointer, iss: &mut Issues) -> Option<CameraIntrinsics> {
    let rows = iss.array(v, at)?;
    if rows.len() != 3 {
        iss.error(
            at,
            format!("expected a 3x3 matrix, found {} rows", rows.len()),
        );
        return None;
    }
    let mut m = [[0.0; 3]; 3];
    let mut ok = true;
    for (r, row) in rows.iter().enumerate() {
        match iss.numbers(row, &at.push(r), 3) {
            Some(vals) => m[r].copy_from_slice(&vals),
            None => ok = false,
        }
    }
    if !ok {
        return None;
    }
    for (r, c, want) in [
        (0, 1, 0.0),
        (1, 0, 0.0),
        (2, 0, 0.0),
        (2, 1, 0.0),
        (2, 2, 1.0),
    ] {
        if m[r][c] != want {
            iss.error(
                &at.push(r).push(c),
                format!("expected {want:?} in a pinhole matrix, found {:?}", m[r][c]),
            );
            ok = false;
        }
    }
    for (r, c) in [(0, 0), (1, 1)] {
        if m[r][c] <= 0.0 {
            iss.error(&at.push(r).push(c), "focal length must be positive");
            ok = false;
        }
    }
    ok.then_some(CameraIntrinsics {
        fx: m[0][0],
        fy: m[1][1],
        cx: m[0][2],
        cy: m[1][2],
    })
}

fn poses(v: &Value, at: &Pointer, iss: &mut Issues) -> Option<BTreeMap<String, CameraPose>> {
    let obj = iss.object(v, at)?;
    if obj.is_empty() {
        iss.error(at, "at least one camera pose is required");
        return None;
    }
    let mut out = BTreeMap::new();
    let mut ok = true;
    for (ts, entry) in obj {
        let here = at.push(ts);
        if ts.is_empty() || !ts.bytes().all(|b| b.is_ascii_digit()) {
            iss.error(
                &here,
                format!("timestamp key {ts:?} is not a nanosecond epoch"),
            );
            ok = false;
            continue;
        }
        match pose_entry(ts, entry, &here, iss) {
            Some(p) => {
                out.insert(ts.clone(), p);
            }
            None => ok = false,
        }
    }
    ok.then_some(out)
}

fn pose_entry(ts: &str, v: &Value, at: &Pointer, iss: &mut Issues) -> Option<CameraPose> {
    let obj = iss.object(v, at)?;
    iss.warn_unknown_keys(obj, &["tvec_enu", "rvec_enu"], at);
    let tvec = iss
        .field(obj, "tvec_enu", at)
        .and_then(|t| iss.point(t, &at.push("tvec_enu")));
    let rvec = iss.field(obj, "rvec_enu", at).and_then(|r| {
        let here = at.push("rvec_enu");
        let q = iss.numbers(r, &here, 4)?;
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > QUATERNION_TOLERANCE {
            iss.error(
                &here,
                format!("quaternion norm {norm} is not within 1e-3 of 1"),
            );
            return None;
        }
        Some([q[0], q[1], q[2], q[3]])
    });
    Some(CameraPose {
        timestamp: ts.to_owned(),
        tvec: tvec?,
        rvec: rvec?,
    })
}

/// Serializes `clip` in canonical form. `clip.frames` is not written.
pub fn write_clip(clip: &ClipData) -> Vec<u8> {
    let mut root = Map::new();
    root.insert(
        "traffic_board_pose".into(),
        Value::Array(clip.sign_quad.iter().map(point_value).collect()),
    );
    let vectors: Map<String, Value> = clip
        .vectors
        .values()
        .map(|v| {
            let mut entry = Map::new();
            entry.insert("type".into(), Value::String(v.vec_type.code().to_string()));
            entry.insert(
                "vec_geo".into(),
                Value::Array(v.points.iter().map(point_value).collect()),
            );
            (v.id.to_string(), Value::Object(entry))
        })
        .collect();
    root.insert("vector".into(), Value::Object(vectors));
    root.insert(
        "camera_intrinsic_matrix".into(),
        Value::Array(
            clip.intrinsics
                .matrix()
                .iter()
                .map(|row| Value::Array(row.iter().map(|c| number(*c)).collect()))
                .collect(),
        ),
    );
    let poses: Map<String, Value> = clip
        .poses
        .values()
        .map(|p| {
            let mut entry = Map::new();
            entry.insert("tvec_enu".into(), point_value(&p.tvec));
            entry.insert(
                "rvec_enu".into(),
                Value::Array(p.rvec.iter().map(|c| number(*c)).collect()),
            );
            (p.timestamp.clone(), Value::Object(entry))
        })
        .collect();
    root.insert("camera_pose".into(), Value::Object(poses));
    to_canonical_bytes(&Value::Object(root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::Severity;

    const MINIMAL: &str = r#"{
        "traffic_board_pose": [[0,0,5],[0,0,3],[0,2,3],[0,2,5]],
        "vector": {},
        "camera_intrinsic_matrix": [[100,0,50],[0,100,50],[0,0,1]],
        "camera_pose": {"1": {"tvec_enu": [0,0,0], "rvec_enu": [0,0,0,1]}}
    }"#;

    #[test]
    fn minimal_clip() {
        let parsed = parse_clip(MINIMAL.as_bytes()).unwrap();
        assert!(parsed.value.vectors.is_empty());
        assert_eq!(parsed.value.poses.len(), 1);
        assert!(parsed.warnings.is_empty());
        assert!(parsed.value.validate().is_ok());
    }

    #[test]
    fn skew_entry_is_rejected_with_pointer() {
        let doc = MINIMAL.replace("[[100,0,50]", "[[100,0.5,50]");
        let err = parse_clip(doc.as_bytes()).unwrap_err();
        let first = err.errors().next().unwrap();
        assert_eq!(first.path, "/camera_intrinsic_matrix/0/1");
    }

    #[test]
    fn unknown_vector_type() {
        let doc = MINIMAL.replace(
            r#""vector": {}"#,
            r#""vector": {"3": {"type": "7", "vec_geo": [[0,0,0],[1,0,0]]}}"#,
        );
        let err = parse_clip(doc.as_bytes()).unwrap_err();
        assert_eq!(err.errors().next().unwrap().path, "/vector/3/type");
    }

    #[test]
    fn bad_quaternion() {
        let doc = MINIMAL.replace("[0,0,0,1]", "[0,0,0,2]");
        let err = parse_clip(doc.as_bytes()).unwrap_err();
        assert_eq!(err.errors().next().unwrap().path, "/camera_pose/1/rvec_enu");
    }

    #[test]
    fn wrong_arity_and_missing_key() {
        let doc = MINIMAL.replace(
            "[[0,0,5],[0,0,3],[0,2,3],[0,2,5]]",
            "[[0,0,5],[0,0,3],[0,2,3]]",
        );
        let err = parse_clip(doc.as_bytes()).unwrap_err();
        assert_eq!(err.errors().next().unwrap().path, "/traffic_board_pose");

        let doc = MINIMAL.replace(r#""vector": {},"#, "");
        let err = parse_clip(doc.as_bytes()).unwrap_err();
        let e = err.errors().next().unwrap();
        assert_eq!(e.path, "");
        assert!(e.message.contains("vector"));
    }

    #[test]
    fn unknown_keys_warn() {
        let doc = MINIMAL.replacen('{', r#"{"extra": 1,"#, 1);
        let parsed = parse_clip(doc.as_bytes()).unwrap();
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].severity, Severity::Warning);
        assert_eq!(parsed.warnings[0].path, "/extra");
    }

    #[test]
    fn truncated_document() {
        let err = parse_clip(&MINIMAL.as_bytes()[..40]).unwrap_err();
        assert_eq!(err.issues.len(), 1);
        assert!(err.issues[0].message.contains("malformed JSON"));
    }

    #[test]
    fn canonical_write_is_a_fixed_point() {
        let clip = parse_clip(MINIMAL.as_bytes()).unwrap().value;
        let once = write_clip(&clip);
        let again = write_clip(&parse_clip(&once).unwrap().value);
        assert_eq!(once, again);
    }
}
