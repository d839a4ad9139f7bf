use std::collections::BTreeSet;

use serde_json::{Map, Value};

use super::{point_value, to_canonical_bytes, Issues, ParseError, Parsed, Pointer};
use crate::model::{
    compare_rule_keys, ClipData, CorrespondenceGraph, Direction, EffectiveDate, LabeledRule,
    LaneType, Rule, Transport, PROPERTY_KEYS,
};

/// Parsed label file: rules ordered by key plus the correspondence graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    pub rules: Vec<LabeledRule>,
    pub graph: CorrespondenceGraph,
}

/// Parses a label file against an already parsed clip.
///
/// In strict mode every `centerline` id must name a centerline vector of
/// `clip`. In lenient mode such ids are reported as warnings and dropped.
pub fn parse_labels(
    bytes: &[u8],
    clip: &ClipData,
    strict: bool,
) -> Result<Parsed<Labels>, ParseError> {
    let mut issues = Issues::default();
    let labels = issues
        .parse_document(bytes)
        .and_then(|doc| labels_from_value(&doc, clip, strict, &mut issues));
    issues.finish(labels)
}

fn labels_from_value(
    doc: &Value,
    clip: &ClipData,
    strict: bool,
    iss: &mut Issues,
) -> Option<Labels> {
    let root = Pointer::root();
    let obj = iss.object(doc, &root)?;
    let mut rules = Vec::new();
    let mut ok = true;
    for (key, entry) in obj {
        match labeled_rule(key, entry, clip, strict, &root.push(key), iss) {
            Some(r) => rules.push(r),
            None => ok = false,
        }
    }
    if !ok {
        return None;
    }
    rules.sort_by(|a, b| compare_rule_keys(&a.key, &b.key));
    // Endpoints were checked above, so graph construction cannot fail.
    let graph = CorrespondenceGraph::from_labels(&rules, Some(clip)).ok()?;
    Some(Labels { rules, graph })
}

fn labeled_rule(
    key: &str,
    v: &Value,
    clip: &ClipData,
    strict: bool,
    at: &Pointer,
    iss: &mut Issues,
) -> Option<LabeledRule> {
    let obj = iss.object(v, at)?;
    iss.warn_unknown_keys(obj, &["attr_info", "centerline", "semantic_polygon"], at);
    let rule = iss
        .field(obj, "attr_info", at)
        .and_then(|a| attr_info(a, &at.push("attr_info"), false, iss));
    let centerline_ids = iss
        .field(obj, "centerline", at)
        .and_then(|c| centerline_ids(c, clip, strict, &at.push("centerline"), iss));
    let semantic_polygon = iss.field(obj, "semantic_polygon", at).and_then(|p| {
        let here = at.push("semantic_polygon");
        let pts = iss.points(p, &here, 3)?;
        let label = LabeledRule {
            key: key.to_owned(),
            rule: Rule::unrestricted(LaneType::DirectionLane, ""),
            centerline_ids: Vec::new(),
            semantic_polygon: pts,
        };
        if label.validate().is_err() {
            iss.error(&here, "semantic polygon has fewer than 3 distinct points");
            return None;
        }
        Some(label.semantic_polygon)
    });
    Some(LabeledRule {
        key: key.to_owned(),
        rule: rule?,
        centerline_ids: centerline_ids?,
        semantic_polygon: semantic_polygon?,
    })
}

fn centerline_ids(
    v: &Value,
    clip: &ClipData,
    strict: bool,
    at: &Pointer,
    iss: &mut Issues,
) -> Option<Vec<u32>> {
    let arr = iss.array(v, at)?;
    let mut ids = Vec::new();
    let mut ok = true;
    for (i, item) in arr.iter().enumerate() {
        let here = at.push(i);
        let Some(id) = item.as_u64().and_then(|n| u32::try_from(n).ok()) else {
            iss.error(
                &here,
                format!("centerline id must be a non-negative integer, found {item}"),
            );
            ok = false;
            continue;
        };
        let problem = match clip.vectors.get(&id) {
            None => Some(format!("centerline {id} does not exist in the clip")),
            Some(_) if !clip.is_centerline(id) => Some(format!(
                "centerline {id} refers to a vector that is not a centerline"
            )),
            Some(_) => None,
        };
        match problem {
            Some(msg) if strict => {
                iss.error(&here, msg);
                ok = false;
            }
            Some(msg) => iss.warn(&here, format!("{msg}; edge dropped")),
            None if ids.contains(&id) => {
                iss.warn(&here, format!("duplicate centerline {id} ignored"));
            }
            None => ids.push(id),
        }
    }
    ok.then_some(ids)
}

fn enumerated<T>(
    obj: &Map<String, Value>,
    key: &str,
    at: &Pointer,
    iss: &mut Issues,
    parse: fn(&str) -> Option<T>,
) -> Option<T> {
    let v = iss.field(obj, key, at)?;
    let here = at.push(key);
    let text = iss.string(v, &here)?;
    let parsed = parse(text);
    if parsed.is_none() {
        iss.error(&here, format!("unknown {key} value {text:?}"));
    }
    parsed
}

fn text(obj: &Map<String, Value>, key: &str, at: &Pointer, iss: &mut Issues) -> Option<String> {
    let v = iss.field(obj, key, at)?;
    iss.string(v, &at.push(key)).map(str::to_owned)
}

fn lane_direction(
    obj: &Map<String, Value>,
    at: &Pointer,
    iss: &mut Issues,
) -> Option<BTreeSet<Direction>> {
    let v = iss.field(obj, "LaneDirection", at)?;
    let here = at.push("LaneDirection");
    let arr = iss.array(v, &here)?;
    let mut dirs = BTreeSet::new();
    let mut ok = true;
    for (i, item) in arr.iter().enumerate() {
        let item_at = here.push(i);
        let Some(s) = iss.string(item, &item_at) else {
            ok = false;
            continue;
        };
        match Direction::parse(s) {
            Some(d) => {
                if !dirs.insert(d) {
                    iss.warn(&item_at, format!("duplicate direction {s:?} ignored"));
                }
            }
            None => {
                iss.error(&item_at, format!("unknown LaneDirection value {s:?}"));
                ok = false;
            }
        }
    }
    if !ok {
        return None;
    }
    if dirs.is_empty() {
        iss.error(&here, "LaneDirection must list at least one direction");
        return None;
    }
    if dirs.contains(&Direction::None) && dirs.len() > 1 {
        iss.error(&here, "\"None\" cannot be combined with other directions");
        return None;
    }
    Some(dirs)
}

/// Reads the eight rule properties. Unknown keys are errors when
/// `reject_unknown` is set and warnings otherwise.
pub(super) fn attr_info(
    v: &Value,
    at: &Pointer,
    reject_unknown: bool,
    iss: &mut Issues,
) -> Option<Rule> {
    let obj = iss.object(v, at)?;
    if reject_unknown {
        iss.reject_unknown_keys(obj, &PROPERTY_KEYS, at);
    } else {
        iss.warn_unknown_keys(obj, &PROPERTY_KEYS, at);
    }
    let lane_type = enumerated(obj, "LaneType", at, iss, LaneType::parse);
    let rule_index = text(obj, "RuleIndex", at, iss);
    let lane_direction = lane_direction(obj, at, iss);
    let effective_time = text(obj, "EffectiveTime", at, iss);
    let allowed_transport = enumerated(obj, "AllowedTransport", at, iss, Transport::parse);
    let effective_date = enumerated(obj, "EffectiveDate", at, iss, EffectiveDate::parse);
    let low_speed_limit = text(obj, "LowSpeedLimit", at, iss);
    let high_speed_limit = text(obj, "HighSpeedLimit", at, iss);
    Some(Rule {
        lane_type: lane_type?,
        rule_index: rule_index?,
        lane_direction: lane_direction?,
        allowed_transport: allowed_transport?,
        effective_date: effective_date?,
        effective_time: effective_time?,
        low_speed_limit: low_speed_limit?,
        high_speed_limit: high_speed_limit?,
    })
}

pub(super) fn attr_info_value(rule: &Rule) -> Value {
    let mut m = Map::new();
    m.insert("LaneType".into(), rule.lane_type.as_str().into());
    m.insert("RuleIndex".into(), rule.rule_index.clone().into());
    m.insert(
        "LaneDirection".into(),
        Value::Array(
            rule.lane_direction
                .iter()
                .map(|d| d.as_str().into())
                .collect(),
        ),
    );
    m.insert("EffectiveTime".into(), rule.effective_time.clone().into());
    m.insert(
        "AllowedTransport".into(),
        rule.allowed_transport.as_str().into(),
    );
    m.insert("EffectiveDate".into(), rule.effective_date.as_str().into());
    m.insert("LowSpeedLimit".into(), rule.low_speed_limit.clone().into());
    m.insert(
        "HighSpeedLimit".into(),
        rule.high_speed_limit.clone().into(),
    );
    Value::Object(m)
}

/// Serializes labeled rules in canonical form.
pub fn write_labels(rules: &[LabeledRule]) -> Vec<u8> {
    let root: Map<String, Value> = rules
        .iter()
        .map(|r| {
            let mut entry = Map::new();
            entry.insert("attr_info".into(), attr_info_value(&r.rule));
            entry.insert(
                "centerline".into(),
                Value::Array(r.centerline_ids.iter().map(|&id| id.into()).collect()),
            );
            entry.insert(
                "semantic_polygon".into(),
                Value::Array(r.semantic_polygon.iter().map(point_value).collect()),
            );
            (r.key.clone(), Value::Object(entry))
        })
        .collect();
    to_canonical_bytes(&Value::Object(root))
}
