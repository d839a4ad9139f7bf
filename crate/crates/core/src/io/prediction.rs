use std::collections::BTreeSet;

use serde_json::{Map, Value};

use super::labels::{attr_info, attr_info_value};
use super::{number, to_canonical_bytes, Issues, ParseError, Parsed, Pointer};
use crate::model::{EdgeScore, PredictedRule, PredictionSet};

/// Parses a prediction file:
///
/// ```json
/// {"rules": [{"attr_info": {...}, "confidence": 0.9,
///             "centerline": [{"id": 17, "confidence": 0.8}]}]}
/// ```
///
/// The schema is closed: unknown keys at any level are errors.
pub fn parse_prediction(bytes: &[u8]) -> Result<Parsed<PredictionSet>, ParseError> {
    let mut issues = Issues::default();
    let pred = issues
        .parse_document(bytes)
        .and_then(|doc| prediction_from_value(&doc, &mut issues));
    issues.finish(pred)
}

fn prediction_from_value(doc: &Value, iss: &mut Issues) -> Option<PredictionSet> {
    let root = Pointer::root();
    let obj = iss.object(doc, &root)?;
    iss.reject_unknown_keys(obj, &["rules"], &root);
    let rules_at = root.push("rules");
    let arr = iss
        .field(obj, "rules", &root)
        .and_then(|v| iss.array(v, &rules_at))?;
    let rules: Vec<Option<PredictedRule>> = arr
        .iter()
        .enumerate()
        .map(|(i, r)| predicted_rule(r, &rules_at.push(i), iss))
        .collect();
    let rules = rules.into_iter().collect::<Option<Vec<_>>>()?;
    (!iss.has_errors()).then_some(PredictionSet { rules })
}

fn predicted_rule(v: &Value, at: &Pointer, iss: &mut Issues) -> Option<PredictedRule> {
    let obj = iss.object(v, at)?;
    iss.reject_unknown_keys(obj, &["attr_info", "confidence", "centerline"], at);
    let rule = iss
        .field(obj, "attr_info", at)
        .and_then(|a| attr_info(a, &at.push("attr_info"), true, iss));
    let confidence = iss
        .field(obj, "confidence", at)
        .and_then(|c| iss.confidence(c, &at.push("confidence")));
    let centerlines = iss
        .field(obj, "centerline", at)
        .and_then(|c| edge_scores(c, &at.push("centerline"), iss));
    Some(PredictedRule {
        rule: rule?,
        confidence: confidence?,
        centerlines: centerlines?,
    })
}

fn edge_scores(v: &Value, at: &Pointer, iss: &mut Issues) -> Option<Vec<EdgeScore>> {
    let arr = iss.array(v, at)?;
    let mut out = Vec::with_capacity(arr.len());
    let mut seen = BTreeSet::new();
    let mut ok = true;
    for (i, item) in arr.iter().enumerate() {
        let here = at.push(i);
        let Some(obj) = iss.object(item, &here) else {
            ok = false;
            continue;
        };
        iss.reject_unknown_keys(obj, &["id", "confidence"], &here);
        let id = iss.field(obj, "id", &here).and_then(|id| {
            let parsed = id.as_u64().and_then(|n| u32::try_from(n).ok());
            if parsed.is_none() {
                iss.error(
                    &here.push("id"),
                    format!("centerline id must be a non-negative integer, found {id}"),
                );
            }
            parsed
        });
        let confidence = iss
            .field(obj, "confidence", &here)
            .and_then(|c| iss.confidence(c, &here.push("confidence")));
        match (id, confidence) {
            (Some(id), Some(confidence)) => {
                if !seen.insert(id) {
                    iss.error(&here.push("id"), format!("centerline {id} listed twice"));
                    ok = false;
                }
                out.push(EdgeScore { id, confidence });
            }
            _ => ok = false,
        }
    }
    ok.then_some(out)
}

/// Serializes a prediction set in canonical form. Rule and edge order is kept.
pub fn write_prediction(pred: &PredictionSet) -> Vec<u8> {
    let rules = pred
        .rules
        .iter()
        .map(|r| {
            let mut m = Map::new();
            m.insert("attr_info".into(), attr_info_value(&r.rule));
            m.insert("confidence".into(), number(r.confidence));
            m.insert(
                "centerline".into(),
                Value::Array(
                    r.centerlines
                        .iter()
                        .map(|e| {
                            let mut em = Map::new();
                            em.insert("id".into(), e.id.into());
                            em.insert("confidence".into(), number(e.confidence));
                            Value::Object(em)
                        })
                        .collect(),
                ),
            );
            Value::Object(m)
        })
        .collect();
    let mut root = Map::new();
    root.insert("rules".into(), Value::Array(rules));
    to_canonical_bytes(&Value::Object(root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Direction, LaneType, Rule};

    #[test]
    fn empty_prediction() {
        let bytes = write_prediction(&PredictionSet::default());
        assert_eq!(bytes, b"{\n  \"rules\": []\n}\n");
        assert_eq!(
            parse_prediction(&bytes).unwrap().value,
            PredictionSet::default()
        );
        assert!(parse_prediction(br#"{"rules": []}"#).is_ok());
    }

    #[test]
    fn single_rule_is_byte_stable() {
        let input =
            br#"{"rules": [{"confidence": 0.75, "centerline": [{"confidence": 0.5, "id": 17}],
            "attr_info": {"LaneType": "DirectionLane", "RuleIndex": "1",
              "LaneDirection": ["TurnLeft", "GoStraight"], "EffectiveTime": "None",
              "AllowedTransport": "None", "EffectiveDate": "None",
              "LowSpeedLimit": "None", "HighSpeedLimit": "None"}}]}"#;
        let once = write_prediction(&parse_prediction(input).unwrap().value);
        let twice = write_prediction(&parse_prediction(&once).unwrap().value);
        assert_eq!(once, twice);
        let parsed = parse_prediction(&once).unwrap().value;
        assert_eq!(
            parsed.rules[0].rule,
            Rule::unrestricted(LaneType::DirectionLane, "1")
                .with_directions([Direction::GoStraight, Direction::TurnLeft])
        );
    }

    #[test]
    fn rejects_bad_confidence_and_unknown_keys() {
        let err = parse_prediction(br#"{"rules": [], "extra": 1}"#).unwrap_err();
        assert_eq!(err.errors().next().unwrap().path, "/extra");

        let doc = br#"{"rules": [{"confidence": 1.5, "centerline": [],
            "attr_info": {"LaneType": "BusLane", "RuleIndex": "1", "LaneDirection": ["None"],
              "EffectiveTime": "None", "AllowedTransport": "None", "EffectiveDate": "None",
              "LowSpeedLimit": "None", "HighSpeedLimit": "None"}}]}"#;
        let err = parse_prediction(doc).unwrap_err();
        assert_eq!(err.errors().next().unwrap().path, "/rules/0/confidence");

        let doc = String::from_utf8_lossy(doc)
            .replace("\"RuleIndex\"", "\"Colour\": \"red\", \"RuleIndex\"");
        let doc = doc.replace("1.5", "1");
        let err = parse_prediction(doc.as_bytes()).unwrap_err();
        assert_eq!(
            err.errors().next().unwrap().path,
            "/rules/0/attr_info/Colour"
        );
    }
}
