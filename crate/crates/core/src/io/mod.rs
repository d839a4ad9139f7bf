//! Reading, validating and writing clip data, label and prediction files.
//!
//! Every problem found while reading a document is reported as a
//! [`ValidationIssue`] carrying a JSON pointer into the offending input.
//! Parsing does not stop at the first error; all issues are collected.
//! Unknown keys in data and label files are warnings, in prediction files
//! they are errors.

mod clip;
mod labels;
mod layout;
mod prediction;

use std::fmt;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::Point3;

pub use clip::{parse_clip, write_clip};
pub use labels::{parse_labels, write_labels, Labels};
pub use layout::{
    list_clip_dirs, read_clip_dir, write_clip_dir, ClipBundle, DirError, DATA_FILE, FRAMES_DIR,
    LABEL_FILE, PREDICTION_FILE,
};
pub use prediction::{parse_prediction, write_prediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub severity: Severity,
    /// JSON pointer (RFC 6901) into the source document; empty for the root.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() {
            "/"
        } else {
            &self.path
        };
        write!(f, "{} {} {}", self.severity, path, self.message)
    }
}

/// A successfully parsed value plus any warnings raised on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<ValidationIssue>,
}

/// A document that failed validation. `issues` holds errors and warnings in
/// document order.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} validation error(s); first: {}", self.error_count(), self.first_error())]
pub struct ParseError {
    pub issues: Vec<ValidationIssue>,
}

impl ParseError {
    pub fn errors(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    fn error_count(&self) -> usize {
        self.errors().count()
    }

    fn first_error(&self) -> String {
        self.errors()
            .next()
            .map(|i| i.to_string())
            .unwrap_or_default()
    }
}

/// Canonical text form: sorted keys, two-space indentation, shortest
/// round-trip numbers, trailing newline.
pub(crate) fn to_canonical_bytes(value: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory JSON always serializes");
    out.push(b'\n');
    out
}

pub(crate) fn number(v: f64) -> Value {
    Value::from(serde_json::Number::from_f64(v).expect("validated values are finite"))
}

pub(crate) fn point_value(p: &Point3) -> Value {
    Value::Array(p.to_array().iter().map(|c| number(*c)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Pointer(String);

impl Pointer {
    pub fn root() -> Self {
        Pointer(String::new())
    }

    pub fn push(&self, segment: impl fmt::Display) -> Pointer {
        let escaped = segment.to_string().replace('~', "~0").replace('/', "~1");
        Pointer(format!("{}/{}", self.0, escaped))
    }
}

impl fmt::Display for Pointer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Default)]
pub(crate) struct Issues {
    list: Vec<ValidationIssue>,
}

impl Issues {
    pub fn error(&mut self, at: &Pointer, message: impl Into<String>) {
        self.push(Severity::Error, at, message);
    }

    pub fn warn(&mut self, at: &Pointer, message: impl Into<String>) {
        self.push(Severity::Warning, at, message);
    }

    fn push(&mut self, severity: Severity, at: &Pointer, message: impl Into<String>) {
        self.list.push(ValidationIssue {
            severity,
            path: at.0.clone(),
            message: message.into(),
        });
    }

    pub fn has_errors(&self) -> bool {
        self.list.iter().any(|i| i.severity == Severity::Error)
    }

    pub fn finish<T>(self, value: Option<T>) -> Result<Parsed<T>, ParseError> {
        match value {
            Some(value) if !self.has_errors() => Ok(Parsed {
                value,
                warnings: self.list,
            }),
            _ => {
                debug_assert!(self.has_errors(), "missing value without an error issue");
                Err(ParseError { issues: self.list })
            }
        }
    }

    pub fn parse_document(&mut self, bytes: &[u8]) -> Option<Value> {
        match serde_json::from_slice::<Value>(bytes) {
            Ok(v) => Some(v),
            Err(e) => {
                self.error(
                    &Pointer::root(),
                    format!(
                        "malformed JSON at line {} column {}: {e}",
                        e.line(),
                        e.column()
                    ),
                );
                None
            }
        }
    }

    pub fn object<'a>(&mut self, v: &'a Value, at: &Pointer) -> Option<&'a Map<String, Value>> {
        let obj = v.as_object();
        if obj.is_none() {
            self.error(at, format!("expected an object, found {}", kind(v)));
        }
        obj
    }

    pub fn array<'a>(&mut self, v: &'a Value, at: &Pointer) -> Option<&'a Vec<Value>> {
        let arr = v.as_array();
        if arr.is_none() {
            self.error(at, format!("expected an array, found {}", kind(v)));
        }
        arr
    }

    pub fn string<'a>(&mut self, v: &'a Value, at: &Pointer) -> Option<&'a str> {
        let s = v.as_str();
        if s.is_none() {
            self.error(at, format!("expected a string, found {}", kind(v)));
        }
        s
    }

    pub fn field<'a>(
        &mut self,
        obj: &'a Map<String, Value>,
        key: &str,
        at: &Pointer,
    ) -> Option<&'a Value> {
        let v = obj.get(key);
        if v.is_none() {
            self.error(at, format!("missing key {key:?}"));
        }
        v
    }

    pub fn warn_unknown_keys(&mut self, obj: &Map<String, Value>, known: &[&str], at: &Pointer) {
        for key in obj.keys().filter(|k| !known.contains(&k.as_str())) {
            self.warn(&at.push(key), format!("unknown key {key:?} ignored"));
        }
    }

    pub fn reject_unknown_keys(&mut self, obj: &Map<String, Value>, known: &[&str], at: &Pointer) {
        for key in obj.keys().filter(|k| !known.contains(&k.as_str())) {
            self.error(&at.push(key), format!("unknown key {key:?}"));
        }
    }

    pub fn finite(&mut self, v: &Value, at: &Pointer) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            Some(_) => {
                self.error(at, "non-finite number");
                None
            }
            None => {
                self.error(at, format!("expected a number, found {}", kind(v)));
                None
            }
        }
    }

    pub fn numbers(&mut self, v: &Value, at: &Pointer, arity: usize) -> Option<Vec<f64>> {
        let arr = self.array(v, at)?;
        if arr.len() != arity {
            self.error(at, format!("expected {arity} numbers, found {}", arr.len()));
            return None;
        }
        let vals: Vec<Option<f64>> = arr
            .iter()
            .enumerate()
            .map(|(i, x)| self.finite(x, &at.push(i)))
            .collect();
        vals.into_iter().collect()
    }

    pub fn point(&mut self, v: &Value, at: &Pointer) -> Option<Point3> {
        self.numbers(v, at, 3)
            .map(|c| Point3::new(c[0], c[1], c[2]))
    }

    pub fn points(&mut self, v: &Value, at: &Pointer, min: usize) -> Option<Vec<Point3>> {
        let arr = self.array(v, at)?;
        let pts: Vec<Option<Point3>> = arr
            .iter()
            .enumerate()
            .map(|(i, p)| self.point(p, &at.push(i)))
            .collect();
        let pts: Option<Vec<Point3>> = pts.into_iter().collect();
        let pts = pts?;
        if pts.len() < min {
            self.error(
                at,
                format!("expected at least {min} points, found {}", pts.len()),
            );
            return None;
        }
        Some(pts)
    }

    pub fn confidence(&mut self, v: &Value, at: &Pointer) -> Option<f64> {
        let c = self.finite(v, at)?;
        if !(0.0..=1.0).contains(&c) {
            self.error(at, format!("confidence {c} outside [0, 1]"));
            return None;
        }
        Some(c)
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// Resolves a JSON pointer produced by the parsers against `doc`.
pub fn resolve_pointer<'a>(doc: &'a Value, pointer: &str) -> Option<&'a Value> {
    doc.pointer(pointer)
}
