use thiserror::Error;

/// Violations of domain-type invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("lane direction set is empty")]
    EmptyLaneDirection,
    #[error("lane direction \"None\" cannot be combined with other directions")]
    NoneNotAlone,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("expected at least {needed} points, found {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("polygon has fewer than 3 distinct points")]
    DegeneratePolygon,
    #[error("duplicate vector id {0}")]
    DuplicateVectorId(u32),
    #[error("clip has no camera poses")]
    NoPoses,
    #[error("focal lengths must be positive, got fx={fx}, fy={fy}")]
    BadFocalLength { fx: f64, fy: f64 },
    #[error("quaternion norm {0} is not within 1e-3 of 1")]
    QuaternionNorm(f64),
    #[error("confidence {0} outside [0, 1]")]
    ConfidenceOutOfRange(f64),
    #[error("unknown rule {0:?}")]
    UnknownRule(String),
    #[error("unknown predicted rule position {0}")]
    UnknownRulePosition(usize),
    #[error("unknown vector id {0}")]
    UnknownVector(u32),
    #[error("vector {0} is not a centerline")]
    NotCenterline(u32),
    #[error("duplicate edge between rule {rule} and centerline {centerline}")]
    DuplicateEdge { rule: String, centerline: u32 },
}
