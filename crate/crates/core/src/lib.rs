//! Toolkit for lane-level traffic-sign rule benchmarks on local HD maps.
//!
//! Each clip pairs a traffic sign with the vectorized lanes around it. The
//! task has two halves: read the sign into formatted [`Rule`]s, and link
//! each rule to the lane centerlines it governs. This crate reads and writes
//! the clip, label and prediction files ([`io`]), scores predictions
//! ([`metrics`]), projects map vectors into camera frames ([`geometry`],
//! [`overlay`]), generates synthetic clips whose scores are known in advance
//! ([`synth`]) and provides a geometric reference predictor ([`baseline`]).

pub mod baseline;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod model;
pub mod overlay;
pub mod synth;

pub use error::ModelError;
pub use metrics::{EvalConfig, MetricReport};
pub use model::*;
