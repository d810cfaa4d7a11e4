//! Identification of composite ZIP + induction-motor load parameters from
//! voltage and power measurements.
//!
//! The crate bundles the forward load model, a synthetic measurement
//! generator, the discretized search space, a swarm Q-learning optimizer
//! with a whale-optimization teacher and knowledge transfer between tasks,
//! and the baseline optimizers used for comparison.

// `!(x > 0.0)` style guards are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod itq;
pub mod model;
pub mod report;
pub mod result;
pub mod scenario;
pub mod space;
pub mod transfer;

pub use error::{Error, Result};
pub use model::{CompositeParams, ImParams, ZipParams};
pub use result::OptimizationRunResult;
pub use scenario::MeasurementSeries;
