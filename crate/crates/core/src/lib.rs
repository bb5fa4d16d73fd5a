//! Tests of complete independence for high-dimensional normal vectors, based
//! on sums of squared sample correlations.
//!
//! Everything numeric is generic over [`scalar::Real`]; the `*F64` aliases
//! below fix the scalar to `f64`.

// `!(x < y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod decision;
pub mod distributions;
pub mod error;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod simulation;
pub mod special;
pub mod statistics;

pub use correlation::{correlation_summary, CorrelationSummary, DataMatrix};
pub use decision::{decide, DecisionReport, TestKind, ThresholdSet};
pub use error::{Error, Result};
pub use scalar::Real;
pub use simulation::{estimate_rejection_rate, SimulationResult, SimulationSpec};
pub use statistics::StatisticReport;

pub type DataMatrixF64 = DataMatrix<f64>;
pub type CorrelationSummaryF64 = CorrelationSummary<f64>;
pub type StatisticReportF64 = StatisticReport<f64>;
pub type DecisionReportF64 = DecisionReport<f64>;
pub type ThresholdSetF64 = ThresholdSet<f64>;
pub type SimulationSpecF64 = SimulationSpec<f64>;
pub type SimulationResultF64 = SimulationResult<f64>;
