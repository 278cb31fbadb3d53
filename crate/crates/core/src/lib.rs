//! Polynomial calibration of six-axis force/torque sensors.
//!
//! Raw strain-gauge counts (optionally with temperature) are expanded into
//! every monomial up to a chosen degree, normalized, and mapped to forces
//! and torques by least squares or LASSO. Dynamic (ARX) models add lagged
//! inputs and outputs.
//!
//! ```
//! use ftcal::features::count_coefficients;
//!
//! // Six outputs, six gauges plus temperature, cubic model.
//! assert_eq!(count_coefficients(3, 6, 7).unwrap(), 720);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod error;
pub mod features;
pub mod metrics;
pub mod model;
pub mod solver;

pub use data::{Dataset, RawSample, Wrench};
pub use error::{Error, Result};
pub use features::{count_coefficients, enumerate_monomials, Monomial};
pub use metrics::{evaluate, EvalReport};
pub use model::{CalibrationModel, FitOptions, ModelSpec};
