//! Estimation of the quadratic Rényi entropy `h2 = -ln ∫p²` and the
//! quadratic functional `q2 = ∫p²` from stationary m-dependent samples,
//! using counts of ε-close pairs.
//!
//! ```
//! use qrenyi::{estimate, EstimateConfig, SeriesSample};
//!
//! let xs: Vec<f64> = (0..400).map(|i| (i as f64 * 0.618_033_988_75).fract()).collect();
//! let sample = SeriesSample::from_scalars(&xs).unwrap();
//! let report = estimate(&sample, &EstimateConfig::new(0.05, 1)).unwrap();
//! assert!((report.q2_hat - 1.0).abs() < 0.1);
//! ```
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod discrete;
pub mod epskeys;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod gof;
pub mod montecarlo;
pub mod paircount;
pub mod processes;
pub mod rng;
pub mod sample;
pub mod special;

pub use error::{Error, Result};
pub use estimators::{estimate, residual, EstimateConfig, EstimateReport, ResidualKind};
pub use processes::{ProcessSpec, Truth};
pub use rng::RngStream;
pub use sample::SeriesSample;
