//! Option pricing and parameter recovery for exponential Lévy models.
//!
//! Black-Scholes, Variance Gamma, VGSA (VG on a CIR clock) and CGMY are
//! priced by closed forms, Carr-Madan FFT, the COS expansion and Monte Carlo.
//! Parameters come back either from option chains (entropy-regularized least
//! squares) or from a price series (particle-filter maximum likelihood).
//!
//! Everything numeric is generic over [`Real`]; the `*64` aliases below pin
//! `f64`, which is what the accuracy targets in the tests assume.

pub mod calib;
pub mod error;
pub mod filter;
pub mod mc;
pub mod models;
pub mod pricing;
pub mod quad;
pub mod scalar;
pub mod specfun;

pub use error::{LevyError, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type ModelParams64 = models::ModelParams<f64>;
pub type MarketEnv64 = models::MarketEnv<f64>;
pub type CumulantSet64 = models::CumulantSet<f64>;
pub type DiscreteLevyMeasure64 = models::DiscreteLevyMeasure<f64>;
pub type OptionChain64 = calib::OptionChain<f64>;
pub type OptionQuote64 = calib::OptionQuote<f64>;
pub type CalibrationResult64 = calib::CalibrationResult<f64>;
pub type LogReturnSeries64 = filter::LogReturnSeries<f64>;
pub type FilterOutput64 = filter::FilterOutput<f64>;
pub type McPrice64 = mc::McPrice<f64>;
pub type PriceStrip64 = pricing::PriceStrip<f64>;
