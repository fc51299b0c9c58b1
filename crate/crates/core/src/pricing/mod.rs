//! Deterministic European option pricers: closed forms, Carr-Madan FFT and
//! the COS expansion.

mod analytic;
mod cos;
mod fft;

pub use analytic::{bs_call, bs_put, vg_call_analytic};
pub use cos::{cos_payoff_coeffs, cos_price, cos_price_strikes, cos_truncation_range, CosConfig};
pub use fft::{damping_cap, fft_price, fft_price_strip, optimal_damping, FftConfig, Quadrature};

use crate::error::invalid;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    pub fn payoff<T: Real>(self, s: T, k: T) -> T {
        match self {
            OptionKind::Call => (s - k).max(T::zero()),
            OptionKind::Put => (k - s).max(T::zero()),
        }
    }
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        })
    }
}

impl FromStr for OptionKind {
    type Err = crate::LevyError;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "call" | "c" => Ok(OptionKind::Call),
            "put" | "p" => Ok(OptionKind::Put),
            other => invalid(format!("unknown option kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PricingMethod {
    Analytic,
    Fft,
    Cos,
    Mc,
}

impl fmt::Display for PricingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PricingMethod::Analytic => "analytic",
            PricingMethod::Fft => "fft",
            PricingMethod::Cos => "cos",
            PricingMethod::Mc => "mc",
        })
    }
}

impl FromStr for PricingMethod {
    type Err = crate::LevyError;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(PricingMethod::Analytic),
            "fft" => Ok(PricingMethod::Fft),
            "cos" => Ok(PricingMethod::Cos),
            "mc" => Ok(PricingMethod::Mc),
            other => invalid(format!("unknown pricing method '{other}'")),
        }
    }
}

/// Premiums across ascending strikes at one maturity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceStrip<T> {
    pub strikes: Vec<T>,
    pub premiums: Vec<T>,
    pub method: PricingMethod,
}
