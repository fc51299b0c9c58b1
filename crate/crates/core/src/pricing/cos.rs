//! Fourier-cosine (COS) pricing.

use super::OptionKind;
use crate::error::{domain, invalid, LevyError, Result};
use crate::models::{cumulants, cumulants_fd, LogPriceCf, MarketEnv, ModelParams};
use crate::scalar::Real;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CosConfig {
    /// Number of cosine terms.
    pub n: usize,
    /// Truncation width multiplier.
    pub l: f64,
}

impl Default for CosConfig {
    fn default() -> Self {
        Self { n: 1 << 7, l: 10.0 }
    }
}

impl CosConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 16 {
            return invalid(format!("COS needs at least 16 terms, got {}", self.n));
        }
        if !(self.l > 0.0) {
            return invalid(format!("truncation multiplier must be positive, got {}", self.l));
        }
        Ok(())
    }
}

/// [a, b] = c1 ∓ L·√(c2 + √c4) for ln(S_T/S0); closed-form cumulants where
/// available, contour cumulants for VGSA.
pub fn cos_truncation_range<T: Real>(model: &ModelParams<T>, env: &MarketEnv<T>, t: T, l: T) -> Result<(T, T)> {
    let c = match model {
        ModelParams::Vgsa(_) => cumulants_fd(model, env, t, None)?,
        _ => cumulants(model, env, t)?,
    };
    let width = l * (c.c2 + c.c4.max(T::zero()).sqrt()).sqrt();
    let (a, b) = (c.c1 - width, c.c1 + width);
    if !(a < T::zero()) || !(b > T::zero()) {
        return domain(format!("truncation range [{a}, {b}] does not straddle 0; widen L"));
    }
    Ok((a, b))
}

fn chi_psi<T: Real>(k: usize, a: T, b: T, c: T, d: T) -> (T, T) {
    let w = T::n(k) * T::PI() / (b - a);
    let (sd, cd) = (w * (d - a)).sin_cos();
    let (sc, cc) = (w * (c - a)).sin_cos();
    let (ed, ec) = (d.exp(), c.exp());
    let chi = (cd * ed - cc * ec + w * sd * ed - w * sc * ec) / (T::one() + w * w);
    let psi = if k == 0 { d - c } else { (sd - sc) / w };
    (chi, psi)
}

/// Cosine coefficients V_k of the payoff in y = ln(S_T/K) on [a, b]. Calls
/// integrate over (0, b), puts over (a, 0).
pub fn cos_payoff_coeffs<T: Real>(kind: OptionKind, a: T, b: T, k: T, n: usize) -> Result<Vec<T>> {
    if !(a < T::zero() && b > T::zero()) {
        return domain(format!("payoff split needs a < 0 < b, got [{a}, {b}]"));
    }
    let scale = T::c(2.0) / (b - a) * k;
    Ok((0..n)
        .map(|j| match kind {
            OptionKind::Call => {
                let (chi, psi) = chi_psi(j, a, b, T::zero(), b);
                scale * (chi - psi)
            }
            OptionKind::Put => {
                let (chi, psi) = chi_psi(j, a, b, a, T::zero());
                scale * (psi - chi)
            }
        })
        .collect())
}

/// Premiums for several strikes at one maturity; the characteristic
/// function is evaluated once and shared.
pub fn cos_price_strikes<T: Real>(
    model: &ModelParams<T>,
    env: &MarketEnv<T>,
    kind: OptionKind,
    strikes: &[T],
    t: T,
    cfg: &CosConfig,
) -> Result<Vec<T>> {
    cfg.validate()?;
    let (a, b) = cos_truncation_range(model, env, t, T::c(cfg.l))?;
    let unit = MarketEnv { s0: T::one(), ..*env };
    let cf = LogPriceCf::new(model, &unit, t)?;
    let n = cfg.n;
    let width = b - a;
    let mut phi = Vec::with_capacity(n);
    for j in 0..n {
        let u = T::n(j) * T::PI() / width;
        let v = cf.ln_eval(Complex::new(u, T::zero())).exp();
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(LevyError::Numerical(format!("characteristic function not finite at term {j}")));
        }
        phi.push(v);
    }
    // V_k is linear in K; build the unit-strike coefficients once
    let unit_v = cos_payoff_coeffs(kind, a, b, T::one(), n)?;
    let disc = (-env.r * t).exp();
    let limit = T::c(0.8) * width / T::c(2.0);
    strikes
        .iter()
        .map(|&k| {
            if !(k > T::zero()) {
                return domain(format!("strike must be positive, got {k}"));
            }
            let x = (env.s0 / k).ln();
            if x.abs() > limit {
                return domain(format!(
                    "strike {k} is too far out of the money for the COS range (|ln(S0/K)| = {} > {limit})",
                    x.abs()
                ));
            }
            let mut sum = T::zero();
            for j in 0..n {
                let ang = T::n(j) * T::PI() * (x - a) / width;
                let term = (phi[j] * Complex::new(ang.cos(), ang.sin())).re * unit_v[j];
                sum += if j == 0 { term / T::c(2.0) } else { term };
            }
            Ok(disc * k * sum)
        })
        .collect()
}

pub fn cos_price<T: Real>(
    model: &ModelParams<T>,
    env: &MarketEnv<T>,
    kind: OptionKind,
    k: T,
    t: T,
    cfg: &CosConfig,
) -> Result<T> {
    Ok(cos_price_strikes(model, env, kind, &[k], t, cfg)?[0])
}
