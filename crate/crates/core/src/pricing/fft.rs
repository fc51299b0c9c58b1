//! Carr-Madan pricing: FFT of the damped call transform
//! Ψ(v) = e^{−rT} φ(v − (α+1)i) / ((α + iv)(α + iv + 1)).

use super::{PriceStrip, PricingMethod};
use crate::error::{domain, invalid, LevyError, Result};
use crate::models::{moment_strip, LogPriceCf, MarketEnv, ModelParams};
use crate::scalar::Real;
use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

pub const FALLBACK_ALPHA: f64 = 1.5;
const ALPHA_CAP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Trapezoid,
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FftConfig {
    pub n: usize,
    /// Frequency spacing; the integration range is B = n·eta.
    pub eta: f64,
    /// Damping; `None` selects [`optimal_damping`].
    pub alpha: Option<f64>,
    pub quadrature: Quadrature,
}

impl Default for FftConfig {
    fn default() -> Self {
        let n = 1 << 9;
        Self { n, eta: 50.0 / n as f64, alpha: None, quadrature: Quadrature::Simpson }
    }
}

impl FftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_power_of_two() {
            return invalid(format!("FFT size must be a power of two, got {}", self.n));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return invalid(format!("eta must be positive, got {}", self.eta));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0) {
                return invalid(format!("explicit alpha must be positive, got {a}"));
            }
        }
        Ok(())
    }

    /// Log-strike spacing λ = 2π/(Nη).
    pub fn lambda(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.n as f64 * self.eta)
    }
}

/// Largest damping that keeps E[S_T^{1+α}] comfortably finite: 90% of the
/// distance to the moment-strip edge, and never above 10.
pub fn damping_cap<T: Real>(model: &ModelParams<T>, env: &MarketEnv<T>, t: T) -> Result<T> {
    let cf = LogPriceCf::new(model, env, t)?;
    let (_, hi) = moment_strip(&cf);
    let cap = (T::c(0.9) * (hi - T::one())).min(T::c(ALPHA_CAP));
    if !(cap > T::zero()) {
        return domain(format!("no positive damping keeps E[S^(1+alpha)] finite for {model:?}"));
    }
    Ok(cap)
}

/// Damping from the closed forms for BS and VG, clamped to (0, cap]; falls
/// back to 1.5 when the formula gives a nonpositive or non-finite value, and
/// for models without a closed form.
///
/// BS: α = −d₊/(η√τ), d₊ = [ln(S0/K) + (r + σ²/√2)τ]/(σ√τ).
/// VG: α = −θ/σ² − 1 + τ/(νm̃) − sgn(m̃)·√(θ²/σ² + 2/(νσ²) + τ²/(ν²m̃²)),
/// m̃ = ln F − ln K − ωτ. Both transcribed as printed in the source.
pub fn optimal_damping<T: Real>(model: &ModelParams<T>, env: &MarketEnv<T>, k: T, t: T, eta: T) -> Result<T> {
    let cap = damping_cap(model, env, t)?;
    let raw = match *model {
        ModelParams::Bs { sigma } => {
            let st = t.sqrt();
            let d_plus = ((env.s0 / k).ln() + (env.r + sigma * sigma / T::SQRT_2()) * t) / (sigma * st);
            -d_plus / (eta * st)
        }
        ModelParams::Vg(p) => {
            let w = p.omega()?;
            let f = env.s0.ln() + (env.r - env.q) * t;
            let m = f - k.ln() - w * t;
            let s2 = p.sigma * p.sigma;
            let root = (p.theta * p.theta / s2 + T::c(2.0) / (p.nu * s2) + t * t / (p.nu * p.nu * m * m)).sqrt();
            -p.theta / s2 - T::one() + t / (p.nu * m) - m.signum() * root
        }
        _ => T::c(FALLBACK_ALPHA),
    };
    let alpha = if raw > T::zero() && raw.is_finite() { raw } else { T::c(FALLBACK_ALPHA) };
    Ok(alpha.min(cap))
}

// Call premiums on k_m = center − Nλ/2 + mλ, m = 0..N.
fn fft_grid<T: Real>(
    model: &ModelParams<T>,
    env: &MarketEnv<T>,
    t: T,
    cfg: &FftConfig,
    center: T,
    alpha: T,
) -> Result<(Vec<T>, Vec<T>)> {
    let cf = LogPriceCf::new(model, env, t)?;
    let n = cfg.n;
    let eta = T::c(cfg.eta);
    let lambda = T::c(cfg.lambda());
    let start = center - T::n(n) * lambda / T::c(2.0);
    let disc = (-env.r * t).exp();
    let i = Complex::new(T::zero(), T::one());
    let mut buf = Vec::with_capacity(n);
    for j in 0..n {
        let v = T::n(j) * eta;
        let w = match cfg.quadrature {
            Quadrature::Simpson => {
                let sign = if j % 2 == 0 { -T::one() } else { T::one() };
                let delta = if j == 0 { T::one() } else { T::zero() };
                eta / T::c(3.0) * (T::c(3.0) + sign - delta)
            }
            Quadrature::Trapezoid => {
                if j == 0 {
                    eta / T::c(2.0)
                } else {
                    eta
                }
            }
        };
        let u = Complex::new(v, -(alpha + T::one()));
        let av = Complex::new(alpha, v);
        let psi = cf.ln_eval(u).exp() * disc / (av * (av + T::one()));
        let x = (-i * v * start).exp() * psi * w;
        if !(x.re.is_finite() && x.im.is_finite()) {
            return Err(LevyError::Numerical(format!("damped transform not finite at frequency index {j}")));
        }
        buf.push(x);
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let ks: Vec<T> = (0..n).map(|m| start + T::n(m) * lambda).collect();
    let prices = ks.iter().zip(&buf).map(|(&k, y)| (-alpha * k).exp() * y.re / T::PI()).collect();
    Ok((ks, prices))
}

fn resolve_alpha<T: Real>(model: &ModelParams<T>, env: &MarketEnv<T>, k: T, t: T, cfg: &FftConfig) -> Result<T> {
    match cfg.alpha {
        Some(a) => Ok(T::c(a)),
        None => optimal_damping(model, env, k, t, T::c(cfg.eta)),
    }
}

/// Call premiums on the whole FFT log-strike grid centered at ln S0.
pub fn fft_price_strip<T: Real>(model: &ModelParams<T>, env: &MarketEnv<T>, t: T, cfg: &FftConfig) -> Result<PriceStrip<T>> {
    cfg.validate()?;
    let alpha = resolve_alpha(model, env, env.s0, t, cfg)?;
    let (ks, premiums) = fft_grid(model, env, t, cfg, env.s0.ln(), alpha)?;
    Ok(PriceStrip { strikes: ks.into_iter().map(|k| k.exp()).collect(), premiums, method: PricingMethod::Fft })
}

/// Call premium at one strike. The log-strike grid is centered on ln K so
/// the strike sits on a node and no interpolation error enters.
pub fn fft_price<T: Real>(model: &ModelParams<T>, env: &MarketEnv<T>, k: T, t: T, cfg: &FftConfig) -> Result<T> {
    cfg.validate()?;
    if !(k > T::zero()) {
        return domain(format!("strike must be positive, got {k}"));
    }
    let alpha = resolve_alpha(model, env, k, t, cfg)?;
    let (_, prices) = fft_grid(model, env, t, cfg, k.ln(), alpha)?;
    Ok(prices[cfg.n / 2])
}
