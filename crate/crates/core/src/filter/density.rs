use crate::error::Result;
use crate::models::{MarketEnv, ModelParams, VgParams, VgsaParams};
use crate::scalar::Real;
use crate::specfun::{ln_bessel_k, ln_gamma};
use serde::{Deserialize, Serialize};


#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Density<T> {
    pub value: T,
    pub ln_value: T,
    /// `value` underflowed to 0 while `ln_value` is finite.
    pub underflow: bool,
}

impl<T: Real> Density<T> {
    fn from_ln(ln_value: T) -> Self {
        let value = ln_value.exp();
        Self { value, ln_value, underflow: value == T::zero() && ln_value.is_finite() }
    }
}

// ln of the integrated VG density of z over calendar time h, with gamma
// shape time s (s = h for VG, s = h* for VGSA given its clock).
pub(crate) fn ln_vg_density_core<T: Real>(z: T, h: T, s: T, p: &VgParams<T>, mu: T) -> Result<T> {
    let x = z - mu * h - h * p.omega()?;
    ln_density_centred(x, s, p)
}

// As `ln_vg_density_core`, but the observation is only known to within
// ±delta of x. When the shape s/ν is below 1/2 the density has a pole at the
// centre, the likelihood is unbounded, and returns landing inside the cell
// get the cell average of the leading |x|^{2s/ν−1} term instead.
pub(crate) fn ln_vg_density_resolved<T: Real>(z: T, h: T, s: T, p: &VgParams<T>, mu: T, delta: T) -> Result<T> {
    let x = z - mu * h - h * p.omega()?;
    let a = s / p.nu;
    if !(delta > T::zero()) || x.abs() >= delta || a >= T::c(0.5) {
        return ln_density_centred(x, s, p);
    }
    let l = ln_density_centred(delta, s, p)?;
    let r = ln_density_centred(-delta, s, p)?;
    let m = l.max(r);
    Ok(m + (T::c(0.5) * ((l - m).exp() + (r - m).exp())).ln() - (T::c(2.0) * a).ln())
}

// ln density of the driftless VG increment x over gamma shape time s.
pub(crate) fn ln_density_centred<T: Real>(x: T, s: T, p: &VgParams<T>) -> Result<T> {
    let (sigma, nu, theta) = (p.sigma, p.nu, p.theta);
    let s2 = sigma * sigma;
    let c2 = T::c(2.0) * s2 / nu + theta * theta;
    let c = c2.sqrt();
    // integrable |x|^{2s/ν−1} pole at the centre when s/ν < 1/2; only x = 0
    // itself is moved
    let arg = (x.abs() * c / s2).max(T::min_positive_value());
    let xa = arg * s2 / c;
    let a = s / nu;
    let half = T::c(0.5);
    let ln_k = ln_bessel_k(a - half, arg)?;
    Ok(T::c(2.0).ln() + theta * x / s2
        - a * nu.ln()
        - half * (T::c(2.0) * T::PI()).ln()
        - sigma.ln()
        - ln_gamma(a)
        + (a * half - T::c(0.25)) * (T::c(2.0) * xa.ln() - c2.ln())
        + ln_k)
}

/// Density of the log return z over h years under VG with drift r − q.
pub fn vg_density<T: Real>(z: T, h: T, p: &VgParams<T>, env: &MarketEnv<T>) -> Result<Density<T>> {
    vg_density_mu(z, h, p, env.r - env.q)
}

/// [`vg_density`] with an explicit drift μ in place of r − q.
pub fn vg_density_mu<T: Real>(z: T, h: T, p: &VgParams<T>, mu: T) -> Result<Density<T>> {
    check(h)?;
    ModelParams::Vg(*p).validate()?;
    Ok(Density::from_ln(ln_vg_density_core(z, h, h, p, mu)?))
}

/// VGSA density of z over h years given the realized clock increment h*.
pub fn vgsa_conditional_density<T: Real>(
    z: T,
    h: T,
    h_star: T,
    p: &VgsaParams<T>,
    mu: T,
) -> Result<Density<T>> {
    check(h)?;
    check(h_star)?;
    ModelParams::Vgsa(*p).validate()?;
    Ok(Density::from_ln(ln_vg_density_core(z, h, h_star, &p.vg(), mu)?))
}

fn check<T: Real>(h: T) -> Result<()> {
    if !(h > T::zero()) {
        return crate::error::domain(format!("time increment must be positive, got {h}"));
    }
    Ok(())
}
