use crate::error::{domain, Result};
use crate::models::{MarketEnv, VgParams};
use crate::scalar::Real;
use crate::specfun::norm_cdf;

fn check<T: Real>(k: T, t: T, sigma: T) -> Result<()> {
    if !(k > T::zero()) || !(t > T::zero()) || !(sigma > T::zero()) {
        return domain(format!("need K, T, sigma > 0; got {k}, {t}, {sigma}"));
    }
    Ok(())
}

/// Black-Scholes-Merton call with continuous dividend yield.
pub fn bs_call<T: Real>(env: &MarketEnv<T>, k: T, t: T, sigma: T) -> Result<T> {
    env.validate()?;
    check(k, t, sigma)?;
    let sd = sigma * t.sqrt();
    let d1 = ((env.s0 / k).ln() + (env.r - env.q + sigma * sigma / T::c(2.0)) * t) / sd;
    let d2 = d1 - sd;
    Ok(env.s0 * (-env.q * t).exp() * norm_cdf(d1) - k * (-env.r * t).exp() * norm_cdf(d2))
}

pub fn bs_put<T: Real>(env: &MarketEnv<T>, k: T, t: T, sigma: T) -> Result<T> {
    env.validate()?;
    check(k, t, sigma)?;
    let sd = sigma * t.sqrt();
    let d1 = ((env.s0 / k).ln() + (env.r - env.q + sigma * sigma / T::c(2.0)) * t) / sd;
    let d2 = d1 - sd;
    Ok(k * (-env.r * t).exp() * norm_cdf(-d2) - env.s0 * (-env.q * t).exp() * norm_cdf(-d1))
}

/// Closed-form VG call from the normal approximation of the subordinated
/// Brownian motion, valid for large t/ν. α = −θ/σ. The dividend yield
/// enters as S0 → S0·e^{−qT}.
pub fn vg_call_analytic<T: Real>(env: &MarketEnv<T>, k: T, t: T, p: &VgParams<T>) -> Result<T> {
    env.validate()?;
    check(k, t, p.sigma)?;
    if !(p.nu > T::zero()) {
        return domain("VG requires nu > 0");
    }
    let two = T::c(2.0);
    let (sigma, nu) = (p.sigma, p.nu);
    let alpha = -p.theta / sigma;
    let a = (alpha + sigma) * (alpha + sigma);
    let num = T::one() - nu * a / two;
    let den = T::one() - nu * alpha * alpha / two;
    if !(num > T::zero()) || !(den > T::zero()) {
        return domain(format!(
            "VG analytic formula needs 1 - nu*alpha^2/2 > 0 and 1 - nu*(alpha+sigma)^2/2 > 0; got {den}, {num}"
        ));
    }
    let s = env.s0 * (-env.q * t).exp();
    let st = t.sqrt();
    let d1 = (s / k).ln() / (sigma * st) + ((env.r + (num / den).ln() / nu) / sigma + alpha + sigma) * st;
    let d2 = d1 - sigma * st;
    Ok(s * (a * t / two).exp() * num.powf(t / nu) * norm_cdf(d1)
        - k * (-env.r * t + alpha * alpha * t / two).exp() * den.powf(t / nu) * norm_cdf(d2))
}
