use super::{CgmyParams, MarketEnv, ModelParams, VgParams, VgsaParams, VGSA_Y0};
use crate::error::{domain, LevyError, Result};
use crate::scalar::Real;
use num_complex::Complex;

type C<T> = Complex<T>;

fn i<T: Real>() -> C<T> {
    C::new(T::zero(), T::one())
}

fn ln_cf_vg<T: Real>(p: &VgParams<T>, u: C<T>, t: T) -> C<T> {
    let one = C::new(T::one(), T::zero());
    let z = one - i::<T>() * u * (p.theta * p.nu) + u * u * (p.sigma * p.sigma * p.nu / T::c(2.0));
    -z.ln() * (t / p.nu)
}

fn ln_cf_cgmy<T: Real>(p: &CgmyParams<T>, u: C<T>, t: T) -> C<T> {
    let y = p.y;
    let iu = i::<T>() * u;
    let m = C::new(p.m, T::zero());
    let g = C::new(p.g, T::zero());
    let bracket = (m - iu).powf(y) - p.m.powf(y) + (g + iu).powf(y) - p.g.powf(y);
    bracket * (p.c * t * crate::specfun::gamma(-y))
}

/// ln E[exp(ψ ∫₀ᵗ y_s ds)] for the CIR rate dy = κ(η − y)dt + λ√y dW, y₀ given.
pub(crate) fn ln_cir_clock<T: Real>(psi: C<T>, t: T, y0: T, kappa: T, eta: T, lambda: T) -> C<T> {
    if lambda == T::zero() {
        let integrated = if kappa == T::zero() {
            y0 * t
        } else {
            eta * t + (y0 - eta) * (-(-kappa * t).exp_m1()) / kappa
        };
        return psi * integrated;
    }
    let two = T::c(2.0);
    let l2 = lambda * lambda;
    let kc = C::new(kappa, T::zero());
    let gamma = (kc * kc - psi * (two * l2)).sqrt();
    let gt = gamma * t;
    let e2 = (-gt).exp();
    // q = (1 − e^{−γt})/γ, continuous through γ → 0
    let q = if gt.norm() < T::c(1e-4) {
        (C::new(T::one(), T::zero()) - gt / two + gt * gt / T::c(6.0)) * t
    } else {
        (C::new(T::one(), T::zero()) - e2) / gamma
    };
    let one = C::new(T::one(), T::zero());
    // cosh(γt/2) + (κ/γ) sinh(γt/2) = e^{γt/2}·d
    let d = (one + e2) / two + q * (kappa / two);
    let ln_a = C::new(kappa * kappa * eta * t / l2, T::zero()) - (gt / two + d.ln()) * (two * kappa * eta / l2);
    let b = psi * q * two / (q * kappa + one + e2);
    ln_a + b * y0
}

fn ln_cf_vgsa<T: Real>(p: &VgsaParams<T>, u: C<T>, t: T) -> C<T> {
    let psi = ln_cf_vg(&p.vg(), u, T::one());
    ln_cir_clock(psi, t, T::c(VGSA_Y0), p.kappa, p.eta, p.lambda)
}

/// ln E[e^{iuX_t}] without parameter validation.
pub(crate) fn ln_cf_raw<T: Real>(model: &ModelParams<T>, u: C<T>, t: T) -> C<T> {
    match model {
        ModelParams::Bs { sigma } => -u * u * (*sigma * *sigma * t / T::c(2.0)),
        ModelParams::Vg(p) => ln_cf_vg(p, u, t),
        ModelParams::Vgsa(p) => ln_cf_vgsa(p, u, t),
        ModelParams::Cgmy(p) => ln_cf_cgmy(p, u, t),
    }
}

fn check_t<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero()) || !t.is_finite() {
        return domain(format!("time must be positive, got {t}"));
    }
    Ok(())
}

fn finite<T: Real>(z: C<T>, what: &str, u: C<T>) -> Result<C<T>> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(LevyError::Overflow(format!("{what} not finite at u = {u}")))
    }
}

/// ln E[e^{iuX_t}] of the driving process, no drift or martingale correction.
pub fn log_characteristic_function<T: Real>(model: &ModelParams<T>, u: C<T>, t: T) -> Result<C<T>> {
    model.validate()?;
    check_t(t)?;
    let v = ln_cf_raw(model, u, t);
    finite(v, "log characteristic function", u)
}

/// E[e^{iuX_t}] of the driving process, no drift or martingale correction.
pub fn characteristic_function<T: Real>(model: &ModelParams<T>, u: C<T>, t: T) -> Result<C<T>> {
    let v = log_characteristic_function(model, u, t)?.exp();
    finite(v, "characteristic function", u)
}

/// Per-unit-time correction ω in the tabulated convention: 0 for BS (whose
/// −σ²/2 lives in the log-price drift), the closed forms for VG and CGMY.
pub fn martingale_correction<T: Real>(model: &ModelParams<T>) -> Result<T> {
    model.validate()?;
    match model {
        ModelParams::Bs { .. } => Ok(T::zero()),
        ModelParams::Vg(p) => p.omega(),
        ModelParams::Cgmy(p) => p.omega(),
        ModelParams::Vgsa(_) => Err(LevyError::Unsupported(
            "VGSA has no per-unit-time correction; the log-price cf normalizes by ratio".into(),
        )),
    }
}

/// Characteristic function of ln S_T, prevalidated for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct LogPriceCf<T> {
    model: ModelParams<T>,
    t: T,
    /// ln S0 + (r − q)T − ln E[e^{X_T}]
    drift: T,
}

impl<T: Real> LogPriceCf<T> {
    pub fn new(model: &ModelParams<T>, env: &MarketEnv<T>, t: T) -> Result<Self> {
        model.validate()?;
        env.validate()?;
        check_t(t)?;
        match model {
            ModelParams::Vg(p) => {
                p.omega()?;
            }
            ModelParams::Vgsa(p) => {
                p.vg().omega()?;
            }
            ModelParams::Cgmy(p) => {
                p.omega()?;
            }
            ModelParams::Bs { .. } => {}
        }
        let minus_i = C::new(T::zero(), -T::one());
        let mgf = ln_cf_raw(model, minus_i, t);
        if !mgf.re.is_finite() || !(mgf.im.abs() <= T::c(1e-9) * (T::one() + mgf.re.abs())) {
            return domain(format!("E[exp(X_T)] is not finite for {model:?}"));
        }
        Ok(Self { model: *model, t, drift: env.s0.ln() + (env.r - env.q) * t - mgf.re })
    }

    pub fn maturity(&self) -> T {
        self.t
    }

    pub fn model(&self) -> &ModelParams<T> {
        &self.model
    }

    /// Total drift correction −ln E[e^{X_T}] over the horizon.
    pub fn correction(&self, env: &MarketEnv<T>) -> T {
        self.drift - env.s0.ln() - (env.r - env.q) * self.t
    }

    /// ln E[e^{iu ln S_T}].
    #[inline]
    pub fn ln_eval(&self, u: C<T>) -> C<T> {
        i::<T>() * u * self.drift + ln_cf_raw(&self.model, u, self.t)
    }

    pub fn eval(&self, u: C<T>) -> Result<C<T>> {
        finite(self.ln_eval(u).exp(), "log-price characteristic function", u)
    }
}

/// E[e^{iu ln S_T}], drift and martingale correction included.
pub fn log_price_cf<T: Real>(model: &ModelParams<T>, env: &MarketEnv<T>, u: C<T>, t: T) -> Result<C<T>> {
    LogPriceCf::new(model, env, t)?.eval(u)
}
