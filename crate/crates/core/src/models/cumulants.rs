use super::cf::LogPriceCf;
use super::{MarketEnv, ModelParams};
use crate::error::{LevyError, Result};
use crate::scalar::Real;
use crate::specfun::gamma;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// First, second and fourth cumulants of the log price at maturity, plus
/// the martingale correction used to build them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantSet<T> {
    pub c1: T,
    pub c2: T,
    pub c4: T,
    pub w: T,
}

/// Closed-form cumulants of ln(S_T/S0) for BS, VG and CGMY.
///
/// Drift convention: c1 uses μ = r − q + w, so for BS (w = 0) c1 is (r − q)T
/// rather than the exact mean (r − q − σ²/2)T. Only COS range centering
/// consumes c1, where the difference is immaterial.
pub fn cumulants<T: Real>(model: &ModelParams<T>, env: &MarketEnv<T>, t: T) -> Result<CumulantSet<T>> {
    model.validate()?;
    env.validate()?;
    let mu0 = env.r - env.q;
    match *model {
        ModelParams::Bs { sigma } => Ok(CumulantSet {
            c1: mu0 * t,
            c2: sigma * sigma * t,
            c4: T::zero(),
            w: T::zero(),
        }),
        ModelParams::Vg(p) => {
            let w = p.omega()?;
            let (s2, nu, th) = (p.sigma * p.sigma, p.nu, p.theta);
            let th2 = th * th;
            Ok(CumulantSet {
                c1: (mu0 + w + th) * t,
                c2: (s2 + nu * th2) * t,
                c4: T::c(3.0) * (s2 * s2 * nu + T::c(2.0) * th2 * th2 * nu * nu * nu + T::c(4.0) * s2 * th2 * nu * nu) * t,
                w,
            })
        }
        ModelParams::Cgmy(p) => {
            let w = p.omega()?;
            let y = p.y;
            let ct = p.c * t;
            Ok(CumulantSet {
                c1: (mu0 + w) * t + ct * gamma(T::one() - y) * (p.m.powf(y - T::one()) - p.g.powf(y - T::one())),
                c2: ct * gamma(T::c(2.0) - y) * (p.m.powf(y - T::c(2.0)) + p.g.powf(y - T::c(2.0))),
                c4: ct * gamma(T::c(4.0) - y) * (p.m.powf(y - T::c(4.0)) + p.g.powf(y - T::c(4.0))),
                w,
            })
        }
        ModelParams::Vgsa(_) => Err(LevyError::Unsupported(
            "no closed-form VGSA cumulants; use cumulants_fd".into(),
        )),
    }
}

const CONTOUR_POINTS: usize = 64;
const STRIP_CAP: f64 = 64.0;

/// Numerical cumulants of ln(S_T/S0) from the cumulant generating function
/// G(w) = ln E[(S_T/S0)^w].
///
/// With `h = None`, G is sampled on a circle |w| = ρ inside the moment strip
/// and its Taylor coefficients are read off by a discrete Fourier transform
/// (Cauchy's formula), which is accurate to near machine precision. With
/// `h = Some(step)`, standard central differences on the real axis are used;
/// the fourth-order stencil loses about ε/h⁴, so steps much below 1e-2 are
/// useless for c4.
///
/// `w` is the horizon-averaged correction −ln E[e^{X_T}]/T (for BS this is
/// −σ²/2, unlike the tabulated convention of [`cumulants`]).
pub fn cumulants_fd<T: Real>(
    model: &ModelParams<T>,
    env: &MarketEnv<T>,
    t: T,
    h: Option<T>,
) -> Result<CumulantSet<T>> {
    let unit = MarketEnv { s0: T::one(), r: env.r, q: env.q };
    env.validate()?;
    let cf = LogPriceCf::new(model, &unit, t)?;
    let g = |w: Complex<T>| cf.ln_eval(Complex::new(w.im, -w.re));
    let w_eff = cf.correction(&unit) / t;
    match h {
        Some(h) => {
            if !(h > T::zero()) {
                return Err(LevyError::InvalidInput(format!("step must be positive, got {h}")));
            }
            let gr = |w: T| g(Complex::new(w, T::zero())).re;
            let (gm2, gm1, g0, gp1, gp2) = (gr(-h - h), gr(-h), gr(T::zero()), gr(h), gr(h + h));
            let c1 = (gp1 - gm1) / (T::c(2.0) * h);
            let c2 = (gp1 - T::c(2.0) * g0 + gm1) / (h * h);
            let c4 = (gp2 - T::c(4.0) * gp1 + T::c(6.0) * g0 - T::c(4.0) * gm1 + gm2) / (h * h * h * h);
            Ok(CumulantSet { c1, c2, c4, w: w_eff })
        }
        None => {
            let (lo, hi) = moment_strip(&cf);
            let rho = hi.min(-lo).min(T::c(8.0)) / T::c(2.0);
            let n = CONTOUR_POINTS;
            let mut a = [Complex::new(T::zero(), T::zero()); 5];
            for k in 0..n {
                let th = T::c(2.0) * T::PI() * T::n(k) / T::n(n);
                let z = Complex::new(rho * th.cos(), rho * th.sin());
                let v = g(z);
                for (j, aj) in a.iter_mut().enumerate() {
                    let ang = -th * T::n(j);
                    *aj = *aj + v * Complex::new(ang.cos(), ang.sin());
                }
            }
            let coef = |j: usize| a[j].re / (T::n(n) * rho.powi(j as i32));
            let c1 = coef(1);
            let c2 = T::c(2.0) * coef(2);
            let c4 = T::c(24.0) * coef(4);
            if !(c1.is_finite() && c2.is_finite() && c4.is_finite()) {
                return Err(LevyError::Numerical("cumulant contour produced non-finite values".into()));
            }
            Ok(CumulantSet { c1, c2, c4, w: w_eff })
        }
    }
}

/// Interval (lo, hi) ∋ 0 of real w with E[(S_T/S0)^w] finite, each side
/// capped at 64 in magnitude.
pub(crate) fn moment_strip<T: Real>(cf: &LogPriceCf<T>) -> (T, T) {
    let valid = |w: T| {
        let v = cf.ln_eval(Complex::new(T::zero(), -w));
        v.re.is_finite() && v.im.abs() <= T::c(1e-9) * (T::one() + v.re.abs())
    };
    (-strip_edge(&valid, -T::one()), strip_edge(&valid, T::one()))
}

// Distance from 0 to the edge of the moment strip in direction `dir`,
// capped at STRIP_CAP.
fn strip_edge<T: Real>(valid: &impl Fn(T) -> bool, dir: T) -> T {
    let mut good = T::zero();
    let mut step = T::c(0.5);
    while step <= T::c(STRIP_CAP) {
        if !valid(dir * step) {
            let mut bad = step;
            for _ in 0..40 {
                let mid = (good + bad) / T::c(2.0);
                if valid(dir * mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            return good;
        }
        good = step;
        step = step * T::c(2.0);
    }
    T::c(STRIP_CAP)
}
