use super::{run_paths, GroupSimulator, McConfig, McDiagnostics, PathSet, Streams};
use crate::error::{invalid, LevyError, Result};
use crate::models::{CgmyParams, MarketEnv, ModelParams};
use crate::quad::tanh_sinh;
use crate::scalar::Real;
use crate::specfun::{gamma, parabolic_cylinder_d_scaled};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

const TABLE_SIZE: usize = 512;

fn prefactor<T: Real>(y: T) -> T {
    let half = T::c(0.5);
    gamma((y + T::one()) * half) * T::c(2.0).powf(y * half) / T::PI().sqrt()
}

/// Γ((Y+1)/2)·2^{Y/2}/√π · e^{−B²y/2}·D_{−Y}(B√y)·e^{B²y/4}, the tempering
/// factor of the stable subordinator measure.
pub fn cgmy_acceptance<T: Real>(y: T, big_y: T, b: T) -> Result<T> {
    if !(y > T::zero()) || !(big_y > T::zero() && big_y < T::c(2.0)) {
        return invalid(format!("cgmy_acceptance needs y > 0 and 0 < Y < 2, got {y}, {big_y}"));
    }
    let z = b * y.sqrt();
    Ok(prefactor(big_y) * (-z * z / T::c(2.0)).exp() * parabolic_cylinder_d_scaled(-big_y, z)?)
}

/// CGMY as Brownian motion with drift A subordinated to H, where H is a
/// tempered stable subordinator sampled by thinning a Y/2-stable one.
#[derive(Debug, Clone)]
pub struct CgmyThinning<T> {
    /// (G − M)/2
    pub a: T,
    /// (G + M)/2
    pub b: T,
    pub y: T,
    pub epsilon: T,
    /// Proposal rate per unit time for stable jumps above epsilon.
    pub rate: T,
    /// Mean contribution of the truncated jumps per unit time.
    pub small_jump_drift: T,
    pref: T,
    ln_eps: T,
    dl: T,
    table: Vec<T>,
}

impl<T: Real> CgmyThinning<T> {
    pub fn new(p: &CgmyParams<T>, epsilon: T) -> Result<Self> {
        ModelParams::Cgmy(*p).validate()?;
        if !(p.y > T::zero()) {
            return Err(LevyError::Unsupported(format!(
                "CGMY simulation needs 0 < Y < 2 (stable subordinator), got Y = {}",
                p.y
            )));
        }
        let half = T::c(0.5);
        let y = p.y;
        let k = p.c * T::PI().sqrt() * T::c(2.0).powf(-y * half) / gamma((y + T::one()) * half);
        let rate = k * T::c(2.0) / (y * epsilon.powf(y * half));
        let a = (p.g - p.m) * half;
        let b = (p.g + p.m) * half;
        let mut th = Self {
            a,
            b,
            y,
            epsilon,
            rate,
            small_jump_drift: T::zero(),
            pref: prefactor(y),
            ln_eps: epsilon.ln(),
            dl: T::zero(),
            table: Vec::new(),
        };
        // p(y) ≤ e^{−GMy/2}; stop the table where that bound is negligible
        let y_max = (T::c(2.0 * 40.0) / (p.g * p.m)).max(epsilon * T::c(10.0));
        th.dl = (y_max.ln() - th.ln_eps) / T::n(TABLE_SIZE - 1);
        th.table = (0..TABLE_SIZE).map(|i| th.exact((th.ln_eps + th.dl * T::n(i)).exp()).0).collect::<Vec<_>>();
        // the tempering already differs from 1 by O(B√ε) at ε, so the mean of
        // the dropped jumps uses the tempered density
        let tempered = tanh_sinh(|s: T| s.powf(-y * half) * th.exact(s).0, T::zero(), epsilon, T::c(1e-13));
        th.small_jump_drift = k * tempered;
        Ok(th)
    }

    /// Acceptance probability of a proposed jump y, clamped to [0, 1]; the
    /// flag reports a clamp.
    pub fn exact(&self, y: T) -> (T, bool) {
        let z = self.b * y.sqrt();
        let gm = self.b * self.b - self.a * self.a;
        let d = parabolic_cylinder_d_scaled(-self.y, z).unwrap_or(T::zero());
        let p = self.pref * (-gm * y / T::c(2.0)).exp() * d;
        if p > T::one() {
            (T::one(), true)
        } else if !(p >= T::zero()) {
            (T::zero(), true)
        } else {
            (p, false)
        }
    }

    /// Accept or reject y against the uniform v. The probability is
    /// decreasing in y, so table neighbours bracket it and the exact value is
    /// needed only when v falls between them.
    fn accept(&self, y: T, v: T, diag: &mut McDiagnostics) -> bool {
        let pos = ((y.ln() - self.ln_eps) / self.dl).max(T::zero());
        let i = pos.floor().to_usize().unwrap_or(usize::MAX);
        if i + 1 < self.table.len() {
            if v < self.table[i + 1] {
                return true;
            }
            if v >= self.table[i] {
                return false;
            }
        } else if v >= self.table[self.table.len() - 1] {
            return false;
        }
        let (p, clamped) = self.exact(y);
        if clamped {
            diag.acceptance_clamps += 1;
        }
        v < p
    }
}

pub(crate) struct CgmySim<T> {
    th: CgmyThinning<T>,
    x0: T,
    h: T,
    drift: T,
    steps: usize,
}

impl<T: Real> CgmySim<T> {
    pub(crate) fn new(env: &MarketEnv<T>, p: &CgmyParams<T>, t: T, cfg: &McConfig) -> Result<Self> {
        let th = CgmyThinning::new(p, T::c(cfg.cgmy_epsilon))?;
        let expected = (th.rate * t).f64();
        if expected > cfg.max_expected_jumps {
            return invalid(format!(
                "CGMY path budget exceeded: {expected:.3e} expected proposals per path (cap {:.3e}); raise cgmy_epsilon",
                cfg.max_expected_jumps
            ));
        }
        let w = p.omega()?;
        let h = t / T::n(cfg.steps);
        Ok(Self { th, x0: env.s0.ln(), h, drift: (env.r - env.q + w) * h, steps: cfg.steps })
    }
}

impl<T: Real> GroupSimulator<T> for CgmySim<T> {
    fn simulate_group(&self, s: &mut Streams, out: &mut [Vec<T>]) -> McDiagnostics {
        let mut diag = McDiagnostics::default();
        let th = &self.th;
        let inv_rate = T::one() / th.rate;
        let expo = -T::c(2.0) / th.y;
        let mut next = T::c(Exp1.sample(&mut s.jump)) * inv_rate;
        let mut big_jumps = T::zero();
        let mut h_prev = T::zero();
        for path in out.iter_mut() {
            path[0] = self.x0;
        }
        // partners share the subordinator and mirror the Brownian part
        for j in 1..=self.steps {
            let tj = self.h * T::n(j);
            while next <= tj {
                let u: f64 = s.jump.gen();
                let v: f64 = s.jump.gen();
                let y = th.epsilon * T::c(1.0 - u).powf(expo);
                diag.proposals += 1;
                if th.accept(y, T::c(v), &mut diag) {
                    diag.accepted += 1;
                    big_jumps += y;
                }
                next += T::c(Exp1.sample(&mut s.jump)) * inv_rate;
            }
            let h_now = big_jumps + th.small_jump_drift * tj;
            let dh = h_now - h_prev;
            h_prev = h_now;
            let z = T::c(StandardNormal.sample(&mut s.normal));
            let w = dh.sqrt() * z;
            let base = self.drift + th.a * dh;
            for (i, path) in out.iter_mut().enumerate() {
                path[j] = path[j - 1] + base + if i == 0 { w } else { -w };
            }
        }
        diag
    }
}

/// CGMY paths by subordination; jumps of H below `cfg.cgmy_epsilon` are
/// replaced by their mean.
pub fn simulate_cgmy<T: Real>(env: &MarketEnv<T>, p: &CgmyParams<T>, t: T, cfg: &McConfig) -> Result<PathSet<T>> {
    super::check_common(env, t, cfg)?;
    Ok(run_paths(&CgmySim::new(env, p, t, cfg)?, t, cfg))
}
