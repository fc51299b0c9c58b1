use super::{run_paths, GroupSimulator, McConfig, McDiagnostics, PathSet, Streams};
use crate::error::Result;
use crate::models::{ln_cir_clock, MarketEnv, ModelParams, VgsaParams, VGSA_Y0};
use crate::scalar::Real;
use num_complex::Complex;
use rand_distr::{Distribution, Gamma, StandardNormal};

pub(crate) struct VgsaSim<T> {
    x0: T,
    h: T,
    rq: T,
    p: VgsaParams<T>,
    /// Per-step martingale corrections, ln φ((j−1)h) − ln φ(jh).
    d_omega: Vec<T>,
    steps: usize,
}

impl<T: Real> VgsaSim<T> {
    pub(crate) fn new(env: &MarketEnv<T>, p: &VgsaParams<T>, t: T, cfg: &McConfig) -> Result<Self> {
        ModelParams::Vgsa(*p).validate()?;
        let h = t / T::n(cfg.steps);
        // unit-time VG exponent at u = −i is −ω_VG
        let psi = Complex::new(-p.vg().omega()?, T::zero());
        let y0 = T::c(VGSA_Y0);
        let ln_phi = |s: T| {
            if s == T::zero() {
                T::zero()
            } else {
                ln_cir_clock(psi, s, y0, p.kappa, p.eta, p.lambda).re
            }
        };
        let d_omega = (1..=cfg.steps).map(|j| ln_phi(h * T::n(j - 1)) - ln_phi(h * T::n(j))).collect();
        Ok(Self { x0: env.s0.ln(), h, rq: env.r - env.q, p: *p, d_omega, steps: cfg.steps })
    }
}

impl<T: Real> GroupSimulator<T> for VgsaSim<T> {
    fn simulate_group(&self, s: &mut Streams, out: &mut [Vec<T>]) -> McDiagnostics {
        let mut diag = McDiagnostics::default();
        let p = &self.p;
        let h = self.h;
        let half = T::c(0.5);
        // one clock and one gamma stream per partner; the gamma stream starts
        // from the same state, so the partners share uniforms until their
        // gamma shapes diverge
        let mut y = [T::c(VGSA_Y0); 2];
        let mut jump = [s.jump.clone(), s.jump.clone()];
        for path in out.iter_mut() {
            path[0] = self.x0;
        }
        for j in 1..=self.steps {
            let z1 = T::c(StandardNormal.sample(&mut s.normal));
            let z2 = T::c(StandardNormal.sample(&mut s.normal));
            for (i, path) in out.iter_mut().enumerate() {
                let (a, b) = if i == 0 { (z1, z2) } else { (-z1, -z2) };
                let yp = y[i];
                let mut yn = yp
                    + p.kappa * (p.eta - yp) * h
                    + p.lambda * (yp * h).sqrt() * a
                    + p.lambda * p.lambda / T::c(4.0) * h * (a * a - T::one());
                if yn < T::zero() {
                    yn = T::zero();
                    diag.cir_floor_events += 1;
                }
                y[i] = yn;
                let tau = half * h * (yp + yn);
                let g = if tau > T::zero() {
                    match Gamma::new((tau / p.nu).f64(), p.nu.f64()) {
                        Ok(d) => T::c(d.sample(&mut jump[i])),
                        Err(_) => T::zero(),
                    }
                } else {
                    T::zero()
                };
                path[j] = path[j - 1] + self.rq * h + self.d_omega[j - 1] + p.theta * g + p.sigma * g.sqrt() * b;
            }
        }
        diag
    }
}

/// VGSA paths: Milstein CIR clock, VG increments over the integrated clock.
pub fn simulate_vgsa<T: Real>(env: &MarketEnv<T>, p: &VgsaParams<T>, t: T, cfg: &McConfig) -> Result<PathSet<T>> {
    super::check_common(env, t, cfg)?;
    Ok(run_paths(&VgsaSim::new(env, p, t, cfg)?, t, cfg))
}
