use super::{run_paths, GroupSimulator, McConfig, McDiagnostics, PathSet, Streams};
use crate::error::Result;
use crate::models::{MarketEnv, ModelParams, VgParams};
use crate::scalar::Real;
use rand_distr::{Distribution, Gamma, StandardNormal};

pub(crate) struct VgSim<T> {
    x0: T,
    drift: T,
    theta: T,
    sigma: T,
    gamma: Gamma<f64>,
    steps: usize,
}

impl<T: Real> VgSim<T> {
    pub(crate) fn new(env: &MarketEnv<T>, p: &VgParams<T>, t: T, cfg: &McConfig) -> Result<Self> {
        ModelParams::Vg(*p).validate()?;
        let h = t / T::n(cfg.steps);
        let omega = p.omega()?;
        let gamma = Gamma::new((h / p.nu).f64(), p.nu.f64())
            .map_err(|e| crate::LevyError::InvalidInput(format!("gamma step: {e}")))?;
        Ok(Self { x0: env.s0.ln(), drift: (env.r - env.q + omega) * h, theta: p.theta, sigma: p.sigma, gamma, steps: cfg.steps })
    }
}

impl<T: Real> GroupSimulator<T> for VgSim<T> {
    fn simulate_group(&self, s: &mut Streams, out: &mut [Vec<T>]) -> McDiagnostics {
        for p in out.iter_mut() {
            p[0] = self.x0;
        }
        for j in 1..=self.steps {
            let g = T::c(self.gamma.sample(&mut s.jump));
            let z: f64 = StandardNormal.sample(&mut s.normal);
            let w = self.sigma * g.sqrt() * T::c(z);
            let base = self.drift + self.theta * g;
            for (i, p) in out.iter_mut().enumerate() {
                p[j] = p[j - 1] + base + if i == 0 { w } else { -w };
            }
        }
        McDiagnostics::default()
    }
}

/// VG paths by gamma subordination of a drifted Brownian motion.
pub fn simulate_vg<T: Real>(env: &MarketEnv<T>, p: &VgParams<T>, t: T, cfg: &McConfig) -> Result<PathSet<T>> {
    super::check_common(env, t, cfg)?;
    Ok(run_paths(&VgSim::new(env, p, t, cfg)?, t, cfg))
}
