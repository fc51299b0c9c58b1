//! Monte Carlo engines for BS, VG, VGSA and CGMY log prices.
//!
//! Paths are generated in groups (an antithetic pair, or a single path) and
//! every group owns its ChaCha8 streams, keyed by (seed, group index). The
//! output is therefore identical for any thread count or partitioning.

mod cgmy;
mod vg;
mod vgsa;

pub use cgmy::{cgmy_acceptance, simulate_cgmy, CgmyThinning};
pub use vg::simulate_vg;
pub use vgsa::simulate_vgsa;

use crate::error::{invalid, LevyError, Result};
use crate::models::{MarketEnv, ModelParams};
use crate::pricing::OptionKind;
use crate::scalar::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    /// Total number of paths; must be even with antithetic pairing.
    pub num_paths: usize,
    pub steps: usize,
    pub seed: u64,
    pub antithetic: bool,
    /// Subordinator jumps below this size are replaced by their mean (CGMY).
    pub cgmy_epsilon: f64,
    /// Refuse CGMY runs whose expected proposal count per path exceeds this.
    pub max_expected_jumps: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { num_paths: 10_000, steps: 100, seed: 0, antithetic: true, cgmy_epsilon: 1e-4, max_expected_jumps: 1e7 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return invalid("need at least one path");
        }
        if self.antithetic && self.num_paths % 2 != 0 {
            return invalid(format!("antithetic pairing needs an even path count, got {}", self.num_paths));
        }
        if self.steps < 1 {
            return invalid("need at least one time step");
        }
        if !(self.cgmy_epsilon > 0.0 && self.cgmy_epsilon <= 1e-2) {
            return invalid(format!("cgmy_epsilon must lie in (0, 1e-2], got {}", self.cgmy_epsilon));
        }
        Ok(())
    }

    fn groups(&self) -> (usize, usize) {
        if self.antithetic {
            (self.num_paths / 2, 2)
        } else {
            (self.num_paths, 1)
        }
    }
}

/// Event counters collected while simulating.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McDiagnostics {
    /// Milstein CIR steps that went negative and were floored at 0.
    pub cir_floor_events: u64,
    /// Thinning probabilities that evaluated above 1 and were clamped.
    pub acceptance_clamps: u64,
    pub proposals: u64,
    pub accepted: u64,
}

impl McDiagnostics {
    fn merge(mut self, o: McDiagnostics) -> Self {
        self.cir_floor_events += o.cir_floor_events;
        self.acceptance_clamps += o.acceptance_clamps;
        self.proposals += o.proposals;
        self.accepted += o.accepted;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePath<T> {
    pub times: Vec<T>,
    pub log_prices: Vec<T>,
}

/// Simulated paths. With antithetic pairing, paths 2i and 2i+1 are partners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet<T> {
    pub paths: Vec<PricePath<T>>,
    pub antithetic: bool,
    pub diagnostics: McDiagnostics,
}

/// Terminal log prices only, same pairing convention as [`PathSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalSample<T> {
    pub log_prices: Vec<T>,
    pub antithetic: bool,
    pub diagnostics: McDiagnostics,
}

impl<T: Real> PathSet<T> {
    pub fn terminals(&self) -> TerminalSample<T> {
        TerminalSample {
            log_prices: self.paths.iter().map(|p| *p.log_prices.last().unwrap()).collect(),
            antithetic: self.antithetic,
            diagnostics: self.diagnostics,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPrice<T> {
    pub premium: T,
    pub standard_error: T,
    /// Independent samples behind the estimate (pairs when antithetic).
    pub num_paths_effective: usize,
}

/// Gaussian and jump streams of one path group.
pub(crate) struct Streams {
    pub normal: ChaCha8Rng,
    pub jump: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64, group: usize) -> Self {
        let mut normal = ChaCha8Rng::seed_from_u64(seed);
        normal.set_stream(2 * group as u64);
        let mut jump = ChaCha8Rng::seed_from_u64(seed);
        jump.set_stream(2 * group as u64 + 1);
        Self { normal, jump }
    }
}

/// One path group: fills `out[i]` (length steps + 1, starting at ln S0) for
/// each of the `out.len()` partners; partner 1 negates the Gaussian stream.
pub(crate) trait GroupSimulator<T: Real>: Sync {
    fn simulate_group(&self, streams: &mut Streams, out: &mut [Vec<T>]) -> McDiagnostics;
}

fn time_grid<T: Real>(t: T, steps: usize) -> Vec<T> {
    (0..=steps).map(|j| t * T::n(j) / T::n(steps)).collect()
}

pub(crate) fn run_paths<T: Real, S: GroupSimulator<T>>(sim: &S, t: T, cfg: &McConfig) -> PathSet<T> {
    let (groups, per) = cfg.groups();
    let times = time_grid(t, cfg.steps);
    let chunks: Vec<(Vec<Vec<T>>, McDiagnostics)> = (0..groups)
        .into_par_iter()
        .map(|g| {
            let mut streams = Streams::new(cfg.seed, g);
            let mut out = vec![vec![T::zero(); cfg.steps + 1]; per];
            let d = sim.simulate_group(&mut streams, &mut out);
            (out, d)
        })
        .collect();
    let mut diagnostics = McDiagnostics::default();
    let mut paths = Vec::with_capacity(cfg.num_paths);
    for (out, d) in chunks {
        diagnostics = diagnostics.merge(d);
        for lp in out {
            paths.push(PricePath { times: times.clone(), log_prices: lp });
        }
    }
    PathSet { paths, antithetic: cfg.antithetic, diagnostics }
}

pub(crate) fn run_terminals<T: Real, S: GroupSimulator<T>>(sim: &S, cfg: &McConfig) -> TerminalSample<T> {
    let (groups, per) = cfg.groups();
    let chunks: Vec<(Vec<T>, McDiagnostics)> = (0..groups)
        .into_par_iter()
        .map_init(
            || vec![vec![T::zero(); cfg.steps + 1]; per],
            |out, g| {
                let mut streams = Streams::new(cfg.seed, g);
                let d = sim.simulate_group(&mut streams, out);
                (out.iter().map(|p| p[cfg.steps]).collect(), d)
            },
        )
        .collect();
    let mut diagnostics = McDiagnostics::default();
    let mut log_prices = Vec::with_capacity(cfg.num_paths);
    for (v, d) in chunks {
        diagnostics = diagnostics.merge(d);
        log_prices.extend(v);
    }
    TerminalSample { log_prices, antithetic: cfg.antithetic, diagnostics }
}

struct BsSim<T> {
    x0: T,
    drift: T,
    vol: T,
    steps: usize,
}

impl<T: Real> GroupSimulator<T> for BsSim<T> {
    fn simulate_group(&self, s: &mut Streams, out: &mut [Vec<T>]) -> McDiagnostics {
        use rand_distr::{Distribution, StandardNormal};
        for p in out.iter_mut() {
            p[0] = self.x0;
        }
        for j in 1..=self.steps {
            let z: f64 = StandardNormal.sample(&mut s.normal);
            let z = T::c(z);
            for (i, p) in out.iter_mut().enumerate() {
                let zz = if i == 0 { z } else { -z };
                p[j] = p[j - 1] + self.drift + self.vol * zz;
            }
        }
        McDiagnostics::default()
    }
}

fn bs_sim<T: Real>(env: &MarketEnv<T>, sigma: T, t: T, cfg: &McConfig) -> BsSim<T> {
    let h = t / T::n(cfg.steps);
    BsSim {
        x0: env.s0.ln(),
        drift: (env.r - env.q - sigma * sigma / T::c(2.0)) * h,
        vol: sigma * h.sqrt(),
        steps: cfg.steps,
    }
}

fn check_common<T: Real>(env: &MarketEnv<T>, t: T, cfg: &McConfig) -> Result<()> {
    cfg.validate()?;
    env.validate()?;
    if !(t > T::zero()) {
        return invalid(format!("maturity must be positive, got {t}"));
    }
    Ok(())
}

/// Full paths for any model.
pub fn simulate_paths<T: Real>(model: &ModelParams<T>, env: &MarketEnv<T>, t: T, cfg: &McConfig) -> Result<PathSet<T>> {
    model.validate()?;
    match model {
        ModelParams::Bs { sigma } => {
            check_common(env, t, cfg)?;
            Ok(run_paths(&bs_sim(env, *sigma, t, cfg), t, cfg))
        }
        ModelParams::Vg(p) => simulate_vg(env, p, t, cfg),
        ModelParams::Vgsa(p) => simulate_vgsa(env, p, t, cfg),
        ModelParams::Cgmy(p) => simulate_cgmy(env, p, t, cfg),
    }
}

/// Terminal log prices for any model, without storing the paths.
pub fn simulate_terminal<T: Real>(
    model: &ModelParams<T>,
    env: &MarketEnv<T>,
    t: T,
    cfg: &McConfig,
) -> Result<TerminalSample<T>> {
    model.validate()?;
    check_common(env, t, cfg)?;
    match model {
        ModelParams::Bs { sigma } => Ok(run_terminals(&bs_sim(env, *sigma, t, cfg), cfg)),
        ModelParams::Vg(p) => Ok(run_terminals(&vg::VgSim::new(env, p, t, cfg)?, cfg)),
        ModelParams::Vgsa(p) => Ok(run_terminals(&vgsa::VgsaSim::new(env, p, t, cfg)?, cfg)),
        ModelParams::Cgmy(p) => Ok(run_terminals(&cgmy::CgmySim::new(env, p, t, cfg)?, cfg)),
    }
}

/// Discounted mean payoff and its standard error. Antithetic partners are
/// averaged before the variance is taken.
pub fn mc_price<T: Real>(
    sample: &TerminalSample<T>,
    kind: OptionKind,
    k: T,
    env: &MarketEnv<T>,
    t: T,
) -> Result<McPrice<T>> {
    let n = sample.log_prices.len();
    if n < 2 {
        return invalid(format!("need at least 2 paths, got {n}"));
    }
    let disc = (-env.r * t).exp();
    let pay = |x: T| kind.payoff(x.exp(), k) * disc;
    let values: Vec<T> = if sample.antithetic {
        if n % 2 != 0 {
            return invalid("antithetic sample with an odd path count");
        }
        sample.log_prices.chunks(2).map(|c| (pay(c[0]) + pay(c[1])) / T::c(2.0)).collect()
    } else {
        sample.log_prices.iter().map(|&x| pay(x)).collect()
    };
    let m = values.len();
    let mean = values.iter().copied().sum::<T>() / T::n(m);
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / T::n(m.max(2) - 1);
    let se = (var / T::n(m)).sqrt();
    if !mean.is_finite() {
        return Err(LevyError::Numerical("Monte Carlo mean is not finite".into()));
    }
    Ok(McPrice { premium: mean, standard_error: se, num_paths_effective: m })
}

/// Convenience: simulate terminals and price one strike.
pub fn mc_price_model<T: Real>(
    model: &ModelParams<T>,
    env: &MarketEnv<T>,
    kind: OptionKind,
    k: T,
    t: T,
    cfg: &McConfig,
) -> Result<McPrice<T>> {
    let sample = simulate_terminal(model, env, t, cfg)?;
    mc_price(&sample, kind, k, env, t)
}
