//! Time-series estimation: the integrated VG density, an EKF-guided SIR
//! particle filter for the VGSA arrival rate, and likelihood maximization.

mod density;
mod ekf;
mod resample;

pub use density::{vg_density, vg_density_mu, vgsa_conditional_density, Density};
pub use ekf::{ekf_step, ekf_update, EkfStep, ScalarStateSpace, VgsaStateSpace, STATE_FLOOR};
pub use resample::{resample_indices, sir_resample, systematic_resample};

use crate::calib::{nelder_mead, NmOptions};
use crate::error::{invalid, Result};
use crate::models::{ModelKind, ModelParams, VgsaParams};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogReturnSeries<T> {
    /// z_0..z_N, equally spaced.
    pub log_prices: Vec<T>,
    /// Years per step.
    pub dt: T,
}

impl<T: Real> LogReturnSeries<T> {
    pub fn new(log_prices: Vec<T>, dt: T) -> Result<Self> {
        let s = Self { log_prices, dt };
        s.validate()?;
        Ok(s)
    }

    pub fn from_prices(prices: &[T], dt: T) -> Result<Self> {
        if prices.iter().any(|p| !(*p > T::zero())) {
            return invalid("prices must be positive");
        }
        Self::new(prices.iter().map(|p| p.ln()).collect(), dt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.log_prices.len() < 3 {
            return invalid(format!("need at least 3 observations, got {}", self.log_prices.len()));
        }
        if !(self.dt > T::zero()) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        if self.log_prices.iter().any(|x| !x.is_finite()) {
            return invalid("log prices must be finite");
        }
        Ok(())
    }

    pub fn returns(&self) -> Vec<T> {
        self.log_prices.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Sample mean return per year.
    pub fn mean_drift(&self) -> T {
        let r = self.returns();
        r.iter().copied().sum::<T>() / (T::n(r.len()) * self.dt)
    }

    /// Midpoint of the shortest interval holding half the returns. For
    /// finely sampled VG paths most increments carry a vanishing gamma
    /// clock, so this lands on the deterministic drift to rounding error.
    pub fn modal_return(&self) -> T {
        let mut r = self.returns();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let w = r.len() / 2;
        let (mut best, mut at) = (T::infinity(), 0);
        for i in 0..r.len() - w {
            let d = r[i + w] - r[i];
            if d < best {
                best = d;
                at = i;
            }
        }
        r[at + w / 2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PfConfig {
    pub particles: usize,
    pub seed: u64,
    /// Initial arrival rate and its variance.
    pub x0: f64,
    pub p0: f64,
    /// Half-width of the interval a log return is known to. Returns closer
    /// than this to the VG drift share one cell-averaged density value.
    pub resolution: f64,
}

impl Default for PfConfig {
    fn default() -> Self {
        Self { particles: 100, seed: 0, x0: 1.0, p0: 1e-6, resolution: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutput<T> {
    pub nll: T,
    /// Weighted mean of the arrival rate after each observation.
    pub states: Vec<T>,
    /// z_k − (μ + ω + θ·x̄_prior)Δt, with x̄_prior the mean EKF prior state.
    pub prediction_errors: Vec<T>,
    /// (θ²ν + σ²)·x̄_prior·Δt; a variance proxy for the prediction error.
    pub error_variances: Vec<T>,
    /// Steps at which every weight was zero; weights were reset to uniform
    /// and the likelihood set to zero.
    pub zero_weight_steps: usize,
}

fn ln_normal_pdf<T: Real>(x: T, m: T, s: T) -> T {
    let d = (x - m) / s;
    -T::c(0.5) * d * d - s.ln() - T::c(0.5) * (T::c(2.0) * T::PI()).ln()
}

/// SIR particle filter with EKF proposals; returns the negative
/// log-likelihood of the series under `params` with drift μ.
pub fn vgsa_pf_loglik<T: Real>(
    series: &LogReturnSeries<T>,
    params: &VgsaParams<T>,
    mu: T,
    cfg: &PfConfig,
) -> Result<FilterOutput<T>> {
    series.validate()?;
    ModelParams::Vgsa(*params).validate()?;
    if cfg.particles == 0 {
        return invalid("need at least one particle");
    }
    let dt = series.dt;
    let ss = VgsaStateSpace::new(params, mu, dt)?;
    let n = cfg.particles;
    let eps = T::c(STATE_FLOOR);
    let delta = T::c(cfg.resolution);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut normal = || T::c(StandardNormal.sample(&mut rng));

    let sqrt_p0 = T::c(cfg.p0).sqrt();
    let mut x: Vec<T> = (0..n).map(|_| (T::c(cfg.x0) + sqrt_p0 * normal()).max(eps)).collect();
    let mut pvar = vec![T::c(cfg.p0); n];
    let mut ln_w = vec![-T::n(n).ln(); n];

    let returns = series.returns();
    let mut states = Vec::with_capacity(returns.len());
    let mut prediction_errors = Vec::with_capacity(returns.len());
    let mut error_variances = Vec::with_capacity(returns.len());
    let mut zero_weight_steps = 0;
    let mut logl = T::zero();
    let p = params;
    let mut xs = vec![T::zero(); n];
    let mut ps = vec![T::zero(); n];
    let mut rng2 = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng2.set_stream(1);

    for &z in &returns {
        let mut prior_sum = T::zero();
        for i in 0..n {
            let e = ekf_update(&ss, x[i], pvar[i], z);
            prior_sum += e.x_prior;
            let s_q = e.p_post.sqrt();
            let draw = normal();
            let x_new = (e.x_post + s_q * draw).max(eps);
            let m_tr = ss.transition(x[i]);
            let s_tr = ss.process_noise(x[i]);
            // with a degenerate proposal or transition the sample is the
            // transition mean and the two Gaussian factors cancel
            let ratio = if s_q > T::zero() && s_tr > T::zero() {
                ln_normal_pdf(x_new, m_tr, s_tr) - ln_normal_pdf(x_new, e.x_post, s_q)
            } else {
                T::zero()
            };
            let ln_pz = density::ln_vg_density_resolved(z, dt, dt * x_new, &p.vg(), mu, delta)?;
            ln_w[i] += ln_pz + ratio;
            xs[i] = x_new;
            ps[i] = e.p_post;
        }
        let mx = ln_w.iter().copied().fold(T::neg_infinity(), T::max);
        let w: Vec<T> = if mx.is_finite() {
            let total = ln_w.iter().map(|&l| (l - mx).exp()).sum::<T>();
            logl += mx + total.ln();
            ln_w.iter().map(|&l| (l - mx).exp() / total).collect()
        } else {
            zero_weight_steps += 1;
            logl = T::neg_infinity();
            vec![T::one() / T::n(n); n]
        };
        let x_bar = prior_sum / T::n(n);
        prediction_errors.push(z - ss.observation(x_bar));
        error_variances.push((p.theta * p.theta * p.nu + p.sigma * p.sigma) * x_bar * dt);
        states.push(w.iter().zip(&xs).map(|(&a, &b)| a * b).sum());

        let u = T::c(rng2.gen::<f64>());
        let idx = systematic_resample(&w, u)?;
        for (j, &i) in idx.iter().enumerate() {
            x[j] = xs[i];
            pvar[j] = ps[i];
        }
        ln_w.iter_mut().for_each(|l| *l = -T::n(n).ln());
    }
    let nll = if logl.is_nan() { T::infinity() } else { -logl };
    Ok(FilterOutput { nll, states, prediction_errors, error_variances, zero_weight_steps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfMleResult<T> {
    pub params: VgsaParams<T>,
    pub nll: T,
    pub start_nll: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Coordinates the optimizer moves in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PfChart {
    /// (σ, ν, θ, κ, η, λ).
    Natural,
    /// (σ, ν, ω, κ, η, λ) with θ = (1 − e^{ων} − σ²ν/2)/ν. At fine sampling
    /// most VG returns sit on the drift, so the likelihood has a narrow ridge
    /// along constant ω; here that ridge is aligned with one axis.
    #[default]
    DriftMatched,
}

fn to_chart<T: Real>(chart: PfChart, v: &[T]) -> Result<Vec<T>> {
    let mut out = v.to_vec();
    if chart == PfChart::DriftMatched {
        let p = crate::models::VgParams::new(v[0], v[1], v[2]);
        out[2] = p.omega()?;
    }
    Ok(out)
}

fn from_chart<T: Real>(chart: PfChart, c: &[T]) -> Vec<T> {
    let mut out = c.to_vec();
    if chart == PfChart::DriftMatched {
        let (s, n, w) = (c[0], c[1], c[2]);
        out[2] = (-(w * n).exp_m1() - s * s * n / T::c(2.0)) / n;
    }
    out
}

/// Moves θ so that the deterministic drift ω matches the modal return of the
/// series, keeping σ, ν and the clock. With `PfChart::DriftMatched` and the ω
/// coordinate held fixed, `pf_mle` then searches along the likelihood ridge.
pub fn pin_drift<T: Real>(series: &LogReturnSeries<T>, start: &VgsaParams<T>, mu: T) -> Result<VgsaParams<T>> {
    ModelParams::Vgsa(*start).validate()?;
    let omega = series.modal_return() / series.dt - mu;
    let v = from_chart(PfChart::DriftMatched, &[start.sigma, start.nu, omega]);
    let out = VgsaParams { theta: v[2], ..*start };
    ModelParams::Vgsa(out).validate()?;
    Ok(out)
}

/// Minimizes the particle-filter negative log-likelihood by Nelder-Mead.
/// Every evaluation reuses `cfg.seed`, so the optimizer sees a deterministic
/// surface. Coordinates with `free[i] == false` stay at their start value.
pub fn pf_mle<T: Real>(
    series: &LogReturnSeries<T>,
    start: &VgsaParams<T>,
    mu: T,
    cfg: &PfConfig,
    nm: &NmOptions,
    free: &[bool; 6],
    chart: PfChart,
) -> Result<PfMleResult<T>> {
    ModelParams::Vgsa(*start).validate()?;
    let full = to_chart(chart, &ModelParams::Vgsa(*start).to_vec())?;
    let mask = ModelKind::Vgsa.positive_mask();
    let idx: Vec<usize> = (0..6).filter(|&i| free[i]).collect();
    if idx.is_empty() {
        return invalid("pf_mle: no free parameters");
    }
    let expand = |v: &[T]| -> Vec<T> {
        let mut out = full.clone();
        for (&i, &x) in idx.iter().zip(v) {
            out[i] = x;
        }
        from_chart(chart, &out)
    };
    let nll = |v: &[T]| -> T {
        match ModelParams::from_slice(ModelKind::Vgsa, &expand(v)) {
            Ok(ModelParams::Vgsa(p)) => vgsa_pf_loglik(series, &p, mu, cfg).map_or(T::infinity(), |o| o.nll),
            _ => T::infinity(),
        }
    };
    let x0: Vec<T> = idx.iter().map(|&i| full[i]).collect();
    let start_nll = nll(&x0);
    if !start_nll.is_finite() {
        return invalid("pf_mle: likelihood is not finite at the start point");
    }
    let pos: Vec<bool> = idx.iter().map(|&i| mask[i]).collect();
    let r = nelder_mead(nll, &x0, &pos, nm)?;
    let params = match ModelParams::from_slice(ModelKind::Vgsa, &expand(&r.x))? {
        ModelParams::Vgsa(p) => p,
        _ => unreachable!(),
    };
    Ok(PfMleResult { params, nll: r.fx, start_nll, iterations: r.iterations, converged: r.converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{simulate_vg, McConfig};
    use crate::models::{MarketEnv, VgParams};

    fn series(seed: u64, n: usize) -> LogReturnSeries<f64> {
        let env = MarketEnv { s0: 100.0, r: 0.1, q: 0.0 };
        let cfg = McConfig { num_paths: 1, steps: n, seed, antithetic: false, ..McConfig::default() };
        let paths = simulate_vg(&env, &VgParams::new(0.28, 0.41, 0.1), 1.0, &cfg).unwrap();
        LogReturnSeries::new(paths.paths[0].log_prices.clone(), 1.0 / n as f64).unwrap()
    }

    fn vgsa(s: f64, n: f64, t: f64) -> VgsaParams<f64> {
        VgsaParams { sigma: s, nu: n, theta: t, kappa: 1e-3, eta: 1e-3, lambda: 1e-3 }
    }

    #[test]
    fn deterministic_and_finite() {
        let s = series(1, 300);
        let cfg = PfConfig { seed: 4, ..PfConfig::default() };
        let a = vgsa_pf_loglik(&s, &vgsa(0.28, 0.41, 0.1), 0.1, &cfg).unwrap();
        let b = vgsa_pf_loglik(&s, &vgsa(0.28, 0.41, 0.1), 0.1, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.nll.is_finite() && a.zero_weight_steps == 0);
        assert_eq!(a.states.len(), 300);
        let one = vgsa_pf_loglik(&s, &vgsa(0.28, 0.41, 0.1), 0.1, &PfConfig { particles: 1, ..cfg }).unwrap();
        assert!(one.nll.is_finite());
    }

    #[test]
    fn truth_beats_inflated_sigma() {
        let s = series(2, 1000);
        let cfg = PfConfig::default();
        let t = vgsa_pf_loglik(&s, &vgsa(0.28, 0.41, 0.1), 0.1, &cfg).unwrap().nll;
        let w = vgsa_pf_loglik(&s, &vgsa(0.42, 0.41, 0.1), 0.1, &cfg).unwrap().nll;
        assert!(t < w, "{t} vs {w}");
    }

    #[test]
    fn mle_descends() {
        let s = series(3, 250);
        let nm = NmOptions { max_iters: 40, ..NmOptions::default() };
        let free = [true, true, true, false, false, false];
        for chart in [PfChart::Natural, PfChart::DriftMatched] {
            let r = pf_mle(&s, &vgsa(0.56, 0.82, 0.2), 0.1, &PfConfig::default(), &nm, &free, chart).unwrap();
            assert!(r.nll <= r.start_nll);
            assert_eq!((r.params.kappa, r.params.eta, r.params.lambda), (1e-3, 1e-3, 1e-3));
        }
    }

    #[test]
    fn chart_round_trip() {
        let v = [0.28_f64, 0.41, 0.1, 1.0, 2.0, 3.0];
        let back = from_chart(PfChart::DriftMatched, &to_chart(PfChart::DriftMatched, &v).unwrap());
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
