//! Least-squares calibration on option chains, optionally regularized by the
//! relative entropy of the model's Lévy measure to a prior (RMEMC).

mod entropy;
mod nm;

pub use entropy::{jump_entropy, relative_entropy, relative_entropy_parts, EntropyParts};
pub use nm::{nelder_mead, NmOptions, NmResult};

use crate::error::{invalid, LevyError, Result};
use crate::mc::{mc_price, simulate_terminal, McConfig};
use crate::models::{default_levy_grid, discretize_levy_measure, DiscreteLevyMeasure, MarketEnv, ModelKind, ModelParams};
use crate::pricing::{cos_price_strikes, CosConfig, OptionKind};
use crate::scalar::Real;
use crate::specfun::norm_cdf;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const VEGA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote<T> {
    pub strike: T,
    pub maturity: T,
    pub mid: T,
    pub bid: Option<T>,
    pub ask: Option<T>,
    /// Overrides the scheme weight for this quote.
    pub weight: Option<T>,
    #[serde(default = "default_kind")]
    pub kind: OptionKind,
}

fn default_kind() -> OptionKind {
    OptionKind::Call
}

impl<T: Real> OptionQuote<T> {
    pub fn call(strike: T, maturity: T, mid: T) -> Self {
        Self { strike, maturity, mid, bid: None, ask: None, weight: None, kind: OptionKind::Call }
    }

    fn validate(&self, i: usize) -> Result<()> {
        if !(self.strike > T::zero()) || !(self.maturity > T::zero()) || !self.mid.is_finite() {
            return invalid(format!("quote {i}: strike and maturity must be positive, mid finite"));
        }
        if self.bid.is_some_and(|b| b > self.mid) || self.ask.is_some_and(|a| a < self.mid) {
            return invalid(format!("quote {i}: need bid <= mid <= ask"));
        }
        if self.weight.is_some_and(|w| !(w >= T::zero())) {
            return invalid(format!("quote {i}: weight must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionChain<T> {
    pub quotes: Vec<OptionQuote<T>>,
    pub env: MarketEnv<T>,
}

impl<T: Real> OptionChain<T> {
    pub fn new(quotes: Vec<OptionQuote<T>>, env: MarketEnv<T>) -> Result<Self> {
        let c = Self { quotes, env };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.quotes.is_empty() {
            return invalid("option chain is empty");
        }
        self.env.validate()?;
        for (i, q) in self.quotes.iter().enumerate() {
            q.validate(i)?;
        }
        Ok(())
    }

    pub fn max_maturity(&self) -> T {
        self.quotes.iter().map(|q| q.maturity).fold(T::zero(), T::max)
    }

    /// ‖bid − ask‖₂/2 over quotes that carry both sides.
    pub fn noise_level(&self) -> Option<T> {
        let sq: Vec<T> =
            self.quotes.iter().filter_map(|q| Some((q.ask? - q.bid?) * (q.ask? - q.bid?))).collect();
        if sq.is_empty() {
            None
        } else {
            Some(sq.into_iter().sum::<T>().sqrt() / T::c(2.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainPricer {
    Cos(CosConfig),
    Mc(McConfig),
}

impl Default for ChainPricer {
    fn default() -> Self {
        ChainPricer::Cos(CosConfig::default())
    }
}

/// Model premiums for every quote, in chain order.
pub fn price_chain<T: Real>(model: &ModelParams<T>, chain: &OptionChain<T>, pricer: &ChainPricer) -> Result<Vec<T>> {
    let mut out = vec![T::nan(); chain.quotes.len()];
    let mut done = vec![false; chain.quotes.len()];
    for i in 0..chain.quotes.len() {
        if done[i] {
            continue;
        }
        let t = chain.quotes[i].maturity;
        match pricer {
            ChainPricer::Cos(cfg) => {
                for kind in [OptionKind::Call, OptionKind::Put] {
                    let idx: Vec<usize> = (i..chain.quotes.len())
                        .filter(|&j| !done[j] && chain.quotes[j].maturity == t && chain.quotes[j].kind == kind)
                        .collect();
                    if idx.is_empty() {
                        continue;
                    }
                    let strikes: Vec<T> = idx.iter().map(|&j| chain.quotes[j].strike).collect();
                    let prices = cos_price_strikes(model, &chain.env, kind, &strikes, t, cfg)
                        .map_err(|e| annotate(e, idx[0], &chain.quotes[idx[0]]))?;
                    for (&j, p) in idx.iter().zip(prices) {
                        out[j] = p;
                        done[j] = true;
                    }
                }
            }
            ChainPricer::Mc(cfg) => {
                let sample = simulate_terminal(model, &chain.env, t, cfg)?;
                for j in i..chain.quotes.len() {
                    let q = &chain.quotes[j];
                    if !done[j] && q.maturity == t {
                        out[j] = mc_price(&sample, q.kind, q.strike, &chain.env, t)
                            .map_err(|e| annotate(e, j, q))?
                            .premium;
                        done[j] = true;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn annotate<T: Real>(e: LevyError, i: usize, q: &OptionQuote<T>) -> LevyError {
    let ctx = format!("quote {i} (K={}, T={})", q.strike, q.maturity);
    match e {
        LevyError::Domain(m) => LevyError::Domain(format!("{ctx}: {m}")),
        LevyError::Overflow(m) => LevyError::Overflow(format!("{ctx}: {m}")),
        LevyError::Unsupported(m) => LevyError::Unsupported(format!("{ctx}: {m}")),
        LevyError::NonConvergence(m) => LevyError::NonConvergence(format!("{ctx}: {m}")),
        LevyError::InvalidInput(m) => LevyError::InvalidInput(format!("{ctx}: {m}")),
        LevyError::Numerical(m) => LevyError::Numerical(format!("{ctx}: {m}")),
    }
}

/// |K e^{−rT} N(d₋) √T|, floored at [`VEGA_FLOOR`].
pub fn vega<T: Real>(env: &MarketEnv<T>, k: T, t: T, sigma: T) -> T {
    let st = sigma * t.sqrt();
    let d_minus = ((env.s0 / k).ln() + (env.r - env.q - sigma * sigma / T::c(2.0)) * t) / st;
    let v = (k * (-env.r * t).exp() * norm_cdf(d_minus) * t.sqrt()).abs();
    if v > T::c(VEGA_FLOOR) {
        v
    } else {
        T::c(VEGA_FLOOR)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme<T> {
    Unit,
    /// 1/vega² at the given Black-Scholes volatility.
    Vega { sigma: T },
}

pub fn chain_weights<T: Real>(chain: &OptionChain<T>, scheme: WeightScheme<T>) -> Vec<T> {
    chain
        .quotes
        .iter()
        .map(|q| {
            q.weight.unwrap_or_else(|| match scheme {
                WeightScheme::Unit => T::one(),
                WeightScheme::Vega { sigma } => {
                    let v = vega(&chain.env, q.strike, q.maturity, sigma);
                    T::one() / (v * v)
                }
            })
        })
        .collect()
}

/// Σ w_i (Ĉ_i − C_i)².
pub fn weighted_sq_error<T: Real>(
    model: &ModelParams<T>,
    chain: &OptionChain<T>,
    weights: &[T],
    pricer: &ChainPricer,
) -> Result<T> {
    if weights.len() != chain.quotes.len() {
        return invalid(format!("{} weights for {} quotes", weights.len(), chain.quotes.len()));
    }
    let prices = price_chain(model, chain, pricer)?;
    Ok(chain.quotes.iter().zip(&prices).zip(weights).map(|((q, &p), &w)| w * (q.mid - p) * (q.mid - p)).sum())
}

/// Unweighted root mean square pricing error.
pub fn chain_rmse<T: Real>(model: &ModelParams<T>, chain: &OptionChain<T>, pricer: &ChainPricer) -> Result<T> {
    let prices = price_chain(model, chain, pricer)?;
    let n = T::n(prices.len());
    Ok((chain.quotes.iter().zip(&prices).map(|(q, &p)| (q.mid - p) * (q.mid - p)).sum::<T>() / n).sqrt())
}

/// scale_A times the median vega of the chain at volatility `sigma`.
pub fn choose_alpha<T: Real>(chain: &OptionChain<T>, scale_a: T, sigma: T) -> T {
    let mut v: Vec<T> = chain.quotes.iter().map(|q| vega(&chain.env, q.strike, q.maturity, sigma)).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n == 0 {
        return T::zero();
    }
    let med = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / T::c(2.0) };
    scale_a * med
}

/// Measure used for entropy: VGSA contributes its VG component.
fn entropy_measure<T: Real>(model: &ModelParams<T>, grid: &[T]) -> Result<DiscreteLevyMeasure<T>> {
    match model {
        ModelParams::Vgsa(p) => discretize_levy_measure(&ModelParams::Vg(p.vg()), grid),
        m => discretize_levy_measure(m, grid),
    }
}

/// The pieces of an RMEMC objective value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms<T> {
    pub sq_error: T,
    pub entropy: T,
    pub objective: T,
}

/// A chain, weights, prior and α bundled for repeated objective evaluation.
pub struct Rmemc<'a, T> {
    pub chain: &'a OptionChain<T>,
    pub weights: Vec<T>,
    pub alpha: T,
    pub pricer: ChainPricer,
    grid: Vec<T>,
    prior: Option<DiscreteLevyMeasure<T>>,
    horizon: T,
}

impl<'a, T: Real> Rmemc<'a, T> {
    pub fn new(
        chain: &'a OptionChain<T>,
        weights: Vec<T>,
        prior: Option<&ModelParams<T>>,
        alpha: T,
        grid: Vec<T>,
        pricer: ChainPricer,
    ) -> Result<Self> {
        chain.validate()?;
        if !(alpha >= T::zero()) {
            return invalid(format!("alpha must be nonnegative, got {alpha}"));
        }
        if weights.len() != chain.quotes.len() {
            return invalid(format!("{} weights for {} quotes", weights.len(), chain.quotes.len()));
        }
        let prior = prior.map(|p| entropy_measure(p, &grid)).transpose()?;
        Ok(Self { chain, weights, alpha, pricer, grid, prior, horizon: chain.max_maturity() })
    }

    /// Entropy of the model's Lévy measure to the prior over the longest
    /// maturity; zero without a prior.
    pub fn entropy(&self, model: &ModelParams<T>) -> Result<T> {
        match &self.prior {
            None => Ok(T::zero()),
            Some(p) => relative_entropy(&entropy_measure(model, &self.grid)?, p, self.horizon),
        }
    }

    pub fn terms(&self, model: &ModelParams<T>) -> Result<ObjectiveTerms<T>> {
        let sq_error = weighted_sq_error(model, self.chain, &self.weights, &self.pricer)?;
        let entropy = if self.alpha == T::zero() { T::zero() } else { self.entropy(model)? };
        Ok(ObjectiveTerms { sq_error, entropy, objective: sq_error + self.alpha * entropy })
    }
}

/// weighted_sq_error + α·relative_entropy to the prior.
pub fn rmemc_objective<T: Real>(
    model: &ModelParams<T>,
    chain: &OptionChain<T>,
    weights: &[T],
    prior: &ModelParams<T>,
    alpha: T,
    grid: &[T],
    pricer: &ChainPricer,
) -> Result<T> {
    let r = Rmemc::new(chain, weights.to_vec(), Some(prior), alpha, grid.to_vec(), *pricer)?;
    Ok(r.terms(model)?.objective)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibSetup<T> {
    pub alpha: T,
    pub prior: Option<ModelParams<T>>,
    pub weights: WeightScheme<T>,
    pub pricer: ChainPricer,
    pub grid: Vec<T>,
    pub nm: NmOptions,
}

impl<T: Real> Default for CalibSetup<T> {
    fn default() -> Self {
        Self {
            alpha: T::zero(),
            prior: None,
            weights: WeightScheme::Unit,
            pricer: ChainPricer::default(),
            grid: default_levy_grid(),
            nm: NmOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult<T> {
    pub params: ModelParams<T>,
    /// rmse² + alpha·entropy at `params`.
    pub objective: T,
    /// Square root of the weighted squared error.
    pub rmse: T,
    /// Unweighted root mean square pricing error.
    pub price_rmse: T,
    pub entropy: T,
    pub alpha: T,
    pub iterations: usize,
    pub start_id: usize,
    pub converged: bool,
}

fn run_start<T: Real>(
    obj: &Rmemc<'_, T>,
    start: &ModelParams<T>,
    start_id: usize,
    nm: &NmOptions,
) -> Result<CalibrationResult<T>> {
    start.validate()?;
    let kind = start.kind();
    let f = |x: &[T]| -> T {
        ModelParams::from_slice(kind, x)
            .and_then(|m| {
                m.validate()?;
                obj.terms(&m)
            })
            .map_or(T::infinity(), |t| t.objective)
    };
    let r = nelder_mead(f, &start.to_vec(), kind.positive_mask(), nm)?;
    let params = ModelParams::from_slice(kind, &r.x)?;
    let terms = obj.terms(&params)?;
    let entropy = if obj.alpha == T::zero() { obj.entropy(&params).unwrap_or(T::nan()) } else { terms.entropy };
    Ok(CalibrationResult {
        params,
        objective: terms.objective,
        rmse: terms.sq_error.sqrt(),
        price_rmse: chain_rmse(&params, obj.chain, &obj.pricer)?,
        entropy,
        alpha: obj.alpha,
        iterations: r.iterations,
        start_id,
        converged: r.converged,
    })
}

/// Nelder-Mead from every start (in parallel); the lowest objective wins,
/// ties go to the lower entropy and then the lower start index.
pub fn multistart_calibrate<T: Real>(
    chain: &OptionChain<T>,
    starts: &[ModelParams<T>],
    setup: &CalibSetup<T>,
) -> Result<CalibrationResult<T>> {
    if starts.is_empty() {
        return invalid("empty start grid");
    }
    let weights = chain_weights(chain, setup.weights);
    let obj = Rmemc::new(chain, weights, setup.prior.as_ref(), setup.alpha, setup.grid.clone(), setup.pricer)?;
    let runs: Vec<Result<CalibrationResult<T>>> =
        starts.par_iter().enumerate().map(|(i, s)| run_start(&obj, s, i, &setup.nm)).collect();
    let mut best: Option<CalibrationResult<T>> = None;
    let mut failures = Vec::new();
    for (i, r) in runs.into_iter().enumerate() {
        match r {
            Ok(r) => {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        r.objective < b.objective || (r.objective == b.objective && r.entropy < b.entropy)
                    }
                };
                if better && r.objective.is_finite() {
                    best = Some(r);
                }
            }
            Err(e) => failures.push(format!("start {i}: {e}")),
        }
    }
    best.ok_or_else(|| LevyError::NonConvergence(format!("all starts failed: {}", failures.join("; "))))
}

/// Single-start calibration.
pub fn calibrate<T: Real>(chain: &OptionChain<T>, start: &ModelParams<T>, setup: &CalibSetup<T>) -> Result<CalibrationResult<T>> {
    multistart_calibrate(chain, std::slice::from_ref(start), setup)
}

/// Cartesian product of per-parameter axes, first axis slowest.
pub fn product_grid<T: Real>(kind: ModelKind, axes: &[Vec<T>]) -> Result<Vec<ModelParams<T>>> {
    if axes.len() != kind.param_names().len() || axes.iter().any(|a| a.is_empty()) {
        return invalid(format!("{kind} needs {} nonempty axes", kind.param_names().len()));
    }
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out.into_iter().flat_map(|p: Vec<T>| axis.iter().map(move |&v| [p.clone(), vec![v]].concat())).collect();
    }
    out.iter().map(|v| ModelParams::from_slice(kind, v)).collect()
}

/// A 3-point-per-axis start grid; VGSA keeps its clock parameters fixed.
pub fn default_start_grid<T: Real>(kind: ModelKind) -> Vec<ModelParams<T>> {
    let ax = |v: &[f64]| v.iter().map(|&x| T::c(x)).collect::<Vec<T>>();
    let axes = match kind {
        ModelKind::Bs => vec![ax(&[0.1, 0.2, 0.4])],
        ModelKind::Vg => vec![ax(&[0.1, 0.2, 0.3]), ax(&[0.05, 0.2, 0.5]), ax(&[-0.2, 0.0, 0.2])],
        ModelKind::Vgsa => vec![
            ax(&[0.1, 0.2, 0.3]),
            ax(&[0.05, 0.2, 0.5]),
            ax(&[-0.2, 0.0, 0.2]),
            ax(&[1.0]),
            ax(&[1.0]),
            ax(&[0.5]),
        ],
        ModelKind::Cgmy => vec![ax(&[0.5, 1.0, 2.0]), ax(&[2.0, 5.0, 10.0]), ax(&[2.0, 5.0, 10.0]), ax(&[0.3, 0.8, 1.3])],
    };
    product_grid(kind, &axes).expect("static grid is well formed")
}
