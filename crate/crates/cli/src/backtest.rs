//! Backtests on a synthetic VG world: day-by-day calibration, filter
//! estimation on a simulated path, and the strip comparison between the two.

use crate::error::{usage, CliError, Result};
use crate::io::{read_text, sidecar};
use crate::opts::{parse_params, CalibArgs, CompareArgs, PfArgs, RmemcArgs, Settings};
use levyq::calib::{
    choose_alpha, default_start_grid, multistart_calibrate, price_chain, CalibSetup, CalibrationResult, ChainPricer,
    OptionChain, OptionQuote,
};
use levyq::filter::{pf_mle, pin_drift, vgsa_pf_loglik, FilterOutput, LogReturnSeries, PfChart, PfConfig, PfMleResult};
use levyq::calib::NmOptions;
use levyq::mc::{mc_price, simulate_terminal, simulate_vg, McConfig};
use levyq::models::{MarketEnv, ModelKind, ModelParams, VgsaParams};
use levyq::pricing::{cos_price_strikes, CosConfig, OptionKind, PricingMethod};
use serde::Serialize;
use std::path::Path;

/// Volatility used for vega-based alpha and weights when none is given.
pub const DEFAULT_VEGA_SIGMA: f64 = 0.2;
/// alpha = scale × median vega after the first backtest day.
pub const DEFAULT_ALPHA_SCALE: f64 = 1e-3;

/// One simulated VG path observed at `steps` equally spaced times.
pub fn synthetic_series(
    truth: &ModelParams<f64>,
    env: &MarketEnv<f64>,
    horizon: f64,
    steps: usize,
    seed: u64,
) -> Result<LogReturnSeries<f64>> {
    let ModelParams::Vg(p) = truth else {
        return usage(format!("the synthetic world is VG, got {}", truth.kind()));
    };
    let cfg = McConfig { num_paths: 1, steps, seed, antithetic: false, ..McConfig::default() };
    let path = simulate_vg(env, p, horizon, &cfg)?;
    Ok(LogReturnSeries::new(path.paths[0].log_prices.clone(), horizon / steps as f64)?)
}

/// Particle-filter maximum likelihood in the drift-matched chart. Unless ω
/// is free it is pinned to the modal return first.
pub fn estimate_pf(
    series: &LogReturnSeries<f64>,
    start: &VgsaParams<f64>,
    mu: f64,
    pf: &PfConfig,
    nm: &NmOptions,
    free: &[bool; 6],
) -> Result<PfMleResult<f64>> {
    let start = if free[2] { *start } else { pin_drift(series, start, mu)? };
    Ok(pf_mle(series, &start, mu, pf, nm, free, PfChart::DriftMatched)?)
}

/// Premiums on a strip with their Monte Carlo standard errors (zero for COS).
pub fn price_strip(
    model: &ModelParams<f64>,
    env: &MarketEnv<f64>,
    strikes: &[f64],
    t: f64,
    method: PricingMethod,
    cos: &CosConfig,
    mc: &McConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match method {
        PricingMethod::Mc => {
            let sample = simulate_terminal(model, env, t, mc)?;
            let mut p = Vec::with_capacity(strikes.len());
            let mut se = Vec::with_capacity(strikes.len());
            for &k in strikes {
                let m = mc_price(&sample, OptionKind::Call, k, env, t)?;
                p.push(m.premium);
                se.push(m.standard_error);
            }
            Ok((p, se))
        }
        PricingMethod::Cos => {
            Ok((cos_price_strikes(model, env, OptionKind::Call, strikes, t, cos)?, vec![0.0; strikes.len()]))
        }
        m => usage(format!("strip pricing supports cos and mc, not {m}")),
    }
}

/// Calibration settings from flags and config. alpha > 0 needs a prior.
pub fn calib_setup(
    s: &Settings,
    chain: &OptionChain<f64>,
    kind: ModelKind,
    a: &CalibArgs,
    default_scale: Option<f64>,
    prior: Option<ModelParams<f64>>,
) -> Result<CalibSetup<f64>> {
    let vs = a.vega_sigma.or(s.file.calib.vega_sigma).unwrap_or(DEFAULT_VEGA_SIGMA);
    let prior = match prior {
        Some(p) => Some(p),
        None => s.prior(kind, &a.prior)?,
    };
    let alpha = match (a.alpha.or(s.file.calib.alpha), a.alpha_scale.or(s.file.calib.alpha_scale).or(default_scale)) {
        (Some(x), _) => x,
        (None, Some(scale)) if prior.is_some() => choose_alpha(chain, scale, vs),
        _ => 0.0,
    };
    if alpha > 0.0 && prior.is_none() {
        return usage("alpha > 0 needs a prior (--prior)");
    }
    let pricer = match s.method(PricingMethod::Cos) {
        PricingMethod::Mc => ChainPricer::Mc(s.mc),
        _ => ChainPricer::Cos(s.file.cos),
    };
    Ok(CalibSetup { alpha, prior, weights: s.weights(a), pricer, nm: s.nm(), ..CalibSetup::default() })
}

fn strip_chain(env: MarketEnv<f64>, strikes: &[f64], t: f64, premiums: &[f64]) -> Result<OptionChain<f64>> {
    let quotes = strikes.iter().zip(premiums).map(|(&k, &p)| OptionQuote::call(k, t, p)).collect();
    Ok(OptionChain::new(quotes, env)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct DayRow {
    pub day: usize,
    pub spot: f64,
    pub truth: Option<ModelParams<f64>>,
    pub result: Option<CalibrationResult<f64>>,
    /// Σ (model − observed)² over the day's strip.
    pub sse: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RmemcReport {
    pub days: Vec<DayRow>,
}

fn lerp(a: &ModelParams<f64>, b: &ModelParams<f64>, w: f64) -> Result<ModelParams<f64>> {
    let v: Vec<f64> = a.to_vec().iter().zip(b.to_vec()).map(|(x, y)| x + (y - x) * w).collect();
    Ok(ModelParams::from_slice(a.kind(), &v)?)
}

/// Calibrates each day with the previous day's estimate as prior and start.
/// Days come from --chain files, or from a synthetic VG world whose spot
/// moves one trading day at a time. A failed day is recorded and skipped.
pub fn backtest_rmemc(s: &Settings, a: &RmemcArgs) -> Result<RmemcReport> {
    let kind = s.model(ModelKind::Vg);
    let mut days: Vec<(OptionChain<f64>, Option<ModelParams<f64>>)> = Vec::new();
    if !s.common.chain.is_empty() {
        for p in &s.common.chain {
            days.push((crate::io::load_option_chain(p, s.explicit_env())?, None));
        }
    } else {
        let first = s.world_params()?;
        let last = match &a.final_params {
            Some(f) => parse_params(ModelKind::Vg, f)?,
            None => first,
        };
        let n = a.days.unwrap_or(s.file.world.days);
        if n == 0 {
            return usage("--days must be at least 1");
        }
        let path = synthetic_series(&first, &s.env, n as f64 / 252.0, n, s.seed)?;
        let t = a.maturity.unwrap_or(s.file.strip.maturity);
        let method = s.method(PricingMethod::Cos);
        for d in 0..n {
            let truth = lerp(&first, &last, if n > 1 { d as f64 / (n - 1) as f64 } else { 0.0 })?;
            let env = MarketEnv { s0: path.log_prices[d].exp(), ..s.env };
            let strikes = s.file.strip.strikes(env.s0);
            let (prem, _) = price_strip(&truth, &env, &strikes, t, method, &s.file.cos, &s.mc)?;
            days.push((strip_chain(env, &strikes, t, &prem)?, Some(truth)));
        }
    }

    let mut rows = Vec::with_capacity(days.len());
    let mut prev: Option<ModelParams<f64>> = None;
    for (d, (chain, truth)) in days.iter().enumerate() {
        let scale = prev.map(|_| DEFAULT_ALPHA_SCALE);
        let run = || -> Result<(CalibrationResult<f64>, f64)> {
            let mut ca = a.calib.clone();
            if prev.is_none() && s.prior(kind, &ca.prior)?.is_none() {
                // nothing to regularize toward yet
                ca.alpha = Some(0.0);
            }
            let setup = calib_setup(s, chain, kind, &ca, scale, prev)?;
            let mut starts: Vec<ModelParams<f64>> = prev.into_iter().collect();
            starts.extend(default_start_grid(kind));
            let r = multistart_calibrate(chain, &starts, &setup)?;
            let model = price_chain(&r.params, chain, &setup.pricer)?;
            let sse = chain.quotes.iter().zip(&model).map(|(q, m)| (m - q.mid) * (m - q.mid)).sum();
            Ok((r, sse))
        };
        let row = match run() {
            Ok((r, sse)) => {
                prev = Some(r.params);
                DayRow { day: d, spot: chain.env.s0, truth: *truth, result: Some(r), sse: Some(sse), error: None }
            }
            Err(e) => DayRow { day: d, spot: chain.env.s0, truth: *truth, result: None, sse: None, error: Some(e.to_string()) },
        };
        rows.push(row);
    }
    Ok(RmemcReport { days: rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct PfReport {
    pub truth: Option<ModelParams<f64>>,
    pub start: VgsaParams<f64>,
    pub estimate: PfMleResult<f64>,
    /// Filter nll of the truth on its near-VG clock.
    pub nll_truth: Option<f64>,
    pub mu: f64,
    pub dt: f64,
    pub log_prices: Vec<f64>,
    pub filter: FilterOutput<f64>,
}

fn series_for(s: &Settings, steps: Option<usize>, horizon: Option<f64>) -> Result<(LogReturnSeries<f64>, Option<ModelParams<f64>>)> {
    match &s.common.series {
        Some(p) => Ok((crate::io::load_price_series(p, None)?, None)),
        None => {
            let truth = s.world_params()?;
            let w = s.file.world;
            let series = synthetic_series(
                &truth,
                &s.env,
                horizon.unwrap_or(w.horizon),
                steps.unwrap_or(w.steps),
                s.seed,
            )?;
            Ok((series, Some(truth)))
        }
    }
}

fn near_vg(truth: &ModelParams<f64>, clock: &VgsaParams<f64>) -> Option<VgsaParams<f64>> {
    match truth {
        ModelParams::Vg(p) => Some(VgsaParams {
            sigma: p.sigma,
            nu: p.nu,
            theta: p.theta,
            kappa: clock.kappa,
            eta: clock.eta,
            lambda: clock.lambda,
        }),
        _ => None,
    }
}

/// Filter estimation on --series, or on a synthetic path from the truth.
pub fn backtest_pf(s: &Settings, a: &PfArgs) -> Result<PfReport> {
    let (series, truth) = series_for(s, a.steps, a.horizon)?;
    let mu = s.mu(&a.pf);
    let cfg = s.pf_config(&a.pf);
    let start = s.pf_start(&a.pf)?;
    let estimate = estimate_pf(&series, &start, mu, &cfg, &s.nm(), &s.free(&a.pf)?)?;
    let filter = vgsa_pf_loglik(&series, &estimate.params, mu, &cfg)?;
    let nll_truth = match truth.as_ref().and_then(|t| near_vg(t, &start)) {
        Some(p) => Some(vgsa_pf_loglik(&series, &p, mu, &cfg)?.nll),
        None => None,
    };
    Ok(PfReport { truth, start, estimate, nll_truth, mu, dt: series.dt, log_prices: series.log_prices, filter })
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub strike: f64,
    pub actual: f64,
    pub ls: f64,
    pub pf: f64,
    pub actual_se: f64,
    pub ls_se: f64,
    pub pf_se: f64,
    pub actual_cos: f64,
    pub ls_cos: f64,
    pub pf_cos: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub truth: ModelParams<f64>,
    pub ls: ModelParams<f64>,
    pub pf: ModelParams<f64>,
    pub maturity: f64,
    /// Seed of the common LS/PF pricing run; the actual premiums use seed + 1.
    pub seed: u64,
    pub rows: Vec<CompareRow>,
    pub mean_ls_pf: f64,
    pub mean_ls_actual: f64,
    pub mean_pf_actual: f64,
    pub calibration: Option<CalibrationResult<f64>>,
    pub estimate: Option<PfMleResult<f64>>,
}

/// Parameters from a JSON output's top-level `params`, or from the
/// `model`/`params` metadata of a CSV output.
pub fn read_params(path: &Path) -> Result<ModelParams<f64>> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::data(path, e.to_string()))?;
        let p = v.get("params").ok_or_else(|| CliError::data(path, "no 'params' field"))?;
        return serde_json::from_value(p.clone()).map_err(|e| CliError::data(path, e.to_string()));
    }
    let side = sidecar(&text);
    let (Some(m), Some(p)) = (side.get("model"), side.get("params")) else {
        return Err(CliError::data(path, "no '# model=' and '# params=' metadata"));
    };
    let kind: ModelKind = m.parse()?;
    parse_params(kind, p)
}

/// Prices the strip under the truth (the actual premiums, own seed), the
/// calibrated and the filtered parameters (one shared seed), and by COS.
/// Missing --ls / --pf-result inputs are produced on the spot: LS fits the
/// actual premiums, PF maximizes the filter likelihood of the world's path.
pub fn compare(s: &Settings, a: &CompareArgs) -> Result<CompareReport> {
    let truth = s.world_params()?;
    let env = s.env;
    let t = a.maturity.unwrap_or(s.file.strip.maturity);
    let strikes = s.file.strip.strikes(env.s0);
    let cos = &s.file.cos;
    let mc_actual = McConfig { seed: s.mc.seed.wrapping_add(1), ..s.mc };
    let (actual, actual_se) = price_strip(&truth, &env, &strikes, t, PricingMethod::Mc, cos, &mc_actual)?;

    let (ls, calibration) = match &a.ls {
        Some(p) => (read_params(p)?, None),
        None => {
            let chain = strip_chain(env, &strikes, t, &actual)?;
            let kind = s.model(ModelKind::Vg);
            let setup = calib_setup(s, &chain, kind, &a.calib, None, None)?;
            let r = multistart_calibrate(&chain, &default_start_grid(kind), &setup)?;
            (r.params, Some(r))
        }
    };
    let (pf, estimate) = match &a.pf_result {
        Some(p) => (read_params(p)?, None),
        None => {
            let (series, _) = series_for(s, None, None)?;
            let e = estimate_pf(
                &series,
                &s.pf_start(&a.pf)?,
                s.mu(&a.pf),
                &s.pf_config(&a.pf),
                &s.nm(),
                &s.free(&a.pf)?,
            )?;
            (ModelParams::Vgsa(e.params), Some(e))
        }
    };

    let (ls_mc, ls_se) = price_strip(&ls, &env, &strikes, t, PricingMethod::Mc, cos, &s.mc)?;
    let (pf_mc, pf_se) = price_strip(&pf, &env, &strikes, t, PricingMethod::Mc, cos, &s.mc)?;
    let (actual_cos, _) = price_strip(&truth, &env, &strikes, t, PricingMethod::Cos, cos, &s.mc)?;
    let (ls_cos, _) = price_strip(&ls, &env, &strikes, t, PricingMethod::Cos, cos, &s.mc)?;
    let (pf_cos, _) = price_strip(&pf, &env, &strikes, t, PricingMethod::Cos, cos, &s.mc)?;

    let rows: Vec<CompareRow> = (0..strikes.len())
        .map(|i| CompareRow {
            strike: strikes[i],
            actual: actual[i],
            ls: ls_mc[i],
            pf: pf_mc[i],
            actual_se: actual_se[i],
            ls_se: ls_se[i],
            pf_se: pf_se[i],
            actual_cos: actual_cos[i],
            ls_cos: ls_cos[i],
            pf_cos: pf_cos[i],
        })
        .collect();
    let mean = |f: &dyn Fn(&CompareRow) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
    let mean_ls_pf = mean(&|r| (r.ls - r.pf).abs());
    let mean_ls_actual = mean(&|r| (r.ls - r.actual).abs());
    let mean_pf_actual = mean(&|r| (r.pf - r.actual).abs());
    Ok(CompareReport {
        truth,
        ls,
        pf,
        maturity: t,
        seed: s.mc.seed,
        rows,
        mean_ls_pf,
        mean_ls_actual,
        mean_pf_actual,
        calibration,
        estimate,
    })
}
