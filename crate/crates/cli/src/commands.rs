//! One function per subcommand; each returns the text to emit.

use crate::backtest::{self, estimate_pf, CompareReport, PfReport, RmemcReport};
use crate::error::{usage, CliError, Result};
use crate::io::{csv_text, fmt_f64, json_text, load_option_chain, load_price_series, Meta};
use crate::opts::{
    params_string, parse_list, CalibrateArgs, Cli, Command, FilterArgs, Format, PriceArgs, Settings, SimulateArgs,
};
use levyq::calib::{default_start_grid, multistart_calibrate, price_chain};
use levyq::filter::vgsa_pf_loglik;
use levyq::mc::{mc_price, simulate_paths, simulate_terminal, McConfig};
use levyq::models::{MarketEnv, ModelKind, ModelParams, VgsaParams};
use levyq::pricing::{bs_call, bs_put, cos_price_strikes, fft_price, vg_call_analytic, OptionKind, PricingMethod};
use levyq::LevyError;
use serde::Serialize;

pub fn execute(cli: &Cli) -> Result<String> {
    let s = Settings::new(cli.common.clone())?;
    match &cli.command {
        Command::Price(a) => price(&s, a),
        Command::Simulate(a) => simulate(&s, a),
        Command::Calibrate(a) => calibrate(&s, a),
        Command::Filter(a) => filter(&s, a),
        Command::BacktestRmemc(a) => rmemc_output(&s, &backtest::backtest_rmemc(&s, a)?),
        Command::BacktestPf(a) => pf_output(&s, &backtest::backtest_pf(&s, a)?),
        Command::Compare(a) => compare_output(&s, &backtest::compare(&s, a)?),
    }
}

fn base_meta(s: &Settings, command: &str) -> Meta {
    let mut m = Meta::new();
    m.insert("command".into(), command.into());
    m.insert("levyq".into(), env!("CARGO_PKG_VERSION").into());
    m.insert("seed".into(), s.seed.to_string());
    m.insert("S0".into(), num(s.env.s0));
    m.insert("r".into(), num(s.env.r));
    m.insert("q".into(), num(s.env.q));
    m
}

fn with_model(m: &mut Meta, p: &ModelParams<f64>) {
    m.insert("model".into(), p.kind().to_string());
    m.insert("params".into(), params_string(p));
}

fn num(x: f64) -> String {
    fmt_f64(x)
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), num)
}

fn analytic(model: &ModelParams<f64>, env: &MarketEnv<f64>, kind: OptionKind, k: f64, t: f64) -> Result<f64> {
    let parity = |call: f64| match kind {
        OptionKind::Call => call,
        OptionKind::Put => call - env.s0 * (-env.q * t).exp() + k * (-env.r * t).exp(),
    };
    match model {
        ModelParams::Bs { sigma } => Ok(match kind {
            OptionKind::Call => bs_call(env, k, t, *sigma)?,
            OptionKind::Put => bs_put(env, k, t, *sigma)?,
        }),
        ModelParams::Vg(p) => Ok(parity(vg_call_analytic(env, k, t, p)?)),
        m => Err(LevyError::Unsupported(format!("no analytic price for {}", m.kind())).into()),
    }
}

#[derive(Serialize)]
struct PriceRow {
    strike: f64,
    premium: f64,
    std_error: Option<f64>,
}

#[derive(Serialize)]
struct PriceOut<'a> {
    params: &'a ModelParams<f64>,
    method: PricingMethod,
    kind: OptionKind,
    maturity: f64,
    rows: Vec<PriceRow>,
}

fn price(s: &Settings, a: &PriceArgs) -> Result<String> {
    let model = s.require_params(s.model(ModelKind::Bs))?;
    let method = s.method(PricingMethod::Cos);
    let env = s.env;
    let t = a.maturity.or(s.file.maturity).unwrap_or(1.0);
    let kind = a.kind.or(s.file.kind).unwrap_or(OptionKind::Call);
    let strikes = match &a.strikes {
        Some(x) => parse_list(x)?,
        None => s.file.strikes.clone().unwrap_or_else(|| s.file.strip.strikes(env.s0)),
    };
    if strikes.is_empty() {
        return usage("no strikes");
    }
    let (premiums, se): (Vec<f64>, Option<Vec<f64>>) = match method {
        PricingMethod::Analytic => {
            (strikes.iter().map(|&k| analytic(&model, &env, kind, k, t)).collect::<Result<_>>()?, None)
        }
        PricingMethod::Fft => {
            let calls = strikes
                .iter()
                .map(|&k| Ok(fft_price(&model, &env, k, t, &s.file.fft)?))
                .collect::<Result<Vec<f64>>>()?;
            let p = calls
                .iter()
                .zip(&strikes)
                .map(|(&c, &k)| match kind {
                    OptionKind::Call => c,
                    OptionKind::Put => c - env.s0 * (-env.q * t).exp() + k * (-env.r * t).exp(),
                })
                .collect();
            (p, None)
        }
        PricingMethod::Cos => (cos_price_strikes(&model, &env, kind, &strikes, t, &s.file.cos)?, None),
        PricingMethod::Mc => {
            let sample = simulate_terminal(&model, &env, t, &s.mc)?;
            let m = strikes.iter().map(|&k| mc_price(&sample, kind, k, &env, t)).collect::<levyq::Result<Vec<_>>>()?;
            (m.iter().map(|x| x.premium).collect(), Some(m.iter().map(|x| x.standard_error).collect()))
        }
    };
    let mut meta = base_meta(s, "price");
    with_model(&mut meta, &model);
    meta.insert("method".into(), method.to_string());
    if method == PricingMethod::Mc {
        meta.insert("paths".into(), s.mc.num_paths.to_string());
    }
    match s.format(Format::Csv) {
        Format::Csv => {
            let mut header = vec!["strike", "maturity", "kind", "mid"];
            if se.is_some() {
                header.push("std_error");
            }
            let rows: Vec<Vec<String>> = (0..strikes.len())
                .map(|i| {
                    let mut r = vec![num(strikes[i]), num(t), kind.to_string(), num(premiums[i])];
                    if let Some(se) = &se {
                        r.push(num(se[i]));
                    }
                    r
                })
                .collect();
            Ok(csv_text(&meta, &header, &rows))
        }
        Format::Json => {
            let rows = (0..strikes.len())
                .map(|i| PriceRow { strike: strikes[i], premium: premiums[i], std_error: se.as_ref().map(|v| v[i]) })
                .collect();
            Ok(json_text(&meta, &PriceOut { params: &model, method, kind, maturity: t, rows }))
        }
    }
}

fn simulate(s: &Settings, a: &SimulateArgs) -> Result<String> {
    let model = s.require_params(s.model(ModelKind::Vg))?;
    let t = a.maturity.or(s.file.maturity).unwrap_or(1.0);
    let mut cfg = match s.file.mc {
        Some(c) => McConfig { seed: s.mc.seed, ..c },
        None => McConfig { num_paths: 1, steps: 252, antithetic: false, ..s.mc },
    };
    if let Some(n) = a.paths {
        cfg.num_paths = n;
    }
    if let Some(n) = a.steps {
        cfg.steps = n;
    }
    if a.antithetic {
        cfg.antithetic = true;
    }
    let set = simulate_paths(&model, &s.env, t, &cfg)?;
    let mut meta = base_meta(s, "simulate");
    with_model(&mut meta, &model);
    meta.insert("maturity".into(), num(t));
    meta.insert("steps".into(), cfg.steps.to_string());
    meta.insert("paths".into(), cfg.num_paths.to_string());
    meta.insert("antithetic".into(), cfg.antithetic.to_string());
    match s.format(Format::Csv) {
        Format::Csv => {
            let single = set.paths.len() == 1;
            let mut rows = Vec::new();
            for (j, p) in set.paths.iter().enumerate() {
                for (tm, z) in p.times.iter().zip(&p.log_prices) {
                    let mut r = if single { vec![] } else { vec![j.to_string()] };
                    r.extend([num(*tm), num(z.exp()), num(*z)]);
                    rows.push(r);
                }
            }
            let header: &[&str] =
                if single { &["time", "price", "log_price"] } else { &["path", "time", "price", "log_price"] };
            Ok(csv_text(&meta, header, &rows))
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                params: &'a ModelParams<f64>,
                paths: &'a levyq::mc::PathSet<f64>,
            }
            Ok(json_text(&meta, &Out { params: &model, paths: &set }))
        }
    }
}

fn first_chain(s: &Settings) -> Result<&std::path::Path> {
    match s.common.chain.as_slice() {
        [p] => Ok(p),
        [] => usage("--chain required"),
        _ => usage("calibrate takes one --chain"),
    }
}

fn calibrate(s: &Settings, a: &CalibrateArgs) -> Result<String> {
    let chain = load_option_chain(first_chain(s)?, s.explicit_env())?;
    let kind = s.model(ModelKind::Vg);
    let setup = backtest::calib_setup(s, &chain, kind, &a.calib, None, None)?;
    let mut starts: Vec<ModelParams<f64>> = s.params(kind)?.into_iter().collect();
    starts.extend(default_start_grid(kind));
    let res = multistart_calibrate(&chain, &starts, &setup)?;
    let model = price_chain(&res.params, &chain, &setup.pricer)?;

    let mut meta = base_meta(s, "calibrate");
    meta.insert("S0".into(), num(chain.env.s0));
    meta.insert("r".into(), num(chain.env.r));
    meta.insert("q".into(), num(chain.env.q));
    with_model(&mut meta, &res.params);
    meta.insert("alpha".into(), num(res.alpha));
    if let Some(p) = &setup.prior {
        meta.insert("prior".into(), params_string(p));
    }
    match s.format(Format::Json) {
        Format::Json => {
            #[derive(Serialize)]
            struct Quote {
                strike: f64,
                maturity: f64,
                kind: OptionKind,
                mid: f64,
                model: f64,
            }
            #[derive(Serialize)]
            struct Out<'a> {
                params: &'a ModelParams<f64>,
                result: &'a levyq::calib::CalibrationResult<f64>,
                quotes: Vec<Quote>,
            }
            let quotes = chain
                .quotes
                .iter()
                .zip(&model)
                .map(|(q, &m)| Quote { strike: q.strike, maturity: q.maturity, kind: q.kind, mid: q.mid, model: m })
                .collect();
            Ok(json_text(&meta, &Out { params: &res.params, result: &res, quotes }))
        }
        Format::Csv => {
            meta.insert("rmse".into(), num(res.rmse));
            meta.insert("price_rmse".into(), num(res.price_rmse));
            meta.insert("entropy".into(), num(res.entropy));
            meta.insert("objective".into(), num(res.objective));
            meta.insert("converged".into(), res.converged.to_string());
            let rows: Vec<Vec<String>> = chain
                .quotes
                .iter()
                .zip(&model)
                .map(|(q, &m)| vec![num(q.strike), num(q.maturity), q.kind.to_string(), num(q.mid), num(m), num(m - q.mid)])
                .collect();
            Ok(csv_text(&meta, &["strike", "maturity", "kind", "mid", "model", "error"], &rows))
        }
    }
}

fn as_vgsa(p: &ModelParams<f64>) -> Result<VgsaParams<f64>> {
    match *p {
        // a clock frozen at rate 1 is exactly VG
        ModelParams::Vg(v) => Ok(VgsaParams { sigma: v.sigma, nu: v.nu, theta: v.theta, kappa: 0.0, eta: 0.0, lambda: 0.0 }),
        ModelParams::Vgsa(v) => Ok(v),
        ref m => usage(format!("the filter needs vg or vgsa parameters, got {}", m.kind())),
    }
}

fn filter_rows(out: &levyq::filter::FilterOutput<f64>, dt: f64, logs: &[f64]) -> Vec<Vec<String>> {
    (0..out.states.len())
        .map(|i| {
            vec![
                (i + 1).to_string(),
                num((i + 1) as f64 * dt),
                num(logs[i + 1]),
                num(logs[i + 1] - logs[i]),
                num(out.states[i]),
                num(out.prediction_errors[i]),
                num(out.error_variances[i]),
            ]
        })
        .collect()
}

const FILTER_HEADER: [&str; 7] = ["step", "time", "log_price", "return", "state", "prediction_error", "error_variance"];

fn filter(s: &Settings, a: &FilterArgs) -> Result<String> {
    let path = s.common.series.as_deref().ok_or_else(|| CliError::Usage("--series required".into()))?;
    let series = load_price_series(path, None)?;
    let start = as_vgsa(&s.require_params(s.model(ModelKind::Vgsa))?)?;
    let mu = s.mu(&a.pf);
    let cfg = s.pf_config(&a.pf);
    let estimate = if a.mle { Some(estimate_pf(&series, &start, mu, &cfg, &s.nm(), &s.free(&a.pf)?)?) } else { None };
    let params = estimate.as_ref().map_or(start, |e| e.params);
    let out = vgsa_pf_loglik(&series, &params, mu, &cfg)?;

    let mp = ModelParams::Vgsa(params);
    let mut meta = base_meta(s, "filter");
    with_model(&mut meta, &mp);
    meta.insert("mu".into(), num(mu));
    meta.insert("particles".into(), cfg.particles.to_string());
    meta.insert("nll".into(), num(out.nll));
    meta.insert("zero_weight_steps".into(), out.zero_weight_steps.to_string());
    match s.format(Format::Csv) {
        Format::Csv => Ok(csv_text(&meta, &FILTER_HEADER, &filter_rows(&out, series.dt, &series.log_prices))),
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                params: &'a ModelParams<f64>,
                estimate: &'a Option<levyq::filter::PfMleResult<f64>>,
                filter: &'a levyq::filter::FilterOutput<f64>,
            }
            Ok(json_text(&meta, &Out { params: &mp, estimate: &estimate, filter: &out }))
        }
    }
}

fn rmemc_output(s: &Settings, r: &RmemcReport) -> Result<String> {
    let mut meta = base_meta(s, "backtest-rmemc");
    meta.insert("days".into(), r.days.len().to_string());
    match s.format(Format::Csv) {
        Format::Json => Ok(json_text(&meta, r)),
        Format::Csv => {
            let rows: Vec<Vec<String>> = r
                .days
                .iter()
                .map(|d| {
                    let res = d.result.as_ref();
                    vec![
                        d.day.to_string(),
                        num(d.spot),
                        opt(d.sse),
                        opt(res.map(|x| x.price_rmse)),
                        opt(res.map(|x| x.entropy)),
                        opt(res.map(|x| x.alpha)),
                        res.map_or(String::new(), |x| x.iterations.to_string()),
                        res.map_or(String::new(), |x| x.converged.to_string()),
                        res.map_or(String::new(), |x| params_string(&x.params)),
                        d.truth.as_ref().map_or(String::new(), params_string),
                        d.error.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            Ok(csv_text(
                &meta,
                &["day", "spot", "sse", "rmse", "entropy", "alpha", "iterations", "converged", "params", "truth", "error"],
                &rows,
            ))
        }
    }
}

fn pf_output(s: &Settings, r: &PfReport) -> Result<String> {
    let mp = ModelParams::Vgsa(r.estimate.params);
    let mut meta = base_meta(s, "backtest-pf");
    with_model(&mut meta, &mp);
    meta.insert("mu".into(), num(r.mu));
    meta.insert("nll".into(), num(r.estimate.nll));
    meta.insert("start_nll".into(), num(r.estimate.start_nll));
    meta.insert("iterations".into(), r.estimate.iterations.to_string());
    meta.insert("converged".into(), r.estimate.converged.to_string());
    if let Some(t) = &r.truth {
        meta.insert("truth".into(), params_string(t));
    }
    if let Some(n) = r.nll_truth {
        meta.insert("nll_truth".into(), num(n));
    }
    match s.format(Format::Csv) {
        Format::Csv => Ok(csv_text(&meta, &FILTER_HEADER, &filter_rows(&r.filter, r.dt, &r.log_prices))),
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                params: &'a ModelParams<f64>,
                #[serde(flatten)]
                report: &'a PfReport,
            }
            Ok(json_text(&meta, &Out { params: &mp, report: r }))
        }
    }
}

fn compare_output(s: &Settings, r: &CompareReport) -> Result<String> {
    let mut meta = base_meta(s, "compare");
    meta.insert("truth".into(), params_string(&r.truth));
    meta.insert("ls".into(), format!("{}:{}", r.ls.kind(), params_string(&r.ls)));
    meta.insert("pf".into(), format!("{}:{}", r.pf.kind(), params_string(&r.pf)));
    meta.insert("maturity".into(), num(r.maturity));
    meta.insert("mean_ls_pf".into(), num(r.mean_ls_pf));
    meta.insert("mean_ls_actual".into(), num(r.mean_ls_actual));
    meta.insert("mean_pf_actual".into(), num(r.mean_pf_actual));
    match s.format(Format::Csv) {
        Format::Json => Ok(json_text(&meta, r)),
        Format::Csv => {
            let rows: Vec<Vec<String>> = r
                .rows
                .iter()
                .map(|x| {
                    vec![
                        num(x.strike),
                        num(x.actual),
                        num(x.ls),
                        num(x.pf),
                        num((x.ls - x.pf).abs()),
                        num((x.ls - x.actual).abs()),
                        num((x.pf - x.actual).abs()),
                        num(x.actual_cos),
                        num(x.ls_cos),
                        num(x.pf_cos),
                        num(x.actual_se),
                    ]
                })
                .collect();
            Ok(csv_text(
                &meta,
                &[
                    "strike",
                    "actual",
                    "ls",
                    "pf",
                    "ls_pf_abs",
                    "ls_actual_abs",
                    "pf_actual_abs",
                    "actual_cos",
                    "ls_cos",
                    "pf_cos",
                    "actual_se",
                ],
                &rows,
            ))
        }
    }
}
