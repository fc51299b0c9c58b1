//! Command-line flags, the JSON config file, and their merge.

use crate::error::{usage, CliError, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use levyq::calib::{NmOptions, WeightScheme};
use levyq::filter::PfConfig;
use levyq::mc::McConfig;
use levyq::models::{MarketEnv, ModelKind, ModelParams, VgsaParams};
use levyq::pricing::{CosConfig, FftConfig, OptionKind, PricingMethod};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "levyq", version, about = "Exponential Lévy option pricing, calibration and filtering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    #[arg(long, global = true)]
    pub model: Option<ModelKind>,
    #[arg(long, global = true)]
    pub method: Option<PricingMethod>,
    /// Model parameters, e.g. sigma=0.2,nu=0.1,theta=0.15
    #[arg(long, global = true, value_name = "K=V,...")]
    pub params: Option<String>,
    /// Market, e.g. S0=100,r=0.05,q=0
    #[arg(long, global = true, value_name = "K=V,...")]
    pub env: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Option chain CSV; repeat for one chain per backtest day.
    #[arg(long, global = true)]
    pub chain: Vec<PathBuf>,
    /// Price series CSV (time,price).
    #[arg(long, global = true)]
    pub series: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// JSON settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Price European options on a strike list.
    Price(PriceArgs),
    /// Simulate price paths.
    Simulate(SimulateArgs),
    /// Fit a model to an option chain.
    Calibrate(CalibrateArgs),
    /// Run the particle filter on a price series.
    Filter(FilterArgs),
    /// Day-by-day calibration with prior chaining.
    BacktestRmemc(RmemcArgs),
    /// Particle-filter estimation on a synthetic or supplied path.
    BacktestPf(PfArgs),
    /// Price a strike strip under calibrated and filtered parameters.
    Compare(CompareArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct PriceArgs {
    /// Comma-separated strikes; defaults to the 30-strike strip around spot.
    #[arg(long)]
    pub strikes: Option<String>,
    #[arg(long, short = 'T')]
    pub maturity: Option<f64>,
    #[arg(long)]
    pub kind: Option<OptionKind>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimulateArgs {
    #[arg(long, short = 'T')]
    pub maturity: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Pair every path with its reflection.
    #[arg(long)]
    pub antithetic: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CalibArgs {
    /// Entropy weight.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Sets alpha to this multiple of the chain's median vega.
    #[arg(long)]
    pub alpha_scale: Option<f64>,
    /// Prior model parameters (same model as --model).
    #[arg(long, value_name = "K=V,...")]
    pub prior: Option<String>,
    /// Weight quotes by 1/vega² at this volatility instead of uniformly.
    #[arg(long)]
    pub vega_sigma: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub calib: CalibArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PfOpts {
    /// Drift μ of the log price; defaults to r − q.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub particles: Option<usize>,
    /// Parameters the estimator moves: sigma,nu,omega,kappa,eta,lambda.
    /// Without omega the drift is pinned to the modal return.
    #[arg(long, value_name = "NAMES")]
    pub free: Option<String>,
    /// Estimator starting point (VGSA parameters).
    #[arg(long, value_name = "K=V,...")]
    pub start: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct FilterArgs {
    #[command(flatten)]
    pub pf: PfOpts,
    /// Maximize the likelihood starting from --params.
    #[arg(long)]
    pub mle: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RmemcArgs {
    #[command(flatten)]
    pub calib: CalibArgs,
    #[arg(long)]
    pub days: Option<usize>,
    /// Strip maturity in years.
    #[arg(long, short = 'T')]
    pub maturity: Option<f64>,
    /// Truth on the last day; parameters move linearly from --params.
    #[arg(long, value_name = "K=V,...")]
    pub final_params: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PfArgs {
    #[command(flatten)]
    pub pf: PfOpts,
    /// Steps in the synthetic path.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Length of the synthetic path in years.
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CompareArgs {
    #[command(flatten)]
    pub pf: PfOpts,
    #[command(flatten)]
    pub calib: CalibArgs,
    /// Calibration output (JSON, or CSV with params metadata).
    #[arg(long)]
    pub ls: Option<PathBuf>,
    /// Filter estimate output (JSON, or CSV with params metadata).
    #[arg(long)]
    pub pf_result: Option<PathBuf>,
    /// Strip maturity in years.
    #[arg(long, short = 'T')]
    pub maturity: Option<f64>,
}

/// Strike strip shared by the backtests.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StripConfig {
    pub count: usize,
    /// Strikes span spot·(1 ± width).
    pub width: f64,
    pub maturity: f64,
}

impl Default for StripConfig {
    fn default() -> Self {
        Self { count: 30, width: 0.3, maturity: 0.25 }
    }
}

impl StripConfig {
    pub fn strikes(&self, spot: f64) -> Vec<f64> {
        let n = self.count;
        if n == 1 {
            return vec![spot];
        }
        (0..n).map(|i| spot * (1.0 - self.width + 2.0 * self.width * i as f64 / (n - 1) as f64)).collect()
    }
}

/// The synthetic VG world the backtests share.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub horizon: f64,
    pub steps: usize,
    /// Days in the calibration backtest; one step per trading day.
    pub days: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self { horizon: 1.0, steps: 2520, days: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibFile {
    pub alpha: Option<f64>,
    pub alpha_scale: Option<f64>,
    pub prior: Option<BTreeMap<String, f64>>,
    pub vega_sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterFile {
    pub mu: Option<f64>,
    pub free: Option<Vec<String>>,
    pub start: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelKind>,
    pub method: Option<PricingMethod>,
    pub params: Option<BTreeMap<String, f64>>,
    pub env: Option<MarketEnv<f64>>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub maturity: Option<f64>,
    pub strikes: Option<Vec<f64>>,
    pub kind: Option<OptionKind>,
    pub cos: CosConfig,
    pub fft: FftConfig,
    pub mc: Option<McConfig>,
    pub pf: PfConfig,
    pub nm: NmOptions,
    pub calib: CalibFile,
    pub filter: FilterFile,
    pub strip: StripConfig,
    pub world: WorldConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::io::read_text(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::data(path, e.to_string()))
    }
}

/// Parses `k=v` pairs separated by commas or semicolons.
pub fn parse_pairs(s: &str) -> Result<Vec<(String, f64)>> {
    s.split([',', ';'])
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| CliError::Usage(format!("expected key=value, got '{p}'")))?;
            let v = v.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("'{v}' is not a number in '{p}'")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

pub fn parse_params(kind: ModelKind, s: &str) -> Result<ModelParams<f64>> {
    Ok(ModelParams::from_pairs(kind, &parse_pairs(s)?)?)
}

fn params_from_map(kind: ModelKind, m: &BTreeMap<String, f64>) -> Result<ModelParams<f64>> {
    let pairs: Vec<(String, f64)> = m.iter().map(|(k, v)| (k.clone(), *v)).collect();
    Ok(ModelParams::from_pairs(kind, &pairs)?)
}

/// `sigma=0.2;nu=0.1;...`, the inverse of [`parse_params`].
pub fn params_string(p: &ModelParams<f64>) -> String {
    p.kind().param_names().iter().zip(p.to_vec()).map(|(n, v)| format!("{n}={}", crate::io::fmt_f64(v))).collect::<Vec<_>>().join(";")
}

pub fn parse_env(s: &str) -> Result<MarketEnv<f64>> {
    let mut env = MarketEnv { s0: f64::NAN, r: 0.0, q: 0.0 };
    for (k, v) in parse_pairs(s)? {
        match k.to_ascii_lowercase().as_str() {
            "s0" | "spot" => env.s0 = v,
            "r" => env.r = v,
            "q" => env.q = v,
            _ => return usage(format!("unknown market key '{k}' (expected S0, r, q)")),
        }
    }
    env.validate()?;
    Ok(env)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| CliError::Usage(format!("'{p}' is not a number"))))
        .collect()
}

/// World used when no data is supplied: S0 = 100, r = 0.1, q = 0.
pub const DEFAULT_ENV: MarketEnv<f64> = MarketEnv { s0: 100.0, r: 0.1, q: 0.0 };
/// VG parameters of the default synthetic path.
pub const DEFAULT_WORLD: [f64; 3] = [0.28, 0.41, 0.1];
/// Clock parameters that keep VGSA close to VG.
pub const NEAR_VG_CLOCK: f64 = 1e-3;

/// Flags merged over the config file over the defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub common: Common,
    pub file: FileConfig,
    pub seed: u64,
    pub env: MarketEnv<f64>,
    pub mc: McConfig,
    pub pf: PfConfig,
}

impl Settings {
    pub fn new(common: Common) -> Result<Self> {
        let file = match &common.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let seed = common.seed.or(file.seed).unwrap_or(0);
        let env = match &common.env {
            Some(s) => parse_env(s)?,
            None => file.env.unwrap_or(DEFAULT_ENV),
        };
        env.validate()?;
        let mut mc = file.mc.unwrap_or_default();
        let mut pf = file.pf;
        if common.seed.is_some() || file.seed.is_some() || file.mc.is_none() {
            mc.seed = seed;
        }
        if common.seed.is_some() || file.seed.is_some() {
            pf.seed = seed;
        }
        file.cos.validate()?;
        file.fft.validate()?;
        Ok(Self { common, file, seed, env, mc, pf })
    }

    /// Market from --env, then the chain sidecar, then the config, then the
    /// default.
    pub fn explicit_env(&self) -> Option<MarketEnv<f64>> {
        if self.common.env.is_some() || self.file.env.is_some() {
            Some(self.env)
        } else {
            None
        }
    }

    pub fn model(&self, default: ModelKind) -> ModelKind {
        self.common.model.or(self.file.model).unwrap_or(default)
    }

    pub fn method(&self, default: PricingMethod) -> PricingMethod {
        self.common.method.or(self.file.method).unwrap_or(default)
    }

    pub fn format(&self, default: Format) -> Format {
        self.common.format.or(self.file.format).unwrap_or(default)
    }

    pub fn params(&self, kind: ModelKind) -> Result<Option<ModelParams<f64>>> {
        if let Some(s) = &self.common.params {
            return Ok(Some(parse_params(kind, s)?));
        }
        self.file.params.as_ref().map(|m| params_from_map(kind, m)).transpose()
    }

    pub fn require_params(&self, kind: ModelKind) -> Result<ModelParams<f64>> {
        self.params(kind)?.ok_or_else(|| CliError::Usage(format!("--params required for {kind}")))
    }

    /// Truth for the synthetic world: --params as VG, else the default.
    pub fn world_params(&self) -> Result<ModelParams<f64>> {
        Ok(self.params(ModelKind::Vg)?.unwrap_or(ModelParams::vg(DEFAULT_WORLD[0], DEFAULT_WORLD[1], DEFAULT_WORLD[2])))
    }

    pub fn nm(&self) -> NmOptions {
        self.file.nm
    }

    pub fn prior(&self, kind: ModelKind, flag: &Option<String>) -> Result<Option<ModelParams<f64>>> {
        match flag {
            Some(s) => Ok(Some(parse_params(kind, s)?)),
            None => self.file.calib.prior.as_ref().map(|m| params_from_map(kind, m)).transpose(),
        }
    }

    pub fn weights(&self, a: &CalibArgs) -> WeightScheme<f64> {
        match a.vega_sigma.or(self.file.calib.vega_sigma) {
            Some(sigma) => WeightScheme::Vega { sigma },
            None => WeightScheme::Unit,
        }
    }

    pub fn pf_config(&self, o: &PfOpts) -> PfConfig {
        let mut c = self.pf;
        if let Some(n) = o.particles {
            c.particles = n;
        }
        c
    }

    pub fn mu(&self, o: &PfOpts) -> f64 {
        o.mu.or(self.file.filter.mu).unwrap_or(self.env.r - self.env.q)
    }

    /// Free coordinates in the drift-matched chart.
    pub fn free(&self, o: &PfOpts) -> Result<[bool; 6]> {
        let names: Vec<String> = match (&o.free, &self.file.filter.free) {
            (Some(s), _) => s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect(),
            (None, Some(v)) => v.clone(),
            (None, None) => vec!["sigma".into(), "nu".into()],
        };
        let all = ["sigma", "nu", "omega", "kappa", "eta", "lambda"];
        let mut free = [false; 6];
        for n in &names {
            match all.iter().position(|a| a.eq_ignore_ascii_case(n)) {
                Some(i) => free[i] = true,
                None => return usage(format!("unknown free parameter '{n}' (expected one of {})", all.join(", "))),
            }
        }
        Ok(free)
    }

    /// Estimator start: --start, then the config, then σ=0.2, ν=0.3 on a
    /// near-VG clock. θ is replaced when the drift is pinned.
    pub fn pf_start(&self, o: &PfOpts) -> Result<VgsaParams<f64>> {
        let m = match (&o.start, &self.file.filter.start) {
            (Some(s), _) => parse_params(ModelKind::Vgsa, s)?,
            (None, Some(m)) => params_from_map(ModelKind::Vgsa, m)?,
            (None, None) => {
                let c = NEAR_VG_CLOCK;
                ModelParams::vgsa(0.2, 0.3, 0.05, c, c, c)
            }
        };
        match m {
            ModelParams::Vgsa(p) => Ok(p),
            _ => unreachable!(),
        }
    }
}
