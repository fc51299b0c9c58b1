use levyq::mc::{mc_price, simulate_paths, simulate_terminal, McConfig};
use levyq::models::{MarketEnv, ModelParams};
use levyq::pricing::{cos_price, CosConfig, OptionKind};

fn env() -> MarketEnv<f64> {
    MarketEnv { s0: 100.0, r: 0.05, q: 0.01 }
}

fn cfg(n: usize, seed: u64) -> McConfig {
    McConfig { num_paths: n, steps: 50, seed, ..McConfig::default() }
}

fn models() -> Vec<ModelParams<f64>> {
    vec![
        ModelParams::vg(0.2, 0.3, -0.15),
        ModelParams::vgsa(0.2, 0.3, -0.15, 2.0, 1.0, 1.2),
        ModelParams::cgmy(1.0, 5.0, 10.0, 0.7),
        ModelParams::cgmy(0.5, 8.0, 12.0, 1.4),
    ]
}

fn check_against_cos(m: &ModelParams<f64>, t: f64, seed: u64) {
    let e = env();
    let sample = simulate_terminal(m, &e, t, &cfg(40_000, seed)).unwrap();
    // forward: discounted E[S_T] = S0 e^{−qT}
    let fwd = mc_price(&sample, OptionKind::Call, 0.0, &e, t).unwrap();
    let target = e.s0 * (-e.q * t).exp();
    assert!((fwd.premium - target).abs() < 3.0 * fwd.standard_error, "{m:?} forward {fwd:?} vs {target}");
    for k in [85.0, 100.0, 115.0] {
        let mc = mc_price(&sample, OptionKind::Call, k, &e, t).unwrap();
        let cos = cos_price(m, &e, OptionKind::Call, k, t, &CosConfig { n: 256, l: 10.0 }).unwrap();
        let tol = 3.0 * mc.standard_error;
        assert!((mc.premium - cos).abs() < tol, "{m:?} K={k}: mc {mc:?} cos {cos}");
    }
}

#[test]
fn vg_matches_cos() {
    check_against_cos(&models()[0], 0.5, 11);
}

#[test]
fn vgsa_matches_cos() {
    check_against_cos(&models()[1], 1.0, 12);
}

#[test]
fn cgmy_matches_cos() {
    check_against_cos(&models()[2], 0.5, 13);
    check_against_cos(&models()[3], 0.25, 14);
}

#[test]
fn paths_are_deterministic_and_partition_free() {
    for m in models() {
        let c = cfg(64, 99);
        let a = simulate_paths(&m, &env(), 1.0, &c).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate_paths(&m, &env(), 1.0, &c).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.paths.len(), 64);
        assert!(a.paths.iter().all(|p| p.log_prices.len() == 51 && p.log_prices[0] == env().s0.ln()));
    }
}

#[test]
fn vg_vanishing_sigma_is_deterministic() {
    let m = ModelParams::vg(1e-12, 0.2, 0.0);
    let s = simulate_terminal(&m, &env(), 1.0, &cfg(100, 1)).unwrap();
    let x = env().s0.ln() + (env().r - env().q) * 1.0;
    assert!(s.log_prices.iter().all(|&v| (v - x).abs() < 1e-9));
}

#[test]
fn cgmy_path_budget_is_enforced() {
    let m = ModelParams::cgmy(10.0, 5.0, 10.0, 1.8);
    let c = McConfig { max_expected_jumps: 1e4, ..cfg(10, 0) };
    assert!(simulate_terminal(&m, &env(), 1.0, &c).is_err());
}

#[test]
fn cgmy_asymmetric_high_activity_is_a_martingale() {
    // the truncated subordinator jumps carry visible tempering at this Y
    let e = MarketEnv { s0: 100.0_f64, r: 0.05, q: 0.0 };
    for (g, m) in [(8.34, 13.0), (13.0, 8.34)] {
        let model = ModelParams::cgmy(1.54, g, m, 1.387);
        let s = simulate_terminal(&model, &e, 1.0, &McConfig { num_paths: 100_000, steps: 1, seed: 5, ..McConfig::default() })
            .unwrap();
        let fwd = mc_price(&s, OptionKind::Call, 0.0, &e, 1.0).unwrap();
        assert!((fwd.premium - e.s0).abs() < 3.0 * fwd.standard_error, "G={g} M={m}: {fwd:?}");
    }
}
