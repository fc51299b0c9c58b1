use levyq::calib::jump_entropy;
use levyq::filter::{ekf_update, systematic_resample, vg_density_mu, ScalarStateSpace};
use levyq::models::{characteristic_function, log_price_cf, MarketEnv, ModelParams, VgParams};
use levyq::pricing::{cos_price, CosConfig, OptionKind};
use levyq::quad::tanh_sinh;
use levyq::specfun::{bessel_k, confluent_hypergeometric};
use levyq::Complex64;
use proptest::prelude::*;

fn vg_params() -> impl Strategy<Value = VgParams<f64>> {
    (0.1..0.5f64, 0.05..0.8f64, -0.3..0.3f64)
        .prop_map(|(s, n, t)| VgParams::new(s, n, t))
        .prop_filter("martingale correction exists", |p| p.log_argument() > 0.1)
}

fn model() -> impl Strategy<Value = ModelParams<f64>> {
    prop_oneof![
        (0.05..0.6f64).prop_map(|sigma| ModelParams::Bs { sigma }),
        vg_params().prop_map(ModelParams::Vg),
        (vg_params(), 0.5..3.0f64, 0.5..2.0f64, 0.1..1.5f64)
            .prop_map(|(v, k, e, l)| ModelParams::vgsa(v.sigma, v.nu, v.theta, k, e, l)),
        (0.3..3.0f64, 2.0..15.0f64, 3.0..15.0f64, 0.1..1.8f64)
            .prop_map(|(c, g, m, y)| ModelParams::cgmy(c, g, m, y)),
    ]
}

// Moderate log-variance: the call coefficients carry e^b on [a, b], and with
// an annual variance of several units they cancel catastrophically.
fn moderate_model() -> impl Strategy<Value = ModelParams<f64>> {
    prop_oneof![
        (0.05..0.6f64).prop_map(|sigma| ModelParams::Bs { sigma }),
        vg_params().prop_map(ModelParams::Vg),
        (vg_params(), 0.5..3.0f64, 0.5..2.0f64, 0.1..1.5f64)
            .prop_map(|(v, k, e, l)| ModelParams::vgsa(v.sigma, v.nu, v.theta, k, e, l)),
        (0.1..1.5f64, 4.0..15.0f64, 4.0..15.0f64, 0.1..1.5f64)
            .prop_map(|(c, g, m, y)| ModelParams::cgmy(c, g, m, y)),
    ]
}

// Desk-scale parameters: densities without near-poles and tails that decay
// well inside the L = 10 truncation range.
fn regular_model() -> impl Strategy<Value = ModelParams<f64>> {
    let vg = (0.1..0.35f64, 0.05..0.4f64, -0.25..0.2f64).prop_map(|(s, n, t)| VgParams::new(s, n, t));
    prop_oneof![
        (0.1..0.5f64).prop_map(|sigma| ModelParams::Bs { sigma }),
        vg.clone().prop_map(ModelParams::Vg),
        (vg, 0.5..3.0f64, 0.5..2.0f64, 0.1..1.0f64)
            .prop_map(|(v, k, e, l)| ModelParams::vgsa(v.sigma, v.nu, v.theta, k, e, l)),
        (0.5..1.5f64, 5.0..15.0f64, 5.0..15.0f64, 0.5..1.5f64)
            .prop_map(|(c, g, m, y)| ModelParams::cgmy(c, g, m, y)),
    ]
}

fn env() -> impl Strategy<Value = MarketEnv<f64>> {
    (50.0..150.0f64, -0.02..0.1f64, 0.0..0.05f64).prop_map(|(s0, r, q)| MarketEnv { s0, r, q })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cf_is_a_characteristic_function(m in model(), t in 0.05..3.0f64, u in -50.0..50.0f64) {
        let one = characteristic_function(&m, Complex64::new(0.0, 0.0), t).unwrap();
        prop_assert!((one - 1.0).norm() < 1e-12);
        let a = characteristic_function(&m, Complex64::new(u, 0.0), t).unwrap();
        let b = characteristic_function(&m, Complex64::new(-u, 0.0), t).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-12);
        prop_assert!(a.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn cf_at_minus_i_is_the_forward(m in model(), e in env(), t in 0.05..3.0f64) {
        let v = log_price_cf(&m, &e, Complex64::new(0.0, -1.0), t).unwrap();
        let f = e.forward(t);
        prop_assert!((v - f).norm() <= 1e-10 * f, "{v} vs {f}");
    }

    #[test]
    fn cos_put_call_parity_is_sane(m in moderate_model(), e in env(), t in 0.1..2.0f64, m_k in 0.8..1.2f64) {
        // strikes outside the truncation range are refused, not mispriced
        let err = parity_error(&m, &e, e.s0 * m_k, t);
        prop_assume!(err.is_some());
        prop_assert!(err.unwrap() <= 1e-3 * e.s0, "{err:?}");
    }

    #[test]
    fn cos_put_call_parity(m in regular_model(), e in env(), t in 0.25..2.0f64, m_k in 0.8..1.2f64) {
        let shape_ok = match m {
            ModelParams::Vg(p) => t / p.nu >= 1.0,
            ModelParams::Vgsa(p) => t * p.eta.min(1.0) / p.nu >= 2.0,
            ModelParams::Cgmy(p) => p.c * t >= 0.5,
            ModelParams::Bs { .. } => true,
        };
        prop_assume!(shape_ok);
        let err = parity_error(&m, &e, e.s0 * m_k, t);
        prop_assume!(err.is_some());
        prop_assert!(err.unwrap() <= 1e-6 * e.s0, "{err:?}");
    }

    #[test]
    fn bessel_k_recurrence_and_symmetry(nu in 0.0..6.0f64, x in 0.05..40.0f64) {
        let (km, k0, kp) = (bessel_k(nu - 1.0, x).unwrap(), bessel_k(nu, x).unwrap(), bessel_k(nu + 1.0, x).unwrap());
        prop_assert!((kp - km - 2.0 * nu / x * k0).abs() <= 1e-11 * kp);
        prop_assert!((bessel_k(-nu, x).unwrap() - k0).abs() <= 1e-13 * k0);
        prop_assert!(k0 > 0.0 && kp >= k0);
    }

    #[test]
    fn kummer_transformation(a in -2.0..3.0f64, b in 0.5..4.0f64, z in -5.0..5.0f64) {
        let lhs = confluent_hypergeometric(a, b, z).unwrap();
        let inner = confluent_hypergeometric(b - a, b, -z).unwrap();
        let rhs = z.exp() * inner;
        let scale = lhs.abs().max(1.0) + z.exp() * inner.abs();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale, "{lhs} vs {rhs}");
        prop_assert_eq!(confluent_hypergeometric(a, b, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn jump_entropy_is_nonnegative_and_convex(
        q1 in prop::collection::vec(0.0..10.0f64, 1..40),
        seed in prop::collection::vec((1e-3..10.0f64, 0.0..10.0f64), 40),
        l in 0.0..1.0f64,
    ) {
        let n = q1.len();
        let p: Vec<f64> = seed[..n].iter().map(|x| x.0).collect();
        let q2: Vec<f64> = seed[..n].iter().map(|x| x.1).collect();
        let h1 = jump_entropy(&q1, &p).unwrap();
        let h2 = jump_entropy(&q2, &p).unwrap();
        prop_assert!(h1 >= 0.0 && h2 >= 0.0);
        prop_assert_eq!(jump_entropy(&p, &p).unwrap(), 0.0);
        let mix: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| l * a + (1.0 - l) * b).collect();
        let hm = jump_entropy(&mix, &p).unwrap();
        prop_assert!(hm <= l * h1 + (1.0 - l) * h2 + 1e-10 * (1.0 + h1 + h2));
    }

    #[test]
    fn systematic_counts_stay_within_one_of_expectation(
        w in prop::collection::vec(0.0..1.0f64, 1..60),
        u in 0.0..1.0f64,
    ) {
        prop_assume!(w.iter().sum::<f64>() > 1e-6);
        let idx = systematic_resample(&w, u).unwrap();
        let n = w.len();
        let total: f64 = w.iter().sum();
        let mut counts = vec![0usize; n];
        for i in idx {
            counts[i] += 1;
        }
        for (c, wi) in counts.iter().zip(&w) {
            let expect = n as f64 * wi / total;
            prop_assert!((*c as f64 - expect).abs() < 1.0 + 1e-9, "count {c} vs {expect}");
        }
    }

    #[test]
    fn vg_density_integrates_to_one(p in vg_params(), mu in -0.05..0.1f64, h in 0.1..1.0f64) {
        prop_assume!(h / p.nu >= 0.5);
        let centre = mu * h + h * p.omega().unwrap();
        let f = |z: f64| vg_density_mu(z, h, &p, mu).unwrap().value;
        let total = tanh_sinh(f, centre - 40.0, centre, 1e-12) + tanh_sinh(f, centre, centre + 40.0, 1e-12);
        prop_assert!((total - 1.0).abs() < 1e-7, "{total}");
    }

    #[test]
    fn ekf_matches_kalman_on_linear_models(
        a in -1.5..1.5f64, w in 0.0..2.0f64, h in -3.0..3.0f64, u in 0.01..2.0f64,
        x in -5.0..5.0f64, p in 0.0..4.0f64, z in -10.0..10.0f64,
    ) {
        let m = Linear { a, w, h, u };
        let s = ekf_update(&m, x, p, z);
        let pp = a * a * p + w * w;
        let k = pp * h / (h * h * pp + u * u);
        prop_assert!((s.x_prior - a * x).abs() < 1e-12);
        prop_assert!((s.p_prior - pp).abs() < 1e-12);
        prop_assert!((s.x_post - (a * x + k * (z - h * a * x))).abs() < 1e-9 * (1.0 + z.abs()));
        prop_assert!((s.p_post - (1.0 - k * h) * pp).abs() < 1e-12 * (1.0 + pp));
        prop_assert!(s.p_post <= s.p_prior + 1e-15);
    }
}

fn parity_error(m: &ModelParams<f64>, e: &MarketEnv<f64>, k: f64, t: f64) -> Option<f64> {
    let cfg = CosConfig { n: 4096, l: 10.0 };
    let c = cos_price(m, e, OptionKind::Call, k, t, &cfg).ok()?;
    let p = cos_price(m, e, OptionKind::Put, k, t, &cfg).ok()?;
    Some((c - p - (e.s0 * (-e.q * t).exp() - k * (-e.r * t).exp())).abs())
}

struct Linear {
    a: f64,
    w: f64,
    h: f64,
    u: f64,
}

impl ScalarStateSpace<f64> for Linear {
    fn transition(&self, x: f64) -> f64 {
        self.a * x
    }
    fn transition_jacobian(&self, _: f64) -> f64 {
        self.a
    }
    fn process_noise(&self, _: f64) -> f64 {
        self.w
    }
    fn observation(&self, x: f64) -> f64 {
        self.h * x
    }
    fn observation_jacobian(&self, _: f64) -> f64 {
        self.h
    }
    fn observation_noise(&self, _: f64) -> f64 {
        self.u
    }
}
