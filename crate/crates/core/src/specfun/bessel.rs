use super::gamma::temme_gammas;
use crate::error::{domain, LevyError, Result};
use crate::scalar::Real;

const MAX_ITER: usize = 10_000;

/// Modified Bessel function of the second kind, K_ν(x), real order.
///
/// The fractional part μ ∈ [-1/2, 1/2] of the order is handled by Temme's
/// series for x < 2 and Steed's continued fraction otherwise; the integer
/// part by forward recurrence, which is stable for K.
pub fn bessel_k<T: Real>(order: T, x: T) -> Result<T> {
    let k = scaled(order, x)? * (-x).exp();
    if !k.is_finite() {
        return Err(LevyError::Overflow(format!("K_{order}({x}) overflows")));
    }
    Ok(k)
}

/// e^x·K_ν(x); finite for large x where K_ν itself underflows.
pub fn bessel_k_scaled<T: Real>(order: T, x: T) -> Result<T> {
    let k = scaled(order, x)?;
    if !k.is_finite() {
        return Err(LevyError::Overflow(format!("K_{order}({x}) overflows")));
    }
    Ok(k)
}

/// ln K_ν(x). Where K_ν overflows (large order, tiny x) the leading small-x
/// term ln Γ(ν) + (ν − 1) ln 2 − ν ln x is used; it is exact to O(x²/ν) there.
pub fn ln_bessel_k<T: Real>(order: T, x: T) -> Result<T> {
    match scaled(order, x) {
        Ok(k) if k.is_finite() && k > T::zero() => Ok(k.ln() - x),
        Ok(_) | Err(LevyError::Overflow(_)) => {
            let nu = order.abs();
            Ok(super::gamma::ln_gamma(nu) + (nu - T::one()) * T::c(2.0).ln() - nu * x.ln())
        }
        Err(e) => Err(e),
    }
}

fn scaled<T: Real>(order: T, x: T) -> Result<T> {
    if !(x > T::zero()) {
        return domain(format!("bessel_k requires x > 0, got {x}"));
    }
    let nu = order.abs();
    let half = T::c(0.5);
    let nl = (nu + half).floor();
    let mu = nu - nl;
    let (mut k_mu, mut k_mu1) = if x < T::c(2.0) {
        let (a, b) = temme(mu, x)?;
        let ex = x.exp();
        (a * ex, b * ex)
    } else {
        steed(mu, x)?
    };
    let two_over_x = T::c(2.0) / x;
    let n = nl.to_usize().unwrap_or(0);
    for i in 1..=n {
        let next = (mu + T::n(i)) * two_over_x * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    Ok(k_mu)
}

// K_μ and K_{μ+1} for |μ| ≤ 1/2, x < 2.
fn temme<T: Real>(mu: T, x: T) -> Result<(T, T)> {
    let eps = T::epsilon();
    let x2 = x / T::c(2.0);
    let pimu = T::PI() * mu;
    let fact = if pimu.abs() < eps { T::one() } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < eps { T::one() } else { e.sinh() / e };
    let (gam1, gam2) = temme_gammas(mu);
    let rp = gam2 - mu * gam1; // 1/Γ(1+μ)
    let rm = gam2 + mu * gam1; // 1/Γ(1−μ)
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = T::c(0.5) * ee / rp;
    let mut q = T::c(0.5) / (ee * rm);
    let mut c = T::one();
    let dd = x2 * x2;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..MAX_ITER {
        let fi = T::n(i);
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c = c * dd / fi;
        p = p / (fi - mu);
        q = q / (fi + mu);
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * eps {
            return Ok((sum, sum1 * T::c(2.0) / x));
        }
    }
    Err(LevyError::NonConvergence(format!("Temme series for K_{mu}({x})")))
}

// e^x·K_μ and e^x·K_{μ+1} for |μ| ≤ 1/2, x ≥ 2.
fn steed<T: Real>(mu: T, x: T) -> Result<(T, T)> {
    let eps = T::epsilon();
    let two = T::c(2.0);
    let mut b = two * (T::one() + x);
    let mut d = T::one() / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = T::zero();
    let mut q2 = T::one();
    let a1 = T::c(0.25) - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = T::one() + q * delh;
    let mut done = false;
    for i in 1..MAX_ITER {
        let fi = T::n(i);
        a = a - two * fi;
        c = -a * c / (fi + T::one());
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += two;
        d = T::one() / (b + a * d);
        delh = (b * d - T::one()) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < eps {
            done = true;
            break;
        }
    }
    if !done {
        return Err(LevyError::NonConvergence(format!("Steed fraction for K_{mu}({x})")));
    }
    h = a1 * h;
    let k_mu = (T::PI() / (two * x)).sqrt() / s;
    let k_mu1 = k_mu * (mu + x + T::c(0.5) - h) / x;
    Ok((k_mu, k_mu1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::tanh_sinh;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_order_closed_form() {
        for x in [0.05_f64, 1.0, 1.99, 2.0, 7.0, 30.0] {
            let exact = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(0.5, x).unwrap(), exact) < 1e-13, "x={x}");
            // K_{3/2} = K_{1/2}(1 + 1/x)
            assert!(rel(bessel_k(1.5, x).unwrap(), exact * (1.0 + 1.0 / x)) < 1e-13);
        }
    }

    #[test]
    fn integral_representation_oracle() {
        let nu = 0.3_f64;
        let x = 2.5_f64;
        let oracle = tanh_sinh(|t: f64| (-x * t.cosh()).exp() * (nu * t).cosh(), 0.0, 12.0, 1e-15);
        let v = bessel_k(nu, x).unwrap();
        assert!(rel(v, oracle) < 1e-8);
        assert!(rel(v, 0.063_313_879_296_295_559) < 1e-13);
    }

    #[test]
    fn frozen_high_precision_values() {
        let cases = [
            (0.0, 0.1, 2.427_069_024_702_016_6),
            (1.0, 1.0, 0.601_907_230_197_234_57),
            (2.7, 0.01, 1_260_621.683_748_959_1),
            (7.5, 3.3, 14.597_556_480_290_759),
            (-0.499, 1e-6, 1237.691_124_628_318_6),
            (12.2, 40.0, 5.204_707_357_396_803_3e-18),
            (20.0, 0.5, 6.665_549_874_417_155_6e28),
            (0.25, 50.0, 3.412_278_887_574_885_6e-23),
        ];
        for (nu, x, want) in cases {
            let v = bessel_k(nu, x).unwrap();
            assert!(rel(v, want) < 1e-10, "K_{nu}({x}) = {v}, want {want}");
        }
    }

    #[test]
    fn domain() {
        assert!(bessel_k(0.3_f64, 0.0).is_err());
        assert!(bessel_k(0.3_f64, -1.0).is_err());
    }

    #[test]
    fn log_form_past_overflow() {
        assert!(rel(ln_bessel_k(2.3, 0.7).unwrap(), bessel_k(2.3_f64, 0.7).unwrap().ln()) < 1e-14);
        assert!(rel(ln_bessel_k(0.5, 900.0).unwrap(), 0.5 * (std::f64::consts::PI / 1800.0).ln() - 900.0) < 1e-14);
        // K_20(1e-30): leading term dominates by 60 orders of magnitude
        let want = crate::specfun::ln_gamma(20.0) + 19.0 * 2f64.ln() - 20.0 * 1e-30f64.ln();
        assert!(rel(ln_bessel_k(20.0, 1e-30).unwrap(), want) < 1e-14);
    }

    #[test]
    fn scaled_survives_underflow() {
        assert_eq!(bessel_k(0.5_f64, 800.0).unwrap(), 0.0);
        let s = bessel_k_scaled(0.5_f64, 800.0).unwrap();
        assert!(rel(s, (std::f64::consts::PI / 1600.0).sqrt()) < 1e-13);
        for (nu, x) in [(0.3, 0.7), (2.2, 5.0), (0.0, 1.9)] {
            assert!(rel(bessel_k_scaled(nu, x).unwrap() * (-x as f64).exp(), bessel_k(nu, x).unwrap()) < 1e-14);
        }
    }
}
