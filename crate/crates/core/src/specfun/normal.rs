use crate::scalar::Real;

/// erf(x) by the positive Taylor series e^{-x²}·Σ 2ⁿx^{2n+1}/(2n+1)!!,
/// accurate for |x| < 2.5.
fn erf_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0;
    while n < 200 {
        n += 1;
        term = term * T::c(2.0) * x2 / T::n(2 * n + 1);
        sum += term;
        if term.abs() < T::epsilon() * sum.abs() {
            break;
        }
    }
    T::c(2.0) / T::PI().sqrt() * (-x2).exp() * sum
}

/// erfc(x) for x ≥ 2 by the Laplace continued fraction, modified Lentz.
fn erfc_cf<T: Real>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for n in 1..5000 {
        let a = T::n(n) / T::c(2.0);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / (T::PI().sqrt() * f)
}

pub fn erf<T: Real>(x: T) -> T {
    if x.abs() < T::c(2.5) {
        erf_series(x)
    } else {
        x.signum() * (T::one() - erfc_cf(x.abs()))
    }
}

pub fn erfc<T: Real>(x: T) -> T {
    if x >= T::c(2.5) {
        erfc_cf(x)
    } else if x <= T::c(-2.5) {
        T::c(2.0) - erfc_cf(-x)
    } else {
        T::one() - erf_series(x)
    }
}

/// Standard normal CDF.
pub fn norm_cdf<T: Real>(x: T) -> T {
    T::c(0.5) * erfc(-x / T::SQRT_2())
}

pub fn norm_pdf<T: Real>(x: T) -> T {
    (-(x * x) / T::c(2.0)).exp() / (T::c(2.0) * T::PI()).sqrt()
}
