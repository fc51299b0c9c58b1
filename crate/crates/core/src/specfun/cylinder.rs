use super::gamma::{gamma, rgamma};
use crate::error::{domain, LevyError, Result};
use crate::quad::exp_sinh;
use crate::scalar::Real;

/// Truncation rule for the Kummer series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOpts {
    /// Stop once |term| < rel_tol·|partial sum|.
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesOpts {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_terms: 100 }
    }
}

impl SeriesOpts {
    /// The loose 1e-4 loop of the original reference implementation.
    pub fn compat() -> Self {
        Self { rel_tol: 1e-4, max_terms: 100 }
    }

    fn full_precision() -> Self {
        Self { rel_tol: 1e-17, max_terms: 400 }
    }
}

/// Kummer's 1F1(a; b; z) with the default tolerance.
pub fn confluent_hypergeometric<T: Real>(a: T, b: T, z: T) -> Result<T> {
    confluent_hypergeometric_with(a, b, z, SeriesOpts::default())
}

pub fn confluent_hypergeometric_with<T: Real>(a: T, b: T, z: T, opts: SeriesOpts) -> Result<T> {
    if b <= T::zero() && b == b.round() {
        return domain(format!("1F1 undefined for b = {b}"));
    }
    let tol = T::c(opts.rel_tol);
    let mut term = T::one();
    let mut sum = T::one();
    for n in 1..=opts.max_terms {
        let fnn = T::n(n);
        term = term * (a + fnn - T::one()) * z / (fnn * (b + fnn - T::one()));
        sum += term;
        if term.abs() <= tol * sum.abs() {
            return Ok(sum);
        }
    }
    Err(LevyError::NonConvergence(format!(
        "1F1({a}; {b}; {z}) not converged after {} terms",
        opts.max_terms
    )))
}

// Below this the two-1F1 formula is accurate to ~1e-11; the cancellation
// between its terms grows like e^{z²/2}.
const SERIES_MAX_Z: f64 = 5.0;
// Asymptotic switch point carried over from the reference code; empirical.
const ASYMPTOTIC_MIN_Z: f64 = 40.0;
const ASYMPTOTIC_TERMS: usize = 20;

/// Parabolic cylinder function D_p(z), z ≥ 0.
pub fn parabolic_cylinder_d<T: Real>(p: T, z: T) -> Result<T> {
    Ok((-z * z / T::c(4.0)).exp() * parabolic_cylinder_d_scaled(p, z)?)
}

/// D_p(z) with the Kummer series truncated per `opts` in the small-z regime.
pub fn parabolic_cylinder_d_with<T: Real>(p: T, z: T, opts: SeriesOpts) -> Result<T> {
    Ok((-z * z / T::c(4.0)).exp() * scaled_with(p, z, opts)?)
}

/// e^{z²/4}·D_p(z). Stays finite where D_p itself underflows.
pub fn parabolic_cylinder_d_scaled<T: Real>(p: T, z: T) -> Result<T> {
    scaled_with(p, z, SeriesOpts::full_precision())
}

fn scaled_with<T: Real>(p: T, z: T, opts: SeriesOpts) -> Result<T> {
    if !(z >= T::zero()) {
        return domain(format!("parabolic_cylinder_d requires z ≥ 0, got {z}"));
    }
    if z < T::c(SERIES_MAX_Z) {
        kummer_form(p, z, opts)
    } else if z < T::c(ASYMPTOTIC_MIN_Z) {
        Ok(integral_form(p, z))
    } else {
        Ok(asymptotic_form(p, z))
    }
}

fn kummer_form<T: Real>(p: T, z: T, opts: SeriesOpts) -> Result<T> {
    let half = T::c(0.5);
    let x = z * z / T::c(2.0);
    let sqrt_pi = T::PI().sqrt();
    let first = sqrt_pi * rgamma((T::one() - p) * half) * confluent_hypergeometric_with(-p * half, half, x, opts)?;
    let second = (T::c(2.0) * T::PI()).sqrt()
        * z
        * rgamma(-p * half)
        * confluent_hypergeometric_with((T::one() - p) * half, T::c(1.5), x, opts)?;
    Ok(T::c(2.0).powf(p * half) * (first - second))
}

// e^{z²/4} D_{-ν}(z) = (1/Γ(ν)) ∫₀^∞ t^{ν-1} e^{-zt - t²/2} dt for ν > 0.
fn integral_negative<T: Real>(nu: T, z: T) -> T {
    let f = |t: T| (nu - T::one()) * t.ln() - z * t - t * t / T::c(2.0);
    exp_sinh(|t: T| f(t).exp(), T::c(1e-14)) / gamma(nu)
}

fn integral_form<T: Real>(p: T, z: T) -> T {
    if p < T::zero() {
        return integral_negative(-p, z);
    }
    // climb D_{q-1}, D_q → D_p with q ∈ [-1, 0) via D_{v+1} = z D_v − v D_{v-1}
    let m = p.floor() + T::one();
    let q = p - m;
    let mut prev = integral_negative(T::one() - q, z);
    let mut cur = integral_negative(-q, z);
    let mut v = q;
    let steps = m.to_usize().unwrap_or(0);
    for _ in 0..steps {
        let next = z * cur - v * prev;
        prev = cur;
        cur = next;
        v += T::one();
    }
    cur
}

fn asymptotic_form<T: Real>(p: T, z: T) -> T {
    let z2 = z * z;
    let mut c = T::one();
    let mut sum = T::one();
    for k in 1..ASYMPTOTIC_TERMS {
        let fk = T::n(k);
        c = -c * (p - T::c(2.0) * fk + T::c(2.0)) * (p - T::c(2.0) * fk + T::one()) / (T::c(2.0) * fk * z2);
        sum += c;
    }
    z.powf(p) * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::tanh_sinh;
    use crate::specfun::erfc;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn kummer_trivial_cases() {
        assert_eq!(confluent_hypergeometric(0.7_f64, 1.3, 0.0).unwrap(), 1.0);
        for z in [-3.0_f64, -0.5, 0.4, 2.0, 5.0] {
            let v = confluent_hypergeometric(1.7, 1.7, z).unwrap();
            assert!(rel(v, z.exp()) < 1e-9, "z={z}");
        }
        assert!(confluent_hypergeometric(1.0_f64, -2.0, 1.0).is_err());
    }

    #[test]
    fn kummer_high_precision_point() {
        // term-by-term sum at 40 digits
        let v = confluent_hypergeometric(0.5_f64, 1.5, 2.0).unwrap();
        assert!(rel(v, 2.364_453_892_805_209_3) < 1e-9);
    }

    #[test]
    fn kummer_series_cap() {
        assert!(matches!(
            confluent_hypergeometric(0.5_f64, 1.5, 200.0),
            Err(LevyError::NonConvergence(_))
        ));
        let loose = confluent_hypergeometric_with(0.5_f64, 1.5, 2.0, SeriesOpts::compat()).unwrap();
        assert!(rel(loose, 2.364_453_892_805_209_3) < 1e-3);
    }

    #[test]
    fn d_order_zero_and_minus_one() {
        let z = 2.0_f64;
        assert!(rel(parabolic_cylinder_d(0.0, z).unwrap(), (-z * z / 4.0).exp()) < 1e-10);
        let z = 1.0_f64;
        let want = (z * z / 4.0).exp() * (std::f64::consts::PI / 2.0).sqrt() * erfc(z / std::f64::consts::SQRT_2);
        assert!(rel(parabolic_cylinder_d(-1.0, z).unwrap(), want) < 1e-8);
    }

    #[test]
    fn d_quadrature_oracle() {
        // D_{-ν}(z) = e^{-z²/4}/Γ(ν) ∫ t^{ν-1} e^{-zt-t²/2} dt on a finite range
        let (nu, z) = (0.75_f64, 3.0_f64);
        let integral = tanh_sinh(|t: f64| t.powf(nu - 1.0) * (-z * t - t * t / 2.0).exp(), 0.0, 40.0, 1e-15);
        let oracle = (-z * z / 4.0).exp() * integral / statrs::function::gamma::gamma(nu);
        assert!(rel(parabolic_cylinder_d(-nu, z).unwrap(), oracle) < 1e-6);
    }

    #[test]
    fn d_frozen_values_across_regimes() {
        let cases = [
            (-0.75, 0.0, 1.254_297_986_775_979_4),
            (-1.9, 0.5, 0.557_204_461_856_204_37),
            (2.5, 3.0, 1.298_478_603_443_895_6),
            (-0.75, 3.0, 0.043_535_197_295_007_353),
            (-0.75, 6.0, 3.164_181_016_285_706_2e-5),
            (-1.5, 7.5, 3.684_413_222_665_996e-8),
            (0.6, 8.0, 3.925_957_045_195_514_9e-7),
            (-0.3, 12.0, 1.099_166_123_915_769e-16),
            (-1.2, 45.0, 1.426_529_643_430_742e-222),
        ];
        for (p, z, want) in cases {
            let v = parabolic_cylinder_d(p, z).unwrap();
            assert!(rel(v, want) < 1e-9, "D_{p}({z}) = {v}, want {want}");
        }
    }
}
