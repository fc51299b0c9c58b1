use crate::error::{domain, Result};
use crate::scalar::Real;

// Taylor coefficients of 1/Γ(1+z) about z = 0.
const RGAMMA1P: [f64; 29] = [
    1.0,
    0.577_215_664_901_532_860_6,
    -0.655_878_071_520_253_881_1,
    -0.042_002_635_034_095_235_53,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_75,
    -0.009_621_971_527_876_973_562,
    0.007_218_943_246_663_099_542,
    -0.001_165_167_591_859_065_112,
    -0.000_215_241_674_114_950_972_8,
    0.000_128_050_282_388_116_186_2,
    -0.000_020_134_854_780_788_238_66,
    -0.000_001_250_493_482_142_670_657,
    0.000_001_133_027_231_981_695_882,
    -2.056_338_416_977_607_103e-7,
    6.116_095_104_481_415_818e-9,
    5.002_007_644_469_222_930e-9,
    -1.181_274_570_487_020_145e-9,
    1.043_426_711_691_100_510e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783e-14,
    -5.348_122_539_423_017_982e-15,
    1.226_778_628_238_260_790e-15,
    -1.181_259_301_697_458_770e-16,
    1.186_692_254_751_600_333e-18,
    1.412_380_655_318_031_782e-18,
    -2.298_745_684_435_370_207e-19,
];

/// 1/Γ(1+z) − 1 for |z| ≤ 1/2.
pub(crate) fn rgamma1pm1<T: Real>(z: T) -> T {
    let mut acc = T::zero();
    for &b in RGAMMA1P[1..].iter().rev() {
        acc = acc * z + T::c(b);
    }
    acc * z
}

/// Temme's Γ1(μ) = (1/Γ(1−μ) − 1/Γ(1+μ))/(2μ) and Γ2(μ) = (1/Γ(1−μ) + 1/Γ(1+μ))/2,
/// summed from the odd and even halves of the series so that μ → 0 is exact.
pub(crate) fn temme_gammas<T: Real>(mu: T) -> (T, T) {
    let m2 = mu * mu;
    let mut odd = T::zero();
    let mut even = T::zero();
    for (j, &b) in RGAMMA1P.iter().enumerate().rev() {
        if j % 2 == 1 {
            odd = odd * m2 + T::c(b);
        } else {
            even = even * m2 + T::c(b);
        }
    }
    (-odd, even)
}

/// ln Γ(x) for x > 0; NaN otherwise. Infallible variant of [`log_gamma`].
pub fn ln_gamma<T: Real>(x: T) -> T {
    if !(x > T::zero()) {
        return T::nan();
    }
    let half = T::c(0.5);
    if x < half {
        return ln_gamma(x + T::one()) - x.ln();
    }
    if x < T::c(1.5) {
        return -rgamma1pm1(x - T::one()).ln_1p();
    }
    if x < T::c(2.5) {
        let z = x - T::c(2.0);
        return z.ln_1p() - rgamma1pm1(z).ln_1p();
    }
    if x < T::c(15.0) {
        let mut y = x;
        let mut prod = T::one();
        while y >= T::c(2.5) {
            y = y - T::one();
            prod = prod * y;
        }
        return prod.ln() + ln_gamma(y);
    }
    // Stirling series; the first omitted term is below 1e-16 for x ≥ 15
    let inv = T::one() / x;
    let inv2 = inv * inv;
    let series = inv
        * (T::c(1.0 / 12.0)
            + inv2
                * (T::c(-1.0 / 360.0)
                    + inv2 * (T::c(1.0 / 1260.0) + inv2 * (T::c(-1.0 / 1680.0) + inv2 * T::c(1.0 / 1188.0)))));
    (x - half) * x.ln() - x + half * (T::c(2.0) * T::PI()).ln() + series
}

/// ln Γ(x), rejecting x ≤ 0.
pub fn log_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return domain(format!("log_gamma requires x > 0, got {x}"));
    }
    Ok(ln_gamma(x))
}

fn sin_pi<T: Real>(x: T) -> T {
    // reduce to [-1, 1] before scaling by π so integers give exact zeros
    let r = x - (x / T::c(2.0)).round() * T::c(2.0);
    if r == r.round() {
        return T::zero();
    }
    (T::PI() * r).sin()
}

/// Γ(x) on the real line; infinite at the nonpositive integers.
pub fn gamma<T: Real>(x: T) -> T {
    if x > T::zero() {
        if x < T::c(1.5) && x >= T::c(0.5) {
            return T::one() / (T::one() + rgamma1pm1(x - T::one()));
        }
        return ln_gamma(x).exp();
    }
    let s = sin_pi(x);
    if s == T::zero() {
        return T::infinity();
    }
    T::PI() / (s * gamma(T::one() - x))
}

/// 1/Γ(x), zero at the nonpositive integers.
pub fn rgamma<T: Real>(x: T) -> T {
    if x <= T::zero() && x == x.round() {
        return T::zero();
    }
    if x > T::zero() {
        if x < T::c(1.5) && x >= T::c(0.5) {
            return T::one() + rgamma1pm1(x - T::one());
        }
        return (-ln_gamma(x)).exp();
    }
    sin_pi(x) * gamma(T::one() - x) / T::PI()
}
