//! Model parameter sets, characteristic functions, cumulants and
//! discretized Lévy measures.

mod cf;
mod cumulants;
mod levy;

pub use cf::{
    characteristic_function, log_characteristic_function, log_price_cf, martingale_correction,
    LogPriceCf,
};
pub use cumulants::{cumulants, cumulants_fd, CumulantSet};
pub(crate) use cumulants::moment_strip;
pub(crate) use cf::ln_cir_clock;
pub use levy::{default_levy_grid, discretize_levy_measure, levy_density, DiscreteLevyMeasure};

use crate::error::{domain, invalid, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Initial rate of the VGSA clock, y(0).
pub const VGSA_Y0: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Bs,
    Vg,
    Vgsa,
    Cgmy,
}

impl ModelKind {
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Bs => &["sigma"],
            ModelKind::Vg => &["sigma", "nu", "theta"],
            ModelKind::Vgsa => &["sigma", "nu", "theta", "kappa", "eta", "lambda"],
            ModelKind::Cgmy => &["C", "G", "M", "Y"],
        }
    }

    /// Coordinates constrained to be strictly positive during optimization.
    pub fn positive_mask(self) -> &'static [bool] {
        match self {
            ModelKind::Bs => &[true],
            ModelKind::Vg => &[true, true, false],
            ModelKind::Vgsa => &[true, true, false, true, true, true],
            ModelKind::Cgmy => &[true, true, true, false],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Bs => "bs",
            ModelKind::Vg => "vg",
            ModelKind::Vgsa => "vgsa",
            ModelKind::Cgmy => "cgmy",
        };
        f.write_str(s)
    }
}

impl FromStr for ModelKind {
    type Err = crate::LevyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bs" => Ok(ModelKind::Bs),
            "vg" => Ok(ModelKind::Vg),
            "vgsa" => Ok(ModelKind::Vgsa),
            "cgmy" => Ok(ModelKind::Cgmy),
            other => invalid(format!("unknown model '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VgParams<T> {
    pub sigma: T,
    pub nu: T,
    pub theta: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VgsaParams<T> {
    pub sigma: T,
    pub nu: T,
    pub theta: T,
    pub kappa: T,
    pub eta: T,
    pub lambda: T,
}

/// CGMY parameters. `m` tempers the right tail (x > 0), `g` the left one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgmyParams<T> {
    pub c: T,
    pub g: T,
    pub m: T,
    pub y: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams<T> {
    Bs { sigma: T },
    Vg(VgParams<T>),
    Vgsa(VgsaParams<T>),
    Cgmy(CgmyParams<T>),
}

/// Spot, risk-free rate and dividend yield.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketEnv<T> {
    pub s0: T,
    pub r: T,
    pub q: T,
}

impl<T: Real> MarketEnv<T> {
    pub fn new(s0: T, r: T, q: T) -> Result<Self> {
        let env = Self { s0, r, q };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > T::zero()) || !self.s0.is_finite() {
            return domain(format!("spot must be positive, got {}", self.s0));
        }
        if !self.r.is_finite() || !self.q.is_finite() {
            return domain("rates must be finite");
        }
        Ok(())
    }

    pub fn forward(&self, t: T) -> T {
        self.s0 * ((self.r - self.q) * t).exp()
    }
}

impl<T: Real> VgParams<T> {
    pub fn new(sigma: T, nu: T, theta: T) -> Self {
        Self { sigma, nu, theta }
    }

    /// 1 − θν − σ²ν/2, the argument of the VG martingale-correction log.
    pub fn log_argument(&self) -> T {
        T::one() - self.theta * self.nu - self.sigma * self.sigma * self.nu / T::c(2.0)
    }

    /// ω = (1/ν) ln(1 − θν − σ²ν/2).
    pub fn omega(&self) -> Result<T> {
        let arg = self.log_argument();
        if !(arg > T::zero()) {
            return domain(format!("VG requires 1 - theta*nu - sigma^2*nu/2 > 0, got {arg}"));
        }
        Ok(arg.ln() / self.nu)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > T::zero()) || !(self.nu > T::zero()) || !self.theta.is_finite() {
            return domain(format!(
                "VG requires sigma > 0, nu > 0, finite theta; got {}, {}, {}",
                self.sigma, self.nu, self.theta
            ));
        }
        Ok(())
    }
}

impl<T: Real> VgsaParams<T> {
    pub fn vg(&self) -> VgParams<T> {
        VgParams { sigma: self.sigma, nu: self.nu, theta: self.theta }
    }

    fn validate(&self) -> Result<()> {
        self.vg().validate()?;
        let ok = |v: T| v >= T::zero() && v.is_finite();
        if !ok(self.kappa) || !ok(self.eta) || !ok(self.lambda) {
            return domain(format!(
                "VGSA requires kappa, eta, lambda >= 0; got {}, {}, {}",
                self.kappa, self.eta, self.lambda
            ));
        }
        Ok(())
    }
}

impl<T: Real> CgmyParams<T> {
    pub fn new(c: T, g: T, m: T, y: T) -> Self {
        Self { c, g, m, y }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > T::zero()) || !(self.g > T::zero()) || !(self.m > T::zero()) {
            return domain(format!("CGMY requires C, G, M > 0; got {}, {}, {}", self.c, self.g, self.m));
        }
        if !(self.y < T::c(2.0)) || !self.y.is_finite() {
            return domain(format!("CGMY requires Y < 2, got {}", self.y));
        }
        // Γ(−Y) has poles at the nonnegative integers
        if self.y == self.y.round() && self.y >= T::zero() {
            return domain(format!("CGMY with integer Y = {} needs a limiting form, not supported", self.y));
        }
        Ok(())
    }

    /// w = −CΓ(−Y)[(M−1)^Y − M^Y + (G+1)^Y − G^Y].
    pub fn omega(&self) -> Result<T> {
        if !(self.m > T::one()) {
            return domain(format!("CGMY martingale correction requires M > 1, got {}", self.m));
        }
        let y = self.y;
        let gm = crate::specfun::gamma(-y);
        Ok(-self.c
            * gm
            * ((self.m - T::one()).powf(y) - self.m.powf(y) + (self.g + T::one()).powf(y) - self.g.powf(y)))
    }
}

impl<T: Real> ModelParams<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Bs { .. } => ModelKind::Bs,
            ModelParams::Vg(_) => ModelKind::Vg,
            ModelParams::Vgsa(_) => ModelKind::Vgsa,
            ModelParams::Cgmy(_) => ModelKind::Cgmy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Bs { sigma } => {
                if !(*sigma > T::zero()) || !sigma.is_finite() {
                    return domain(format!("BS requires sigma > 0, got {sigma}"));
                }
                Ok(())
            }
            ModelParams::Vg(p) => p.validate(),
            ModelParams::Vgsa(p) => p.validate(),
            ModelParams::Cgmy(p) => p.validate(),
        }
    }

    /// Parameters in the order of [`ModelKind::param_names`].
    pub fn to_vec(&self) -> Vec<T> {
        match *self {
            ModelParams::Bs { sigma } => vec![sigma],
            ModelParams::Vg(p) => vec![p.sigma, p.nu, p.theta],
            ModelParams::Vgsa(p) => vec![p.sigma, p.nu, p.theta, p.kappa, p.eta, p.lambda],
            ModelParams::Cgmy(p) => vec![p.c, p.g, p.m, p.y],
        }
    }

    pub fn from_slice(kind: ModelKind, v: &[T]) -> Result<Self> {
        let need = kind.param_names().len();
        if v.len() != need {
            return invalid(format!("{kind} takes {need} parameters, got {}", v.len()));
        }
        Ok(match kind {
            ModelKind::Bs => ModelParams::Bs { sigma: v[0] },
            ModelKind::Vg => ModelParams::Vg(VgParams { sigma: v[0], nu: v[1], theta: v[2] }),
            ModelKind::Vgsa => ModelParams::Vgsa(VgsaParams {
                sigma: v[0],
                nu: v[1],
                theta: v[2],
                kappa: v[3],
                eta: v[4],
                lambda: v[5],
            }),
            ModelKind::Cgmy => ModelParams::Cgmy(CgmyParams { c: v[0], g: v[1], m: v[2], y: v[3] }),
        })
    }

    /// Builds a parameter set from `name=value` pairs; names are matched
    /// case-insensitively and all of them are required.
    pub fn from_pairs(kind: ModelKind, pairs: &[(String, T)]) -> Result<Self> {
        let names = kind.param_names();
        let mut v = vec![T::nan(); names.len()];
        for (k, val) in pairs {
            match names.iter().position(|n| n.eq_ignore_ascii_case(k)) {
                Some(i) => v[i] = *val,
                None => return invalid(format!("unknown parameter '{k}' for {kind}")),
            }
        }
        if let Some(i) = v.iter().position(|x| x.is_nan()) {
            return invalid(format!("missing parameter '{}' for {kind}", names[i]));
        }
        let p = Self::from_slice(kind, &v)?;
        p.validate()?;
        Ok(p)
    }

    pub fn vg(sigma: T, nu: T, theta: T) -> Self {
        ModelParams::Vg(VgParams { sigma, nu, theta })
    }

    pub fn cgmy(c: T, g: T, m: T, y: T) -> Self {
        ModelParams::Cgmy(CgmyParams { c, g, m, y })
    }

    pub fn vgsa(sigma: T, nu: T, theta: T, kappa: T, eta: T, lambda: T) -> Self {
        ModelParams::Vgsa(VgsaParams { sigma, nu, theta, kappa, eta, lambda })
    }
}
