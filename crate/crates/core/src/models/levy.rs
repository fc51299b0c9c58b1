use super::{ModelParams, VgParams};
use crate::error::{domain, invalid, LevyError, Result};
use crate::quad::gauss_legendre;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Lévy measure collapsed onto a grid of log-jump sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLevyMeasure<T> {
    pub grid: Vec<T>,
    pub masses: Vec<T>,
    /// Diffusion coefficient σ².
    pub a: T,
    /// Drift b = γ − ∫ x ν(dx).
    pub b: T,
}

fn vg_density<T: Real>(p: &VgParams<T>, x: T) -> T {
    // Madan, Carr & Chang (1998), eq. (14); the source formula is external
    let s2 = p.sigma * p.sigma;
    let tail = (T::c(2.0) / p.nu + p.theta * p.theta / s2).sqrt() / p.sigma;
    (p.theta * x / s2 - tail * x.abs()).exp() / (p.nu * x.abs())
}

/// Lévy density k(x) for x ≠ 0. VGSA uses its VG component.
pub fn levy_density<T: Real>(model: &ModelParams<T>, x: T) -> Result<T> {
    if x == T::zero() {
        return domain("Lévy density is singular at 0");
    }
    model.validate()?;
    match model {
        ModelParams::Vg(p) => Ok(vg_density(p, x)),
        ModelParams::Vgsa(p) => Ok(vg_density(&p.vg(), x)),
        ModelParams::Cgmy(p) => {
            let tilt = if x > T::zero() { p.m } else { p.g };
            Ok(p.c * (-tilt * x.abs()).exp() / x.abs().powf(T::one() + p.y))
        }
        ModelParams::Bs { .. } => Err(LevyError::Unsupported("BS has no jumps".into())),
    }
}

/// 100 points per side, evenly spaced on [1e-3, 1] and its mirror image.
pub fn default_levy_grid<T: Real>() -> Vec<T> {
    let n = 100;
    let lo = 1e-3;
    let step = (1.0 - lo) / (n - 1) as f64;
    let pos: Vec<f64> = (0..n).map(|k| lo + step * k as f64).collect();
    pos.iter().rev().map(|&x| T::c(-x)).chain(pos.iter().map(|&x| T::c(x))).collect()
}

/// Integrates the Lévy density over one cell per grid point.
///
/// Cells are the midpoints between same-sign neighbours, clipped at the
/// innermost and outermost point of each side, so the masses on one side sum
/// to ∫ k(x) dx between that side's extreme points. Each cell is integrated
/// with 16-point Gauss-Legendre rather than a one-point midpoint rule, which
/// would be badly biased next to the x^{-1-Y} singularity.
pub fn discretize_levy_measure<T: Real>(model: &ModelParams<T>, grid: &[T]) -> Result<DiscreteLevyMeasure<T>> {
    if grid.is_empty() {
        return invalid("empty grid");
    }
    if grid.iter().any(|&x| x == T::zero()) {
        return domain("grid contains 0, where the Lévy density is singular");
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("grid must be strictly increasing");
    }
    model.validate()?;
    let jumps = !matches!(model, ModelParams::Bs { .. });
    let split = grid.iter().position(|&x| x > T::zero()).unwrap_or(grid.len());
    let mut masses = Vec::with_capacity(grid.len());
    for side in [&grid[..split], &grid[split..]] {
        if side.len() == 1 {
            return invalid("each side of the grid needs at least two points");
        }
        for k in 0..side.len() {
            let lo = if k == 0 { side[0] } else { (side[k - 1] + side[k]) / T::c(2.0) };
            let hi = if k + 1 == side.len() { side[k] } else { (side[k] + side[k + 1]) / T::c(2.0) };
            let m = if jumps {
                gauss_legendre(|x| levy_density(model, x).unwrap_or(T::zero()), lo, hi)
            } else {
                T::zero()
            };
            masses.push(m);
        }
    }
    let a = match model {
        ModelParams::Bs { sigma } => *sigma * *sigma,
        _ => T::zero(),
    };
    Ok(DiscreteLevyMeasure { grid: grid.to_vec(), masses, a, b: T::zero() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::tanh_sinh;

    #[test]
    fn symmetric_cgmy_gives_symmetric_masses() {
        let g = default_levy_grid::<f64>();
        let d = discretize_levy_measure(&ModelParams::cgmy(10.0, 10.0, 10.0, 0.75), &g).unwrap();
        let n = d.masses.len();
        for k in 0..n / 2 {
            assert!((d.masses[k] - d.masses[n - 1 - k]).abs() <= 1e-13 * d.masses[k]);
        }
    }

    #[test]
    fn cgmy_total_mass_matches_quadrature() {
        // 200 points on [-1, 1] without 0
        let grid: Vec<f64> = (-100..=100).filter(|&k| k != 0).map(|k| k as f64 / 100.0).collect();
        let m = ModelParams::cgmy(10.0, 10.0, 10.0, 0.75);
        let d = discretize_levy_measure(&m, &grid).unwrap();
        let k = |x: f64| 10.0 * (-10.0 * x.abs()).exp() / x.abs().powf(1.75);
        let want = tanh_sinh(k, -1.0, -0.01, 1e-14) + tanh_sinh(k, 0.01, 1.0, 1e-14);
        let got: f64 = d.masses.iter().sum();
        assert!(((got - want) / want).abs() < 1e-4, "{got} vs {want}");
    }

    #[test]
    fn mass_linear_in_c() {
        let g = default_levy_grid::<f64>();
        let a = discretize_levy_measure(&ModelParams::cgmy(2.0, 3.0, 4.0, 0.5), &g).unwrap();
        let b = discretize_levy_measure(&ModelParams::cgmy(4.0, 3.0, 4.0, 0.5), &g).unwrap();
        for (x, y) in a.masses.iter().zip(&b.masses) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let m = ModelParams::vg(0.2, 0.1, 0.1);
        assert!(discretize_levy_measure(&m, &[-0.1, 0.0, 0.1]).is_err());
        assert!(discretize_levy_measure(&m, &[-0.1, -0.2, 0.1, 0.2]).is_err());
        let bs = discretize_levy_measure(&ModelParams::Bs { sigma: 0.2 }, &[-0.2, -0.1, 0.1, 0.2]).unwrap();
        assert!(bs.masses.iter().all(|&m| m == 0.0) && (bs.a - 0.04_f64).abs() < 1e-15);
    }

    #[test]
    fn vg_density_tilt() {
        // positive θ shifts mass to the right
        let m = ModelParams::vg(0.2, 0.1, 0.15);
        assert!(levy_density(&m, 0.1).unwrap() > levy_density(&m, -0.1).unwrap());
    }
}
