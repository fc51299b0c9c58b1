use crate::error::{LevyError, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmOptions {
    /// Simplex diameter tolerance in the (possibly log-) transformed space.
    pub x_tol: f64,
    /// Spread of objective values across the simplex.
    pub f_tol: f64,
    pub max_iters: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self { x_tol: 1e-5, f_tol: 1e-5, max_iters: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmResult<T> {
    pub x: Vec<T>,
    pub fx: T,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective value after each iteration.
    pub trace: Vec<T>,
}

/// Nelder-Mead minimization. Coordinates with `positive[i]` set are searched
/// as ln x_i, so they stay positive; non-finite objective values count as +∞.
pub fn nelder_mead<T: Real, F>(f: F, x0: &[T], positive: &[bool], opts: &NmOptions) -> Result<NmResult<T>>
where
    F: Fn(&[T]) -> T,
{
    let n = x0.len();
    if n == 0 || positive.len() != n {
        return Err(LevyError::InvalidInput(format!(
            "nelder_mead: start has {n} coordinates, mask has {}",
            positive.len()
        )));
    }
    for (i, (&x, &p)) in x0.iter().zip(positive).enumerate() {
        if p && !(x > T::zero()) {
            return Err(LevyError::InvalidInput(format!("nelder_mead: coordinate {i} must be positive, got {x}")));
        }
    }
    let to_x = |u: &[T]| -> Vec<T> { u.iter().zip(positive).map(|(&v, &p)| if p { v.exp() } else { v }).collect() };
    let eval = |u: &[T]| -> T {
        let v = f(&to_x(u));
        if v.is_finite() {
            v
        } else {
            T::infinity()
        }
    };
    let u0: Vec<T> = x0.iter().zip(positive).map(|(&v, &p)| if p { v.ln() } else { v }).collect();
    let f0 = eval(&u0);
    if !f0.is_finite() {
        return Err(LevyError::InvalidInput("nelder_mead: objective is not finite at the start point".into()));
    }

    let mut simplex = vec![u0.clone()];
    for i in 0..n {
        let mut u = u0.clone();
        let step = if positive[i] {
            T::c(0.05)
        } else if u[i] != T::zero() {
            T::c(0.05) * u[i]
        } else {
            T::c(2.5e-4)
        };
        u[i] += step;
        simplex.push(u);
    }
    let mut fv: Vec<T> = std::iter::once(f0).chain(simplex[1..].iter().map(|u| eval(u))).collect();

    let (rho, chi, gam, sig) = (T::one(), T::c(2.0), T::c(0.5), T::c(0.5));
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fv[a].partial_cmp(&fv[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fv = order.iter().map(|&i| fv[i]).collect();

        let x_spread = simplex[1..]
            .iter()
            .flat_map(|u| u.iter().zip(&simplex[0]).map(|(&a, &b)| (a - b).abs()))
            .fold(T::zero(), T::max);
        let f_spread = fv[1..].iter().map(|&v| (v - fv[0]).abs()).fold(T::zero(), T::max);
        if x_spread <= T::c(opts.x_tol) && f_spread <= T::c(opts.f_tol) {
            converged = true;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }
        iterations += 1;

        let mut centroid = vec![T::zero(); n];
        for u in &simplex[..n] {
            for (c, &v) in centroid.iter_mut().zip(u) {
                *c += v / T::n(n);
            }
        }
        let along = |t: T| -> Vec<T> { centroid.iter().zip(&simplex[n]).map(|(&c, &w)| c + t * (c - w)).collect() };
        let xr = along(rho);
        let fr = eval(&xr);
        if fr < fv[0] {
            let xe = along(rho * chi);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if fr < fv[n - 1] {
            simplex[n] = xr;
            fv[n] = fr;
        } else {
            let (xc, fc) = if fr < fv[n] {
                let xc = along(rho * gam);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-gam);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fv[n].min(fr) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<T> =
                        simplex[0].iter().zip(&simplex[i]).map(|(&b, &v)| b + sig * (v - b)).collect();
                    fv[i] = eval(&shrunk);
                    simplex[i] = shrunk;
                }
            }
        }
        trace.push(fv.iter().copied().fold(T::infinity(), T::min));
    }
    Ok(NmResult { x: to_x(&simplex[0]), fx: fv[0], iterations, converged, trace })
}
