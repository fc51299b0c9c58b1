use crate::error::{domain, Result};
use crate::models::DiscreteLevyMeasure;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Per-unit-time pieces of the discretized relative entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyParts<T> {
    /// (1/2A)·(A/2 + b_P + Σ(e^{x_j} − 1)q_j)², zero when A = 0.
    pub diffusion: T,
    /// Σ q_j ln(q_j/p_j) + p_j − q_j.
    pub jump: T,
}

/// Σ q ln(q/p) + p − q with 0·ln 0 = 0.
pub fn jump_entropy<T: Real>(q: &[T], p: &[T]) -> Result<T> {
    if q.len() != p.len() {
        return domain(format!("measure lengths differ: {} vs {}", q.len(), p.len()));
    }
    let mut s = T::zero();
    for (k, (&qk, &pk)) in q.iter().zip(p).enumerate() {
        if qk < T::zero() || pk < T::zero() {
            return domain(format!("negative mass at node {k}"));
        }
        if qk == T::zero() {
            s += pk;
        } else if pk == T::zero() {
            return domain(format!("q is not absolutely continuous w.r.t. p at node {k}"));
        } else {
            s += qk * (qk / pk).ln() + pk - qk;
        }
    }
    Ok(s)
}

pub fn relative_entropy_parts<T: Real>(q: &DiscreteLevyMeasure<T>, p: &DiscreteLevyMeasure<T>) -> Result<EntropyParts<T>> {
    if q.grid.len() != p.grid.len()
        || q.grid.iter().zip(&p.grid).any(|(&a, &b)| (a - b).abs() > T::c(1e-12) * (T::one() + b.abs()))
    {
        return domain("relative entropy needs both measures on the same grid");
    }
    let scale = T::one() + p.a.abs();
    if (q.a - p.a).abs() > T::c(1e-12) * scale {
        return domain(format!(
            "diffusion coefficients differ ({} vs {}); the measures are mutually singular",
            q.a, p.a
        ));
    }
    let jump = jump_entropy(&q.masses, &p.masses)?;
    let diffusion = if p.a == T::zero() {
        T::zero()
    } else {
        let s = q.grid.iter().zip(&q.masses).map(|(&x, &m)| x.exp_m1() * m).sum::<T>();
        let br = p.a / T::c(2.0) + p.b + s;
        br * br / (T::c(2.0) * p.a)
    };
    Ok(EntropyParts { diffusion, jump })
}

/// T·(diffusion bracket + jump entropy) between discretized Lévy measures.
pub fn relative_entropy<T: Real>(q: &DiscreteLevyMeasure<T>, p: &DiscreteLevyMeasure<T>, t: T) -> Result<T> {
    let e = relative_entropy_parts(q, p)?;
    Ok(t * (e.diffusion + e.jump))
}
