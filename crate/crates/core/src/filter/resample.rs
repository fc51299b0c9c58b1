use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Ancestor index for each output slot: slot j takes the first particle whose
/// cumulative weight reaches u_j, where u_j ∈ [j/M, (j+1)/M) is the j-th
/// stratified position. `uniforms[j]` ∈ [0, 1) supplies the offset in slot j.
pub fn resample_indices<T: Real>(weights: &[T], uniforms: &[T]) -> Result<Vec<usize>> {
    if weights.is_empty() {
        return invalid("no particles to resample");
    }
    let total: T = weights.iter().copied().sum();
    if !(total > T::zero()) || weights.iter().any(|w| !(*w >= T::zero())) {
        return invalid("degenerate weights: all zero or not finite");
    }
    let m = T::n(uniforms.len());
    let mut out = Vec::with_capacity(uniforms.len());
    let mut i = 0;
    let mut cum = weights[0] / total;
    for (j, &u) in uniforms.iter().enumerate() {
        let pos = (u + T::n(j)) / m;
        while pos >= cum && i + 1 < weights.len() {
            i += 1;
            cum += weights[i] / total;
        }
        out.push(i);
    }
    Ok(out)
}

/// Stratified resampling of `states`; one output per uniform.
pub fn sir_resample<T: Real, S: Clone>(weights: &[T], states: &[S], uniforms: &[T]) -> Result<Vec<S>> {
    if weights.len() != states.len() {
        return invalid(format!("{} weights for {} states", weights.len(), states.len()));
    }
    Ok(resample_indices(weights, uniforms)?.into_iter().map(|i| states[i].clone()).collect())
}

/// Systematic resampling: one uniform shared by all N slots.
pub fn systematic_resample<T: Real>(weights: &[T], u: T) -> Result<Vec<usize>> {
    resample_indices(weights, &vec![u; weights.len()])
}
