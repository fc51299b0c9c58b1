use crate::error::Result;
use crate::models::VgsaParams;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Floor applied to every filtered arrival-rate state.
pub const STATE_FLOOR: f64 = 1e-10;

/// Scalar state-space model x_k = f(x_{k−1}) + W·w, z_k = h(x_k) + U·u with
/// unit-variance noises, linearized by the extended Kalman filter.
pub trait ScalarStateSpace<T: Real> {
    fn transition(&self, x: T) -> T;
    /// ∂f/∂x.
    fn transition_jacobian(&self, x: T) -> T;
    /// Process-noise loading, evaluated at the previous state.
    fn process_noise(&self, x_prev: T) -> T;
    fn observation(&self, x: T) -> T;
    /// ∂h/∂x.
    fn observation_jacobian(&self, x: T) -> T;
    /// Observation-noise loading, evaluated at the prior estimate.
    fn observation_noise(&self, x_prior: T) -> T;
    fn floor(&self, x: T) -> T {
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EkfStep<T> {
    pub x_prior: T,
    pub p_prior: T,
    pub x_post: T,
    pub p_post: T,
    pub gain: T,
}

/// One prediction and measurement update.
pub fn ekf_update<T: Real, M: ScalarStateSpace<T>>(m: &M, x_prev: T, p_prev: T, z: T) -> EkfStep<T> {
    let x_prior = m.floor(m.transition(x_prev));
    let a = m.transition_jacobian(x_prev);
    let w = m.process_noise(x_prev);
    let p_prior = a * p_prev * a + w * w;
    let h = m.observation_jacobian(x_prior);
    let u = m.observation_noise(x_prior);
    let s = h * p_prior * h + u * u;
    let gain = if s > T::zero() { p_prior * h / s } else { T::zero() };
    let x_post = m.floor(x_prior + gain * (z - m.observation(x_prior)));
    let p_post = ((T::one() - gain * h) * p_prior).max(T::zero());
    EkfStep { x_prior, p_prior, x_post, p_post, gain }
}

/// The VGSA arrival rate observed through one log return.
#[derive(Debug, Clone, Copy)]
pub struct VgsaStateSpace<T> {
    pub params: VgsaParams<T>,
    pub mu: T,
    pub omega: T,
    pub dt: T,
}

impl<T: Real> VgsaStateSpace<T> {
    pub fn new(params: &VgsaParams<T>, mu: T, dt: T) -> Result<Self> {
        Ok(Self { params: *params, mu, omega: params.vg().omega()?, dt })
    }
}

impl<T: Real> ScalarStateSpace<T> for VgsaStateSpace<T> {
    fn transition(&self, x: T) -> T {
        x + self.params.kappa * (self.params.eta - x) * self.dt
    }
    fn transition_jacobian(&self, _: T) -> T {
        T::one() - self.params.kappa * self.dt
    }
    fn process_noise(&self, x_prev: T) -> T {
        self.params.lambda * (x_prev.max(T::zero()) * self.dt).sqrt()
    }
    fn observation(&self, x: T) -> T {
        (self.mu + self.omega + self.params.theta * x) * self.dt
    }
    fn observation_jacobian(&self, _: T) -> T {
        self.params.theta * self.dt
    }
    fn observation_noise(&self, x_prior: T) -> T {
        let p = &self.params;
        (p.theta * p.theta * p.nu + p.sigma * p.sigma).sqrt() * (x_prior * self.dt).sqrt()
    }
    fn floor(&self, x: T) -> T {
        x.max(T::c(STATE_FLOOR))
    }
}

/// EKF step for the VGSA arrival rate; `z` is the log return of the step.
pub fn ekf_step<T: Real>(x_prev: T, p_prev: T, z: T, params: &VgsaParams<T>, mu: T, dt: T) -> Result<EkfStep<T>> {
    let m = VgsaStateSpace::new(params, mu, dt)?;
    Ok(ekf_update(&m, m.floor(x_prev), p_prev, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    struct Linear {
        a: f64,
        b: f64,
        w: f64,
        h: f64,
        c: f64,
        u: f64,
    }

    impl ScalarStateSpace<f64> for Linear {
        fn transition(&self, x: f64) -> f64 {
            self.a * x + self.b
        }
        fn transition_jacobian(&self, _: f64) -> f64 {
            self.a
        }
        fn process_noise(&self, _: f64) -> f64 {
            self.w
        }
        fn observation(&self, x: f64) -> f64 {
            self.h * x + self.c
        }
        fn observation_jacobian(&self, _: f64) -> f64 {
            self.h
        }
        fn observation_noise(&self, _: f64) -> f64 {
            self.u
        }
    }

    // textbook scalar Kalman filter in information-free covariance form
    fn kalman(m: &Linear, x: f64, p: f64, z: f64) -> (f64, f64) {
        let xp = m.a * x + m.b;
        let pp = m.a * m.a * p + m.w * m.w;
        let innov_var = m.h * m.h * pp + m.u * m.u;
        let xs = xp + pp * m.h * (z - m.h * xp - m.c) / innov_var;
        let ps = pp - pp * pp * m.h * m.h / innov_var;
        (xs, ps)
    }

    #[test]
    fn reduces_to_kalman_filter() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let m = Linear {
                a: rng.gen_range(-1.5..1.5),
                b: rng.gen_range(-1.0..1.0),
                w: rng.gen_range(0.0..2.0),
                h: rng.gen_range(-2.0..2.0),
                c: rng.gen_range(-1.0..1.0),
                u: rng.gen_range(0.1..2.0),
            };
            let (x, p, z) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.0..2.0), rng.gen_range(-3.0..3.0));
            let e = ekf_update(&m, x, p, z);
            let (xs, ps) = kalman(&m, x, p, z);
            assert!((e.x_post - xs).abs() < 1e-12 * (1.0 + xs.abs()));
            assert!((e.p_post - ps).abs() < 1e-12 * (1.0 + ps.abs()));
        }
    }

    #[test]
    fn uninformative_and_noiseless_limits() {
        let p = VgsaParams { sigma: 0.2, nu: 0.3, theta: 0.0, kappa: 2.0, eta: 1.0, lambda: 0.5 };
        let e = ekf_step(1.2, 0.01, 0.03, &p, 0.05, 1.0 / 252.0).unwrap();
        assert_eq!(e.gain, 0.0);
        assert_eq!((e.x_post, e.p_post), (e.x_prior, e.p_prior));

        let m = Linear { a: 1.0, b: 0.0, w: 0.3, h: 2.0, c: 0.0, u: 1e-9 };
        let e = ekf_update(&m, 0.5, 0.2, 3.0);
        assert!((e.x_post - 1.5).abs() < 1e-9 && e.p_post < 1e-15);
    }

    #[test]
    fn states_are_floored() {
        let p = VgsaParams { sigma: 0.2, nu: 0.3, theta: 2.0, kappa: 2.0, eta: 1.0, lambda: 0.5 };
        let e = ekf_step(0.0, 1.0, -5.0, &p, 0.0, 1.0 / 252.0).unwrap();
        assert!(e.x_post >= STATE_FLOOR && e.x_prior >= STATE_FLOOR);
    }
}
