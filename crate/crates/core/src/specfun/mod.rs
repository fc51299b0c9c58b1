//! Special functions: normal CDF, log-gamma, modified Bessel K, Kummer's
//! 1F1 and the parabolic cylinder function D_p.
//!
//! Kept in-crate so the numerics behind the VG density and the CGMY sampler
//! can be audited and tested against independent oracles.

mod bessel;
mod cylinder;
mod gamma;
mod normal;

pub use bessel::{bessel_k, bessel_k_scaled, ln_bessel_k};
pub use cylinder::{
    confluent_hypergeometric, confluent_hypergeometric_with, parabolic_cylinder_d,
    parabolic_cylinder_d_scaled, parabolic_cylinder_d_with, SeriesOpts,
};
pub use gamma::{gamma, ln_gamma, log_gamma, rgamma};
pub use normal::{erf, erfc, norm_cdf, norm_pdf};
