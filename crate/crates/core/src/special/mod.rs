//! Special functions needed to build the quadrature weights.

mod bessel;
mod gamma;
mod zeta;

pub use bessel::scaled_bessel_i;
pub use gamma::{gamma, gamma_ratio, ln_gamma};
pub use zeta::{power_tail_sum, zeta_value};
