pub mod bessel;
pub mod quad;

pub use bessel::{bessel_i, bessel_i_scaled};
pub use quad::{gauss_kronrod, Quadrature};
