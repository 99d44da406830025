//! Special functions and quadrature used by every kernel formula.

mod bessel;
mod gamma;
mod laguerre;
mod quadrature;

pub use bessel::{bessel_i_norm, bessel_i_norm_quadrature, NormalizedBessel};
pub use gamma::{gamma, gamma_complex, ln_gamma, ln_gamma_complex};
pub use laguerre::{laguerre, laguerre_all};
pub use quadrature::{
    gauss_jacobi, gauss_laguerre, gauss_legendre, gk15, gk21, integrate_adaptive,
    integrate_adaptive_with_points, Integral, QuadratureRule, RuleKind, Scalar, Tolerance,
};
