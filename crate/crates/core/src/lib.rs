//! Numerics for the (k,1)-generalized harmonic oscillator on `R^N` with the
//! reflection group `Z_2^N`.
//!
//! The crate builds every constructive object of the (k,1)-generalized
//! setting and the certifiers that check their quantitative properties:
//!
//! * [`params`]: the multiplicity vector, weights and normalizing constants.
//! * [`specfun`]: Laguerre polynomials, the normalized I-Bessel function,
//!   complex log-Gamma, Gauss–Jacobi/Laguerre rules and adaptive quadrature.
//! * [`metric`]: the orbit metric `d`, its orbit version `d_G` and the
//!   inequality checkers built on them.
//! * [`measure`]: ball measures by two independent routes, scaling and doubling.
//! * [`intertwine`]: the intertwining operator `V_k` in closed `Z_2^N` form.
//! * [`translate`]: generalized translations of radial functions.
//! * [`semigroup`]: the heat kernel, the kernel `B_{k,1}` and kernel bounds.
//! * [`spectral`]: the rank-one eigenbasis and spectral multipliers.
//! * [`imagpow`]: imaginary powers, their singular kernel and the
//!   Hörmander-type integral.
//! * [`czdecomp`]: Calderón–Zygmund decomposition at `N = 1`.
//! * [`verify`] and [`config`]: the batch verification harness behind the
//!   `gko` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod config;
pub mod czdecomp;
mod error;
pub mod imagpow;
pub mod intertwine;
pub mod measure;
pub mod metric;
pub mod params;
pub mod semigroup;
pub mod specfun;
pub mod spectral;
pub mod translate;
pub mod verify;

pub use error::{Error, Result};
pub use params::Setting;
