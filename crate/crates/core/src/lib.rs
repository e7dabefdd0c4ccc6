//! Averages of functions over systems of integer linear forms.
//!
//! The crate works on two kinds of groups: the cyclic groups `Z_N`, where
//! averages are exact finite sums, and filtered tori `T^m`, where each
//! coordinate carries a maximal degree-`d` filtration and the relevant
//! configuration space is the Leibman subtorus cut out by the lattices
//! `Λ^[d]`. Around these sit the tools needed to compare the two settings:
//! Gowers norms, Haar sampling, exact character integration, balanced-map
//! certificates and extremal searches.

pub mod cyclic;
pub mod equid;
pub mod error;
pub mod exact;
pub mod extremal;
pub mod lattice;
pub mod linsys;
pub mod poly;
pub mod torus;

mod par;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Default cap on brute-force evaluation counts.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// `e(θ) = exp(2πiθ)`.
#[inline]
pub fn e(theta: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * theta).sin_cos();
    Complex64::new(c, s)
}
