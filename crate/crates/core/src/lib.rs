//! Volume entropy of metric graphs and square-tiled translation surfaces.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! - [`graph`]: directed metric graphs whose edge set may be countably
//!   infinite, given as finitely many head edges plus parametric tail families.
//! - [`counting`]: exact brute-force path enumeration and counting, closed-path
//!   length collection, approximate-gcd arithmeticity detection and empirical
//!   growth rates.
//! - [`spectral`]: truncated transfer matrices `M_z`, the Schur complement
//!   `W_σ = A + B (I - D)^{-1} C` with certified tail bounds, Perron data,
//!   entropy by bisection on `ρ(W_σ) = 1`, the eta series and its residue.
//! - [`origami`]: square-tiled surfaces, separatrix tracing, saddle
//!   connections, the geodesic concatenation rule, ball volumes and arc counts.
//! - [`asymptotics`]: normalisation by `e^{-hR}` and convergence/oscillation
//!   verdicts.
//!
//! Everything is deterministic: no randomness, and every reduction runs in a
//! fixed order.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod counting;
mod error;
pub mod graph;
pub mod linalg;
pub mod math;
pub mod origami;
pub mod spectral;

pub use error::{Error, Result};
