//! Recovery of sparse vectors from magnitude-only Gaussian measurements by
//! an anchored linear program.
//!
//! Given magnitudes `b_i = |<a_i, x0>|` of a k-sparse `x0` and a unit anchor
//! `phi` correlated with `x0`, the program
//!
//! ```text
//!     maximize  <phi, x> - lambda ||x||_1   s.t.  |<a_i, x>| <= b_i
//! ```
//!
//! recovers `x0` up to sign once enough measurements are taken. The crate
//! provides the data generators ([`model`]), the LP ([`formulation`]), a
//! dense interior-point solver with a brute-force oracle ([`solver`]), the
//! parameter conditions ([`theory`]) and a Monte Carlo harness ([`harness`]).

// Comparisons are negated on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod formulation;
pub mod harness;
pub mod instance;
pub mod model;
pub mod rng;
pub mod solver;
pub mod theory;

pub use error::{Result, SpmError};
