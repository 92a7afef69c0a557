//! Critical surfaces of long-range percolation on oriented d-ary trees.
//!
//! Every vertex of the rooted oriented `d`-ary tree gets extra edges of
//! lengths `k_1 < … < k_m`, each open independently with probability `p_j`.
//! Reachability along a fixed ray is a `(k_m - 1)`-step Markov chain; the
//! spectral radius `ρ_Q` of its substochastic transition matrix decides
//! percolation (`ρ_Q > 1/d`) versus extinction (`ρ_Q < 1/d`).
//!
//! Modules, bottom-up:
//!
//! - [`model`]: problem instance, validation, gcd reduction, word indexing.
//! - [`markov`]: the matrix `Q`, the full absorbing chain, exact `u_n`.
//! - [`spectral`]: `ρ_Q`, characteristic polynomial, Yaglom limit.
//! - [`critical`]: bisection on `ρ_Q = 1/d`, closed forms, bounds, probes.
//! - [`simulate`]: Monte-Carlo spine, Galton-Watson and brute-force trees.

pub mod critical;
mod dense;
pub mod error;
pub mod markov;
pub mod model;
pub mod simulate;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{ModelParams, StateWord};
