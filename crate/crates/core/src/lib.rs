//! Explicit nonsingular Poisson-suspension systems of each Krieger type.
//!
//! The crate is organized around four pieces:
//!
//! - [`group`]: the acting integer lattice `Z^d`, its enumeration, Følner
//!   boxes and the symmetric-difference combinatorics every series consumes.
//! - [`system`]: the block constructions (tower densities `λ_n`, tower masses
//!   `ν(A_n)`, Følner shapes) for the four built-in construction families, and the
//!   polynomial `c(λ)`.
//! - [`analytics`]: exact evaluation of the closed-form series criteria with
//!   certified analytic tail bounds, conservativeness certificates, and the
//!   resulting Krieger-type classification.
//! - [`sim`]: the Monte Carlo engine — Poisson point configurations sampled
//!   cell-by-cell, exact integer-exponent Radon–Nikodym cocycles, Skellam
//!   window statistics and empirical ratio-set findings.

pub mod analytics;
pub mod group;
pub mod sim;
pub mod system;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
