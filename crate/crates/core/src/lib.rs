//! Information geometry of the probability simplex.
//!
//! Compositions, log-ratio coordinates and contrast matrices live in
//! [`simplex`]; the dual θ/η coordinate systems and Fisher metric in
//! [`duality`]; Bregman, α, Hellinger, Fisher and Box-Cox measures in
//! [`divergence`]; geodesics and m-projections in [`geometry`]; and the
//! subcomposition/amalgamation calculus in [`aggregation`]. The [`cli`]
//! module holds the dataset ingestion and report assembly used by the
//! `simplex-infogeo` binary.

pub mod aggregation;
pub mod cli;
pub mod divergence;
pub mod duality;
pub mod error;
pub mod geometry;
pub mod simplex;

pub use error::{Error, Result};
pub use simplex::{Composition, ContrastKind, ContrastMatrix, Tangent};

/// Library version recorded in report metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
