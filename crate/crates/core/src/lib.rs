//! Static price and assortment calendars for finite-horizon, finite-inventory
//! revenue management.
//!
//! The crate builds the deterministic LP relaxations (choice-based and
//! single-item), solves them with a bundled simplex, turns optimal solutions
//! into randomized or deterministic calendars, and evaluates calendars exactly
//! (forward recursion over inventory states) or by Monte Carlo simulation.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod derand;
pub mod error;
pub mod eval;
pub mod lp;
pub mod model;
pub mod policies;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{
    Assortment, AssortmentFamily, ChoiceModel, DemandDistribution, FamilySpec, Instance,
    InstanceConfig, Product,
};
pub use scalar::Scalar;

/// Support threshold: LP values at or below this are treated as zero.
pub const ZETA: f64 = 1e-9;

/// Default cap on reachable inventory states for exact evaluation and DP.
pub const DEFAULT_STATE_CAP: usize = 100_000;

/// Solver over double precision; the default everywhere downstream.
pub type LinearProgram = lp::LinearProgram<f64>;
pub type LpSolution = lp::LpSolution<f64>;
/// Exact rational LP, used as an oracle in tests and for small fixtures.
pub type RationalProgram = lp::LinearProgram<num_rational::BigRational>;
pub type RationalSolution = lp::LpSolution<num_rational::BigRational>;
