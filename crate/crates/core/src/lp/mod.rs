//! Deterministic LP relaxations and the bundled simplex solver.

pub mod builders;
pub mod program;
pub mod simplex;
pub mod solution;

pub use builders::{build_cdlp_n, build_cdlp_n_capped, build_cdlp_s, build_dlp_n, build_dlp_s, build_upper_bound_lp};
pub use program::{Constraint, LinearProgram, LpKind, Sense, VarLabel};
pub use simplex::{BasisEntry, SolveOptions};
pub use solution::{item_contributions, solve_lp, two_price_support, LpSolution, TwoPriceSupport};
