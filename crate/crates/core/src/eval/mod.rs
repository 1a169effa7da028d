//! Calendar evaluation: Monte Carlo simulation, exact forward recursion and
//! the optimal dynamic program.

pub mod dp;
pub mod exact;
pub mod rng;
pub mod simulate;

pub use dp::{optimal_dp, DpValue};
pub use exact::{exact_expected_revenue, exact_expected_revenue_capped, step, value_from, StateDist};
pub use simulate::{check_mode, simulate, simulate_revenues, simulate_with_trace, RevenueStats, Substitution};

/// Evidence for an upper-bound comparison.
#[derive(Debug, Clone)]
pub enum Evidence<'a> {
    Exact(f64),
    Simulated(&'a RevenueStats),
}

/// Exact values must not exceed `opt_lp` (+1e-9); simulated means may exceed
/// it by at most four half-widths.
pub fn upper_bound_check(evidence: Evidence<'_>, opt_lp: f64) -> bool {
    match evidence {
        Evidence::Exact(v) => v <= opt_lp + 1e-9,
        Evidence::Simulated(s) => s.mean - 4.0 * s.half_width <= opt_lp,
    }
}
