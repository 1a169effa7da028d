//! Static policies built from LP solutions, plus benchmark calendars and the
//! guarantee formulas.

pub mod algorithms;
pub mod bounds;
pub mod calendar;

pub use algorithms::{
    bid_price_calendar, discard_thresholds, high_low_calendar, large_inventory_policy, lp_sol_policy, myopic_policy,
    nonstationary_threshold_policy, stationary_randomized_policy, BidPricePlan, HighLowOptions, HighLowPlan,
};
pub use bounds::{delta_apx, delta_apx_exact, guarantee_report, poisson_floor, reservation_delta, GuaranteeReport};
pub use calendar::{CalendarDoc, DeterministicCalendar, PeriodPlan, RandomizedCalendar, WeightedAssortment};
