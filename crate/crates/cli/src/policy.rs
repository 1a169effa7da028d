//! Named policies and a planner that builds them from cached LP solutions.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statcal::derand::{derandomize, DerandConfig, DerandOutcome, Variant};
use statcal::eval::{exact_expected_revenue_capped, optimal_dp, simulate, DpValue, RevenueStats, Substitution};
use statcal::lp::{build_cdlp_n, build_upper_bound_lp};
use statcal::policies::{
    bid_price_calendar, high_low_calendar, large_inventory_policy, lp_sol_policy, myopic_policy,
    nonstationary_threshold_policy, stationary_randomized_policy, DeterministicCalendar, HighLowOptions,
    RandomizedCalendar,
};
use statcal::{Instance, LpSolution, DEFAULT_STATE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    LpUb,
    Myopic,
    LpSol,
    Alg1,
    Alg2,
    Alg3,
    Alg5,
    Alg6,
    DerandLp,
    DerandAlg2,
    DerandAlg3,
    OptimalDp,
}

impl PolicyName {
    pub const ALL: [PolicyName; 12] = [
        PolicyName::LpUb,
        PolicyName::Myopic,
        PolicyName::LpSol,
        PolicyName::Alg1,
        PolicyName::Alg2,
        PolicyName::Alg3,
        PolicyName::Alg5,
        PolicyName::Alg6,
        PolicyName::DerandLp,
        PolicyName::DerandAlg2,
        PolicyName::DerandAlg3,
        PolicyName::OptimalDp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyName::LpUb => "lp-ub",
            PolicyName::Myopic => "myopic",
            PolicyName::LpSol => "lp-sol",
            PolicyName::Alg1 => "alg1",
            PolicyName::Alg2 => "alg2",
            PolicyName::Alg3 => "alg3",
            PolicyName::Alg5 => "alg5",
            PolicyName::Alg6 => "alg6",
            PolicyName::DerandLp => "derand-lp",
            PolicyName::DerandAlg2 => "derand-alg2",
            PolicyName::DerandAlg3 => "derand-alg3",
            PolicyName::OptimalDp => "optimal-dp",
        }
    }

    /// Why this policy cannot run on `inst`, if it cannot.
    pub fn incompatibility(self, inst: &Instance) -> Option<&'static str> {
        match self {
            PolicyName::Alg1 if !inst.is_stationary() => Some("alg1 needs a stationary instance"),
            PolicyName::Alg5 if inst.n_items() != 1 || !inst.is_stationary() => {
                Some("alg5 needs a stationary single-item instance")
            }
            PolicyName::Alg6 if inst.n_items() != 1 => Some("alg6 needs a single-item instance"),
            PolicyName::OptimalDp if !inst.is_integral() => Some("optimal-dp needs integral demand"),
            PolicyName::OptimalDp if inst.inventories().iter().any(|b| b.fract() != 0.0) => {
                Some("optimal-dp needs integer inventories")
            }
            _ => None,
        }
    }
}

impl fmt::Display for PolicyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        PolicyName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown policy {s:?}"))
    }
}

/// What a policy produces.
#[derive(Debug, Clone)]
pub enum Plan {
    /// The LP upper bound itself.
    Bound(f64),
    Calendar {
        randomized: RandomizedCalendar,
        deterministic: Option<DeterministicCalendar>,
        derand: Option<Box<DerandOutcome>>,
    },
    /// Inventory-reactive optimum; only its value is reported.
    Dynamic(Box<DpValue>),
}

impl Plan {
    fn fixed(cal: DeterministicCalendar) -> Self {
        Plan::Calendar {
            randomized: cal.to_randomized(),
            deterministic: Some(cal),
            derand: None,
        }
    }

    fn mixed(cal: RandomizedCalendar) -> Self {
        Plan::Calendar {
            randomized: cal,
            deterministic: None,
            derand: None,
        }
    }

    pub fn calendar(&self) -> Option<&RandomizedCalendar> {
        match self {
            Plan::Calendar { randomized, .. } => Some(randomized),
            _ => None,
        }
    }

    pub fn exact_value(&self, inst: &Instance, mode: Substitution, cap: usize) -> statcal::Result<f64> {
        match self {
            Plan::Bound(v) => Ok(*v),
            Plan::Dynamic(dp) => Ok(dp.root),
            Plan::Calendar { randomized, .. } => exact_expected_revenue_capped(inst, randomized, mode, cap),
        }
    }

    /// Simulated revenue; bounds and DP values come back with zero width.
    pub fn simulate(&self, inst: &Instance, mode: Substitution, reps: u64, seed: u64) -> statcal::Result<RevenueStats> {
        let point = |v: f64| RevenueStats {
            mean: v,
            half_width: 0.0,
            std_dev: 0.0,
            replications: 0,
            seed,
            mode,
        };
        match self {
            Plan::Bound(v) => Ok(point(*v)),
            Plan::Dynamic(dp) => Ok(point(dp.root)),
            Plan::Calendar { randomized, .. } => simulate(inst, randomized, mode, reps, seed),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlanOptions {
    pub mode: Substitution,
    /// Reservation probability override for alg3.
    pub alg3_delta: Option<f64>,
    pub derand: DerandConfig,
    pub high_low: HighLowOptions,
    pub state_cap: usize,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            mode: Substitution::Static,
            alg3_delta: None,
            derand: DerandConfig::default(),
            high_low: HighLowOptions::default(),
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// Builds policies for one instance, solving each LP at most once.
pub struct Planner<'a> {
    inst: &'a Instance,
    opts: PlanOptions,
    upper: OnceLock<LpSolution>,
    cdlp_n: OnceLock<LpSolution>,
}

impl<'a> Planner<'a> {
    pub fn new(inst: &'a Instance, opts: PlanOptions) -> Self {
        Self {
            inst,
            opts,
            upper: OnceLock::new(),
            cdlp_n: OnceLock::new(),
        }
    }

    pub fn instance(&self) -> &Instance {
        self.inst
    }

    pub fn options(&self) -> &PlanOptions {
        &self.opts
    }

    /// CDLP-S for stationary instances, CDLP-N otherwise.
    pub fn upper_bound(&self) -> statcal::Result<&LpSolution> {
        if let Some(s) = self.upper.get() {
            return Ok(s);
        }
        let sol = build_upper_bound_lp(self.inst)?.solve()?;
        Ok(self.upper.get_or_init(|| sol))
    }

    pub fn cdlp_n(&self) -> statcal::Result<&LpSolution> {
        if !self.inst.is_stationary() {
            return self.upper_bound();
        }
        if let Some(s) = self.cdlp_n.get() {
            return Ok(s);
        }
        let sol = build_cdlp_n(self.inst)?.solve()?;
        Ok(self.cdlp_n.get_or_init(|| sol))
    }

    pub fn opt_lp(&self) -> statcal::Result<f64> {
        Ok(self.upper_bound()?.objective)
    }

    fn derand_config(&self) -> DerandConfig {
        let mut cfg = self.opts.derand.clone();
        cfg.mode = self.opts.mode;
        if cfg.variant == Variant::Auto && !self.inst.is_integral() {
            // fractional levels multiply fast; don't pay for a doomed exact attempt
            cfg.variant = Variant::Sampled;
        }
        cfg
    }

    fn derand(&self, base: RandomizedCalendar) -> statcal::Result<Plan> {
        let out = derandomize(&base, self.inst, self.opt_lp()?, &self.derand_config())?;
        Ok(Plan::Calendar {
            randomized: out.calendar.to_randomized(),
            deterministic: Some(out.calendar.clone()),
            derand: Some(Box::new(out)),
        })
    }

    pub fn plan(&self, name: PolicyName) -> statcal::Result<Plan> {
        if let Some(why) = name.incompatibility(self.inst) {
            return Err(statcal::Error::Invalid(why.to_string()));
        }
        let inst = self.inst;
        Ok(match name {
            PolicyName::LpUb => Plan::Bound(self.opt_lp()?),
            PolicyName::Myopic => Plan::fixed(myopic_policy(inst)),
            PolicyName::LpSol => Plan::mixed(lp_sol_policy(self.upper_bound()?, inst)?),
            PolicyName::Alg1 => Plan::mixed(stationary_randomized_policy(self.upper_bound()?, inst)?),
            PolicyName::Alg2 => Plan::mixed(nonstationary_threshold_policy(self.cdlp_n()?, inst)?),
            PolicyName::Alg3 => Plan::mixed(large_inventory_policy(self.cdlp_n()?, inst, self.opts.alg3_delta)?.0),
            PolicyName::Alg5 => Plan::fixed(high_low_calendar(inst, self.opts.high_low)?.calendar),
            PolicyName::Alg6 => Plan::fixed(bid_price_calendar(inst)?.calendar),
            PolicyName::DerandLp => self.derand(lp_sol_policy(self.upper_bound()?, inst)?)?,
            PolicyName::DerandAlg2 => self.derand(nonstationary_threshold_policy(self.cdlp_n()?, inst)?)?,
            PolicyName::DerandAlg3 => {
                self.derand(large_inventory_policy(self.cdlp_n()?, inst, self.opts.alg3_delta)?.0)?
            }
            PolicyName::OptimalDp => Plan::Dynamic(Box::new(optimal_dp(inst, self.opts.mode, self.opts.state_cap)?)),
        })
    }
}
