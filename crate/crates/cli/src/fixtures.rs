//! Bundled instances with machine-readable expected values.
//!
//! Each check names what to measure, the expected number, a tolerance and
//! where the number comes from: a published worked example, an independent
//! derivation (hand recursion, pmf summation, closed form), or a trivial case.

use serde::{Deserialize, Serialize};
use statcal::eval::Substitution;
use statcal::model::build_instance;
use statcal::policies::DeterministicCalendar;
use statcal::{Assortment, Instance, InstanceConfig, Product};

use crate::policy::{PlanOptions, Planner, PolicyName};
use crate::synthetic::{self, Setting};

pub const FIXTURE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// A number printed in a published worked example or table.
    Published,
    /// Re-derived independently of the code under test.
    Derived,
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
}

impl Tolerance {
    pub fn accepts(self, expected: f64, actual: f64) -> bool {
        match self {
            Tolerance::Absolute(e) => (actual - expected).abs() <= e,
            Tolerance::Relative(e) => (actual - expected).abs() <= e * expected.abs(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "kebab-case")]
pub enum Measure {
    /// Optimal value of the upper-bound LP.
    OptLp,
    /// Exact value of a named policy.
    Policy { policy: PolicyName, mode: Substitution },
    /// Exact value of an explicit deterministic calendar.
    Calendar { calendar: Vec<Assortment>, mode: Substitution },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    #[serde(flatten)]
    pub measure: Measure,
    pub expected: f64,
    pub tolerance: Tolerance,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub summary: String,
    pub version: u32,
    pub instance: InstanceConfig,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub label: String,
    pub expected: f64,
    pub actual: Option<f64>,
    pub error: Option<String>,
    pub pass: bool,
}

impl Fixture {
    pub fn build(&self) -> statcal::Result<Instance> {
        build_instance(&self.instance)
    }

    pub fn expected(&self, label: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.label == label).map(|c| c.expected)
    }

    /// Recompute every expected value with the exact evaluator.
    pub fn verify(&self) -> statcal::Result<Vec<CheckOutcome>> {
        let inst = self.build()?;
        let mut out = Vec::with_capacity(self.checks.len());
        for c in &self.checks {
            let actual = measure(&inst, &c.measure);
            let (actual, error) = match actual {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            out.push(CheckOutcome {
                label: c.label.clone(),
                expected: c.expected,
                actual,
                error,
                pass: actual.is_some_and(|v| c.tolerance.accepts(c.expected, v)),
            });
        }
        Ok(out)
    }
}

pub fn measure(inst: &Instance, m: &Measure) -> statcal::Result<f64> {
    match m {
        Measure::OptLp => Planner::new(inst, PlanOptions::default()).opt_lp(),
        Measure::Policy { policy, mode } => {
            let opts = PlanOptions {
                mode: *mode,
                ..PlanOptions::default()
            };
            let planner = Planner::new(inst, opts);
            planner.plan(*policy)?.exact_value(inst, *mode, planner.options().state_cap)
        }
        Measure::Calendar { calendar, mode } => {
            let idx = calendar
                .iter()
                .map(|a| inst.family().require(a))
                .collect::<statcal::Result<Vec<_>>>()?;
            statcal::eval::exact_expected_revenue(inst, &DeterministicCalendar::new(idx).to_randomized(), *mode)
        }
    }
}

fn single(price: usize) -> Assortment {
    Assortment::new(vec![Product::new(0, price)])
}

fn prices_calendar(prices: &[usize]) -> Vec<Assortment> {
    prices.iter().map(|&j| single(j)).collect()
}

fn check(label: &str, measure: Measure, expected: f64, tolerance: Tolerance, provenance: Provenance) -> Check {
    Check {
        label: label.into(),
        measure,
        expected,
        tolerance,
        provenance,
    }
}

fn policy(p: PolicyName) -> Measure {
    Measure::Policy {
        policy: p,
        mode: Substitution::Static,
    }
}

fn calendar(prices: &[usize]) -> Measure {
    Measure::Calendar {
        calendar: prices_calendar(prices),
        mode: Substitution::Static,
    }
}

const EXACT: Tolerance = Tolerance::Absolute(1e-9);

fn pricing(name: &str, prices: &[f64], horizon: usize, b: f64, rows: &[&[f64]], stationary: bool) -> InstanceConfig {
    let demand: Vec<Vec<serde_json::Value>> = rows.iter().map(|r| r.iter().map(|&q| q.into()).collect()).collect();
    serde_json::from_value(serde_json::json!({
        "name": name,
        "items": 1,
        "prices": prices,
        "horizon": horizon,
        "inventories": [b],
        "assortment_family": {"kind": "all-subsets"},
        "choice_model": {"variant": "pricing", "demand": demand},
        "stationary": stationary,
    }))
    .expect("fixture config is well formed")
}

/// Two periods, one unit, p = (8, 1), q = (0.1, 0.9): selling high first wins.
pub fn example_high_to_low() -> Fixture {
    use Provenance::*;
    Fixture {
        name: "example-high-to-low".into(),
        summary: "T=2, b=1, p=(8,1), q=(0.1,0.9); high-then-low beats low-then-high".into(),
        version: FIXTURE_VERSION,
        instance: pricing("example-high-to-low", &[8.0, 1.0], 2, 1.0, &[&[0.1, 0.9]], true),
        checks: vec![
            check("opt_lp", Measure::OptLp, 1.7, EXACT, Published),
            check("high_low", calendar(&[0, 1]), 1.61, EXACT, Published),
            check("low_high", calendar(&[1, 0]), 0.98, EXACT, Published),
            check("alg5", policy(PolicyName::Alg5), 1.61, EXACT, Published),
            check("optimal_dp", policy(PolicyName::OptimalDp), 1.61, EXACT, Derived),
        ],
    }
}

/// Using the LP solution as a calendar can be arbitrarily bad:
/// p = (1/ε², 1), q_1 = (0, 1−ε), q_2 = (ε, ε).
pub fn example_lp_bad(eps: f64) -> Fixture {
    use Provenance::*;
    let p1 = 1.0 / (eps * eps);
    Fixture {
        name: "example-lp-bad".into(),
        summary: format!("T=2, b=1, p=(1/eps^2, 1), eps={eps}; the LP calendar sells the cheap unit first"),
        version: FIXTURE_VERSION,
        instance: pricing("example-lp-bad", &[p1, 1.0], 2, 1.0, &[&[0.0, 1.0 - eps], &[eps, eps]], false),
        checks: vec![
            check("opt_lp", Measure::OptLp, (1.0 - eps) + eps * p1, EXACT, Published),
            check("lp_calendar", policy(PolicyName::LpSol), 2.0 - eps, EXACT, Published),
            // threshold r*/2b discards the cheap price in period 1
            check("alg2", policy(PolicyName::Alg2), eps * p1, EXACT, Derived),
            check("alg6", policy(PolicyName::Alg6), eps * p1, EXACT, Derived),
        ],
    }
}

/// Three periods, two units, H = (2, 1/3), L = (1, 1).
pub fn two_price() -> Fixture {
    use Provenance::*;
    Fixture {
        name: "two-price".into(),
        summary: "T=3, b=2, p=(2,1), q=(1/3,1); the LP splits 1.5 periods each".into(),
        version: FIXTURE_VERSION,
        instance: pricing("two-price", &[2.0, 1.0], 3, 2.0, &[&[1.0 / 3.0, 1.0]], true),
        checks: vec![
            check("opt_lp", Measure::OptLp, 2.5, EXACT, Published),
            check("hhl", calendar(&[0, 0, 1]), 20.0 / 9.0, EXACT, Derived),
            check("hll", calendar(&[0, 1, 1]), 7.0 / 3.0, EXACT, Derived),
            check("alg5", policy(PolicyName::Alg5), 7.0 / 3.0, EXACT, Derived),
            check("myopic", policy(PolicyName::Myopic), 2.0, EXACT, Derived),
        ],
    }
}

/// Single price p = 1 with q = b/T: the stationary guarantee is tight.
pub fn prop3_tight(horizon: usize, b: u32) -> Fixture {
    use Provenance::*;
    let q = b as f64 / horizon as f64;
    let expected = expected_min_binomial(horizon as u64, q, b as u64);
    Fixture {
        name: "prop3-tight".into(),
        summary: format!("single price, T={horizon}, b={b}, q=b/T; revenue E[min(Bin(T,q), b)]"),
        version: FIXTURE_VERSION,
        instance: pricing("prop3-tight", &[1.0], horizon, b as f64, &[&[q]], true),
        checks: vec![
            check("opt_lp", Measure::OptLp, b as f64, EXACT, Published),
            check("alg1", policy(PolicyName::Alg1), expected, EXACT, Derived),
        ],
    }
}

/// E[min(Bin(n, q), b)] by direct pmf summation.
fn expected_min_binomial(n: u64, q: f64, b: u64) -> f64 {
    let mut binom = 1.0;
    let mut e = 0.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        e += k.min(b) as f64 * binom * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32);
    }
    e
}

/// Threshold policy is only half-competitive: p = (1/ε, 1).
pub fn prop4_tight(eps: f64) -> Fixture {
    use Provenance::*;
    Fixture {
        name: "prop4-tight".into(),
        summary: format!("T=2, b=1, p=(1/eps, 1), eps={eps}; every calendar earns 1 against OPT_LP = 2-eps"),
        version: FIXTURE_VERSION,
        instance: pricing("prop4-tight", &[1.0 / eps, 1.0], 2, 1.0, &[&[0.0, 1.0 - eps], &[eps, eps]], false),
        checks: vec![
            check("opt_lp", Measure::OptLp, 2.0 - eps, EXACT, Published),
            check("alg6", policy(PolicyName::Alg6), 1.0, EXACT, Published),
            check("optimal_dp", policy(PolicyName::OptimalDp), 1.0, EXACT, Published),
        ],
    }
}

/// Two prices beat any single price: p = (3, 1), q = (1/100, 1), one unit.
pub fn prop6(horizon: usize) -> Fixture {
    use Provenance::*;
    let t = horizon as f64;
    Fixture {
        name: "prop6".into(),
        summary: format!("T={horizon}, b=1, p=(3,1), q=(1/100,1); each single-price calendar is below the guarantee"),
        version: FIXTURE_VERSION,
        instance: pricing("prop6", &[3.0, 1.0], horizon, 1.0, &[&[0.01, 1.0]], true),
        checks: vec![
            check("opt_lp", Measure::OptLp, (4.0 * t - 3.0) / (2.0 * t - 1.0), EXACT, Published),
            check("high_only", calendar(&vec![0; horizon]), 3.0 * (1.0 - 0.99f64.powi(horizon as i32)), EXACT, Derived),
            check("low_only", calendar(&vec![1; horizon]), 1.0, EXACT, Derived),
        ],
    }
}

/// Ranked-list instance where dynamic substitution breaks the stationary
/// guarantee. Item 0 (one unit) is sold as A at price 1 and as B at price 0;
/// item 1 (one unit) is C at price 0. Lists: C≻B w.p. 1/5, A w.p. 1/5, else none.
pub fn prop1_dynamic_sub() -> Fixture {
    use Provenance::*;
    let cfg: InstanceConfig = serde_json::from_value(serde_json::json!({
        "name": "prop1-dynamic-sub",
        "items": 2,
        "prices": [1.0, 0.0],
        "horizon": 5,
        "inventories": [1.0, 1.0],
        "assortment_family": {
            "kind": "explicit",
            "allow_multi_price": true,
            "assortments": [
                [], [[0,0]], [[0,1]], [[1,1]],
                [[0,0],[0,1]], [[0,0],[1,1]], [[0,1],[1,1]],
                [[0,0],[0,1],[1,1]]
            ]
        },
        "choice_model": {
            "variant": "ranked-list",
            "lists": [
                {"probability": 0.2, "order": [[1,1],[0,1]]},
                {"probability": 0.2, "order": [[0,0]]},
                {"probability": 0.6, "order": []}
            ]
        },
        "stationary": true
    }))
    .expect("fixture config is well formed");
    let abc = Assortment::new(vec![Product::new(0, 0), Product::new(0, 1), Product::new(1, 1)]);
    Fixture {
        name: "prop1-dynamic-sub".into(),
        summary: "T=5, two unit resources, ranked lists; offering everything earns 1959/3125 < (1-1/e) OPT_LP".into(),
        version: FIXTURE_VERSION,
        instance: cfg,
        checks: vec![
            check("opt_lp", Measure::OptLp, 1.0, EXACT, Published),
            check(
                "all_dynamic",
                Measure::Calendar {
                    calendar: vec![abc; 5],
                    mode: Substitution::Dynamic,
                },
                1959.0 / 3125.0,
                EXACT,
                Published,
            ),
        ],
    }
}

/// The three-item benchmark at one grid point, with its published LP bound.
pub fn synthetic_fixture(setting: Setting, alpha: f64, v0: (f64, f64), lp_ub: f64) -> Fixture {
    Fixture {
        name: format!("synthetic-{}", setting.name()),
        summary: format!("three-item mixture-of-MNL benchmark, alpha={alpha}, v0={v0:?}"),
        version: FIXTURE_VERSION,
        instance: synthetic::config(setting, alpha, v0.0, v0.1),
        checks: vec![check("opt_lp", Measure::OptLp, lp_ub, Tolerance::Relative(0.005), Provenance::Published)],
    }
}

pub fn all() -> Vec<Fixture> {
    vec![
        example_high_to_low(),
        example_lp_bad(0.1),
        two_price(),
        prop3_tight(4, 2),
        prop4_tight(0.01),
        prop6(50),
        prop1_dynamic_sub(),
        synthetic_fixture(Setting::Stationary, 1.0, (0.0, 0.0), 6050.0),
        synthetic_fixture(Setting::NonstationarySmall, 0.6, (0.0, 0.0), 3936.0),
    ]
}

pub fn names() -> Vec<String> {
    all().into_iter().map(|f| f.name).collect()
}

pub fn load(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_sum_matches_hand_value() {
        assert!((expected_min_binomial(4, 0.5, 2) - 13.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn names_are_unique() {
        let mut n = names();
        n.sort();
        n.dedup();
        assert_eq!(n.len(), all().len());
    }
}
