use log::debug;
use serde::Serialize;

use super::bounds::{reservation_delta, warn_small_inventory};
use super::calendar::{DeterministicCalendar, RandomizedCalendar};
use crate::error::{Error, Result};
use crate::eval::{exact_expected_revenue_capped, simulate, Substitution};
use crate::lp::{build_dlp_n, build_dlp_s, item_contributions, two_price_support, LpKind, LpSolution, TwoPriceSupport};
use crate::model::{check_assumptions, Instance};
use crate::{DEFAULT_STATE_CAP, ZETA};

/// Use the LP solution directly as the per-period assortment distribution.
pub fn lp_sol_policy(solution: &LpSolution<f64>, inst: &Instance) -> Result<RandomizedCalendar> {
    Ok(RandomizedCalendar::from_weights(&solution.assortment_weights(inst)?))
}

/// Offer S with probability x*(S) in every period.
pub fn stationary_randomized_policy(solution: &LpSolution<f64>, inst: &Instance) -> Result<RandomizedCalendar> {
    if solution.kind != LpKind::CdlpS {
        return Err(Error::Invalid("stationary policy needs a CDLP-S solution".into()));
    }
    lp_sol_policy(solution, inst)
}

/// Threshold (discarding) policy: each planned assortment S is replaced by
/// D(S) = {(i,j) ∈ S : p_j > r*_i / (2 b_i)}; masses of collapsing
/// assortments are merged.
pub fn nonstationary_threshold_policy(solution: &LpSolution<f64>, inst: &Instance) -> Result<RandomizedCalendar> {
    let thresholds = discard_thresholds(solution, inst)?;
    let w = solution.assortment_weights(inst)?;
    let fam = inst.family();
    let mut out = vec![vec![0.0; fam.len()]; inst.horizon()];
    for (t, row) in w.iter().enumerate() {
        for (s, &x) in row.iter().enumerate() {
            if x <= ZETA {
                continue;
            }
            let kept = fam.get(s).filter(|p| inst.prices()[p.price] > thresholds[p.item]);
            out[t][fam.require(&kept)?] += x;
        }
    }
    Ok(RandomizedCalendar::from_weights(&out))
}

/// r*_i / (2 b_i) per item.
pub fn discard_thresholds(solution: &LpSolution<f64>, inst: &Instance) -> Result<Vec<f64>> {
    let r = item_contributions(solution, inst)?;
    Ok(r.iter().zip(inst.inventories()).map(|(r, b)| r / (2.0 * b)).collect())
}

/// Large-inventory policy: scale the LP solution by (1 − δ) and offer ∅ with
/// the remaining probability. `delta` overrides √(3 ln b_min / b_min).
pub fn large_inventory_policy(
    solution: &LpSolution<f64>,
    inst: &Instance,
    delta: Option<f64>,
) -> Result<(RandomizedCalendar, f64)> {
    let delta = match delta {
        Some(d) if (0.0..=1.0).contains(&d) => d,
        Some(d) => return Err(Error::Invalid(format!("reservation probability {d} outside [0,1]"))),
        None => {
            warn_small_inventory(inst.b_min());
            reservation_delta(inst.b_min())
        }
    };
    let mut w = solution.assortment_weights(inst)?;
    for row in &mut w {
        let mut moved = 0.0;
        for x in row.iter_mut().skip(1) {
            let keep = (1.0 - delta) * *x;
            moved += *x - keep;
            *x = keep;
        }
        row[0] += moved;
    }
    Ok((RandomizedCalendar::from_weights(&w), delta))
}

#[derive(Debug, Clone, Copy)]
pub struct HighLowOptions {
    /// Build even if the price demand CDFs are not pairwise comparable.
    pub ignore_dominance: bool,
    pub state_cap: usize,
    /// Fallback when exact evaluation exceeds the state cap.
    pub sim_reps: u64,
    pub seed: u64,
}

impl Default for HighLowOptions {
    fn default() -> Self {
        Self {
            ignore_dominance: false,
            state_cap: DEFAULT_STATE_CAP,
            sim_reps: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HighLowPlan {
    #[serde(skip)]
    pub calendar: DeterministicCalendar,
    pub support: TwoPriceSupport,
    pub opt_lp: f64,
    /// T x_H / (x_H + x_L).
    pub s_high: f64,
    /// Number of leading high-price periods actually used.
    pub split: usize,
    /// Evaluated `(split, value)` candidates.
    pub candidates: Vec<(usize, f64)>,
    pub exact: bool,
}

/// High-then-low calendar from the two-price DLP-S support; both roundings of
/// s_H are evaluated and the better kept (ties to the floor).
pub fn high_low_calendar(inst: &Instance, opts: HighLowOptions) -> Result<HighLowPlan> {
    inst.require_single_item("high-low calendar")?;
    if !opts.ignore_dominance && !check_assumptions(inst)?.price_dominance.is_empty() {
        return Err(Error::Unsupported {
            what: "high-low calendar",
            requirement: "pairwise comparable price demand CDFs (or the override)",
        });
    }
    let sol = build_dlp_s(inst)?.solve()?;
    let support = two_price_support(&sol)?;
    let horizon = inst.horizon();
    let fam = inst.family();
    if support.is_empty() {
        return Ok(HighLowPlan {
            calendar: DeterministicCalendar::new(vec![0; horizon]),
            support,
            opt_lp: sol.objective,
            s_high: 0.0,
            split: 0,
            candidates: vec![(0, 0.0)],
            exact: true,
        });
    }
    let s_high = horizon as f64 * support.x_high / (support.x_high + support.x_low);
    let hi = fam.singleton(0, support.high).ok_or_else(|| Error::NotInFamily(format!("{{0:{}}}", support.high)))?;
    let lo = fam.singleton(0, support.low).ok_or_else(|| Error::NotInFamily(format!("{{0:{}}}", support.low)))?;
    let build = |k: usize| DeterministicCalendar::new((0..horizon).map(|t| if t < k { hi } else { lo }).collect());
    let floor = (s_high + 1e-9).floor().min(horizon as f64) as usize;
    let ceil = (s_high - 1e-9).ceil().clamp(0.0, horizon as f64) as usize;
    let mut splits = vec![floor];
    if ceil != floor {
        splits.push(ceil);
    }
    let exact_values: Result<Vec<f64>> = splits
        .iter()
        .map(|&k| exact_expected_revenue_capped(inst, &build(k).to_randomized(), Substitution::Static, opts.state_cap))
        .collect();
    let (values, exact) = match exact_values {
        Ok(v) => (v, true),
        Err(Error::StateCap { .. }) => {
            // paired simulation: both splits share the seed
            let v = splits
                .iter()
                .map(|&k| Ok(simulate(inst, &build(k).to_randomized(), Substitution::Static, opts.sim_reps, opts.seed)?.mean))
                .collect::<Result<Vec<f64>>>()?;
            (v, false)
        }
        Err(e) => return Err(e),
    };
    let candidates: Vec<(usize, f64)> = splits.iter().copied().zip(values).collect();
    let best = candidates
        .iter()
        .copied()
        .fold(None::<(usize, f64)>, |acc, c| match acc {
            Some(a) if c.1 <= a.1 + 1e-12 => Some(a),
            _ => Some(c),
        })
        .expect("at least one split");
    debug!("high-low: s_H = {s_high:.4}, candidates {candidates:?}, chose {}", best.0);
    Ok(HighLowPlan {
        calendar: build(best.0),
        support,
        opt_lp: sol.objective,
        s_high,
        split: best.0,
        candidates,
        exact,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BidPricePlan {
    #[serde(skip)]
    pub calendar: DeterministicCalendar,
    pub opt_lp: f64,
    /// r* / (2b).
    pub threshold: f64,
}

/// Per period, argmax over prices of (p_j − r*/(2b)) q_tj, with "offer
/// nothing" (value 0) considered last; ties go to the higher price.
pub fn bid_price_calendar(inst: &Instance) -> Result<BidPricePlan> {
    inst.require_single_item("bid-price calendar")?;
    let sol = build_dlp_n(inst)?.solve()?;
    let threshold = sol.objective / (2.0 * inst.inventories()[0]);
    let fam = inst.family();
    let mut cal = Vec::with_capacity(inst.horizon());
    for t in 0..inst.horizon() {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..inst.n_prices() {
            let Some(s) = fam.singleton(0, j) else { continue };
            let v = (inst.prices()[j] - threshold) * inst.law(t, s).means()[0];
            if best.is_none_or(|(_, b)| v > b + 1e-12) {
                best = Some((s, v));
            }
        }
        let pick = match best {
            Some((s, v)) if v >= -1e-12 => s,
            _ => 0,
        };
        cal.push(pick);
    }
    Ok(BidPricePlan {
        calendar: DeterministicCalendar::new(cal),
        opt_lp: sol.objective,
        threshold,
    })
}

/// Per period, the assortment with the highest expected revenue ignoring
/// inventory; ties go to the first assortment in canonical order.
pub fn myopic_policy(inst: &Instance) -> DeterministicCalendar {
    let cal = (0..inst.horizon())
        .map(|t| {
            let mut best = (f64::NEG_INFINITY, 0usize);
            for s in 0..inst.family().len() {
                let r = inst.revenue_rate(t, s);
                if r > best.0 + 1e-9 {
                    best = (r, s);
                }
            }
            best.1
        })
        .collect();
    DeterministicCalendar::new(cal)
}

