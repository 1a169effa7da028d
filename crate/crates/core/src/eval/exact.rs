//! Exact expected revenue by forward recursion over the distribution of
//! remaining inventory.
//!
//! States are inventory vectors keyed by their exact bit patterns: fractional
//! levels only arise from subtracting demand atoms, never from rounding.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, DefaultHasher};

use super::simulate::{check_mode, effective_law, Substitution};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::policies::RandomizedCalendar;
use crate::DEFAULT_STATE_CAP;

type Map = HashMap<Vec<u64>, f64, BuildHasherDefault<DefaultHasher>>;

/// Probability distribution over remaining-inventory vectors.
#[derive(Debug, Clone)]
pub struct StateDist {
    states: Map,
}

impl StateDist {
    pub fn initial(inst: &Instance) -> Self {
        let mut states = Map::default();
        states.insert(encode(inst.inventories()), 1.0);
        Self { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.states.values().sum()
    }

    /// `(inventory, probability)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        self.states.iter().map(|(k, p)| (decode(k), *p))
    }

    /// Expected remaining inventory per item.
    pub fn mean_inventory(&self, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n];
        for (inv, p) in self.iter() {
            m.iter_mut().zip(&inv).for_each(|(a, b)| *a += p * b);
        }
        m
    }
}

fn encode(inv: &[f64]) -> Vec<u64> {
    // +0.0 so that -0.0 and 0.0 share a key
    inv.iter().map(|x| (x + 0.0).to_bits()).collect()
}

fn decode(key: &[u64]) -> Vec<f64> {
    key.iter().map(|b| f64::from_bits(*b)).collect()
}

/// Advance one period under the mixture `z_t`; returns the new distribution
/// and the expected revenue earned in the period.
pub fn step(
    inst: &Instance,
    dist: &StateDist,
    mixture: &[(usize, f64)],
    t: usize,
    mode: Substitution,
    cap: usize,
) -> Result<(StateDist, f64)> {
    let mut next = Map::default();
    let mut revenue = 0.0;
    let mut inv = Vec::with_capacity(inst.n_items());
    for (key, &prob) in &dist.states {
        let start = decode(key);
        for &(s, zs) in mixture {
            let ps = prob * zs;
            if ps == 0.0 {
                continue;
            }
            let law = effective_law(inst, t, s, &start, mode)?;
            let mut failed = false;
            law.for_each_outcome(|w, q| {
                if w == 0.0 || failed {
                    return;
                }
                inv.clear();
                inv.extend_from_slice(&start);
                let mut rev = 0.0;
                for (p, &d) in law.products().iter().zip(q) {
                    let sold = d.min(inv[p.item]);
                    inv[p.item] -= sold;
                    rev += inst.prices()[p.price] * sold;
                }
                revenue += ps * w * rev;
                *next.entry(encode(&inv)).or_insert(0.0) += ps * w;
                if next.len() > cap {
                    failed = true;
                }
            });
            if failed {
                return Err(Error::StateCap { cap });
            }
        }
    }
    Ok((StateDist { states: next }, revenue))
}

/// Expected revenue collected from period `from` to the end, starting from `dist`.
pub fn value_from(
    inst: &Instance,
    dist: &StateDist,
    cal: &RandomizedCalendar,
    from: usize,
    mode: Substitution,
    cap: usize,
) -> Result<f64> {
    let mut cur = dist.clone();
    let mut total = 0.0;
    for t in from..cal.horizon() {
        let (next, rev) = step(inst, &cur, cal.period(t), t, mode, cap)?;
        total += rev;
        cur = next;
    }
    Ok(total)
}

/// Exact expected revenue of a calendar with the default state cap.
pub fn exact_expected_revenue(inst: &Instance, cal: &RandomizedCalendar, mode: Substitution) -> Result<f64> {
    exact_expected_revenue_capped(inst, cal, mode, DEFAULT_STATE_CAP)
}

pub fn exact_expected_revenue_capped(
    inst: &Instance,
    cal: &RandomizedCalendar,
    mode: Substitution,
    cap: usize,
) -> Result<f64> {
    if cal.horizon() != inst.horizon() {
        return Err(Error::Invalid("calendar length differs from the horizon".into()));
    }
    check_mode(inst, mode)?;
    value_from(inst, &StateDist::initial(inst), cal, 0, mode, cap)
}
