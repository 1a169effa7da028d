use std::borrow::Cow;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{replication_rng, seek_period};
use crate::error::{Error, Result};
use crate::model::{check_substitutability, Assortment, DemandLaw, Instance};
use crate::policies::RandomizedCalendar;

/// How customers react to stock-outs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Substitution {
    /// Customers see the planned assortment; choosing a sold-out product yields no sale.
    Static,
    /// Customers choose among in-stock products only.
    Dynamic,
}

impl std::str::FromStr for Substitution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" | "static-substitution" => Ok(Self::Static),
            "dynamic" | "dynamic-substitution" => Ok(Self::Dynamic),
            _ => Err(Error::Invalid(format!("unknown substitution mode {s:?}"))),
        }
    }
}

/// Monte Carlo summary with a 95% normal-approximation half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevenueStats {
    pub mean: f64,
    pub half_width: f64,
    pub std_dev: f64,
    pub replications: u64,
    pub seed: u64,
    pub mode: Substitution,
}

impl RevenueStats {
    pub fn from_samples(samples: &[f64], seed: u64, mode: Substitution) -> Self {
        let n = samples.len();
        let mean = if n == 0 { 0.0 } else { samples.iter().sum::<f64>() / n as f64 };
        let std_dev = if n > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let half_width = if n > 0 { 1.96 * std_dev / (n as f64).sqrt() } else { 0.0 };
        Self {
            mean,
            half_width,
            std_dev,
            replications: n as u64,
            seed,
            mode,
        }
    }
}

/// Reject mode/demand combinations the model does not cover: dynamic
/// substitution needs integral single-purchase demand that is substitutable.
pub fn check_mode(inst: &Instance, mode: Substitution) -> Result<()> {
    if mode == Substitution::Static {
        return Ok(());
    }
    if !inst.is_integral() || !inst.is_single_purchase() {
        return Err(Error::Unsupported {
            what: "dynamic substitution",
            requirement: "integral single-purchase demand",
        });
    }
    let periods = if inst.choice().is_time_invariant() { 1 } else { inst.horizon() };
    for t in 0..periods {
        if !check_substitutability(inst.choice(), inst.family(), t)?.is_empty() {
            return Err(Error::Unsupported {
                what: "dynamic substitution",
                requirement: "a substitutable choice model",
            });
        }
    }
    Ok(())
}

/// Demand law faced in period `t` when `s` is planned and `inv` remains.
pub(crate) fn effective_law<'a>(
    inst: &'a Instance,
    t: usize,
    s: usize,
    inv: &[f64],
    mode: Substitution,
) -> Result<Cow<'a, DemandLaw>> {
    let law = inst.law(t, s);
    if mode == Substitution::Static || law.products().iter().all(|p| inv[p.item] > 0.0) {
        return Ok(Cow::Borrowed(law));
    }
    let in_stock: Assortment = inst.family().get(s).filter(|p| inv[p.item] > 0.0);
    inst.law_of(t, &in_stock)
}

/// Sell `min(inventory, demand)` per product; returns the period revenue.
pub(crate) fn apply_sales(prices: &[f64], law: &DemandLaw, demand: &[f64], inv: &mut [f64], sales: &mut Vec<f64>) -> f64 {
    sales.clear();
    let mut rev = 0.0;
    for (p, &q) in law.products().iter().zip(demand) {
        let sold = q.min(inv[p.item]);
        inv[p.item] -= sold;
        rev += prices[p.price] * sold;
        sales.push(sold);
    }
    rev
}

/// One sample path; `on_period(t, s, law, sales, revenue)` sees every period.
pub(crate) fn run_path(
    inst: &Instance,
    cal: &RandomizedCalendar,
    mode: Substitution,
    seed: u64,
    rep: u64,
    mut on_period: impl FnMut(usize, usize, &DemandLaw, &[f64], f64),
) -> Result<f64> {
    let mut rng = replication_rng(seed, rep);
    let mut inv = inst.inventories().to_vec();
    let (mut demand, mut sales) = (Vec::new(), Vec::new());
    let mut total = 0.0;
    for t in 0..cal.horizon() {
        seek_period(&mut rng, t);
        let s = cal.pick(t, &mut rng);
        let law = effective_law(inst, t, s, &inv, mode)?;
        law.sample(&mut rng, &mut demand);
        let rev = apply_sales(inst.prices(), &law, &demand, &mut inv, &mut sales);
        on_period(t, s, &law, &sales, rev);
        total += rev;
    }
    Ok(total)
}

fn check_calendar(inst: &Instance, cal: &RandomizedCalendar) -> Result<()> {
    if cal.horizon() != inst.horizon() {
        return Err(Error::Invalid(format!(
            "calendar has {} periods, instance horizon is {}",
            cal.horizon(),
            inst.horizon()
        )));
    }
    if cal.periods().iter().flatten().any(|&(s, _)| s >= inst.family().len()) {
        return Err(Error::Invalid("calendar references an assortment outside the family".into()));
    }
    Ok(())
}

/// Per-replication revenues for replications `0..reps`, in replication order.
pub fn simulate_revenues(
    inst: &Instance,
    cal: &RandomizedCalendar,
    mode: Substitution,
    reps: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_calendar(inst, cal)?;
    check_mode(inst, mode)?;
    sample_revenues(inst, cal, mode, reps, seed)
}

/// As [`simulate_revenues`] without the up-front validation.
pub(crate) fn sample_revenues(
    inst: &Instance,
    cal: &RandomizedCalendar,
    mode: Substitution,
    reps: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..reps)
        .into_par_iter()
        .map(|r| run_path(inst, cal, mode, seed, r, |_, _, _, _, _| {}))
        .collect()
}

/// Monte Carlo estimate of a calendar's expected revenue. Deterministic for a
/// fixed `(seed, reps)` regardless of the thread count.
pub fn simulate(
    inst: &Instance,
    cal: &RandomizedCalendar,
    mode: Substitution,
    reps: u64,
    seed: u64,
) -> Result<RevenueStats> {
    let samples = simulate_revenues(inst, cal, mode, reps, seed)?;
    Ok(RevenueStats::from_samples(&samples, seed, mode))
}

/// Sequential simulation that also writes one CSV row per (replication, period).
pub fn simulate_with_trace<W: Write>(
    inst: &Instance,
    cal: &RandomizedCalendar,
    mode: Substitution,
    reps: u64,
    seed: u64,
    out: W,
) -> Result<RevenueStats> {
    check_calendar(inst, cal)?;
    check_mode(inst, mode)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replication", "period", "assortment", "sales", "revenue"])?;
    let mut samples = Vec::with_capacity(reps as usize);
    for r in 0..reps {
        let mut rows = Vec::new();
        let total = run_path(inst, cal, mode, seed, r, |t, s, law, sales, rev| {
            let sold: Vec<String> = law
                .products()
                .iter()
                .zip(sales)
                .map(|(p, q)| format!("{}:{}={}", p.item, p.price, q))
                .collect();
            rows.push([
                r.to_string(),
                t.to_string(),
                inst.family().get(s).to_string(),
                sold.join(";"),
                rev.to_string(),
            ]);
        })?;
        for row in rows {
            w.write_record(row)?;
        }
        samples.push(total);
    }
    w.flush()?;
    Ok(RevenueStats::from_samples(&samples, seed, mode))
}
