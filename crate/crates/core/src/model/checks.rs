//! Checkers for the structural demand assumptions the guarantees rely on.

use serde::Serialize;

use super::demand::DemandDistribution;
use super::family::{Assortment, AssortmentFamily, Product};
use super::instance::Instance;
use super::choice::ChoiceModel;
use crate::error::{Error, Result};

const TOL: f64 = 1e-12;

/// A sub-assortment that lowers some product's purchase probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubstitutionViolation {
    pub period: usize,
    pub assortment: Assortment,
    pub subset: Assortment,
    pub product: Product,
    pub q_assortment: f64,
    pub q_subset: f64,
}

/// Substitutability: removing products never lowers the purchase probability
/// of a remaining product, i.e. q_t(i,j,S') >= q_t(i,j,S) for S' ⊆ S.
pub fn check_substitutability(
    model: &ChoiceModel,
    family: &AssortmentFamily,
    t: usize,
) -> Result<Vec<SubstitutionViolation>> {
    let mut out = Vec::new();
    for s in family.iter() {
        if s.len() > 20 {
            return Err(Error::Invalid(format!("assortment {s} too large to enumerate subsets")));
        }
        let law = model.law(t, s)?;
        for mask in 1..(1u64 << s.len()) - 1 {
            let sub = s.subset(mask);
            let sub_law = model.law(t, &sub)?;
            for (p, &q_sub) in sub_law.products().iter().zip(sub_law.means()) {
                let q = law.mean_of(p);
                if q_sub < q - TOL {
                    out.push(SubstitutionViolation {
                        period: t,
                        assortment: s.clone(),
                        subset: sub.clone(),
                        product: *p,
                        q_assortment: q,
                        q_subset: q_sub,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Pointwise CDF comparison of two finite-support laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CdfOrder {
    /// F1 >= F2 everywhere (the first law is stochastically smaller).
    FirstDominates,
    /// F2 >= F1 everywhere.
    SecondDominates,
    Equal,
    Incomparable,
}

impl CdfOrder {
    pub fn is_comparable(self) -> bool {
        self != CdfOrder::Incomparable
    }
}

pub fn check_cdf_dominance(d1: &DemandDistribution, d2: &DemandDistribution) -> CdfOrder {
    let mut points: Vec<f64> = d1.atoms().iter().chain(d2.atoms()).map(|a| a.0).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let (mut above, mut below) = (false, false);
    for x in points {
        let diff = d1.cdf(x) - d2.cdf(x);
        above |= diff > TOL;
        below |= diff < -TOL;
    }
    match (above, below) {
        (false, false) => CdfOrder::Equal,
        (true, false) => CdfOrder::FirstDominates,
        (false, true) => CdfOrder::SecondDominates,
        (true, true) => CdfOrder::Incomparable,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationCheck {
    pub passed: bool,
    /// Grid point with the smallest margin.
    pub worst_c: f64,
    /// min over c of ratio_high(c) - ratio_low(c).
    pub worst_margin: f64,
}

/// Supports of both laws plus {k/100}.
pub fn default_c_grid(d1: &DemandDistribution, d2: &DemandDistribution) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    grid.extend(d1.atoms().iter().chain(d2.atoms()).map(|a| a.0));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Truncation ratio: E[min(c,Q_hi)]/E[Q_hi] >= E[min(c,Q_lo)]/E[Q_lo] on the grid,
/// where `d_high` is the demand at the higher price.
pub fn check_truncation_ratio(
    d_high: &DemandDistribution,
    d_low: &DemandDistribution,
    c_grid: &[f64],
) -> Result<TruncationCheck> {
    let (mh, ml) = (d_high.mean(), d_low.mean());
    if mh <= 0.0 || ml <= 0.0 {
        return Err(Error::ZeroMean);
    }
    let mut worst = (f64::INFINITY, 0.0);
    for &c in c_grid {
        let margin = d_high.expected_min(c) / mh - d_low.expected_min(c) / ml;
        if margin < worst.0 {
            worst = (margin, c);
        }
    }
    Ok(TruncationCheck {
        passed: worst.0 >= -TOL,
        worst_c: worst.1,
        worst_margin: worst.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationViolation {
    pub period: usize,
    pub item: usize,
    pub high: (usize, Assortment),
    pub low: (usize, Assortment),
    /// Both products come from the same assortment.
    pub same_assortment: bool,
    pub worst_c: f64,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceViolation {
    pub period: usize,
    pub prices: (usize, usize),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AssumptionReport {
    pub substitutability: Vec<SubstitutionViolation>,
    pub truncation: Vec<TruncationViolation>,
    /// Product pairs skipped because one side has zero mean demand.
    pub truncation_skipped: usize,
    /// Incomparable price pairs (single-item instances only).
    pub price_dominance: Vec<DominanceViolation>,
    pub single_item: bool,
}

impl AssumptionReport {
    pub fn substitutable(&self) -> bool {
        self.substitutability.is_empty()
    }

    pub fn truncation_ok(&self) -> bool {
        self.truncation.is_empty()
    }

    pub fn dominance_ok(&self) -> bool {
        self.single_item && self.price_dominance.is_empty()
    }
}

/// Run every checker over all periods (only the first when stationary).
pub fn check_assumptions(inst: &Instance) -> Result<AssumptionReport> {
    let periods = if inst.choice().is_time_invariant() { 1 } else { inst.horizon() };
    let mut report = AssumptionReport {
        single_item: inst.n_items() == 1,
        ..Default::default()
    };
    let fam = inst.family();
    for t in 0..periods {
        report
            .substitutability
            .extend(check_substitutability(inst.choice(), fam, t)?);

        // every (S, (i,j)) marginal with positive mean, grouped by item
        let mut marginals: Vec<(usize, usize, usize, DemandDistribution)> = Vec::new();
        for s in 0..fam.len() {
            let law = inst.law(t, s);
            for (k, p) in law.products().iter().enumerate() {
                marginals.push((p.item, p.price, s, law.marginal(k)));
            }
        }
        for (ih, jh, sh, dh) in &marginals {
            for (il, jl, sl, dl) in &marginals {
                if ih != il || inst.prices()[*jh] <= inst.prices()[*jl] {
                    continue;
                }
                match check_truncation_ratio(dh, dl, &default_c_grid(dh, dl)) {
                    Ok(c) if !c.passed => report.truncation.push(TruncationViolation {
                        period: t,
                        item: *ih,
                        high: (*jh, fam.get(*sh).clone()),
                        low: (*jl, fam.get(*sl).clone()),
                        same_assortment: sh == sl,
                        worst_c: c.worst_c,
                        worst_margin: c.worst_margin,
                    }),
                    Ok(_) => {}
                    Err(Error::ZeroMean) => report.truncation_skipped += 1,
                    Err(e) => return Err(e),
                }
            }
        }

        if report.single_item {
            let dists: Vec<Option<DemandDistribution>> = (0..inst.n_prices())
                .map(|j| fam.singleton(0, j).map(|s| inst.law(t, s).marginal(0)))
                .collect();
            for a in 0..dists.len() {
                for b in a + 1..dists.len() {
                    if let (Some(da), Some(db)) = (&dists[a], &dists[b]) {
                        if !check_cdf_dominance(da, db).is_comparable() {
                            report.price_dominance.push(DominanceViolation { period: t, prices: (a, b) });
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}
