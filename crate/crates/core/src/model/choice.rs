use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::demand::{DemandDistribution, DemandKind, DemandSpec};
use super::family::{Assortment, Product};
use crate::error::{invalid, Result};

const SUM_TOL: f64 = 1e-12;

/// Joint demand law over the products of one assortment in one period.
#[derive(Debug, Clone)]
pub struct DemandLaw {
    products: Vec<Product>,
    means: Vec<f64>,
    joint: Joint,
}

#[derive(Debug, Clone)]
enum Joint {
    /// Finite list of `(probability, quantity per product)`.
    Outcomes(Vec<(f64, Vec<f64>)>),
    /// Independent per-product marginals.
    Independent(Vec<DemandDistribution>),
}

impl DemandLaw {
    pub fn empty() -> Self {
        Self {
            products: Vec::new(),
            means: Vec::new(),
            joint: Joint::Outcomes(vec![(1.0, Vec::new())]),
        }
    }

    fn from_outcomes(products: Vec<Product>, outcomes: Vec<(f64, Vec<f64>)>) -> Self {
        let mut means = vec![0.0; products.len()];
        for (p, q) in &outcomes {
            for (m, v) in means.iter_mut().zip(q) {
                *m += p * v;
            }
        }
        let outcomes = outcomes.into_iter().filter(|o| o.0 > 0.0).collect();
        Self {
            products,
            means,
            joint: Joint::Outcomes(outcomes),
        }
    }

    fn independent(products: Vec<Product>, dists: Vec<DemandDistribution>) -> Self {
        let means = dists.iter().map(|d| d.mean()).collect();
        Self {
            products,
            means,
            joint: Joint::Independent(dists),
        }
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    /// Mean demand per product, aligned with [`products`](Self::products).
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mean_of(&self, p: &Product) -> f64 {
        self.products.iter().position(|x| x == p).map_or(0.0, |k| self.means[k])
    }

    /// Expected revenue Σ p_j q(i,j,S) ignoring inventory.
    pub fn revenue(&self, prices: &[f64]) -> f64 {
        self.products.iter().zip(&self.means).map(|(p, q)| prices[p.price] * q).sum()
    }

    /// Σ_j q(i,j,S): expected units of `item` consumed.
    pub fn item_usage(&self, item: usize) -> f64 {
        self.products
            .iter()
            .zip(&self.means)
            .filter(|(p, _)| p.item == item)
            .map(|(_, q)| q)
            .sum()
    }

    /// Every outcome is "at most one unit of one product".
    pub fn is_single_purchase(&self) -> bool {
        match &self.joint {
            Joint::Outcomes(o) => o.iter().all(|(_, q)| {
                q.iter().all(|&v| v == 0.0 || v == 1.0) && q.iter().filter(|&&v| v > 0.0).count() <= 1
            }),
            Joint::Independent(d) => d.iter().filter(|d| d.mean() > 0.0).count() <= 1 && d.iter().all(|d| d.is_integral()),
        }
    }

    pub fn is_integral(&self) -> bool {
        match &self.joint {
            Joint::Outcomes(o) => o.iter().all(|(_, q)| q.iter().all(|&v| v == 0.0 || v == 1.0)),
            Joint::Independent(d) => d.iter().all(|d| d.is_integral()),
        }
    }

    /// Marginal distribution of product `k`.
    pub fn marginal(&self, k: usize) -> DemandDistribution {
        match &self.joint {
            Joint::Independent(d) => d[k].clone(),
            Joint::Outcomes(o) => {
                let atoms = o.iter().map(|(p, q)| (q[k], *p)).collect::<Vec<_>>();
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                let atoms = atoms.into_iter().map(|(v, p)| (v, p / total)).collect();
                DemandDistribution::from_kind(DemandKind::FiniteSupport { atoms })
                    .expect("marginal of a valid joint law")
            }
        }
    }

    /// Visit every joint outcome with its probability.
    pub fn for_each_outcome(&self, mut f: impl FnMut(f64, &[f64])) {
        match &self.joint {
            Joint::Outcomes(o) => o.iter().for_each(|(p, q)| f(*p, q)),
            Joint::Independent(d) => {
                let mut buf = vec![0.0; d.len()];
                visit_product(d, 0, 1.0, &mut buf, &mut f);
            }
        }
    }

    pub fn outcome_count(&self) -> usize {
        match &self.joint {
            Joint::Outcomes(o) => o.len(),
            Joint::Independent(d) => d.iter().map(|d| d.atoms().len()).product(),
        }
    }

    /// Draw one demand vector into `out` (resized to the product count).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        match &self.joint {
            Joint::Outcomes(o) => {
                if o.len() == 1 {
                    out.extend_from_slice(&o[0].1);
                    return;
                }
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let pick = o
                    .iter()
                    .find(|(p, _)| {
                        acc += p;
                        u < acc
                    })
                    .unwrap_or_else(|| o.last().expect("non-empty outcomes"));
                out.extend_from_slice(&pick.1);
            }
            Joint::Independent(d) => {
                for dist in d {
                    let u: f64 = rng.random();
                    out.push(dist.quantile(u));
                }
            }
        }
    }
}

fn visit_product(
    d: &[DemandDistribution],
    k: usize,
    prob: f64,
    buf: &mut Vec<f64>,
    f: &mut impl FnMut(f64, &[f64]),
) {
    if k == d.len() {
        f(prob, buf);
        return;
    }
    for &(v, p) in d[k].atoms() {
        buf[k] = v;
        visit_product(d, k + 1, prob * p, buf, f);
    }
}

/// Mixture of two MNL segments ("low" and "high" willingness to pay), each
/// present in a period with an independent Bernoulli arrival. Item `i` is
/// attractive to the low segment only at price `low_price[i]` and to the high
/// segment only at `high_price[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureMnl {
    pub v_low: Vec<f64>,
    pub v_high: Vec<f64>,
    pub v0_low: f64,
    pub v0_high: f64,
    pub low_price: Vec<usize>,
    pub high_price: Vec<usize>,
    /// E[A^L_t]: one value (all periods) or one per period.
    pub mean_low: Vec<f64>,
    pub mean_high: Vec<f64>,
}

impl MixtureMnl {
    fn arrival(v: &[f64], t: usize) -> f64 {
        if v.len() == 1 {
            v[0]
        } else {
            v[t]
        }
    }

    /// Per-product share vectors for the low and high segments.
    pub fn shares(&self, s: &Assortment) -> (Vec<f64>, Vec<f64>) {
        let prods = s.products();
        let is_low = |p: &Product| p.price == self.low_price[p.item];
        let is_high = |p: &Product| p.price == self.high_price[p.item];
        let sum_low: f64 = self.v0_low + prods.iter().filter(|p| is_low(p)).map(|p| self.v_low[p.item]).sum::<f64>();
        let sum_high: f64 =
            self.v0_high + prods.iter().filter(|p| is_high(p)).map(|p| self.v_high[p.item]).sum::<f64>();
        let share = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
        let low = prods
            .iter()
            .map(|p| if is_low(p) { share(self.v_low[p.item], sum_low) } else { 0.0 })
            .collect();
        let high = prods
            .iter()
            .map(|p| if is_high(p) { share(self.v_high[p.item], sum_high) } else { 0.0 })
            .collect();
        (low, high)
    }

    fn law(&self, t: usize, s: &Assortment) -> DemandLaw {
        let (low, high) = self.shares(s);
        let el = Self::arrival(&self.mean_low, t);
        let eh = Self::arrival(&self.mean_high, t);
        let mut outcomes = Vec::with_capacity(4);
        for (al, pl) in [(0.0, 1.0 - el), (1.0, el)] {
            for (ah, ph) in [(0.0, 1.0 - eh), (1.0, eh)] {
                let q = low.iter().zip(&high).map(|(l, h)| al * l + ah * h).collect();
                outcomes.push((pl * ph, q));
            }
        }
        DemandLaw::from_outcomes(s.products().to_vec(), outcomes)
    }

    fn validate(&self, n_items: usize, n_prices: usize, horizon: usize) -> Result<()> {
        for (name, v) in [("v_low", &self.v_low), ("v_high", &self.v_high)] {
            if v.len() != n_items || v.iter().any(|x| !(*x >= 0.0)) {
                return Err(invalid(format!("{name} must hold {n_items} non-negative weights")));
            }
        }
        if !(self.v0_low >= 0.0 && self.v0_high >= 0.0) {
            return Err(invalid("no-purchase weights must be non-negative"));
        }
        for (name, v) in [("low_price", &self.low_price), ("high_price", &self.high_price)] {
            if v.len() != n_items || v.iter().any(|&j| j >= n_prices) {
                return Err(invalid(format!("{name} must hold {n_items} valid price indices")));
            }
        }
        for (name, v) in [("mean_low", &self.mean_low), ("mean_high", &self.mean_high)] {
            if !(v.len() == 1 || v.len() == horizon) || v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(invalid(format!("{name} needs 1 or {horizon} probabilities")));
            }
        }
        Ok(())
    }
}

/// One preference list: the customer buys the first listed product that is
/// offered, or nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPreference {
    pub probability: f64,
    pub order: Vec<Product>,
}

/// Per-product demand inside one table entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDemand {
    pub product: Product,
    pub distribution: DemandSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    /// Period the entry applies to; omitted means every period.
    #[serde(default)]
    pub period: Option<usize>,
    pub assortment: Assortment,
    pub demand: Vec<ProductDemand>,
}

/// Choice model as written in an instance file (tagged by `variant`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum ChoiceConfig {
    /// Single item: `demand[t][j]` is the demand law when price `j` is
    /// offered in period `t`. One row means every period.
    Pricing { demand: Vec<Vec<DemandSpec>> },
    Table { entries: Vec<TableEntry> },
    MixtureMnl(MixtureMnl),
    RankedList { lists: Vec<RankedPreference> },
}

impl ChoiceConfig {
    /// Rewrite price indices through `map` (old index -> new index).
    pub(crate) fn remap_prices(&self, map: &[usize]) -> ChoiceConfig {
        let mp = |p: &Product| Product::new(p.item, map[p.price]);
        match self {
            ChoiceConfig::Pricing { demand } => {
                let demand = demand
                    .iter()
                    .map(|row| {
                        let mut out = row.clone();
                        for (old, spec) in row.iter().enumerate() {
                            if let Some(&new) = map.get(old) {
                                if new < out.len() {
                                    out[new] = spec.clone();
                                }
                            }
                        }
                        out
                    })
                    .collect();
                ChoiceConfig::Pricing { demand }
            }
            ChoiceConfig::Table { entries } => ChoiceConfig::Table {
                entries: entries
                    .iter()
                    .map(|e| TableEntry {
                        period: e.period,
                        assortment: Assortment::new(e.assortment.products().iter().map(mp).collect()),
                        demand: e
                            .demand
                            .iter()
                            .map(|d| ProductDemand {
                                product: mp(&d.product),
                                distribution: d.distribution.clone(),
                            })
                            .collect(),
                    })
                    .collect(),
            },
            ChoiceConfig::MixtureMnl(m) => {
                let mut m = m.clone();
                m.low_price = m.low_price.iter().map(|&j| map.get(j).copied().unwrap_or(j)).collect();
                m.high_price = m.high_price.iter().map(|&j| map.get(j).copied().unwrap_or(j)).collect();
                ChoiceConfig::MixtureMnl(m)
            }
            ChoiceConfig::RankedList { lists } => ChoiceConfig::RankedList {
                lists: lists
                    .iter()
                    .map(|l| RankedPreference {
                        probability: l.probability,
                        order: l.order.iter().map(mp).collect(),
                    })
                    .collect(),
            },
        }
    }
}

type TableKey = (Option<usize>, Assortment);

/// Per-period demand law: marginal means q_t(i,j,S) plus a joint sampler.
#[derive(Debug, Clone)]
pub enum ChoiceModel {
    Table {
        entries: HashMap<TableKey, Vec<(Product, DemandDistribution)>>,
    },
    MixtureMnl(MixtureMnl),
    RankedList { lists: Vec<(f64, Vec<Product>)> },
}

impl ChoiceModel {
    pub fn from_config(cfg: &ChoiceConfig, n_items: usize, n_prices: usize, horizon: usize) -> Result<Self> {
        match cfg {
            ChoiceConfig::Pricing { demand } => {
                if n_items != 1 {
                    return Err(invalid("pricing variant needs exactly one item"));
                }
                if !(demand.len() == 1 || demand.len() == horizon) {
                    return Err(invalid(format!("pricing demand needs 1 or {horizon} rows")));
                }
                let mut entries = HashMap::new();
                for (t, row) in demand.iter().enumerate() {
                    if row.len() != n_prices {
                        return Err(invalid(format!("pricing row {t} needs {n_prices} entries")));
                    }
                    let period = if demand.len() == 1 { None } else { Some(t) };
                    for (j, spec) in row.iter().enumerate() {
                        let p = Product::new(0, j);
                        let d = DemandDistribution::from_spec(spec)?;
                        entries.insert((period, Assortment::new(vec![p])), vec![(p, d)]);
                    }
                }
                Ok(ChoiceModel::Table { entries })
            }
            ChoiceConfig::Table { entries } => {
                let mut map = HashMap::new();
                for e in entries {
                    if e.period.is_some_and(|t| t >= horizon) {
                        return Err(invalid(format!("table entry period {:?} beyond horizon", e.period)));
                    }
                    let mut row = Vec::with_capacity(e.demand.len());
                    for d in &e.demand {
                        if !e.assortment.contains(&d.product) {
                            return Err(invalid(format!(
                                "table entry for {} lists product outside the assortment",
                                e.assortment
                            )));
                        }
                        row.push((d.product, DemandDistribution::from_spec(&d.distribution)?));
                    }
                    if map.insert((e.period, e.assortment.clone()), row).is_some() {
                        return Err(invalid(format!("duplicate table entry for {}", e.assortment)));
                    }
                }
                Ok(ChoiceModel::Table { entries: map })
            }
            ChoiceConfig::MixtureMnl(m) => {
                m.validate(n_items, n_prices, horizon)?;
                Ok(ChoiceModel::MixtureMnl(m.clone()))
            }
            ChoiceConfig::RankedList { lists } => {
                let total: f64 = lists.iter().map(|l| l.probability).sum();
                if (total - 1.0).abs() > SUM_TOL || lists.iter().any(|l| l.probability < 0.0) {
                    return Err(invalid(format!("ranked-list probabilities sum to {total}, not 1")));
                }
                for l in lists {
                    if let Some(p) = l.order.iter().find(|p| p.item >= n_items || p.price >= n_prices) {
                        return Err(invalid(format!("ranked list mentions unknown product ({}, {})", p.item, p.price)));
                    }
                }
                Ok(ChoiceModel::RankedList {
                    lists: lists.iter().map(|l| (l.probability, l.order.clone())).collect(),
                })
            }
        }
    }

    /// Demand law for assortment `s` in period `t`.
    pub fn law(&self, t: usize, s: &Assortment) -> Result<DemandLaw> {
        if s.is_empty() {
            return Ok(DemandLaw::empty());
        }
        match self {
            ChoiceModel::Table { entries } => {
                let row = entries
                    .get(&(Some(t), s.clone()))
                    .or_else(|| entries.get(&(None, s.clone())))
                    .ok_or_else(|| invalid(format!("table has no entry for {s} in period {t}")))?;
                let mut dists = Vec::with_capacity(s.len());
                for p in s.products() {
                    let d = match row.iter().find(|(q, _)| q == p) {
                        Some((_, d)) => d.clone(),
                        None => DemandDistribution::bernoulli(0.0)?,
                    };
                    dists.push(d);
                }
                let all_bernoulli = dists.iter().all(|d| d.is_integral());
                let total: f64 = dists.iter().map(|d| d.mean()).sum();
                if all_bernoulli && total <= 1.0 + SUM_TOL {
                    // Mutually exclusive purchases: one customer buys at most one unit.
                    let k = s.len();
                    let mut outcomes = vec![(1.0 - total.min(1.0), vec![0.0; k])];
                    for (idx, d) in dists.iter().enumerate() {
                        let mut q = vec![0.0; k];
                        q[idx] = 1.0;
                        outcomes.push((d.mean(), q));
                    }
                    Ok(DemandLaw::from_outcomes(s.products().to_vec(), outcomes))
                } else {
                    Ok(DemandLaw::independent(s.products().to_vec(), dists))
                }
            }
            ChoiceModel::MixtureMnl(m) => Ok(m.law(t, s)),
            ChoiceModel::RankedList { lists } => {
                let k = s.len();
                let mut none = 0.0;
                let mut mass = vec![0.0; k];
                for (prob, order) in lists {
                    match order.iter().find_map(|p| s.products().iter().position(|x| x == p)) {
                        Some(idx) => mass[idx] += prob,
                        None => none += prob,
                    }
                }
                let mut outcomes = vec![(none, vec![0.0; k])];
                for (idx, m) in mass.into_iter().enumerate() {
                    let mut q = vec![0.0; k];
                    q[idx] = 1.0;
                    outcomes.push((m, q));
                }
                Ok(DemandLaw::from_outcomes(s.products().to_vec(), outcomes))
            }
        }
    }

    /// True when the law does not depend on the period.
    pub fn is_time_invariant(&self) -> bool {
        match self {
            ChoiceModel::Table { entries } => entries.keys().all(|(t, _)| t.is_none()),
            ChoiceModel::MixtureMnl(m) => {
                let flat = |v: &[f64]| v.windows(2).all(|w| w[0] == w[1]);
                flat(&m.mean_low) && flat(&m.mean_high)
            }
            ChoiceModel::RankedList { .. } => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: usize, j: usize) -> Product {
        Product::new(i, j)
    }

    fn mixture() -> MixtureMnl {
        MixtureMnl {
            v_low: vec![5.0, 1.0, 10.0],
            v_high: vec![5.0, 10.0, 1.0],
            v0_low: 0.0,
            v0_high: 0.0,
            low_price: vec![4, 3, 5],
            high_price: vec![1, 0, 2],
            mean_low: vec![0.3],
            mean_high: vec![0.2],
        }
    }

    #[test]
    fn mixture_low_shares() {
        let m = ChoiceModel::MixtureMnl(mixture());
        let s = Assortment::new(vec![p(0, 4), p(1, 3), p(2, 5)]);
        let law = m.law(0, &s).unwrap();
        assert!((law.mean_of(&p(0, 4)) - 0.3 * 5.0 / 16.0).abs() < 1e-15);
        assert!((law.means().iter().sum::<f64>() - 0.3).abs() < 1e-15);
        assert!(!law.is_integral());
    }

    #[test]
    fn mixture_zero_over_zero_is_zero() {
        let m = ChoiceModel::MixtureMnl(mixture());
        // Only high-price products: the low segment sees nothing and buys nothing.
        let s = Assortment::new(vec![p(0, 1)]);
        let law = m.law(0, &s).unwrap();
        assert!((law.mean_of(&p(0, 1)) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ranked_list_first_offered_wins() {
        // A=(0,0) B=(0,1) C=(1,1)
        let lists = vec![
            RankedPreference { probability: 0.2, order: vec![p(1, 1), p(0, 1)] },
            RankedPreference { probability: 0.2, order: vec![p(0, 0)] },
            RankedPreference { probability: 0.0, order: vec![p(0, 1)] },
            RankedPreference { probability: 0.6, order: vec![] },
        ];
        let m = ChoiceModel::from_config(&ChoiceConfig::RankedList { lists }, 2, 2, 5).unwrap();
        let s = Assortment::new(vec![p(0, 0), p(0, 1), p(1, 1)]);
        let law = m.law(0, &s).unwrap();
        assert_eq!(law.mean_of(&p(0, 0)), 0.2);
        assert_eq!(law.mean_of(&p(0, 1)), 0.0);
        assert_eq!(law.mean_of(&p(1, 1)), 0.2);
        assert!(law.is_single_purchase());
        let without_c = m.law(0, &Assortment::new(vec![p(0, 0), p(0, 1)])).unwrap();
        assert_eq!(without_c.mean_of(&p(0, 1)), 0.2);
    }

    #[test]
    fn empty_assortment_has_empty_law() {
        let m = ChoiceModel::MixtureMnl(mixture());
        let law = m.law(3, &Assortment::empty()).unwrap();
        assert!(law.means().is_empty());
        assert_eq!(law.outcome_count(), 1);
    }
}
