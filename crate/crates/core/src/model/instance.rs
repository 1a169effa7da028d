use std::borrow::Cow;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::choice::{ChoiceConfig, ChoiceModel, DemandLaw};
use super::family::{Assortment, AssortmentFamily, FamilySpec, Product};
use crate::error::{invalid, Error, Result};

/// Instance description as read from JSON. Periods and indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub items: usize,
    pub prices: Vec<f64>,
    pub horizon: usize,
    pub inventories: Vec<f64>,
    pub assortment_family: FamilySpec,
    pub choice_model: ChoiceConfig,
    #[serde(default)]
    pub stationary: bool,
}

impl InstanceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Validated instance with every `(t, S)` demand law precomputed.
#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    prices: Vec<f64>,
    /// `price_order[k]` is the position in the input of sorted price `k`.
    price_order: Vec<usize>,
    inventories: Vec<f64>,
    horizon: usize,
    family: AssortmentFamily,
    choice: ChoiceModel,
    stationary: bool,
    laws: Vec<Arc<Vec<DemandLaw>>>,
    single_purchase: bool,
    integral: bool,
}

/// Parse and validate an instance description.
pub fn build_instance(config: &InstanceConfig) -> Result<Instance> {
    let m = config.prices.len();
    if m == 0 {
        return Err(invalid("at least one price is required"));
    }
    if config.prices.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(invalid("prices must be finite and non-negative"));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| config.prices[b].total_cmp(&config.prices[a]));
    if order.windows(2).any(|w| config.prices[w[0]] == config.prices[w[1]]) {
        return Err(invalid("duplicate prices"));
    }
    // new index of each input price
    let mut map = vec![0; m];
    for (new, &old) in order.iter().enumerate() {
        map[old] = new;
    }
    let prices: Vec<f64> = order.iter().map(|&k| config.prices[k]).collect();
    let family = AssortmentFamily::enumerate(config.items, m, &config.assortment_family)?;
    let identity = map.iter().enumerate().all(|(a, &b)| a == b);
    let (family, choice_cfg) = if identity {
        (family, Cow::Borrowed(&config.choice_model))
    } else {
        (family.remap_prices(&map)?, Cow::Owned(config.choice_model.remap_prices(&map)))
    };
    let choice = ChoiceModel::from_config(&choice_cfg, config.items, m, config.horizon)?;
    let mut inst = Instance::new(
        config.name.clone().unwrap_or_else(|| "instance".into()),
        prices,
        config.inventories.clone(),
        config.horizon,
        family,
        choice,
        config.stationary,
    )?;
    inst.price_order = order;
    Ok(inst)
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        prices: Vec<f64>,
        inventories: Vec<f64>,
        horizon: usize,
        family: AssortmentFamily,
        choice: ChoiceModel,
        stationary: bool,
    ) -> Result<Self> {
        let n = family.n_items();
        if horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }
        if prices.len() != family.n_prices() {
            return Err(invalid("price count does not match the family"));
        }
        if prices.windows(2).any(|w| !(w[0] > w[1])) || prices.iter().any(|p| !(*p >= 0.0)) {
            return Err(invalid("prices must be non-negative and strictly decreasing"));
        }
        if inventories.len() != n {
            return Err(invalid(format!("expected {n} inventories, got {}", inventories.len())));
        }
        if let Some(b) = inventories.iter().find(|b| !(**b >= 1.0) || !b.is_finite()) {
            return Err(invalid(format!("inventory {b} below 1")));
        }
        if stationary && !choice.is_time_invariant() {
            return Err(invalid("instance flagged stationary but demand varies over time"));
        }
        let compute = |t: usize| -> Result<Vec<DemandLaw>> {
            family.iter().map(|s| choice.law(t, s)).collect()
        };
        let laws: Vec<Arc<Vec<DemandLaw>>> = if choice.is_time_invariant() {
            let shared = Arc::new(compute(0)?);
            vec![shared; horizon]
        } else {
            (0..horizon).map(|t| compute(t).map(Arc::new)).collect::<Result<_>>()?
        };
        let all = || laws.iter().flat_map(|l| l.iter());
        let single_purchase = all().all(DemandLaw::is_single_purchase);
        let integral = all().all(DemandLaw::is_integral);
        if family.allows_multi_price() && !single_purchase {
            return Err(invalid("assortments with an item at two prices need a single-purchase model"));
        }
        if integral {
            if let Some(b) = inventories.iter().find(|&&b| b > horizon as f64) {
                return Err(invalid(format!("inventory {b} exceeds horizon {horizon} under integral demand")));
            }
        }
        Ok(Self {
            name: name.into(),
            price_order: (0..prices.len()).collect(),
            prices,
            inventories,
            horizon,
            family,
            choice,
            stationary,
            laws,
            single_purchase,
            integral,
        })
    }

    /// Same instance with different inventories.
    pub fn with_inventories(&self, inventories: Vec<f64>) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.prices.clone(),
            inventories,
            self.horizon,
            self.family.clone(),
            self.choice.clone(),
            self.stationary,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_items(&self) -> usize {
        self.family.n_items()
    }

    pub fn n_prices(&self) -> usize {
        self.prices.len()
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn price_order(&self) -> &[usize] {
        &self.price_order
    }

    pub fn inventories(&self) -> &[f64] {
        &self.inventories
    }

    pub fn b_min(&self) -> f64 {
        self.inventories.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn p_max(&self) -> f64 {
        self.prices[0]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn family(&self) -> &AssortmentFamily {
        &self.family
    }

    pub fn choice(&self) -> &ChoiceModel {
        &self.choice
    }

    pub fn is_stationary(&self) -> bool {
        self.stationary
    }

    /// Every `(t, S)` law buys at most one unit of one product.
    pub fn is_single_purchase(&self) -> bool {
        self.single_purchase
    }

    /// Every demand atom is 0 or 1.
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    /// Law of family member `s` in period `t`.
    pub fn law(&self, t: usize, s: usize) -> &DemandLaw {
        &self.laws[t][s]
    }

    /// Law of an arbitrary assortment (family members come from the cache).
    pub fn law_of(&self, t: usize, s: &Assortment) -> Result<Cow<'_, DemandLaw>> {
        match self.family.index_of(s) {
            Some(k) => Ok(Cow::Borrowed(self.law(t, k))),
            None => self.choice.law(t, s).map(Cow::Owned),
        }
    }

    /// Expected revenue Σ p_j q_t(i,j,S) of family member `s`.
    pub fn revenue_rate(&self, t: usize, s: usize) -> f64 {
        self.law(t, s).revenue(&self.prices)
    }

    /// Marginal means q_t(i,j,S); errors if `s` is not feasible.
    pub fn choice_probabilities(&self, t: usize, s: &Assortment) -> Result<Vec<(Product, f64)>> {
        let k = self.family.require(s)?;
        if t >= self.horizon {
            return Err(invalid(format!("period {t} beyond horizon")));
        }
        let law = self.law(t, k);
        Ok(law.products().iter().copied().zip(law.means().iter().copied()).collect())
    }

    /// One joint demand draw for family member `s` in period `t`.
    pub fn sample_demand<R: Rng + ?Sized>(&self, t: usize, s: usize, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::new();
        self.law(t, s).sample(rng, &mut out);
        out
    }

    pub(crate) fn require_single_item(&self, what: &'static str) -> Result<()> {
        if self.n_items() != 1 {
            return Err(Error::Unsupported {
                what,
                requirement: "a single item",
            });
        }
        Ok(())
    }
}
