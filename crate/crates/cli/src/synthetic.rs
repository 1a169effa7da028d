//! Three-item mixture-of-MNL benchmark: a low and a high customer segment,
//! each item offered at a segment-specific price, 20 periods.

use serde::{Deserialize, Serialize};
use statcal::model::{ChoiceConfig, MixtureMnl};
use statcal::{FamilySpec, InstanceConfig};

pub const HORIZON: usize = 20;
pub const SMALL_PRICES: [f64; 6] = [1000.0, 800.0, 600.0, 500.0, 400.0, 300.0];
pub const BIG_PRICES: [f64; 6] = [10000.0, 8000.0, 6000.0, 500.0, 400.0, 300.0];
/// Price index of each item for the high and the low segment.
pub const HIGH_PRICE: [usize; 3] = [1, 0, 2];
pub const LOW_PRICE: [usize; 3] = [4, 3, 5];
pub const V_LOW: [f64; 3] = [5.0, 1.0, 10.0];
pub const V_HIGH: [f64; 3] = [5.0, 10.0, 1.0];
/// Inventory split across items, as shares of twelfths.
pub const INVENTORY_SPLIT: [f64; 3] = [3.0, 5.0, 4.0];

pub const ALPHAS: [f64; 5] = [0.6, 0.8, 1.0, 1.2, 1.4];
pub const NO_PURCHASE: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 5.0), (5.0, 10.0), (10.0, 20.0)];

/// Non-stationary demand switches segment mix at this period.
const SWITCH: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    /// Stationary arrivals, small price ladder.
    Stationary,
    /// Low-segment rush then a mixed tail, small price ladder.
    NonstationarySmall,
    /// As above with a wide gap between high and low prices.
    NonstationaryBig,
}

impl Setting {
    pub const ALL: [Setting; 3] = [Setting::Stationary, Setting::NonstationarySmall, Setting::NonstationaryBig];

    pub fn name(self) -> &'static str {
        match self {
            Setting::Stationary => "stationary",
            Setting::NonstationarySmall => "nonstationary-small",
            Setting::NonstationaryBig => "nonstationary-big",
        }
    }

    pub fn prices(self) -> [f64; 6] {
        match self {
            Setting::NonstationaryBig => BIG_PRICES,
            _ => SMALL_PRICES,
        }
    }

    /// Per-period arrival probabilities `(E[A^L_t], E[A^H_t])`.
    pub fn arrivals(self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Setting::Stationary => (vec![0.3], vec![0.2]),
            _ => (0..HORIZON)
                .map(|t| if t < SWITCH { (0.8, 0.0) } else { (0.2, 0.2) })
                .unzip(),
        }
    }

    /// Total expected arrivals over the horizon.
    pub fn total_demand(self) -> f64 {
        let (low, high) = self.arrivals();
        let per = |v: &[f64]| if v.len() == 1 { v[0] * HORIZON as f64 } else { v.iter().sum() };
        per(&low) + per(&high)
    }
}

impl std::str::FromStr for Setting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Setting::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown synthetic setting {s:?}"))
    }
}

/// Inventory = α × total expected arrivals, split 3:5:4 across items.
pub fn inventories(setting: Setting, alpha: f64) -> Vec<f64> {
    let total = alpha * setting.total_demand();
    INVENTORY_SPLIT.iter().map(|w| total * w / 12.0).collect()
}

pub fn config(setting: Setting, alpha: f64, v0_low: f64, v0_high: f64) -> InstanceConfig {
    let (mean_low, mean_high) = setting.arrivals();
    InstanceConfig {
        name: Some(setting.name().to_string()),
        items: 3,
        prices: setting.prices().to_vec(),
        horizon: HORIZON,
        inventories: inventories(setting, alpha),
        assortment_family: FamilySpec::AllowedPrices {
            prices: (0..3).map(|i| vec![HIGH_PRICE[i], LOW_PRICE[i]]).collect(),
            capacity: None,
        },
        choice_model: ChoiceConfig::MixtureMnl(MixtureMnl {
            v_low: V_LOW.to_vec(),
            v_high: V_HIGH.to_vec(),
            v0_low,
            v0_high,
            low_price: LOW_PRICE.to_vec(),
            high_price: HIGH_PRICE.to_vec(),
            mean_low,
            mean_high,
        }),
        stationary: setting == Setting::Stationary,
    }
}
