use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// An item offered at a price index. Serialized as `[item, price]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Product {
    pub item: usize,
    pub price: usize,
}

impl Product {
    pub fn new(item: usize, price: usize) -> Self {
        Self { item, price }
    }
}

impl From<(usize, usize)> for Product {
    fn from((item, price): (usize, usize)) -> Self {
        Self { item, price }
    }
}

impl From<Product> for (usize, usize) {
    fn from(p: Product) -> Self {
        (p.item, p.price)
    }
}

/// A set of products, kept sorted so that equality and ordering are canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Product>", into = "Vec<Product>")]
pub struct Assortment(Vec<Product>);

impl Assortment {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(mut products: Vec<Product>) -> Self {
        products.sort_unstable();
        products.dedup();
        Self(products)
    }

    pub fn products(&self) -> &[Product] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: &Product) -> bool {
        self.0.binary_search(p).is_ok()
    }

    /// True if some item appears at two prices.
    pub fn has_repeated_item(&self) -> bool {
        self.0.windows(2).any(|w| w[0].item == w[1].item)
    }

    /// Sub-assortment keeping products whose position bit is set in `mask`.
    pub fn subset(&self, mask: u64) -> Assortment {
        Assortment(
            self.0
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, p)| *p)
                .collect(),
        )
    }

    pub fn filter(&self, mut keep: impl FnMut(&Product) -> bool) -> Assortment {
        Assortment(self.0.iter().copied().filter(|p| keep(p)).collect())
    }
}

impl From<Vec<Product>> for Assortment {
    fn from(v: Vec<Product>) -> Self {
        Assortment::new(v)
    }
}

impl From<Assortment> for Vec<Product> {
    fn from(a: Assortment) -> Self {
        a.0
    }
}

impl fmt::Display for Assortment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.0.iter().map(|p| format!("{}:{}", p.item, p.price)).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// How to construct the feasible family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// Every item absent or at one of its prices.
    AllSubsets,
    /// Shelf limit: at most `k` items offered.
    Capacity { k: usize },
    /// Item `i` may only be offered at the price indices listed in `prices[i]`.
    AllowedPrices {
        prices: Vec<Vec<usize>>,
        #[serde(default)]
        capacity: Option<usize>,
    },
    Explicit {
        assortments: Vec<Assortment>,
        /// Permit an item at several prices in one assortment. Only valid
        /// with single-purchase choice models.
        #[serde(default)]
        allow_multi_price: bool,
    },
}

/// Downward-closed family of assortments in canonical (lexicographic) order;
/// the empty assortment is always index 0.
#[derive(Debug, Clone)]
pub struct AssortmentFamily {
    assortments: Vec<Assortment>,
    index: HashMap<Assortment, usize>,
    n_items: usize,
    n_prices: usize,
    multi_price: bool,
}

/// Enumeration refuses families larger than this.
pub const MAX_FAMILY: usize = 100_000;

impl AssortmentFamily {
    pub fn enumerate(n_items: usize, n_prices: usize, spec: &FamilySpec) -> Result<Self> {
        if n_items == 0 || n_prices == 0 {
            return Err(invalid("need at least one item and one price"));
        }
        let (list, multi) = match spec {
            FamilySpec::AllSubsets => {
                let options = vec![(0..n_prices).collect::<Vec<_>>(); n_items];
                (product_sets(&options, usize::MAX)?, false)
            }
            FamilySpec::Capacity { k } => {
                let options = vec![(0..n_prices).collect::<Vec<_>>(); n_items];
                (product_sets(&options, *k)?, false)
            }
            FamilySpec::AllowedPrices { prices, capacity } => {
                if prices.len() != n_items {
                    return Err(invalid(format!(
                        "allowed-prices lists {} items, instance has {n_items}",
                        prices.len()
                    )));
                }
                if let Some(&bad) = prices.iter().flatten().find(|&&j| j >= n_prices) {
                    return Err(invalid(format!("price index {bad} out of range")));
                }
                (product_sets(prices, capacity.unwrap_or(usize::MAX))?, false)
            }
            FamilySpec::Explicit {
                assortments,
                allow_multi_price,
            } => {
                for a in assortments {
                    if let Some(p) = a.products().iter().find(|p| p.item >= n_items || p.price >= n_prices) {
                        return Err(invalid(format!("product ({}, {}) out of range", p.item, p.price)));
                    }
                    if !allow_multi_price && a.has_repeated_item() {
                        return Err(invalid(format!("assortment {a} offers an item at two prices")));
                    }
                }
                let mut all = assortments.clone();
                all.push(Assortment::empty());
                (all, *allow_multi_price)
            }
        };
        let fam = Self::from_list(list, n_items, n_prices, multi)?;
        if let FamilySpec::Explicit { .. } = spec {
            fam.check_downward_closed()?;
        }
        Ok(fam)
    }

    fn from_list(mut list: Vec<Assortment>, n_items: usize, n_prices: usize, multi: bool) -> Result<Self> {
        list.sort();
        list.dedup();
        if list.len() > MAX_FAMILY {
            return Err(Error::TooLarge {
                vars: list.len(),
                cap: MAX_FAMILY,
            });
        }
        let index = list.iter().cloned().enumerate().map(|(k, a)| (a, k)).collect();
        Ok(Self {
            assortments: list,
            index,
            n_items,
            n_prices,
            multi_price: multi,
        })
    }

    /// Brute-force downward-closure test.
    pub fn check_downward_closed(&self) -> Result<()> {
        for a in &self.assortments {
            if a.len() > 20 {
                return Err(invalid("assortment too large to verify downward closure"));
            }
            for mask in 0..(1u64 << a.len()) {
                let sub = a.subset(mask);
                if !self.index.contains_key(&sub) {
                    return Err(invalid(format!("family not downward-closed: {a} present, {sub} missing")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.assortments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assortments.is_empty()
    }

    pub fn get(&self, k: usize) -> &Assortment {
        &self.assortments[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Assortment> {
        self.assortments.iter()
    }

    pub fn index_of(&self, a: &Assortment) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn require(&self, a: &Assortment) -> Result<usize> {
        self.index_of(a).ok_or_else(|| Error::NotInFamily(a.to_string()))
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_prices(&self) -> usize {
        self.n_prices
    }

    pub fn allows_multi_price(&self) -> bool {
        self.multi_price
    }

    /// Index of the singleton `{(item, price)}`, if feasible.
    pub fn singleton(&self, item: usize, price: usize) -> Option<usize> {
        self.index_of(&Assortment::new(vec![Product::new(item, price)]))
    }

    pub(crate) fn remap_prices(&self, map: &[usize]) -> Result<Self> {
        let list = self
            .assortments
            .iter()
            .map(|a| Assortment::new(a.products().iter().map(|p| Product::new(p.item, map[p.price])).collect()))
            .collect();
        Self::from_list(list, self.n_items, self.n_prices, self.multi_price)
    }
}

/// All assortments choosing, per item, nothing or one allowed price, with at
/// most `cap` items present.
fn product_sets(options: &[Vec<usize>], cap: usize) -> Result<Vec<Assortment>> {
    let total: f64 = options.iter().map(|o| (o.len() + 1) as f64).product();
    if total > MAX_FAMILY as f64 {
        return Err(Error::TooLarge {
            vars: total as usize,
            cap: MAX_FAMILY,
        });
    }
    let mut out = vec![Vec::<Product>::new()];
    for (item, prices) in options.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * (prices.len() + 1));
        for base in &out {
            next.push(base.clone());
            if base.len() < cap {
                for &j in prices {
                    let mut a = base.clone();
                    a.push(Product::new(item, j));
                    next.push(a);
                }
            }
        }
        out = next;
    }
    Ok(out.into_iter().map(Assortment::new).collect())
}
