use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{invalid, Result};

const MASS_TOL: f64 = 1e-12;

/// Parametric description of a per-product demand law on [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DemandKind {
    /// Demand 1 with probability `mean`, else 0.
    Bernoulli { mean: f64 },
    /// Explicit `(value, probability)` atoms.
    FiniteSupport { atoms: Vec<(f64, f64)> },
    /// Bin(n, beta) / n.
    ScaledBinomial { n: u32, beta: f64 },
    /// Exponential with rate `lambda` truncated to [0, 1], discretized into
    /// `grid` equal cells with the cell mass placed at the midpoint.
    TruncatedExponential {
        lambda: f64,
        #[serde(default = "default_grid")]
        grid: usize,
    },
}

fn default_grid() -> usize {
    64
}

/// Either a bare number (Bernoulli mean) or a tagged distribution object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DemandSpec {
    Mean(f64),
    Kind(DemandKind),
}

impl From<f64> for DemandSpec {
    fn from(m: f64) -> Self {
        DemandSpec::Mean(m)
    }
}

/// Finite-support demand distribution. Atoms are sorted by value, merged, and
/// carry strictly positive probability.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandDistribution {
    kind: DemandKind,
    atoms: Vec<(f64, f64)>,
}

impl DemandDistribution {
    pub fn bernoulli(mean: f64) -> Result<Self> {
        Self::from_kind(DemandKind::Bernoulli { mean })
    }

    pub fn finite(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::from_kind(DemandKind::FiniteSupport { atoms })
    }

    pub fn point(value: f64) -> Result<Self> {
        Self::finite(vec![(value, 1.0)])
    }

    pub fn scaled_binomial(n: u32, beta: f64) -> Result<Self> {
        Self::from_kind(DemandKind::ScaledBinomial { n, beta })
    }

    pub fn truncated_exponential(lambda: f64, grid: usize) -> Result<Self> {
        Self::from_kind(DemandKind::TruncatedExponential { lambda, grid })
    }

    pub fn from_spec(spec: &DemandSpec) -> Result<Self> {
        match spec {
            DemandSpec::Mean(m) => Self::bernoulli(*m),
            DemandSpec::Kind(k) => Self::from_kind(k.clone()),
        }
    }

    pub fn from_kind(kind: DemandKind) -> Result<Self> {
        let raw: Vec<(f64, f64)> = match &kind {
            DemandKind::Bernoulli { mean } => {
                if !(0.0..=1.0).contains(mean) {
                    return Err(invalid(format!("Bernoulli mean {mean} outside [0,1]")));
                }
                vec![(0.0, 1.0 - mean), (1.0, *mean)]
            }
            DemandKind::FiniteSupport { atoms } => {
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(invalid(format!("probabilities sum to {total}, not 1")));
                }
                atoms.clone()
            }
            DemandKind::ScaledBinomial { n, beta } => {
                if *n == 0 || !(0.0..=1.0).contains(beta) {
                    return Err(invalid("scaled binomial needs n >= 1 and beta in [0,1]"));
                }
                let n = *n as u64;
                (0..=n)
                    .map(|k| (k as f64 / n as f64, binomial_pmf(n, k, *beta)))
                    .collect()
            }
            DemandKind::TruncatedExponential { lambda, grid } => {
                if *grid == 0 || !lambda.is_finite() {
                    return Err(invalid("truncated exponential needs a finite rate and grid >= 1"));
                }
                let g = *grid as f64;
                (0..*grid)
                    .map(|k| {
                        let (lo, hi) = (k as f64 / g, (k + 1) as f64 / g);
                        let mass = if lambda.abs() < 1e-12 {
                            1.0 / g
                        } else {
                            ((-lambda * lo).exp() - (-lambda * hi).exp()) / (1.0 - (-lambda).exp())
                        };
                        ((lo + hi) / 2.0, mass)
                    })
                    .collect()
            }
        };
        for &(v, p) in &raw {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(format!("support value {v} outside [0,1]")));
            }
            if !(p >= 0.0) {
                return Err(invalid(format!("negative probability {p}")));
            }
        }
        let mut atoms: Vec<(f64, f64)> = raw.into_iter().filter(|a| a.1 > 0.0).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        atoms.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        Ok(Self { kind, atoms })
    }

    pub fn kind(&self) -> &DemandKind {
        &self.kind
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Mean of the (possibly discretized) atoms; this is the value every LP uses.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }

    /// Mean of the underlying parametric family (differs from [`mean`] only
    /// for the discretized exponential).
    ///
    /// [`mean`]: DemandDistribution::mean
    pub fn closed_form_mean(&self) -> f64 {
        match self.kind {
            DemandKind::Bernoulli { mean } => mean,
            DemandKind::ScaledBinomial { beta, .. } => beta,
            DemandKind::TruncatedExponential { lambda, .. } if lambda.abs() > 1e-12 => {
                1.0 / lambda - (-lambda).exp() / (1.0 - (-lambda).exp())
            }
            DemandKind::TruncatedExponential { .. } => 0.5,
            DemandKind::FiniteSupport { .. } => self.mean(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms.iter().take_while(|a| a.0 <= x).map(|a| a.1).sum()
    }

    /// E[min(c, Q)].
    pub fn expected_min(&self, c: f64) -> f64 {
        self.atoms.iter().map(|(v, p)| v.min(c) * p).sum()
    }

    pub fn is_integral(&self) -> bool {
        self.atoms.iter().all(|a| a.0 == 0.0 || a.0 == 1.0)
    }

    /// Inverse-CDF draw from a uniform `u` in [0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, p) in &self.atoms {
            acc += p;
            if u < acc {
                return v;
            }
        }
        self.atoms.last().map_or(0.0, |a| a.0)
    }
}

fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}
