use serde::Serialize;

use super::program::{LinearProgram, LpKind, VarLabel};
use super::simplex::{solve_raw, BasisEntry, SolveOptions};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::scalar::Scalar;
use crate::ZETA;

/// Basic optimal solution of a [`LinearProgram`].
#[derive(Debug, Clone, Serialize)]
pub struct LpSolution<F> {
    pub kind: LpKind,
    pub labels: Vec<VarLabel>,
    #[serde(skip)]
    pub values: Vec<F>,
    #[serde(skip)]
    pub objective: F,
    pub basis: Vec<BasisEntry>,
    pub iterations: usize,
}

impl<F: Scalar> LinearProgram<F> {
    pub fn solve(&self) -> Result<LpSolution<F>> {
        self.solve_with(SolveOptions::default())
    }

    pub fn solve_with(&self, opts: SolveOptions) -> Result<LpSolution<F>> {
        let raw = solve_raw(self, opts)?;
        let objective = self.objective_value(&raw.x);
        Ok(LpSolution {
            kind: self.kind,
            labels: self.labels.clone(),
            values: raw.x,
            objective,
            basis: raw.basis,
            iterations: raw.iterations,
        })
    }
}

impl<F: Scalar> LpSolution<F> {
    /// Indices of variables strictly above ζ.
    pub fn support(&self) -> Vec<usize> {
        let z = F::from_f64_lossy(ZETA);
        (0..self.values.len()).filter(|&k| self.values[k] > z).collect()
    }

    pub fn objective_f64(&self) -> f64 {
        self.objective.to_f64_lossy()
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(Scalar::to_f64_lossy).collect()
    }

    pub fn to_f64(&self) -> LpSolution<f64> {
        LpSolution {
            kind: self.kind,
            labels: self.labels.clone(),
            values: self.values_f64(),
            objective: self.objective_f64(),
            basis: self.basis.clone(),
            iterations: self.iterations,
        }
    }
}

/// Solve with the default options.
pub fn solve_lp<F: Scalar>(lp: &LinearProgram<F>) -> Result<LpSolution<F>> {
    lp.solve()
}

impl LpSolution<f64> {
    /// Dense per-period weights over the family: `w[t][s]`. Stationary and
    /// single-item solutions are expanded; any shortfall below 1 goes to ∅.
    pub fn assortment_weights(&self, inst: &Instance) -> Result<Vec<Vec<f64>>> {
        let fam = inst.family();
        let horizon = inst.horizon();
        let mut w = vec![vec![0.0; fam.len()]; horizon];
        for (k, label) in self.labels.iter().enumerate() {
            let v = self.values[k].max(0.0);
            let (period, s) = match label {
                VarLabel::Assortment { period, index } => (*period, *index),
                VarLabel::Price { period, index } => {
                    let s = fam.singleton(0, *index).ok_or_else(|| {
                        Error::Invalid(format!("family lacks the single-price assortment for price {index}"))
                    })?;
                    (*period, s)
                }
                VarLabel::Named(_) => return Err(Error::Invalid("solution has unlabelled variables".into())),
            };
            match period {
                Some(t) => w[t][s] += v,
                None => w.iter_mut().for_each(|row| row[s] += v),
            }
        }
        for row in &mut w {
            let total: f64 = row.iter().sum();
            if total < 1.0 {
                row[0] += 1.0 - total;
            }
        }
        Ok(w)
    }
}

/// r*_i = Σ_t Σ_S x*_t(S) Σ_{j:(i,j)∈S} p_j q_t(i,j,S).
pub fn item_contributions(solution: &LpSolution<f64>, inst: &Instance) -> Result<Vec<f64>> {
    let w = solution.assortment_weights(inst)?;
    let mut r = vec![0.0; inst.n_items()];
    for (t, row) in w.iter().enumerate() {
        for (s, &x) in row.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let law = inst.law(t, s);
            for (p, q) in law.products().iter().zip(law.means()) {
                r[p.item] += x * inst.prices()[p.price] * q;
            }
        }
    }
    Ok(r)
}

/// Support of a basic DLP-S solution: at most two prices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPriceSupport {
    /// Price index of the higher price (smaller index).
    pub high: usize,
    pub low: usize,
    pub x_high: f64,
    pub x_low: f64,
}

impl TwoPriceSupport {
    pub fn is_empty(&self) -> bool {
        self.x_high + self.x_low <= 0.0
    }
}

pub fn two_price_support(solution: &LpSolution<f64>) -> Result<TwoPriceSupport> {
    if solution.kind != LpKind::DlpS {
        return Err(Error::Invalid("two-price support needs a DLP-S solution".into()));
    }
    let mut sup: Vec<(usize, f64)> = solution
        .support()
        .into_iter()
        .map(|k| match solution.labels[k] {
            VarLabel::Price { index, .. } => (index, solution.values[k]),
            _ => unreachable!("DLP-S variables are prices"),
        })
        .collect();
    sup.sort_by_key(|e| e.0);
    match sup.as_slice() {
        [] => Ok(TwoPriceSupport { high: 0, low: 0, x_high: 0.0, x_low: 0.0 }),
        [(j, x)] => Ok(TwoPriceSupport { high: *j, low: *j, x_high: *x, x_low: 0.0 }),
        [(h, xh), (l, xl)] => Ok(TwoPriceSupport { high: *h, low: *l, x_high: *xh, x_low: *xl }),
        _ => Err(Error::Numerical(format!(
            "DLP-S solution has {} support prices; a basic solution has at most two",
            sup.len()
        ))),
    }
}
