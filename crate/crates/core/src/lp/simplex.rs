//! Dense revised simplex with Bland's rule.
//!
//! The basis inverse is stored explicitly and updated by elementary row
//! operations; floating-point runs refactor it periodically. Two phases:
//! artificials are minimized first, then driven out of the basis (or left at
//! zero on redundant rows) before the real objective is optimized.

#![allow(clippy::needless_range_loop)]

use serde::Serialize;

use super::program::{LinearProgram, Sense};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Floating-point runs rebuild the basis inverse this often.
    pub refactor_every: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            refactor_every: 64,
        }
    }
}

/// What occupies a basis position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisEntry {
    Var(usize),
    Slack(usize),
    Artificial(usize),
}

pub(crate) struct RawSolution<F> {
    pub x: Vec<F>,
    pub basis: Vec<BasisEntry>,
    pub iterations: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum ColKind {
    Original(usize),
    Slack(usize),
    Artificial(usize),
}

struct Tableau<F> {
    /// Column-major constraint matrix including slack and artificial columns.
    cols: Vec<Vec<F>>,
    kinds: Vec<ColKind>,
    rhs: Vec<F>,
    basis: Vec<usize>,
    binv: Vec<Vec<F>>,
    xb: Vec<F>,
    iterations: usize,
    opts: SolveOptions,
}

pub(crate) fn solve_raw<F: Scalar>(lp: &LinearProgram<F>, opts: SolveOptions) -> Result<RawSolution<F>> {
    lp.validate()?;
    let n = lp.n_vars();
    let m = lp.n_rows();
    let tol = F::tolerance();

    // Row equilibration for floating types (exact types skip it).
    let mut rows: Vec<(Vec<F>, Sense, F)> = lp
        .rows
        .iter()
        .map(|r| {
            let mut coeffs = r.coeffs.clone();
            let mut rhs = r.rhs.clone();
            if !F::is_exact() {
                let big = coeffs.iter().map(|a| a.abs_value()).fold(F::zero(), |a, b| if b > a { b } else { a });
                if big > F::zero() {
                    coeffs.iter_mut().for_each(|a| *a = a.clone() / big.clone());
                    rhs = rhs / big;
                }
            }
            (coeffs, r.sense, rhs)
        })
        .collect();
    for (coeffs, sense, rhs) in &mut rows {
        if *rhs < F::zero() {
            coeffs.iter_mut().for_each(|a| *a = -a.clone());
            *rhs = -rhs.clone();
            *sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let mut cols: Vec<Vec<F>> = (0..n).map(|j| rows.iter().map(|r| r.0[j].clone()).collect()).collect();
    let mut kinds: Vec<ColKind> = (0..n).map(ColKind::Original).collect();
    let unit = |r: usize, sign: F| -> Vec<F> {
        let mut v = vec![F::zero(); m];
        v[r] = sign;
        v
    };
    let mut basis = vec![usize::MAX; m];
    for (r, (_, sense, _)) in rows.iter().enumerate() {
        match sense {
            Sense::Le => {
                cols.push(unit(r, F::one()));
                kinds.push(ColKind::Slack(r));
                basis[r] = cols.len() - 1;
            }
            Sense::Ge => {
                cols.push(unit(r, -F::one()));
                kinds.push(ColKind::Slack(r));
            }
            Sense::Eq => {}
        }
    }
    for (r, (_, sense, _)) in rows.iter().enumerate() {
        if *sense != Sense::Le {
            cols.push(unit(r, F::one()));
            kinds.push(ColKind::Artificial(r));
            basis[r] = cols.len() - 1;
        }
    }
    let rhs: Vec<F> = rows.iter().map(|r| r.2.clone()).collect();
    let identity: Vec<Vec<F>> = (0..m).map(|r| unit(r, F::one())).collect();
    let mut tab = Tableau {
        cols,
        kinds,
        xb: rhs.clone(),
        rhs,
        basis,
        binv: identity,
        iterations: 0,
        opts,
    };
    let total = tab.cols.len();
    let is_art = |k: &ColKind| matches!(k, ColKind::Artificial(_));

    // Phase 1.
    if tab.kinds.iter().any(is_art) {
        let cost: Vec<F> = tab
            .kinds
            .iter()
            .map(|k| if is_art(k) { -F::one() } else { F::zero() })
            .collect();
        tab.optimize(&cost, &vec![false; total])?;
        let infeas = tab
            .basis
            .iter()
            .zip(&tab.xb)
            .filter(|(b, _)| is_art(&tab.kinds[**b]))
            .fold(F::zero(), |acc, (_, v)| acc + v.clone());
        let scale = tab.rhs.iter().fold(F::one(), |a, b| if b.clone() > a { b.clone() } else { a });
        if infeas > tol.clone() * scale * F::from_f64_lossy(10.0) {
            return Err(Error::Infeasible);
        }
        tab.drive_out_artificials();
    }

    // Phase 2.
    let mut obj = lp.objective.clone();
    if !F::is_exact() {
        let big = obj.iter().map(|a| a.abs_value()).fold(F::zero(), |a, b| if b > a { b } else { a });
        if big > F::zero() {
            obj.iter_mut().for_each(|c| *c = c.clone() / big.clone());
        }
    }
    let cost: Vec<F> = (0..total)
        .map(|j| match tab.kinds[j] {
            ColKind::Original(k) => obj[k].clone(),
            _ => F::zero(),
        })
        .collect();
    let barred: Vec<bool> = tab.kinds.iter().map(is_art).collect();
    tab.optimize(&cost, &barred)?;

    let mut x = vec![F::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if let ColKind::Original(k) = tab.kinds[b] {
            let v = tab.xb[r].clone();
            x[k] = if v < F::zero() { F::zero() } else { v };
        }
    }
    let basis = tab
        .basis
        .iter()
        .map(|&b| match tab.kinds[b] {
            ColKind::Original(k) => BasisEntry::Var(k),
            ColKind::Slack(r) => BasisEntry::Slack(r),
            ColKind::Artificial(r) => BasisEntry::Artificial(r),
        })
        .collect();
    Ok(RawSolution {
        x,
        basis,
        iterations: tab.iterations,
    })
}

impl<F: Scalar> Tableau<F> {
    fn m(&self) -> usize {
        self.rhs.len()
    }

    /// B^{-1} a_j.
    fn ftran(&self, j: usize) -> Vec<F> {
        let col = &self.cols[j];
        self.binv
            .iter()
            .map(|row| {
                row.iter()
                    .zip(col)
                    .filter(|(_, a)| !a.is_zero())
                    .fold(F::zero(), |acc, (b, a)| acc + b.clone() * a.clone())
            })
            .collect()
    }

    fn optimize(&mut self, cost: &[F], barred: &[bool]) -> Result<()> {
        let tol = F::tolerance();
        let m = self.m();
        let mut since_refactor = 0;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(Error::IterationLimit(self.iterations));
            }
            // y = c_B B^{-1}
            let mut y = vec![F::zero(); m];
            for (r, &b) in self.basis.iter().enumerate() {
                let cb = &cost[b];
                if cb.is_zero() {
                    continue;
                }
                for (yk, bk) in y.iter_mut().zip(&self.binv[r]) {
                    *yk = yk.clone() + cb.clone() * bk.clone();
                }
            }
            let in_basis = {
                let mut v = vec![false; self.cols.len()];
                self.basis.iter().for_each(|&b| v[b] = true);
                v
            };
            // Bland: first improving column.
            let entering = (0..self.cols.len()).find(|&j| {
                if in_basis[j] || barred[j] {
                    return false;
                }
                let d = self.cols[j]
                    .iter()
                    .zip(&y)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(cost[j].clone(), |acc, (a, yk)| acc - a.clone() * yk.clone());
                d > tol
            });
            let Some(j) = entering else {
                return Ok(());
            };
            let u = self.ftran(j);
            // Ratio test; ties go to the smallest basic column index.
            let mut leave: Option<(usize, F)> = None;
            for r in 0..m {
                if u[r] <= tol {
                    continue;
                }
                let theta = self.xb[r].clone() / u[r].clone();
                leave = match leave {
                    None => Some((r, theta)),
                    Some((lr, lt)) => {
                        let diff = theta.clone() - lt.clone();
                        if diff < -tol.clone() || (diff.abs_value() <= tol && self.basis[r] < self.basis[lr]) {
                            Some((r, theta))
                        } else {
                            Some((lr, lt))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, j, &u);
            self.iterations += 1;
            since_refactor += 1;
            if !F::is_exact() && since_refactor >= self.opts.refactor_every {
                self.refactor()?;
                since_refactor = 0;
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize, u: &[F]) {
        let piv = u[r].clone();
        let m = self.m();
        for k in 0..m {
            self.binv[r][k] = self.binv[r][k].clone() / piv.clone();
        }
        self.xb[r] = self.xb[r].clone() / piv;
        let pivot_row = self.binv[r].clone();
        let xr = self.xb[r].clone();
        for i in 0..m {
            if i == r || u[i].is_zero() {
                continue;
            }
            let f = u[i].clone();
            for k in 0..m {
                if !pivot_row[k].is_zero() {
                    self.binv[i][k] = self.binv[i][k].clone() - f.clone() * pivot_row[k].clone();
                }
            }
            self.xb[i] = self.xb[i].clone() - f * xr.clone();
        }
        self.basis[r] = j;
    }

    /// Recompute B^{-1} by Gauss-Jordan with partial pivoting.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m();
        let mut a: Vec<Vec<F>> = (0..m)
            .map(|i| self.basis.iter().map(|&b| self.cols[b][i].clone()).collect())
            .collect();
        let mut inv: Vec<Vec<F>> = (0..m)
            .map(|i| (0..m).map(|k| if i == k { F::one() } else { F::zero() }).collect())
            .collect();
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| {
                    a[x][c]
                        .abs_value()
                        .partial_cmp(&a[y][c].abs_value())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("non-empty range");
            if a[p][c].is_zero() {
                return Err(Error::Numerical("singular basis during refactorization".into()));
            }
            a.swap(c, p);
            inv.swap(c, p);
            let piv = a[c][c].clone();
            for k in 0..m {
                a[c][k] = a[c][k].clone() / piv.clone();
                inv[c][k] = inv[c][k].clone() / piv.clone();
            }
            for i in 0..m {
                if i == c || a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].clone();
                for k in 0..m {
                    a[i][k] = a[i][k].clone() - f.clone() * a[c][k].clone();
                    inv[i][k] = inv[i][k].clone() - f.clone() * inv[c][k].clone();
                }
            }
        }
        self.binv = inv;
        self.xb = self
            .binv
            .iter()
            .map(|row| row.iter().zip(&self.rhs).fold(F::zero(), |acc, (b, r)| acc + b.clone() * r.clone()))
            .collect();
        Ok(())
    }

    /// Pivot zero-valued artificials out of the basis where a non-artificial
    /// column can replace them; the rest sit on redundant rows.
    fn drive_out_artificials(&mut self) {
        let tol = F::tolerance();
        for r in 0..self.m() {
            if !matches!(self.kinds[self.basis[r]], ColKind::Artificial(_)) {
                continue;
            }
            let in_basis: Vec<usize> = self.basis.clone();
            let candidate = (0..self.cols.len()).find(|&j| {
                !matches!(self.kinds[j], ColKind::Artificial(_)) && !in_basis.contains(&j) && {
                    let row = &self.binv[r];
                    let v = row
                        .iter()
                        .zip(&self.cols[j])
                        .fold(F::zero(), |acc, (b, a)| acc + b.clone() * a.clone());
                    v.abs_value() > tol
                }
            });
            if let Some(j) = candidate {
                let u = self.ftran(j);
                self.pivot(r, j, &u);
            }
        }
    }
}
