use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// Which deterministic relaxation a program encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpKind {
    /// One variable per (period, assortment).
    CdlpN,
    /// One variable per assortment, rows scaled by the horizon.
    CdlpS,
    /// Single item, one variable per price.
    DlpS,
    /// Single item, one variable per (period, price).
    DlpN,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarLabel {
    /// x_t(S), or x(S) when `period` is `None`. `index` is the family index.
    Assortment { period: Option<usize>, index: usize },
    /// x_tj, or x_j when `period` is `None`.
    Price { period: Option<usize>, index: usize },
    Named(String),
}

impl VarLabel {
    fn lp_name(&self, k: usize) -> String {
        match self {
            VarLabel::Assortment { period: Some(t), index } => format!("x_{t}_{index}"),
            VarLabel::Assortment { period: None, index } => format!("x_{index}"),
            VarLabel::Price { period: Some(t), index } => format!("y_{t}_{index}"),
            VarLabel::Price { period: None, index } => format!("y_{index}"),
            VarLabel::Named(_) => format!("v{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<F> {
    pub name: String,
    /// Dense coefficients, one per variable.
    pub coeffs: Vec<F>,
    pub sense: Sense,
    pub rhs: F,
}

/// `max c·x  s.t.  rows, x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<F> {
    pub kind: LpKind,
    pub labels: Vec<VarLabel>,
    pub objective: Vec<F>,
    pub rows: Vec<Constraint<F>>,
}

impl<F: Scalar> LinearProgram<F> {
    pub fn new(kind: LpKind) -> Self {
        Self {
            kind,
            labels: Vec::new(),
            objective: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, label: VarLabel, cost: F) -> usize {
        self.labels.push(label);
        self.objective.push(cost);
        for r in &mut self.rows {
            r.coeffs.push(F::zero());
        }
        self.labels.len() - 1
    }

    pub fn add_row(&mut self, name: impl Into<String>, coeffs: Vec<F>, sense: Sense, rhs: F) -> Result<usize> {
        if coeffs.len() != self.n_vars() {
            return Err(invalid(format!(
                "row has {} coefficients for {} variables",
                coeffs.len(),
                self.n_vars()
            )));
        }
        self.rows.push(Constraint {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
        Ok(self.rows.len() - 1)
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Dimensions agree and every coefficient is finite.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.labels.len() != n {
            return Err(invalid("label count differs from variable count"));
        }
        let finite = |x: &F| x.to_f64_lossy().is_finite();
        if !self.objective.iter().all(finite) {
            return Err(invalid("non-finite objective coefficient"));
        }
        for r in &self.rows {
            if r.coeffs.len() != n {
                return Err(invalid(format!("row {} has wrong width", r.name)));
            }
            if !r.coeffs.iter().all(finite) || !finite(&r.rhs) {
                return Err(invalid(format!("row {} has a non-finite coefficient", r.name)));
            }
        }
        Ok(())
    }

    /// Convert every coefficient to another scalar type.
    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> LinearProgram<G> {
        LinearProgram {
            kind: self.kind,
            labels: self.labels.clone(),
            objective: self.objective.iter().map(&f).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| Constraint {
                    name: r.name.clone(),
                    coeffs: r.coeffs.iter().map(&f).collect(),
                    sense: r.sense,
                    rhs: f(&r.rhs),
                })
                .collect(),
        }
    }

    pub fn objective_value(&self, x: &[F]) -> F {
        self.objective
            .iter()
            .zip(x)
            .fold(F::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
    }

    /// Largest constraint violation (or negative value) of `x`, relative to
    /// each row's largest coefficient.
    pub fn max_violation(&self, x: &[F]) -> f64 {
        let mut worst = x.iter().map(|v| -v.to_f64_lossy()).fold(0.0, f64::max);
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().zip(x).map(|(a, v)| a.to_f64_lossy() * v.to_f64_lossy()).sum();
            let scale = r.coeffs.iter().map(|a| a.to_f64_lossy().abs()).fold(1.0, f64::max);
            let gap = lhs - r.rhs.to_f64_lossy();
            let v = match r.sense {
                Sense::Le => gap,
                Sense::Ge => -gap,
                Sense::Eq => gap.abs(),
            };
            worst = worst.max(v / scale);
        }
        worst
    }

    /// CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        let names: Vec<String> = self.labels.iter().enumerate().map(|(k, l)| l.lp_name(k)).collect();
        let term_list = |coeffs: &[F]| {
            let mut s = String::new();
            for (k, a) in coeffs.iter().enumerate() {
                let v = a.to_f64_lossy();
                if v == 0.0 {
                    continue;
                }
                let sign = if v < 0.0 { "-" } else if s.is_empty() { "" } else { "+" };
                let _ = write!(s, " {sign} {} {}", fmt_num(v.abs()), names[k]);
            }
            if s.is_empty() {
                s.push_str(" 0 ");
                s.push_str(names.first().map_or("x", |n| n.as_str()));
            }
            s
        };
        let mut out = format!("\\ {:?}\nMaximize\n obj:{}\nSubject To\n", self.kind, term_list(&self.objective));
        for r in &self.rows {
            let op = match r.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            let _ = writeln!(out, " {}:{} {op} {}", r.name, term_list(&r.coeffs), fmt_num(r.rhs.to_f64_lossy()));
        }
        out.push_str("End\n");
        out
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}
