//! Optimal dynamic (inventory-reactive) policy by backward induction.

use serde::Serialize;

use super::simulate::{check_mode, effective_law, Substitution};
use crate::error::{Error, Result};
use crate::model::Instance;

/// Value function and argmax table over (period, integer inventory vector).
#[derive(Debug, Clone, Serialize)]
pub struct DpValue {
    pub root: f64,
    /// Per-item levels 0..=b_i.
    pub dims: Vec<usize>,
    /// `values[t][state]` for t in 0..=T (the last layer is zero).
    pub values: Vec<Vec<f64>>,
    /// `actions[t][state]`: family index chosen in period t.
    pub actions: Vec<Vec<usize>>,
}

impl DpValue {
    fn index(&self, inv: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (c, d) in inv.iter().zip(&self.dims) {
            idx += c * stride;
            stride *= d + 1;
        }
        idx
    }

    pub fn value(&self, t: usize, inv: &[usize]) -> f64 {
        self.values[t][self.index(inv)]
    }

    pub fn action(&self, t: usize, inv: &[usize]) -> usize {
        self.actions[t][self.index(inv)]
    }
}

pub fn optimal_dp(inst: &Instance, mode: Substitution, cap: usize) -> Result<DpValue> {
    if !inst.is_integral() {
        return Err(Error::Unsupported {
            what: "optimal DP",
            requirement: "integral demand",
        });
    }
    check_mode(inst, mode)?;
    let dims: Vec<usize> = inst
        .inventories()
        .iter()
        .map(|&b| {
            if b.fract() != 0.0 {
                Err(Error::Unsupported {
                    what: "optimal DP",
                    requirement: "integer inventories",
                })
            } else {
                Ok(b as usize)
            }
        })
        .collect::<Result<_>>()?;
    let n_states = dims.iter().try_fold(1usize, |acc, d| acc.checked_mul(d + 1)).unwrap_or(usize::MAX);
    if n_states > cap {
        return Err(Error::StateCap { cap });
    }
    let horizon = inst.horizon();
    let strides: Vec<usize> = dims
        .iter()
        .scan(1usize, |acc, d| {
            let s = *acc;
            *acc *= d + 1;
            Some(s)
        })
        .collect();
    let decode = |mut idx: usize| -> Vec<f64> {
        dims.iter()
            .map(|d| {
                let c = idx % (d + 1);
                idx /= d + 1;
                c as f64
            })
            .collect()
    };
    let mut values = vec![vec![0.0; n_states]; horizon + 1];
    let mut actions = vec![vec![0usize; n_states]; horizon];
    for t in (0..horizon).rev() {
        let (head, tail) = values.split_at_mut(t + 1);
        let (cur, next) = (&mut head[t], &tail[0]);
        for idx in 0..n_states {
            let inv = decode(idx);
            let mut best = (f64::NEG_INFINITY, 0usize);
            for s in 0..inst.family().len() {
                let law = effective_law(inst, t, s, &inv, mode)?;
                let mut v = 0.0;
                law.for_each_outcome(|w, q| {
                    let mut to = idx;
                    let mut rev = 0.0;
                    let mut left = inv.clone();
                    for (p, &d) in law.products().iter().zip(q) {
                        if d > 0.0 && left[p.item] >= 1.0 {
                            left[p.item] -= 1.0;
                            to -= strides[p.item];
                            rev += inst.prices()[p.price];
                        }
                    }
                    v += w * (rev + next[to]);
                });
                if v > best.0 + 1e-12 {
                    best = (v, s);
                }
            }
            cur[idx] = best.0;
            actions[t][idx] = best.1;
        }
    }
    let root_idx: usize = dims.iter().zip(&strides).map(|(d, s)| d * s).sum();
    Ok(DpValue {
        root: values[0][root_idx],
        dims,
        values,
        actions,
    })
}
