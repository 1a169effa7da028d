//! Guarantee formulas: Δ^APX, its Poisson floor, and the reservation δ.

use log::warn;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::model::Instance;
use crate::scalar::Scalar;

/// E[min(Bin(T, b/T), b)] / b, summed in log space. `b` may be fractional.
pub fn delta_apx(t: u64, b: f64) -> Result<f64> {
    if !(b > 0.0) || t == 0 {
        return Err(invalid("delta_apx needs T >= 1 and b > 0"));
    }
    if b > t as f64 {
        return Err(invalid(format!("delta_apx needs b <= T (b = {b}, T = {t})")));
    }
    let p = b / t as f64;
    if p >= 1.0 {
        return Ok(1.0);
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut e = 0.0;
    for k in 1..=t {
        let log_pmf = ln_binomial(t, k) + k as f64 * lp + (t - k) as f64 * lq;
        e += (k as f64).min(b) * log_pmf.exp();
    }
    Ok(e / b)
}

/// Δ^APX for integer `b`, evaluated in the arithmetic of `F` (exact for
/// rationals). Binomial coefficients are built incrementally, so this is
/// meant for moderate T.
pub fn delta_apx_exact<F: Scalar>(t: u64, b: u64) -> Result<F> {
    if b == 0 || t == 0 || b > t {
        return Err(invalid(format!("delta_apx needs 1 <= b <= T (b = {b}, T = {t})")));
    }
    let tf = F::from_ratio(t as i64, 1);
    let p = F::from_ratio(b as i64, 1) / tf;
    let q = F::one() - p.clone();
    let pow = |x: &F, e: u64| (0..e).fold(F::one(), |acc, _| acc * x.clone());
    let mut binom = F::one();
    let mut e = F::zero();
    for k in 0..=t {
        if k > 0 {
            binom = binom * F::from_ratio((t - k + 1) as i64, k as i64);
        }
        let weight = F::from_ratio(k.min(b) as i64, 1);
        e = e + weight * binom.clone() * pow(&p, k) * pow(&q, t - k);
    }
    Ok(e / F::from_ratio(b as i64, 1))
}

/// 1 − b^b e^{−b} / b!, via log-gamma.
pub fn poisson_floor(b: f64) -> f64 {
    1.0 - (b * b.ln() - b - ln_gamma(b + 1.0)).exp()
}

/// δ = √(3 ln b_min / b_min), clamped to [0, 1].
pub fn reservation_delta(b_min: f64) -> f64 {
    if b_min <= 1.0 {
        return 0.0;
    }
    (3.0 * b_min.ln() / b_min).sqrt().clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeReport {
    pub delta_apx: f64,
    pub poisson_floor: f64,
    pub reservation_delta: f64,
    /// Which guarantees apply to this instance, e.g. "stationary: delta_apx".
    pub applicable: Vec<String>,
}

pub fn guarantee_report(inst: &Instance) -> Result<GuaranteeReport> {
    let b = inst.b_min().min(inst.horizon() as f64);
    let delta = reservation_delta(inst.b_min());
    let mut applicable = Vec::new();
    if inst.is_stationary() {
        applicable.push("stationary randomized calendar: delta_apx * OPT_LP".to_string());
        if inst.n_items() == 1 {
            applicable.push("high-low calendar: delta_apx * OPT_LP under comparable demand CDFs".to_string());
        }
    }
    applicable.push("threshold calendar: OPT_LP / 2".to_string());
    if inst.n_items() == 1 {
        applicable.push("bid-price calendar: OPT_LP / 2".to_string());
    }
    if inst.b_min() >= 6.0 {
        applicable.push(format!("large-inventory calendar: (1 - {delta:.4}) * OPT_LP asymptotically"));
    }
    Ok(GuaranteeReport {
        delta_apx: delta_apx(inst.horizon() as u64, b)?,
        poisson_floor: poisson_floor(b),
        reservation_delta: delta,
        applicable,
    })
}

pub(crate) fn warn_small_inventory(b_min: f64) {
    if b_min < 6.0 {
        warn!("b_min = {b_min:.3} < 6: the large-inventory guarantee is vacuous");
    }
}
