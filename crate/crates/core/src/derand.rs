//! Period-by-period de-randomization of a randomized calendar.
//!
//! For t = 1..T, every assortment in the support of z_t is tried as the fixed
//! choice for period t (earlier periods already fixed, later periods still
//! randomized) and the best is kept. Candidates are scored exactly when the
//! reachable state space fits under the cap, otherwise by averaging K
//! simulated paths with common random numbers across candidates.

use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::eval::rng::derive_seed;
use crate::eval::simulate::sample_revenues;
use crate::eval::{check_mode, step, value_from, StateDist, Substitution};
use crate::model::{Assortment, Instance};
use crate::policies::{DeterministicCalendar, RandomizedCalendar};
use crate::{DEFAULT_STATE_CAP, ZETA};

/// Default ceiling on the per-candidate sample count.
pub const DEFAULT_K_MAX: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Exact when the state cap allows, sampled otherwise.
    Auto,
    Exact,
    Sampled,
}

#[derive(Debug, Clone)]
pub struct DerandConfig {
    pub epsilon: f64,
    pub seed: u64,
    /// Fixed sample count; `None` uses the formula (capped by `k_max`).
    pub k: Option<u64>,
    pub k_max: u64,
    pub mode: Substitution,
    pub zeta: f64,
    pub variant: Variant,
    pub state_cap: usize,
}

impl Default for DerandConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            seed: 0,
            k: None,
            k_max: DEFAULT_K_MAX,
            mode: Substitution::Static,
            zeta: ZETA,
            variant: Variant::Auto,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// K = ⌈T² (Σ b_i)² p_max² / OPT² · ε⁻² · (ln n + ln T)⌉, at least 1.
pub fn sample_count(inst: &Instance, opt_lp: f64, epsilon: f64) -> Result<u64> {
    if !(opt_lp > 0.0) {
        return Err(invalid("sample count needs OPT_LP > 0"));
    }
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    let t = inst.horizon() as f64;
    let b: f64 = inst.inventories().iter().sum();
    let k = (t * b * inst.p_max() / opt_lp).powi(2) / (epsilon * epsilon)
        * ((inst.n_items() as f64).ln() + t.ln());
    let k = k.ceil();
    Ok(if k >= u64::MAX as f64 { u64::MAX } else { (k as u64).max(1) })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateScore {
    pub index: usize,
    pub assortment: Assortment,
    pub estimate: f64,
}

/// One line of the decision log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decision {
    pub period: usize,
    pub method: String,
    pub samples: Option<u64>,
    pub candidates: Vec<CandidateScore>,
    pub chosen: usize,
}

#[derive(Debug, Clone)]
pub struct DerandOutcome {
    pub calendar: DeterministicCalendar,
    pub log: Vec<Decision>,
    /// `Some(K)` when candidates were sampled.
    pub samples: Option<u64>,
    pub exact: bool,
    /// Exact value of the final calendar (exact variant only).
    pub value: Option<f64>,
}

impl DerandOutcome {
    pub fn write_log<W: Write>(&self, mut out: W) -> Result<()> {
        for d in &self.log {
            serde_json::to_writer(&mut out, d)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn derandomize(
    randomized: &RandomizedCalendar,
    inst: &Instance,
    opt_lp: f64,
    config: &DerandConfig,
) -> Result<DerandOutcome> {
    if randomized.horizon() != inst.horizon() {
        return Err(invalid("calendar length differs from the horizon"));
    }
    check_mode(inst, config.mode)?;
    match config.variant {
        Variant::Exact => derandomize_exact(randomized, inst, config),
        Variant::Sampled => derandomize_sampled(randomized, inst, opt_lp, config),
        Variant::Auto => match derandomize_exact(randomized, inst, config) {
            Err(Error::StateCap { .. }) => derandomize_sampled(randomized, inst, opt_lp, config),
            other => other,
        },
    }
}

fn candidates(cal: &RandomizedCalendar, t: usize, zeta: f64) -> Vec<usize> {
    let mut c: Vec<usize> = cal.period(t).iter().filter(|e| e.1 > zeta).map(|e| e.0).collect();
    if c.is_empty() {
        c.push(cal.period(t)[0].0);
    }
    c
}

/// First strictly-best candidate wins; candidates are in canonical order.
fn argmax(scores: &[(usize, f64)], tol: f64) -> usize {
    let mut best = scores[0];
    for &s in &scores[1..] {
        if s.1 > best.1 + tol {
            best = s;
        }
    }
    best.0
}

fn record(inst: &Instance, t: usize, method: &str, samples: Option<u64>, scores: &[(usize, f64)], chosen: usize) -> Decision {
    Decision {
        period: t,
        method: method.into(),
        samples,
        candidates: scores
            .iter()
            .map(|&(s, v)| CandidateScore {
                index: s,
                assortment: inst.family().get(s).clone(),
                estimate: v,
            })
            .collect(),
        chosen,
    }
}

fn derandomize_exact(randomized: &RandomizedCalendar, inst: &Instance, config: &DerandConfig) -> Result<DerandOutcome> {
    let mut cal = randomized.clone();
    let mut dist = StateDist::initial(inst);
    let mut earned = 0.0;
    let mut log = Vec::with_capacity(inst.horizon());
    for t in 0..inst.horizon() {
        let cands = candidates(&cal, t, config.zeta);
        let mut scores = Vec::with_capacity(cands.len());
        let mut after = Vec::with_capacity(cands.len());
        for &s in &cands {
            let (next, rev) = step(inst, &dist, &[(s, 1.0)], t, config.mode, config.state_cap)?;
            let value = if cands.len() == 1 {
                f64::NAN
            } else {
                earned + rev + value_from(inst, &next, &cal, t + 1, config.mode, config.state_cap)?
            };
            scores.push((s, value));
            after.push((next, rev));
        }
        let chosen = if cands.len() == 1 { cands[0] } else { argmax(&scores, 1e-12) };
        let k = cands.iter().position(|&s| s == chosen).expect("chosen is a candidate");
        let (next, rev) = after.swap_remove(k);
        earned += rev;
        dist = next;
        cal.fix(t, chosen);
        log.push(record(inst, t, "exact", None, &scores, chosen));
    }
    Ok(DerandOutcome {
        calendar: cal.to_deterministic().expect("all periods fixed"),
        log,
        samples: None,
        exact: true,
        value: Some(earned),
    })
}

fn derandomize_sampled(
    randomized: &RandomizedCalendar,
    inst: &Instance,
    opt_lp: f64,
    config: &DerandConfig,
) -> Result<DerandOutcome> {
    let k = match config.k {
        Some(k) => k.max(1),
        None => {
            let auto = sample_count(inst, opt_lp, config.epsilon)?;
            if auto > config.k_max {
                warn!(
                    "sample count {auto} exceeds k_max = {}; using k_max, so the epsilon guarantee no longer holds",
                    config.k_max
                );
                config.k_max.max(1)
            } else {
                auto
            }
        }
    };
    let mut cal = randomized.clone();
    let mut log = Vec::with_capacity(inst.horizon());
    for t in 0..inst.horizon() {
        let cands = candidates(&cal, t, config.zeta);
        let mut scores = Vec::with_capacity(cands.len());
        if cands.len() > 1 {
            // common random numbers: every candidate in period t sees the same streams
            let seed_t = derive_seed(config.seed, t as u64);
            for &s in &cands {
                let mut trial = cal.clone();
                trial.fix(t, s);
                let samples = sample_revenues(inst, &trial, config.mode, k, seed_t)?;
                scores.push((s, samples.iter().sum::<f64>() / k as f64));
            }
        } else {
            scores.push((cands[0], f64::NAN));
        }
        let chosen = if cands.len() == 1 { cands[0] } else { argmax(&scores, 0.0) };
        cal.fix(t, chosen);
        log.push(record(inst, t, "sampled", Some(k), &scores, chosen));
    }
    Ok(DerandOutcome {
        calendar: cal.to_deterministic().expect("all periods fixed"),
        log,
        samples: Some(k),
        exact: false,
        value: None,
    })
}
