use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bounds::GuaranteeReport;
use crate::error::{invalid, Result};
use crate::model::{Assortment, AssortmentFamily};
use crate::ZETA;

const SUM_TOL: f64 = 1e-9;

/// Per-period distribution z_t(S) over family indices. Entries are sorted by
/// family index and carry positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedCalendar {
    periods: Vec<Vec<(usize, f64)>>,
}

impl RandomizedCalendar {
    pub fn new(periods: Vec<Vec<(usize, f64)>>, family_len: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(periods.len());
        for (t, mut row) in periods.into_iter().enumerate() {
            if row.iter().any(|&(s, p)| s >= family_len || !(p >= 0.0)) {
                return Err(invalid(format!("period {t}: bad assortment index or probability")));
            }
            row.retain(|e| e.1 > 0.0);
            row.sort_by_key(|e| e.0);
            let total: f64 = row.iter().map(|e| e.1).sum();
            if (total - 1.0).abs() > SUM_TOL {
                return Err(invalid(format!("period {t}: probabilities sum to {total}")));
            }
            out.push(row);
        }
        Ok(Self { periods: out })
    }

    /// From dense LP weights: values at or below ζ are dropped, any shortfall
    /// is assigned to ∅ (index 0) and any excess is normalized away.
    pub fn from_weights(weights: &[Vec<f64>]) -> Self {
        let periods = weights.iter().map(|row| normalize_row(row.iter().copied().enumerate())).collect();
        Self { periods }
    }

    pub fn stationary(row: &[f64], horizon: usize) -> Self {
        let r = normalize_row(row.iter().copied().enumerate());
        Self { periods: vec![r; horizon] }
    }

    pub fn horizon(&self) -> usize {
        self.periods.len()
    }

    pub fn period(&self, t: usize) -> &[(usize, f64)] {
        &self.periods[t]
    }

    pub fn periods(&self) -> &[Vec<(usize, f64)>] {
        &self.periods
    }

    /// Replace period `t` with a point mass on `s`.
    pub fn fix(&mut self, t: usize, s: usize) {
        self.periods[t] = vec![(s, 1.0)];
    }

    pub fn is_deterministic(&self) -> bool {
        self.periods.iter().all(|r| r.len() == 1)
    }

    pub fn to_deterministic(&self) -> Option<DeterministicCalendar> {
        self.is_deterministic()
            .then(|| DeterministicCalendar::new(self.periods.iter().map(|r| r[0].0).collect()))
    }

    /// Sample S_t. Draws a uniform only when the period is genuinely random.
    pub fn pick<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> usize {
        let row = &self.periods[t];
        if row.len() == 1 {
            return row[0].0;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(s, p) in row {
            acc += p;
            if u < acc {
                return s;
            }
        }
        row.last().expect("non-empty period").0
    }

    /// z_t(s).
    pub fn prob(&self, t: usize, s: usize) -> f64 {
        self.periods[t].iter().find(|e| e.0 == s).map_or(0.0, |e| e.1)
    }
}

fn normalize_row(entries: impl Iterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut row: Vec<(usize, f64)> = entries.filter(|e| e.1 > ZETA).collect();
    let total: f64 = row.iter().map(|e| e.1).sum();
    if total > 1.0 {
        row.iter_mut().for_each(|e| e.1 /= total);
    } else if total < 1.0 {
        match row.first_mut() {
            Some(e) if e.0 == 0 => e.1 += 1.0 - total,
            _ => row.insert(0, (0, 1.0 - total)),
        }
    }
    row
}

/// Fixed sequence S_1..S_T of family indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicCalendar {
    assortments: Vec<usize>,
}

impl DeterministicCalendar {
    pub fn new(assortments: Vec<usize>) -> Self {
        Self { assortments }
    }

    pub fn horizon(&self) -> usize {
        self.assortments.len()
    }

    pub fn get(&self, t: usize) -> usize {
        self.assortments[t]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.assortments
    }

    pub fn to_randomized(&self) -> RandomizedCalendar {
        RandomizedCalendar {
            periods: self.assortments.iter().map(|&s| vec![(s, 1.0)]).collect(),
        }
    }
}

impl From<&DeterministicCalendar> for RandomizedCalendar {
    fn from(c: &DeterministicCalendar) -> Self {
        c.to_randomized()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedAssortment {
    pub assortment: Assortment,
    pub probability: f64,
}

/// One period of a serialized calendar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PeriodPlan {
    Fixed(Assortment),
    Mixed(Vec<WeightedAssortment>),
}

/// Serialized calendar: a flat per-period array plus metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalendarDoc {
    pub policy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_lp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guarantee: Option<GuaranteeReport>,
    pub calendar: Vec<PeriodPlan>,
}

impl CalendarDoc {
    pub fn from_randomized(policy: impl Into<String>, cal: &RandomizedCalendar, family: &AssortmentFamily) -> Self {
        let calendar = cal
            .periods()
            .iter()
            .map(|row| {
                if row.len() == 1 {
                    PeriodPlan::Fixed(family.get(row[0].0).clone())
                } else {
                    PeriodPlan::Mixed(
                        row.iter()
                            .map(|&(s, p)| WeightedAssortment {
                                assortment: family.get(s).clone(),
                                probability: p,
                            })
                            .collect(),
                    )
                }
            })
            .collect();
        Self {
            policy: policy.into(),
            opt_lp: None,
            guarantee: None,
            calendar,
        }
    }

    pub fn from_deterministic(policy: impl Into<String>, cal: &DeterministicCalendar, family: &AssortmentFamily) -> Self {
        Self::from_randomized(policy, &cal.to_randomized(), family)
    }

    pub fn to_randomized(&self, family: &AssortmentFamily) -> Result<RandomizedCalendar> {
        let periods = self
            .calendar
            .iter()
            .map(|plan| match plan {
                PeriodPlan::Fixed(a) => Ok(vec![(family.require(a)?, 1.0)]),
                PeriodPlan::Mixed(list) => list
                    .iter()
                    .map(|w| Ok((family.require(&w.assortment)?, w.probability)))
                    .collect::<Result<Vec<_>>>(),
            })
            .collect::<Result<Vec<_>>>()?;
        RandomizedCalendar::new(periods, family.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FamilySpec;

    #[test]
    fn weights_are_normalized_onto_empty() {
        let cal = RandomizedCalendar::from_weights(&[vec![0.0, 0.5, 0.3 - 1e-12, 1e-12]]);
        assert_eq!(cal.period(0).len(), 3);
        let total: f64 = cal.period(0).iter().map(|e| e.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((cal.prob(0, 0) - 0.2).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(RandomizedCalendar::new(vec![vec![(0, 0.5)]], 2).is_err());
        assert!(RandomizedCalendar::new(vec![vec![(5, 1.0)]], 2).is_err());
    }

    #[test]
    fn doc_round_trip() {
        let fam = AssortmentFamily::enumerate(1, 2, &FamilySpec::AllSubsets).unwrap();
        let cal = RandomizedCalendar::new(vec![vec![(1, 0.5), (2, 0.5)], vec![(2, 1.0)]], 3).unwrap();
        let doc = CalendarDoc::from_randomized("alg1", &cal, &fam);
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.contains(r#""calendar":[[{"assortment":[[0,0]],"probability":0.5}"#));
        let back: CalendarDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_randomized(&fam).unwrap(), cal);
    }
}
