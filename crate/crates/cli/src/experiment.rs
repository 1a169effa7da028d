//! Experiment grids: (α, no-purchase pair, policy) cells evaluated by
//! simulation and written as CSV.

use std::io::Write;
use std::path::PathBuf;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statcal::derand::{DerandConfig, Variant, DEFAULT_K_MAX};
use statcal::eval::Substitution;
use statcal::model::{build_instance, ChoiceConfig};
use statcal::policies::HighLowOptions;
use statcal::{InstanceConfig, DEFAULT_STATE_CAP};

use crate::fixtures;
use crate::policy::{PlanOptions, Planner, PolicyName};
use crate::synthetic::{self, Setting};

pub const CSV_HEADER: &str = "instance,alpha,v0L,v0H,policy,mean,ci_half,lp_ub,pct_of_ub,reps,seed";
pub const DEFAULT_REPS: u64 = 10_000;

/// Where the base instance comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum InstanceSource {
    /// The three-item benchmark; α and the no-purchase pair define each cell.
    Synthetic { setting: Setting },
    Fixture { name: String },
    File { path: PathBuf },
    Inline { config: Box<InstanceConfig> },
}

fn default_reps() -> u64 {
    DEFAULT_REPS
}

fn default_k_max() -> u64 {
    DEFAULT_K_MAX
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_mode() -> Substitution {
    Substitution::Static
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub instance: InstanceSource,
    /// Inventory scaling factors. Empty means α = 1 for non-synthetic sources.
    #[serde(default)]
    pub alphas: Vec<f64>,
    /// `(v0_low, v0_high)` pairs; only meaningful for mixture-MNL instances.
    #[serde(default)]
    pub no_purchase: Vec<(f64, f64)>,
    #[serde(default)]
    pub policies: Vec<PolicyName>,
    #[serde(default = "default_reps")]
    pub reps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: Substitution,
    /// Fixed reservation probability for alg3 (formula when absent).
    #[serde(default)]
    pub alg3_delta: Option<f64>,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Policies reported in each benchmark table.
pub fn table_policies(setting: Setting) -> Vec<PolicyName> {
    use PolicyName::*;
    match setting {
        Setting::Stationary => vec![LpUb, Myopic, LpSol, DerandLp],
        _ => vec![LpUb, Myopic, LpSol, Alg2, Alg3, DerandLp, DerandAlg2, DerandAlg3],
    }
}

/// Reservation probability used for alg3 on the benchmark grid, where the
/// formula exceeds 1 at the small inventories involved.
pub const BENCH_ALG3_DELTA: f64 = 0.05;

impl ExperimentSpec {
    /// Full benchmark grid for one setting.
    pub fn table(setting: Setting) -> Self {
        Self {
            name: Some(setting.name().to_string()),
            instance: InstanceSource::Synthetic { setting },
            alphas: synthetic::ALPHAS.to_vec(),
            no_purchase: synthetic::NO_PURCHASE.to_vec(),
            policies: table_policies(setting),
            reps: DEFAULT_REPS,
            seed: 0,
            mode: Substitution::Static,
            alg3_delta: Some(BENCH_ALG3_DELTA),
            k_max: DEFAULT_K_MAX,
            epsilon: 0.1,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> statcal::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match &self.instance {
            InstanceSource::Synthetic { setting } => setting.name().to_string(),
            InstanceSource::Fixture { name } => name.clone(),
            InstanceSource::File { path } => path.display().to_string(),
            InstanceSource::Inline { config } => config.name.clone().unwrap_or_else(|| "inline".into()),
        }
    }

    fn base_config(&self) -> statcal::Result<Option<InstanceConfig>> {
        Ok(match &self.instance {
            InstanceSource::Synthetic { .. } => None,
            InstanceSource::Fixture { name } => Some(
                fixtures::load(name)
                    .ok_or_else(|| statcal::Error::Invalid(format!("unknown fixture {name:?}")))?
                    .instance,
            ),
            InstanceSource::File { path } => Some(InstanceConfig::from_json(&std::fs::read_to_string(path)?)?),
            InstanceSource::Inline { config } => Some((**config).clone()),
        })
    }

    /// The grid of `(α, Option<(v0L, v0H)>)` cells in output order.
    fn cells(&self) -> Vec<(f64, Option<(f64, f64)>)> {
        let alphas = if self.alphas.is_empty() { vec![1.0] } else { self.alphas.clone() };
        let pairs: Vec<Option<(f64, f64)>> = if self.no_purchase.is_empty() {
            if matches!(self.instance, InstanceSource::Synthetic { .. }) {
                vec![Some((0.0, 0.0))]
            } else {
                vec![None]
            }
        } else {
            self.no_purchase.iter().copied().map(Some).collect()
        };
        alphas
            .iter()
            .flat_map(|&a| pairs.iter().map(move |&p| (a, p)))
            .collect()
    }

    fn cell_config(&self, base: Option<&InstanceConfig>, alpha: f64, v0: Option<(f64, f64)>) -> statcal::Result<InstanceConfig> {
        if let InstanceSource::Synthetic { setting } = self.instance {
            let (l, h) = v0.unwrap_or((0.0, 0.0));
            return Ok(synthetic::config(setting, alpha, l, h));
        }
        let mut cfg = base.expect("non-synthetic sources carry a config").clone();
        cfg.inventories.iter_mut().for_each(|b| *b *= alpha);
        if let Some((l, h)) = v0 {
            match &mut cfg.choice_model {
                ChoiceConfig::MixtureMnl(m) => {
                    m.v0_low = l;
                    m.v0_high = h;
                }
                _ => return Err(statcal::Error::Invalid("no-purchase pairs need a mixture-MNL instance".into())),
            }
        }
        Ok(cfg)
    }

    fn plan_options(&self) -> PlanOptions {
        PlanOptions {
            mode: self.mode,
            alg3_delta: self.alg3_delta,
            derand: DerandConfig {
                epsilon: self.epsilon,
                seed: self.seed,
                k: None,
                k_max: self.k_max,
                mode: self.mode,
                variant: Variant::Auto,
                ..DerandConfig::default()
            },
            high_low: HighLowOptions {
                sim_reps: self.reps,
                seed: self.seed,
                ..HighLowOptions::default()
            },
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// One output row. `None` fields print as `NA`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub instance: String,
    pub alpha: f64,
    pub v0: Option<(f64, f64)>,
    pub policy: PolicyName,
    pub mean: Option<f64>,
    pub ci_half: Option<f64>,
    pub lp_ub: Option<f64>,
    pub pct_of_ub: Option<f64>,
    pub reps: u64,
    pub seed: u64,
    /// Why the cell has no value, if it has none.
    pub note: Option<String>,
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>, prec: usize| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.prec$}"));
        let (v0l, v0h) = match self.v0 {
            Some((l, h)) => (format!("{l}"), format!("{h}")),
            None => ("NA".into(), "NA".into()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.alpha,
            v0l,
            v0h,
            self.policy,
            opt(self.mean, 4),
            opt(self.ci_half, 4),
            opt(self.lp_ub, 4),
            opt(self.pct_of_ub, 2),
            self.reps,
            self.seed
        )
    }
}

fn run_cell(spec: &ExperimentSpec, label: &str, cfg: &InstanceConfig, alpha: f64, v0: Option<(f64, f64)>) -> Vec<ResultRow> {
    let row = |policy, mean, ci, lp, note: Option<String>| ResultRow {
        instance: label.to_string(),
        alpha,
        v0,
        policy,
        mean,
        ci_half: ci,
        lp_ub: lp,
        pct_of_ub: match (mean, lp) {
            (Some(m), Some(u)) if u > 0.0 => Some(100.0 * m / u),
            _ => None,
        },
        reps: spec.reps,
        seed: spec.seed,
        note,
    };
    let inst = match build_instance(cfg) {
        Ok(i) => i,
        Err(e) => {
            warn!("alpha={alpha} v0={v0:?}: {e}");
            return spec.policies.iter().map(|&p| row(p, None, None, None, Some(e.to_string()))).collect();
        }
    };
    let planner = Planner::new(&inst, spec.plan_options());
    let lp = match planner.opt_lp() {
        Ok(v) => Some(v),
        Err(e) => {
            warn!("alpha={alpha} v0={v0:?}: LP failed: {e}");
            None
        }
    };
    spec.policies
        .iter()
        .map(|&p| {
            let result = planner
                .plan(p)
                .and_then(|plan| plan.simulate(&inst, spec.mode, spec.reps, spec.seed));
            match result {
                Ok(stats) => row(p, Some(stats.mean), Some(stats.half_width), lp, None),
                Err(e) => {
                    warn!("alpha={alpha} v0={v0:?} {p}: {e}");
                    row(p, None, None, lp, Some(e.to_string()))
                }
            }
        })
        .collect()
}

/// Evaluate every cell (in parallel) and return rows in grid order.
pub fn run_experiment(spec: &ExperimentSpec) -> statcal::Result<Vec<ResultRow>> {
    let label = spec.label();
    let base = spec.base_config()?;
    let cells = spec.cells();
    let configs = cells
        .iter()
        .map(|&(a, v)| spec.cell_config(base.as_ref(), a, v))
        .collect::<statcal::Result<Vec<_>>>()?;
    info!("{label}: {} cells x {} policies, {} reps", cells.len(), spec.policies.len(), spec.reps);
    let rows: Vec<Vec<ResultRow>> = cells
        .par_iter()
        .zip(configs.par_iter())
        .map(|(&(a, v), cfg)| run_cell(spec, &label, cfg, a, v))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv_line())?;
    }
    Ok(())
}
