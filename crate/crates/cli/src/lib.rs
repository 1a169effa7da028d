//! Experiment runner and fixture library on top of `statcal`.

pub mod experiment;
pub mod fixtures;
pub mod policy;
pub mod synthetic;

pub use experiment::{run_experiment, write_csv, ExperimentSpec, InstanceSource, ResultRow, CSV_HEADER};
pub use fixtures::Fixture;
pub use policy::{Plan, PlanOptions, Planner, PolicyName};
pub use synthetic::Setting;

use statcal::model::build_instance;
use statcal::{Instance, InstanceConfig};

/// Resolve `fixture:<name>` or a path to an instance JSON file.
pub fn load_instance_config(reference: &str) -> anyhow::Result<InstanceConfig> {
    if let Some(name) = reference.strip_prefix("fixture:") {
        return fixtures::load(name)
            .map(|f| f.instance)
            .ok_or_else(|| statcal::Error::Invalid(format!("unknown fixture {name:?}")).into());
    }
    if let Some(rest) = reference.strip_prefix("synthetic:") {
        // synthetic:<setting>[:alpha[:v0L:v0H]]
        let parts: Vec<&str> = rest.split(':').collect();
        let setting: Setting = parts[0].parse().map_err(statcal::Error::Invalid)?;
        let num = |k: usize, d: f64| -> anyhow::Result<f64> {
            parts.get(k).map_or(Ok(d), |s| s.parse::<f64>().map_err(|e| statcal::Error::Invalid(e.to_string()).into()))
        };
        return Ok(synthetic::config(setting, num(1, 1.0)?, num(2, 0.0)?, num(3, 0.0)?));
    }
    let text = std::fs::read_to_string(reference)?;
    Ok(InstanceConfig::from_json(&text)?)
}

pub fn load_instance(reference: &str) -> anyhow::Result<Instance> {
    Ok(build_instance(&load_instance_config(reference)?)?)
}
