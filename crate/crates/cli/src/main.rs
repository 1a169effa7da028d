use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use statcal::derand::{derandomize, DerandConfig, Variant, DEFAULT_K_MAX};
use statcal::eval::{exact_expected_revenue, simulate, simulate_with_trace, Substitution};
use statcal::lp::{build_cdlp_n, build_cdlp_s, build_dlp_n, build_dlp_s, build_upper_bound_lp, item_contributions, LpKind, VarLabel};
use statcal::model::check_assumptions;
use statcal::policies::{guarantee_report, CalendarDoc, RandomizedCalendar};
use statcal::Instance;
use statcal_cli::experiment::{run_experiment, write_csv, ExperimentSpec};
use statcal_cli::{fixtures, load_instance, Plan, PlanOptions, Planner, PolicyName, Setting};

#[derive(Parser)]
#[command(name = "statcal", version, about = "Static price and assortment calendars")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo replications.
    #[arg(long, global = true, default_value_t = 10_000)]
    reps: u64,
    /// Substitution mode: static or dynamic.
    #[arg(long, global = true, default_value = "static")]
    mode: Substitution,
    /// Target loss for sampled de-randomization.
    #[arg(long, global = true, default_value_t = 0.1)]
    epsilon: f64,
    /// Cap on the per-candidate sample count.
    #[arg(long = "k-max", global = true, default_value_t = DEFAULT_K_MAX)]
    k_max: u64,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LpChoice {
    /// CDLP-S on stationary instances, CDLP-N otherwise.
    Upper,
    CdlpN,
    CdlpS,
    DlpS,
    DlpN,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Auto,
    Exact,
    Sampled,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Auto => Variant::Auto,
            VariantArg::Exact => Variant::Exact,
            VariantArg::Sampled => Variant::Sampled,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build and solve an LP; print the solution as JSON.
    Solve {
        /// Instance file, `fixture:<name>` or `synthetic:<setting>[:alpha[:v0L:v0H]]`.
        instance: String,
        #[arg(long, value_enum, default_value = "upper")]
        lp: LpChoice,
        /// Also write the LP in CPLEX LP format.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Emit the calendar JSON for a policy.
    Plan {
        instance: String,
        #[arg(long)]
        policy: PolicyName,
        /// Reservation probability for alg3.
        #[arg(long)]
        alg3_delta: Option<f64>,
    },
    /// Evaluate a policy or calendar file by simulation (and exactly with --exact).
    Simulate {
        instance: String,
        #[arg(long, conflicts_with = "calendar", required_unless_present = "calendar")]
        policy: Option<PolicyName>,
        #[arg(long)]
        calendar: Option<PathBuf>,
        #[arg(long)]
        exact: bool,
        /// Per-period CSV trace (sequential).
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        alg3_delta: Option<f64>,
    },
    /// Fix a randomized calendar period by period.
    Derandomize {
        instance: String,
        #[arg(long, conflicts_with = "calendar", required_unless_present = "calendar")]
        policy: Option<PolicyName>,
        #[arg(long)]
        calendar: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "auto")]
        variant: VariantArg,
        /// Fixed per-candidate sample count (overrides the formula).
        #[arg(long)]
        k: Option<u64>,
        /// JSON-lines decision log.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        alg3_delta: Option<f64>,
    },
    /// Run an experiment spec (or a built-in benchmark table) to CSV.
    Bench {
        /// Experiment spec JSON.
        #[arg(conflicts_with = "table", required_unless_present = "table")]
        spec: Option<PathBuf>,
        /// Built-in grid: stationary, nonstationary-small or nonstationary-big.
        #[arg(long)]
        table: Option<String>,
    },
    /// List, show or verify bundled fixtures.
    Fixtures {
        #[command(subcommand)]
        action: Option<FixtureAction>,
    },
    /// Report assumption violations and guarantee values.
    CheckAssumptions { instance: String },
}

#[derive(Subcommand)]
enum FixtureAction {
    List,
    Show { name: String },
    Verify { name: Option<String> },
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Result<()> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_calendar(path: &Path, inst: &Instance) -> Result<RandomizedCalendar> {
    let doc: CalendarDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    Ok(doc.to_randomized(inst.family())?)
}

fn plan_options(cli: &Cli, alg3_delta: Option<f64>) -> PlanOptions {
    let mut opts = PlanOptions {
        mode: cli.mode,
        alg3_delta,
        ..PlanOptions::default()
    };
    opts.derand.seed = cli.seed;
    opts.derand.epsilon = cli.epsilon;
    opts.derand.k_max = cli.k_max;
    opts.derand.mode = cli.mode;
    opts.high_low.seed = cli.seed;
    opts.high_low.sim_reps = cli.reps;
    opts
}

fn policy_calendar(planner: &Planner, policy: PolicyName) -> Result<RandomizedCalendar> {
    match planner.plan(policy)? {
        Plan::Calendar { randomized, .. } => Ok(randomized),
        _ => bail!("{policy} does not produce a static calendar"),
    }
}

#[derive(Serialize)]
struct SolveReport {
    kind: LpKind,
    objective: f64,
    iterations: usize,
    support: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    item_contributions: Option<Vec<f64>>,
}

fn describe(inst: &Instance, label: &VarLabel) -> String {
    let when = |p: &Option<usize>| p.map_or_else(String::new, |t| format!("t={t} "));
    match label {
        VarLabel::Assortment { period, index } => format!("{}{}", when(period), inst.family().get(*index)),
        VarLabel::Price { period, index } => format!("{}p={}", when(period), inst.prices()[*index]),
        VarLabel::Named(n) => n.clone(),
    }
}

fn solve(cli: &Cli, instance: &str, lp: LpChoice, dump: &Option<PathBuf>) -> Result<()> {
    let inst = load_instance(instance)?;
    let program = match lp {
        LpChoice::Upper => build_upper_bound_lp(&inst)?,
        LpChoice::CdlpN => build_cdlp_n(&inst)?,
        LpChoice::CdlpS => build_cdlp_s(&inst)?,
        LpChoice::DlpS => build_dlp_s(&inst)?,
        LpChoice::DlpN => build_dlp_n(&inst)?,
    };
    if let Some(p) = dump {
        std::fs::write(p, program.to_lp_format())?;
    }
    let sol = program.solve()?;
    let support = sol
        .support()
        .into_iter()
        .map(|k| (describe(&inst, &sol.labels[k]), sol.values[k]))
        .collect();
    let contributions = match sol.kind {
        LpKind::CdlpN | LpKind::CdlpS | LpKind::DlpN | LpKind::DlpS => item_contributions(&sol, &inst).ok(),
        _ => None,
    };
    emit_json(
        &SolveReport {
            kind: sol.kind,
            objective: sol.objective,
            iterations: sol.iterations,
            support,
            item_contributions: contributions,
        },
        &cli.out,
    )
}

fn plan(cli: &Cli, instance: &str, policy: PolicyName, alg3_delta: Option<f64>) -> Result<()> {
    let inst = load_instance(instance)?;
    let planner = Planner::new(&inst, plan_options(cli, alg3_delta));
    let cal = policy_calendar(&planner, policy)?;
    let mut doc = CalendarDoc::from_randomized(policy.as_str(), &cal, inst.family());
    doc.opt_lp = Some(planner.opt_lp()?);
    doc.guarantee = guarantee_report(&inst).ok();
    emit_json(&doc, &cli.out)
}

#[derive(Serialize)]
struct SimulateReport {
    #[serde(flatten)]
    stats: statcal::eval::RevenueStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<f64>,
    opt_lp: f64,
}

fn simulate_cmd(
    cli: &Cli,
    instance: &str,
    policy: Option<PolicyName>,
    calendar: &Option<PathBuf>,
    exact: bool,
    trace: &Option<PathBuf>,
    alg3_delta: Option<f64>,
) -> Result<()> {
    let inst = load_instance(instance)?;
    let planner = Planner::new(&inst, plan_options(cli, alg3_delta));
    let (stats, exact_value) = match (policy, calendar) {
        (Some(p), _) => {
            let plan = planner.plan(p)?;
            let stats = match (&plan, trace) {
                (Plan::Calendar { randomized, .. }, Some(path)) => {
                    simulate_with_trace(&inst, randomized, cli.mode, cli.reps, cli.seed, BufWriter::new(File::create(path)?))?
                }
                _ => plan.simulate(&inst, cli.mode, cli.reps, cli.seed)?,
            };
            let ex = if exact { Some(plan.exact_value(&inst, cli.mode, planner.options().state_cap)?) } else { None };
            (stats, ex)
        }
        (None, Some(path)) => {
            let cal = read_calendar(path, &inst)?;
            let stats = match trace {
                Some(t) => simulate_with_trace(&inst, &cal, cli.mode, cli.reps, cli.seed, BufWriter::new(File::create(t)?))?,
                None => simulate(&inst, &cal, cli.mode, cli.reps, cli.seed)?,
            };
            let ex = if exact { Some(exact_expected_revenue(&inst, &cal, cli.mode)?) } else { None };
            (stats, ex)
        }
        (None, None) => bail!("either --policy or --calendar is required"),
    };
    emit_json(
        &SimulateReport {
            stats,
            exact: exact_value,
            opt_lp: planner.opt_lp()?,
        },
        &cli.out,
    )
}

#[allow(clippy::too_many_arguments)]
fn derandomize_cmd(
    cli: &Cli,
    instance: &str,
    policy: Option<PolicyName>,
    calendar: &Option<PathBuf>,
    variant: VariantArg,
    k: Option<u64>,
    log_path: &Option<PathBuf>,
    alg3_delta: Option<f64>,
) -> Result<()> {
    let inst = load_instance(instance)?;
    let planner = Planner::new(&inst, plan_options(cli, alg3_delta));
    let base = match (policy, calendar) {
        (Some(p), _) => policy_calendar(&planner, p)?,
        (None, Some(path)) => read_calendar(path, &inst)?,
        (None, None) => bail!("either --policy or --calendar is required"),
    };
    let config = DerandConfig {
        epsilon: cli.epsilon,
        seed: cli.seed,
        k,
        k_max: cli.k_max,
        mode: cli.mode,
        variant: variant.into(),
        ..DerandConfig::default()
    };
    let opt_lp = planner.opt_lp()?;
    let outcome = derandomize(&base, &inst, opt_lp, &config)?;
    info!(
        "derandomized with {} evaluation{}",
        if outcome.exact { "exact" } else { "sampled" },
        outcome.samples.map(|k| format!(", K = {k}")).unwrap_or_default()
    );
    if let Some(p) = log_path {
        outcome.write_log(BufWriter::new(File::create(p)?))?;
    }
    let name = policy.map_or_else(|| "calendar".to_string(), |p| p.to_string());
    let mut doc = CalendarDoc::from_deterministic(format!("derand({name})"), &outcome.calendar, inst.family());
    doc.opt_lp = Some(opt_lp);
    emit_json(&doc, &cli.out)
}

fn bench(cli: &Cli, spec_path: &Option<PathBuf>, table: &Option<String>) -> Result<()> {
    let mut spec = match (spec_path, table) {
        (Some(p), _) => ExperimentSpec::from_json(&std::fs::read_to_string(p)?)?,
        (None, Some(t)) => {
            let setting: Setting = t.parse().map_err(statcal::Error::Invalid)?;
            let mut s = ExperimentSpec::table(setting);
            s.reps = cli.reps;
            s.seed = cli.seed;
            s.k_max = cli.k_max;
            s.epsilon = cli.epsilon;
            s
        }
        (None, None) => bail!("either a spec file or --table is required"),
    };
    if cli.out.is_some() {
        spec.output = cli.out.clone();
    }
    let rows = run_experiment(&spec)?;
    let w = output(&spec.output)?;
    write_csv(&rows, w)?;
    Ok(())
}

fn fixtures_cmd(cli: &Cli, action: &Option<FixtureAction>) -> Result<()> {
    match action.as_ref().unwrap_or(&FixtureAction::List) {
        FixtureAction::List => {
            let mut w = output(&cli.out)?;
            for f in fixtures::all() {
                writeln!(w, "{:<28} {}", f.name, f.summary)?;
            }
            w.flush()?;
            Ok(())
        }
        FixtureAction::Show { name } => {
            let f = fixtures::load(name).ok_or_else(|| statcal::Error::Invalid(format!("unknown fixture {name:?}")))?;
            emit_json(&f, &cli.out)
        }
        FixtureAction::Verify { name } => {
            let list: Vec<_> = match name {
                Some(n) => vec![fixtures::load(n).ok_or_else(|| statcal::Error::Invalid(format!("unknown fixture {n:?}")))?],
                None => fixtures::all(),
            };
            let mut w = output(&cli.out)?;
            let mut failed = 0;
            for f in &list {
                for c in f.verify()? {
                    let actual = c.actual.map_or_else(|| c.error.clone().unwrap_or_default(), |v| format!("{v:.12}"));
                    writeln!(
                        w,
                        "{} {}/{}: expected {:.12}, got {}",
                        if c.pass { "PASS" } else { "FAIL" },
                        f.name,
                        c.label,
                        c.expected,
                        actual
                    )?;
                    failed += usize::from(!c.pass);
                }
            }
            w.flush()?;
            if failed > 0 {
                return Err(statcal::Error::Numerical(format!("{failed} fixture check(s) failed")).into());
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct AssumptionOutput {
    assumptions: statcal::model::AssumptionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    guarantees: Option<statcal::policies::GuaranteeReport>,
}

fn check_cmd(cli: &Cli, instance: &str) -> Result<()> {
    let inst = load_instance(instance)?;
    emit_json(
        &AssumptionOutput {
            assumptions: check_assumptions(&inst)?,
            guarantees: guarantee_report(&inst).ok(),
        },
        &cli.out,
    )
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve { instance, lp, dump_lp } => solve(cli, instance, *lp, dump_lp),
        Command::Plan {
            instance,
            policy,
            alg3_delta,
        } => plan(cli, instance, *policy, *alg3_delta),
        Command::Simulate {
            instance,
            policy,
            calendar,
            exact,
            trace,
            alg3_delta,
        } => simulate_cmd(cli, instance, *policy, calendar, *exact, trace, *alg3_delta),
        Command::Derandomize {
            instance,
            policy,
            calendar,
            variant,
            k,
            log,
            alg3_delta,
        } => derandomize_cmd(cli, instance, *policy, calendar, *variant, *k, log, *alg3_delta),
        Command::Bench { spec, table } => bench(cli, spec, table),
        Command::Fixtures { action } => fixtures_cmd(cli, action),
        Command::CheckAssumptions { instance } => check_cmd(cli, instance),
    }
}

/// 2 for bad input, 3 for numerical failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<statcal::Error>()) {
        Some(e) if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
