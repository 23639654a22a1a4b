//! Command-line front end: argument parsing, config overrides and subcommand dispatch.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gnb_core::analytics::{bound_violations, evaluate};
use gnb_core::config::{Format, GridConfig, RunConfig, SweepConfig};
use gnb_core::report::{self, fmt_num};
use gnb_core::simulator::{simulate, trace, SimConfig};
use gnb_core::sweep::{frontier, linspace, sweep, SweepVariable, BOUND_SLACK, DEFAULT_FRONTIER_POINTS};
use gnb_core::Error;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

const DEFAULT_BOUND_POINTS: usize = 101;
const DEFAULT_TRACE_STEPS: u64 = 1000;

#[derive(Debug, Parser)]
#[command(name = "gnb", version, about = "Availability and consumed fidelity of a one-good, n-bad memory entanglement buffer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form metrics and bounds as JSON.
    Eval(Options),
    /// Bound envelopes over a grid of effective generation probabilities.
    Bounds(Options),
    /// Closed-form metrics over a grid of one parameter.
    Sweep(Options),
    /// Availability/fidelity pairs over a grid of purification probabilities, per policy.
    Frontier(Options),
    /// Monte-Carlo estimates with replication standard errors.
    Simulate(Options),
    /// Closed form next to simulation with z-scores; exits with 1 when any |z| > 4.
    Validate(Options),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Options {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulated ticks per replication.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Number of simulation replications.
    #[arg(long)]
    pub reps: Option<u32>,
    /// Sweep variable: q, p_gen, gamma, p_con or f_new.
    #[arg(long)]
    pub var: Option<String>,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Print the effective configuration (after overrides) and exit.
    #[arg(long)]
    pub dump_config: bool,
    /// Also write a single-trajectory CSV dump (simulate only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub trace_steps: Option<u64>,
}

/// Result of a successful dispatch.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub diagnostics: Vec<String>,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Self {
            output,
            diagnostics: Vec::new(),
            exit_code: EXIT_OK,
        }
    }
}

pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_DOMAIN,
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Bounds(_) => "bounds",
            Command::Sweep(_) => "sweep",
            Command::Frontier(_) => "frontier",
            Command::Simulate(_) => "simulate",
            Command::Validate(_) => "validate",
        }
    }

    pub fn options(&self) -> &Options {
        match self {
            Command::Eval(o)
            | Command::Bounds(o)
            | Command::Sweep(o)
            | Command::Frontier(o)
            | Command::Simulate(o)
            | Command::Validate(o) => o,
        }
    }
}

/// Reads the config file and applies command-line overrides.
pub fn load_config(command: &Command) -> gnb_core::Result<RunConfig> {
    let opts = command.options();
    let text = std::fs::read_to_string(&opts.config).map_err(|e| {
        Error::Config(format!("cannot read {}: {e}", opts.config.display()))
    })?;
    let mut cfg = RunConfig::from_json(&text)
        .map_err(|e| Error::Config(format!("{}: {}", opts.config.display(), strip_prefix(&e))))?;
    apply_overrides(command, &mut cfg)?;
    Ok(cfg)
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}

fn apply_overrides(command: &Command, cfg: &mut RunConfig) -> gnb_core::Result<()> {
    let o = command.options();
    if let Some(path) = &o.out {
        cfg.output.path = Some(path.display().to_string());
    }
    if let Some(f) = o.format {
        cfg.output.format = Some(match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        });
    }
    if o.seed.is_some() || o.steps.is_some() || o.reps.is_some() {
        let sim = cfg.sim.get_or_insert_with(SimConfig::default);
        if let Some(seed) = o.seed {
            sim.seed = seed;
        }
        if let Some(steps) = o.steps {
            sim.max_steps = steps;
        }
        if let Some(reps) = o.reps {
            sim.replications = reps;
        }
    }
    let grid_given = o.from.is_some() || o.to.is_some() || o.grid.is_some();
    match command {
        Command::Sweep(_) if grid_given || o.var.is_some() => {
            let current = cfg.sweep.clone();
            let variable = match &o.var {
                Some(name) => SweepVariable::parse(name)?,
                None => current
                    .as_ref()
                    .map(|s| s.variable)
                    .ok_or_else(|| Error::Config("--var is required without a sweep block".into()))?,
            };
            let (from, to, steps) = current
                .map(|s| (s.from, s.to, s.steps))
                .unwrap_or((0.0, 1.0, 11));
            cfg.sweep = Some(SweepConfig {
                variable,
                from: o.from.unwrap_or(from),
                to: o.to.unwrap_or(to),
                steps: o.grid.unwrap_or(steps),
            });
        }
        Command::Frontier(_) if grid_given => {
            cfg.frontier = Some(override_grid(cfg.frontier.take(), o, DEFAULT_FRONTIER_POINTS));
        }
        Command::Bounds(_) if grid_given => {
            cfg.bounds = Some(override_grid(cfg.bounds.take(), o, DEFAULT_BOUND_POINTS));
        }
        _ => {}
    }
    Ok(())
}

fn override_grid(current: Option<GridConfig>, o: &Options, default_steps: usize) -> GridConfig {
    let base = current.unwrap_or(GridConfig {
        from: 0.0,
        to: 1.0,
        steps: default_steps,
    });
    GridConfig {
        from: o.from.unwrap_or(base.from),
        to: o.to.unwrap_or(base.to),
        steps: o.grid.unwrap_or(base.steps),
    }
}

fn grid(cfg: Option<&GridConfig>, default_steps: usize) -> gnb_core::Result<Vec<f64>> {
    match cfg {
        Some(g) => linspace(g.from, g.to, g.steps),
        None => linspace(0.0, 1.0, default_steps),
    }
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    policy_label: &'a str,
    #[serde(rename = "A")]
    availability: f64,
    #[serde(rename = "F_bar")]
    avg_fidelity: f64,
    expected_occupied_time: f64,
    expected_generation_time: f64,
    bounds: gnb_core::analytics::Bounds,
    bound_violations: Vec<String>,
    evaluation: &'a gnb_core::analytics::Evaluation,
}

#[derive(Serialize)]
struct SweepJsonRow {
    variable: &'static str,
    value: f64,
    policy_label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<gnb_core::sweep::RowValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Runs one subcommand against a resolved configuration.
pub fn dispatch(command: &Command, cfg: &RunConfig) -> gnb_core::Result<Outcome> {
    let params = cfg.system.params()?;
    let format = cfg.output.format;
    match command {
        Command::Eval(_) => {
            let policy = cfg.primary_policy()?.build(params.n, &params.new_link)?;
            let e = evaluate(&params, &policy)?;
            let violations = bound_violations(
                &e.metrics,
                &e.bounds,
                policy.improves_fresh(params.f_new()),
                BOUND_SLACK,
            );
            if !violations.is_empty() {
                return Err(Error::Evaluation(format!(
                    "bound containment failed: {}",
                    violations.join("; ")
                )));
            }
            let output = if format == Some(Format::Csv) {
                let mut s = String::from(
                    "A,F_bar,E_T_occ,E_T_gen,A_lower,A_upper,F_lower,F_upper,policy_label\n",
                );
                let m = e.metrics;
                let b = e.bounds;
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    fmt_num(m.availability),
                    fmt_num(m.avg_fidelity),
                    fmt_num(m.expected_occupied_time),
                    fmt_num(m.expected_generation_time),
                    fmt_num(b.availability_lower),
                    fmt_num(b.availability_upper),
                    fmt_num(b.fidelity_lower),
                    fmt_num(b.fidelity_upper),
                    e.policy_label
                );
                s
            } else {
                report::to_json(&EvalOutput {
                    policy_label: &e.policy_label,
                    availability: e.metrics.availability,
                    avg_fidelity: e.metrics.avg_fidelity,
                    expected_occupied_time: e.metrics.expected_occupied_time,
                    expected_generation_time: e.metrics.expected_generation_time,
                    bounds: e.bounds,
                    bound_violations: violations,
                    evaluation: &e,
                })?
            };
            Ok(Outcome::ok(output))
        }
        Command::Bounds(_) => {
            let points = report::bound_curve(
                params.p_con,
                params.gamma,
                params.f_new(),
                &grid(cfg.bounds.as_ref(), DEFAULT_BOUND_POINTS)?,
            );
            let output = match format {
                Some(Format::Json) => report::to_json(&points)?,
                _ => report::bounds_csv(&points),
            };
            Ok(Outcome::ok(output))
        }
        Command::Sweep(_) => {
            let s = cfg
                .sweep
                .as_ref()
                .ok_or_else(|| Error::Config("sweep needs a sweep block or --var".into()))?;
            let rows = sweep(
                &params,
                cfg.primary_policy()?,
                s.variable,
                &linspace(s.from, s.to, s.steps)?,
            );
            let (csv, diagnostics) = report::sweep_csv(&rows);
            let output = match format {
                Some(Format::Json) => {
                    let json: Vec<SweepJsonRow> = rows
                        .into_iter()
                        .map(|r| SweepJsonRow {
                            variable: r.variable.name(),
                            value: r.value,
                            policy_label: r.policy_label,
                            error: r.outcome.as_ref().err().map(|e| format!("{}: {e}", e.kind())),
                            values: r.outcome.ok(),
                        })
                        .collect();
                    report::to_json(&json)?
                }
                _ => csv,
            };
            Ok(Outcome {
                output,
                diagnostics,
                exit_code: EXIT_OK,
            })
        }
        Command::Frontier(_) => {
            let rows = frontier(
                &params,
                &cfg.frontier_policies()?,
                &grid(cfg.frontier.as_ref(), DEFAULT_FRONTIER_POINTS)?,
            )?;
            let output = match format {
                Some(Format::Json) => report::to_json(&rows)?,
                _ => report::frontier_csv(&rows),
            };
            Ok(Outcome::ok(output))
        }
        Command::Simulate(o) => {
            let sim_cfg = cfg
                .sim
                .ok_or_else(|| Error::Config("simulate needs a sim block or --steps/--reps/--seed".into()))?;
            let policy = cfg.primary_policy()?.build(params.n, &params.new_link)?;
            let result = simulate(&params, &policy, &sim_cfg)?;
            if let Some(path) = &o.trace {
                let rows = trace(
                    &params,
                    &policy,
                    sim_cfg.seed,
                    o.trace_steps.unwrap_or(DEFAULT_TRACE_STEPS),
                )?;
                std::fs::write(path, report::trace_csv(&rows)).map_err(|e| {
                    Error::Config(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            let output = if format == Some(Format::Csv) {
                let mut s = String::from("estimator,value,standard_error,policy_label\n");
                for (name, est) in [
                    ("A_consumer", &result.availability_consumer),
                    ("F_bar_consumer", &result.fidelity_consumer),
                    ("A_time_average", &result.availability_time),
                    ("F_bar_time_average", &result.fidelity_time),
                ] {
                    let _ = writeln!(
                        s,
                        "{name},{},{},{}",
                        est.pooled.map(fmt_num).unwrap_or_default(),
                        fmt_num(est.standard_error),
                        result.policy_label
                    );
                }
                s
            } else {
                report::to_json(&result)?
            };
            Ok(Outcome {
                output,
                diagnostics: result.diagnostics.clone(),
                exit_code: EXIT_OK,
            })
        }
        Command::Validate(_) => {
            let sim_cfg = cfg
                .sim
                .ok_or_else(|| Error::Config("validate needs a sim block or --steps/--reps/--seed".into()))?;
            let policy = cfg.primary_policy()?.build(params.n, &params.new_link)?;
            let e = evaluate(&params, &policy)?;
            let result = simulate(&params, &policy, &sim_cfg)?;
            let rep = report::compare(&e, &result);
            let output = match format {
                Some(Format::Csv) => report::validation_csv(&rep),
                _ => report::to_json(&rep)?,
            };
            let mut diagnostics = result.diagnostics.clone();
            if !rep.passed {
                diagnostics.push(format!(
                    "validation failed: some |z| exceeds {}",
                    report::Z_THRESHOLD
                ));
            }
            Ok(Outcome {
                output,
                diagnostics,
                exit_code: if rep.passed { EXIT_OK } else { EXIT_VALIDATION },
            })
        }
    }
}

/// Full invocation: parse, load, dispatch and write. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cfg = match load_config(&cli.command) {
        Ok(cfg) => cfg,
        Err(e) => return report_error(&e),
    };
    if cli.command.options().dump_config {
        println!("{}", cfg.to_json());
        return EXIT_OK;
    }
    let outcome = match dispatch(&cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => return report_error(&e),
    };
    for d in &outcome.diagnostics {
        eprintln!("{}: {d}", cli.command.name());
    }
    match &cfg.output.path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.output) {
                return report_error(&Error::Config(format!("cannot write {path}: {e}")));
            }
        }
        None => print!("{}", outcome.output),
    }
    outcome.exit_code
}

fn report_error(e: &Error) -> i32 {
    eprintln!("error[{}]: {e}", e.kind());
    exit_code_for(e)
}
