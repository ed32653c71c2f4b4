//! The `pgg-evo` command line.
//!
//! Every subcommand accepts `--config <file.json>`, a JSON object with the
//! same field names as the long flags (underscores instead of dashes).
//! Flags given on the command line override the file; unknown keys are
//! rejected. Reports embed the fully resolved configuration.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::{self, FocalContext, Mode};
use crate::error::{Error, Result};
use crate::game::{EnvParams, GameParams, StrategyId};
use crate::sim::{self, Grouping, MutationKernel, Semantics, SimConfig, UpdateRule};
use crate::stability::{self, SweepTable};
use crate::validate;

pub const THREADS_ENV: &str = "PGG_EVO_THREADS";

#[derive(Debug, Parser)]
#[command(name = "pgg-evo", version, about = "Repeated public goods games with conditional cooperators and mistakes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected repeated-game payoff of a focal strategy among incumbents.
    Payoff(Invocation<PayoffArgs>),
    /// Stability verdict of a monomorphic population.
    Stability(Invocation<StabilityArgs>),
    /// Mistake-rate band(s) of evolutionary stability.
    Band(Invocation<BandArgs>),
    /// Discriminant curves over a mistake-rate grid, as CSV.
    Sweep(Invocation<SweepArgs>),
    /// Population dynamics, or a paired drift experiment with `--trials`.
    Simulate(Invocation<SimulateArgs>),
    /// Run the self-check suite.
    Validate(Invocation<ValidateArgs>),
}

#[derive(Debug, Args)]
pub struct Invocation<T: Args> {
    /// JSON file with default values for this command's options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the main artifact here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub args: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PayoffArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub incumbent_k: Option<u32>,
    #[arg(long)]
    pub focal_k: Option<u32>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Also estimate the value from this many simulated episodes.
    #[arg(long)]
    pub oracle: Option<u64>,
    #[arg(long, value_enum)]
    pub semantics: Option<Semantics>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// A single strategy; all `1..n-1` with the ordering report when absent.
    #[arg(long)]
    pub k: Option<u32>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<u32>>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub eps_max: Option<f64>,
    /// Payoff constants for the threshold column; both or neither.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Also write a gnuplot script for the CSV to this path.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateArgs {
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub update: Option<UpdateRule>,
    #[arg(long)]
    pub selection: Option<f64>,
    #[arg(long)]
    pub mutation_rate: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<MutationKernel>,
    #[arg(long)]
    pub generations: Option<u64>,
    #[arg(long)]
    pub episodes_per_generation: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub semantics: Option<Semantics>,
    #[arg(long, value_enum)]
    pub grouping: Option<Grouping>,
    /// Initial counts as `k:count` pairs, e.g. `9:90,10:10`.
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    pub initial: Option<Vec<(u32, usize)>>,
    /// Run a seed-paired drift experiment with this many trials.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateArgs {
    /// Smaller Monte Carlo grid and replication counts.
    #[arg(long)]
    #[serde(default)]
    pub quick: bool,
}

fn parse_count(s: &str) -> std::result::Result<(u32, usize), String> {
    let (k, c) = s.split_once(':').ok_or_else(|| format!("expected k:count, got {s:?}"))?;
    Ok((
        k.trim().parse().map_err(|e| format!("bad strategy {k:?}: {e}"))?,
        c.trim().parse().map_err(|e| format!("bad count {c:?}: {e}"))?,
    ))
}

/// Overlays command-line values on the optional JSON config file.
fn resolve<T: Serialize + DeserializeOwned + Clone>(flags: &T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else {
        return Ok(flags.clone());
    };
    let text = fs::read_to_string(path)?;
    let mut base: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let obj = base
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("{}: expected a JSON object", path.display())))?;
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (key, value) in given {
            if !value.is_null() && value != Value::Bool(false) {
                obj.insert(key, value);
            }
        }
    }
    serde_json::from_value(base).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required option --{flag}")))
}

fn game(n: Option<u32>, b: Option<f64>, c: Option<f64>) -> Result<GameParams> {
    GameParams::new(need(n, "n")?, need(b, "b")?, need(c, "c")?)
}

/// Exit status for an error: 2 for usage and domain problems, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) | Error::Config(_) | Error::Json(_) => 2,
        Error::Divergence(_) | Error::Numeric { .. } | Error::Io(_) => 1,
    }
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json(output: Option<&Path>, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(output, text.as_bytes())
}

fn with_config<T: Serialize>(config: &T, report: impl Serialize) -> Result<Value> {
    let mut value = serde_json::to_value(report)?;
    if let Value::Object(map) = &mut value {
        map.insert("config".into(), serde_json::to_value(config)?);
        Ok(value)
    } else {
        Ok(json!({ "config": config, "result": value }))
    }
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Payoff(inv) => payoff(&inv),
        Command::Stability(inv) => stability_cmd(&inv),
        Command::Band(inv) => band(&inv),
        Command::Sweep(inv) => sweep(&inv),
        Command::Simulate(inv) => simulate(&inv),
        Command::Validate(inv) => validate_cmd(&inv),
    }
}

fn payoff(inv: &Invocation<PayoffArgs>) -> Result<i32> {
    let mut a = resolve(&inv.args, inv.config.as_deref())?;
    let params = game(a.n, a.b, a.c)?;
    let env = EnvParams::new(need(a.delta, "delta")?, need(a.epsilon, "epsilon")?)?;
    let n = params.n();
    let incumbent = StrategyId::new(need(a.incumbent_k, "incumbent-k")?, n)?;
    let focal = StrategyId::new(need(a.focal_k, "focal-k")?, n)?;
    a.mode.get_or_insert(Mode::Paper);
    let ctx = FocalContext::new(incumbent, focal, a.mode.unwrap_or_default());
    let case = ctx.case(n)?;
    let value = analytic::v_err(&ctx, &params, &env)?;
    let mut report = json!({ "case": case.letter().to_string(), "value": value });
    if let Some(reps) = a.oracle {
        let semantics = *a.semantics.get_or_insert(Semantics::PaperAbsorbing);
        let seed = *a.seed.get_or_insert(0);
        let est = sim::estimate_v(incumbent, focal, &params, &env, reps, semantics, seed)?;
        report["oracle"] = json!({
            "mean": est.mean,
            "std_error": est.std_error,
            "half_width": est.half_width,
            "replications": est.replications,
            "z_score": est.z_score(value),
        });
    }
    emit_json(inv.output.as_deref(), &with_config(&a, report)?)?;
    Ok(0)
}

fn stability_cmd(inv: &Invocation<StabilityArgs>) -> Result<i32> {
    let a = resolve(&inv.args, inv.config.as_deref())?;
    let params = game(a.n, a.b, a.c)?;
    let env = EnvParams::new(need(a.delta, "delta")?, need(a.epsilon, "epsilon")?)?;
    let k = StrategyId::new(need(a.k, "k")?, params.n())?;
    let verdict = stability::classify(k, &params, &env)?;
    let mut report = serde_json::to_value(&verdict)?;
    report["invaders"] = serde_json::to_value(verdict.invaders().collect::<Vec<_>>())?;
    emit_json(inv.output.as_deref(), &with_config(&a, report)?)?;
    Ok(0)
}

fn band(inv: &Invocation<BandArgs>) -> Result<i32> {
    let a = resolve(&inv.args, inv.config.as_deref())?;
    let params = game(a.n, a.b, a.c)?;
    let delta = need(a.delta, "delta")?;
    let report = match a.k {
        Some(k) => {
            let k = StrategyId::new(k, params.n())?;
            serde_json::to_value(stability::ess_epsilon_band(k, &params, delta)?)?
        }
        None => serde_json::to_value(stability::band_ordering_report(&params, delta)?)?,
    };
    emit_json(inv.output.as_deref(), &with_config(&a, report)?)?;
    Ok(0)
}

fn sweep(inv: &Invocation<SweepArgs>) -> Result<i32> {
    let mut a = resolve(&inv.args, inv.config.as_deref())?;
    let n = *a.n.get_or_insert(10);
    let deltas = a.deltas.get_or_insert_with(|| vec![1.0, 0.9, 0.8]).clone();
    let ks = a.ks.get_or_insert_with(|| (1..n).collect()).clone();
    let points = *a.points.get_or_insert(stability::DEFAULT_GRID_POINTS);
    let lo = *a.eps_min.get_or_insert(1e-4);
    let hi = *a.eps_max.get_or_insert(1.0 - 1e-4);
    let params = match (a.b, a.c) {
        (Some(b), Some(c)) => Some(GameParams::new(n, b, c)?),
        (None, None) => None,
        _ => return Err(Error::Config("give both --b and --c or neither".into())),
    };
    if points < 2 {
        return Err(Error::Config("--points must be at least 2".into()));
    }
    let grid = crate::roots::linear_grid(points, lo, hi);
    let table = stability::sweep_delta_curves(n, &deltas, &ks, &grid, params.as_ref())?;
    match *a.format.get_or_insert(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            emit(inv.output.as_deref(), &buf)?;
        }
        Format::Json => emit_json(inv.output.as_deref(), &with_config(&a, &table)?)?,
    }
    if let Some(script) = &a.gnuplot {
        let csv = inv.output.as_deref().map_or("sweep.csv".into(), |p| p.display().to_string());
        fs::write(script, SweepTable::gnuplot_script(&table, &csv))?;
    }
    Ok(0)
}

fn simulate(inv: &Invocation<SimulateArgs>) -> Result<i32> {
    let mut a = resolve(&inv.args, inv.config.as_deref())?;
    let params = GameParams::new(*a.n.get_or_insert(10), *a.b.get_or_insert(10.0), *a.c.get_or_insert(5.0))?;
    let env = EnvParams::new(*a.delta.get_or_insert(0.9), *a.epsilon.get_or_insert(0.0))?;
    let cfg = SimConfig {
        population: *a.population.get_or_insert(100),
        params,
        env,
        update: *a.update.get_or_insert(UpdateRule::Imitation),
        selection: *a.selection.get_or_insert(1.0),
        mutation_rate: *a.mutation_rate.get_or_insert(1e-3),
        kernel: *a.kernel.get_or_insert(MutationKernel::Uniform),
        generations: *a.generations.get_or_insert(1000),
        episodes_per_generation: *a.episodes_per_generation.get_or_insert(1),
        seed: *a.seed.get_or_insert(0),
        semantics: *a.semantics.get_or_insert(Semantics::PaperAbsorbing),
        initial: a.initial.as_ref().map(|pairs| {
            let mut m = BTreeMap::new();
            for (k, c) in pairs {
                *m.entry(*k).or_insert(0) += *c;
            }
            m
        }),
        grouping: *a.grouping.get_or_insert(Grouping::Partition),
    };
    let format = *a.format.get_or_insert(Format::Csv);
    if let Some(trials) = a.trials {
        let summary = sim::drift_experiment(&cfg, trials)?;
        emit_json(inv.output.as_deref(), &with_config(&a, summary)?)?;
        return Ok(0);
    }
    let trace = sim::evolve(&cfg)?;
    let summary = json!({
        "generations": cfg.generations,
        "final_counts": trace.final_counts,
        "final_frequencies": trace.final_frequencies(),
        "events": trace.events,
    });
    match (format, inv.output.as_deref()) {
        (Format::Csv, Some(path)) => {
            let mut buf = Vec::new();
            trace.write_csv(&mut buf)?;
            fs::write(path, buf)?;
            emit_json(None, &with_config(&a, summary)?)?;
        }
        (Format::Csv, None) => {
            let mut buf = Vec::new();
            trace.write_csv(&mut buf)?;
            emit(None, &buf)?;
        }
        (Format::Json, out) => {
            let mut report = with_config(&a, summary)?;
            report["trace"] = serde_json::to_value(&trace)?;
            emit_json(out, &report)?;
        }
    }
    Ok(0)
}

fn validate_cmd(inv: &Invocation<ValidateArgs>) -> Result<i32> {
    let a = resolve(&inv.args, inv.config.as_deref())?;
    let checks = validate::run_suite(a.quick)?;
    let mut text = String::new();
    for c in &checks {
        text.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    text.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
    emit(inv.output.as_deref(), text.as_bytes())?;
    Ok(if failed == 0 { 0 } else { 1 })
}

/// Applies `PGG_EVO_THREADS` to the global thread pool.
pub fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let threads: usize = raw
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV}={raw:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Parses the process arguments, runs, and reports errors on stderr.
pub fn main_entry() -> i32 {
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
