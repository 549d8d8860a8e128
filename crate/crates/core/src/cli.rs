//! Command-line front end for the `qmix` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::circuit::Circuit;
use crate::distances::{single_report, ReplacementChannelParams};
use crate::error::{Error, Result};
use crate::generators::{qft, random_circuit, GateProbabilities};
use crate::protocol::{
    estimate_avg_two_qubit, plan_for_p, plan_squash, sweep, sweep_to_csv, CircuitSource,
    ReplacementMode, ReplacementPlan, SweepConfig, SweepVerify, DEFAULT_SHOTS,
};
use crate::simplify::{best_simplify, simplify, Strategy};
use crate::verify::{
    avg_case_distance, diamond_lower_bound, diamond_upper_bound, frobenius_mc_full,
    mixed_channel_superoperator, superoperator_of, DistanceReport, LOWER_BOUND_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qmix", version, about = "Budgeted mixed-unitary circuit approximation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a benchmark circuit.
    Generate(GenerateArgs),
    /// Simplify a circuit file.
    Simplify(SimplifyArgs),
    /// Single-gate replacement distances.
    Distance(DistanceArgs),
    /// Plan replacements and estimate the average CNOT count.
    Optimize(OptimizeArgs),
    /// Channel-level distance checks for a plan.
    Verify(VerifyArgs),
    /// Grid experiment over budgets and mixing weights, written as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rqc,
    Qft,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub family: Family,
    #[arg(long)]
    pub qubits: usize,
    /// Gate count (random circuits only).
    #[arg(long, default_value_t = 500)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CNOT,H,S,Z probabilities for random circuits.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub probs: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyChoice {
    Basic,
    Aggressive,
    Best,
}

#[derive(Debug, Args)]
pub struct SimplifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StrategyChoice::Best)]
    pub strategy: StrategyChoice,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long)]
    pub p: f64,
    /// Over-rotation angle; the optimal one when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Always delete accepted gates instead of mixing.
    #[arg(long)]
    pub squash: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Bounds,
    Frobenius,
    Avgcase,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = VerifyMode::Bounds)]
    pub mode: VerifyMode,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub states: usize,
    #[arg(long, default_value_t = 64)]
    pub shots_per_state: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub circuit: Option<Family>,
    /// Circuit file, used instead of a generated family.
    #[arg(long = "in", conflicts_with = "circuit")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub qubits: usize,
    #[arg(long, default_value_t = 500)]
    pub depth: usize,
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub probs: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ps: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: usize,
    #[arg(long, default_value_t = 1)]
    pub realizations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Restarts for the diamond lower bound (0 disables it).
    #[arg(long, default_value_t = 0)]
    pub lower_bound_restarts: usize,
    /// Haar states for the Frobenius estimate (0 disables it).
    #[arg(long, default_value_t = 0)]
    pub frobenius_states: usize,
    #[arg(long, default_value_t = 64)]
    pub frobenius_shots: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    std::fs::read_to_string(path)?.parse()
}

fn probabilities(probs: &Option<Vec<f64>>) -> Result<GateProbabilities> {
    match probs.as_deref() {
        None => Ok(GateProbabilities::default()),
        Some(&[c, h, s, z]) => GateProbabilities::new(c, h, s, z),
        Some(other) => Err(Error::param(format!(
            "expected four gate probabilities, got {}",
            other.len()
        ))),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let c = match a.family {
        Family::Qft => qft(a.qubits)?,
        Family::Rqc => random_circuit(a.qubits, a.depth, &probabilities(&a.probs)?, a.seed)?,
    };
    emit(out, a.out.as_deref(), &c.serialize())
}

fn simplify_cmd(a: &SimplifyArgs, out: &mut dyn Write) -> Result<()> {
    let c = read_circuit(&a.input)?;
    let s = match a.strategy {
        StrategyChoice::Basic => simplify(&c, &Strategy::basic()),
        StrategyChoice::Aggressive => simplify(&c, &Strategy::aggressive()),
        StrategyChoice::Best => best_simplify(&c),
    };
    emit(out, a.out.as_deref(), &s.serialize())
}

fn distance(a: &DistanceArgs, out: &mut dyn Write) -> Result<()> {
    let params = match a.theta {
        Some(t) => ReplacementChannelParams::new(a.alpha, t, a.p)?,
        None => ReplacementChannelParams::optimal(a.alpha, a.p)?,
    };
    let r = single_report(&params);
    let rows = [
        ("diamond", r.diamond),
        ("diamond_min", r.diamond_min),
        ("frobenius_avg", r.frobenius_avg),
        ("trace_avg", r.trace_avg),
        ("avg_case", r.avg_case),
    ];
    writeln!(out, "alpha = {}  theta = {}  p = {}", params.alpha, params.theta, params.p)?;
    writeln!(out, "{:<14} {:>22}", "measure", "value")?;
    for (k, v) in rows {
        writeln!(out, "{k:<14} {v:>22.15e}")?;
    }
    writeln!(out)?;
    writeln!(out, "alpha={}", params.alpha)?;
    writeln!(out, "theta={}", params.theta)?;
    writeln!(out, "p={}", params.p)?;
    for (k, v) in rows {
        writeln!(out, "{k}={v}")?;
    }
    Ok(())
}

fn make_plan(c: &Circuit, epsilon: f64, p: f64, squash: bool) -> Result<ReplacementPlan> {
    if squash {
        plan_squash(c, epsilon)
    } else {
        plan_for_p(c, epsilon, p)
    }
}

fn optimize(a: &OptimizeArgs, out: &mut dyn Write) -> Result<()> {
    let c = read_circuit(&a.input)?;
    let plan = make_plan(&c, a.epsilon, a.p, a.squash)?;
    let stats = estimate_avg_two_qubit(&plan, a.shots, a.seed)?;
    let mode = match plan.mode() {
        ReplacementMode::Mixture => "mixture",
        ReplacementMode::Squash => "squash",
    };
    writeln!(out, "mode={mode}")?;
    writeln!(out, "epsilon={}", plan.epsilon())?;
    writeln!(out, "p={}", plan.p())?;
    writeln!(out, "baseline_2q={}", plan.baseline_2q())?;
    writeln!(out, "n_accepted={}", plan.accepted().len())?;
    writeln!(out, "spent_budget={}", plan.spent())?;
    writeln!(out, "all_deleted_2q={}", plan.fully_squashed_2q())?;
    writeln!(out, "shots={}", a.shots)?;
    writeln!(out, "mean_2q={}", stats.mean)?;
    writeln!(out, "stderr_2q={}", stats.stderr)?;
    for (count, n) in &stats.histogram {
        writeln!(out, "hist_{count}={n}")?;
    }
    Ok(())
}

fn verify_cmd(a: &VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let c = read_circuit(&a.input)?;
    let plan = plan_for_p(&c, a.epsilon, a.p)?;
    let mut report = DistanceReport {
        d_upper: diamond_upper_bound(&plan),
        ..DistanceReport::default()
    };
    match a.mode {
        VerifyMode::Bounds => {
            if c.width() > LOWER_BOUND_CAP {
                return Err(Error::CapExceeded {
                    what: "diamond_lower_bound",
                    requested: c.width(),
                    cap: LOWER_BOUND_CAP,
                });
            }
            report.d_lower_est = Some(diamond_lower_bound(&c, &plan, a.restarts, a.seed)?);
        }
        VerifyMode::Frobenius => {
            report.frobenius_mc = Some(frobenius_mc_full(&c, &plan, a.states, a.shots_per_state, a.seed)?);
        }
        VerifyMode::Avgcase => {
            let exact = superoperator_of(&c)?;
            let mixed = mixed_channel_superoperator(&plan)?;
            report.avg_case = Some(avg_case_distance(&exact, &mixed)?);
        }
    }
    writeln!(out, "n_accepted={}", plan.accepted().len())?;
    write!(out, "{report}")?;
    Ok(())
}

fn sweep_cmd(a: &SweepArgs, argv: &[String], out: &mut dyn Write) -> Result<()> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let source = match (&a.input, a.circuit) {
        (Some(path), _) => CircuitSource::Fixed {
            name: path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into()),
            circuit: read_circuit(path)?,
        },
        (None, Some(Family::Qft)) => CircuitSource::Qft { width: a.qubits },
        (None, Some(Family::Rqc)) => CircuitSource::Rqc {
            width: a.qubits,
            depth: a.depth,
            probs: probabilities(&a.probs)?,
        },
        (None, None) => return Err(Error::param("sweep needs --circuit or --in")),
    };
    let cfg = SweepConfig {
        source,
        epsilons: a.epsilons.clone(),
        ps: a.ps.clone(),
        n_shots: a.shots,
        n_realizations: a.realizations,
        seed: a.seed,
        verify: SweepVerify {
            lower_bound_restarts: a.lower_bound_restarts,
            frobenius_states: a.frobenius_states,
            frobenius_shots_per_state: a.frobenius_shots,
        },
    };
    cfg.validate()?;
    let records = sweep(&cfg)?;
    write_atomic(&a.out, sweep_to_csv(&records)?.as_bytes())?;

    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": argv.join(" "),
        "config": a,
        "master_seed": a.seed,
        "started_at": started_at,
    });
    let mut manifest_path = a.out.clone().into_os_string();
    manifest_path.push(".manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::param(e.to_string()))?;
    write_atomic(Path::new(&manifest_path), text.as_bytes())?;
    writeln!(out, "rows={}", records.len())?;
    writeln!(out, "csv={}", a.out.display())?;
    Ok(())
}

/// Dispatches an already-parsed command.
pub fn execute(cli: &Cli, argv: &[String], out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Simplify(a) => simplify_cmd(a, out),
        Command::Distance(a) => distance(a, out),
        Command::Optimize(a) => optimize(a, out),
        Command::Verify(a) => verify_cmd(a, out),
        Command::Sweep(a) => sweep_cmd(a, argv, out),
    }
}

/// Parses `argv` (program name first), runs it, and returns the exit code.
/// Errors are reported on `err`.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli, argv, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
