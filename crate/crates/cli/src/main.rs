//! `timerep`: command-line runs over the decay library.
//!
//! Exit status is 0 on success, 1 when the library rejects the inputs and 2
//! on a usage error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use timerep::model::ConfigFile;

#[derive(Parser, Debug)]
#[command(name = "timerep", version, about = "Time-representation decay rates, event sampling and oscillation fits")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Re-run the invocation recorded in a manifest.
    #[arg(long, global = true, value_name = "MANIFEST")]
    replay: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Rate |φ(t)|² from an energy wave function (CSV, exponential or truncated Breit–Wigner).
    Transform(TransformArgs),
    /// Exponential rate of a lone Gamow state.
    Gamow(Common),
    /// Rate of two interfering Gamow states.
    Interfere(Common),
    /// Neutral-kaon beam rate.
    Kaon(KaonArgs),
    /// Time-representation rate against the survival-probability and quantum-beat rates.
    Compare(CompareArgs),
    /// Monte Carlo decay times.
    Sample(SampleArgs),
    /// Fit the modulated-exponential law to binned decay times.
    Fit(FitArgs),
    /// Time of flight (mean decay time) of a model or of recorded events.
    Tof(TofArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Transform(_) => "transform",
            Command::Gamow(_) => "gamow",
            Command::Interfere(_) => "interfere",
            Command::Kaon(_) => "kaon",
            Command::Compare(_) => "compare",
            Command::Sample(_) => "sample",
            Command::Fit(_) => "fit",
            Command::Tof(_) => "tof",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Gamow(c) | Command::Interfere(c) => c,
            Command::Transform(a) => &a.common,
            Command::Kaon(a) => &a.common,
            Command::Compare(a) => &a.common,
            Command::Sample(a) => &a.common,
            Command::Fit(a) => &a.common,
            Command::Tof(a) => &a.common,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Resonance energy.
    #[arg(long = "e-r", allow_negative_numbers = true)]
    e_r: Option<f64>,
    /// Resonance width (energy units).
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Number of particles at t = 0.
    #[arg(long)]
    n0: Option<u64>,
    /// Reduced Planck constant in the chosen units.
    #[arg(long, allow_negative_numbers = true)]
    hbar: Option<f64>,
    /// End of the time grid.
    #[arg(long = "t-max", allow_negative_numbers = true)]
    t_max: Option<f64>,
    /// Time step (or bin width for fits).
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-8, allow_negative_numbers = true)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration; its values override flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct TransformArgs {
    #[command(flatten)]
    common: Common,
    /// Sampled φ(E) as `E,re,im` CSV; the tail declaration is read from `<input>.json`.
    #[arg(long, conflicts_with = "alpha")]
    input: Option<PathBuf>,
    /// Use φ(E) = sqrt(2α) e^{-αE}.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum BeamArg {
    K0,
    K0bar,
}

#[derive(Args, Debug, Clone)]
struct KaonArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = BeamArg::K0)]
    beam: BeamArg,
}

#[derive(Args, Debug, Clone)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// Compare on the exponential energy wave function with this α instead of a configured state.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum DensityArg {
    /// |φ(t)|² of the configured state (or exponential from --gamma).
    State,
    /// α/(π(α²+t²)) from the exponential energy wave function.
    AppendixTimerep,
    /// -dp_s/dτ of the same wave function.
    AppendixSurvival,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum GeneratorArg {
    InverseCdf,
    Rejection,
}

#[derive(Args, Debug, Clone)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = DensityArg::State)]
    density: DensityArg,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value_t = GeneratorArg::InverseCdf)]
    generator: GeneratorArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModelArg {
    Timerep,
    Survival,
    Quantumbeat,
    /// Fit all three and rank them.
    All,
}

#[derive(Args, Debug, Clone)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    /// Event CSV (column `t`), binned with --dt.
    #[arg(long, conflicts_with = "histogram")]
    events: Option<PathBuf>,
    /// Histogram CSV (`t_lo,t_hi,count`).
    #[arg(long)]
    histogram: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModelArg::Timerep)]
    model: ModelArg,
    /// Fit the period T = 2π/ω instead of ω.
    #[arg(long)]
    period: bool,
    /// Use midpoint rates instead of exact bin integrals.
    #[arg(long)]
    midpoint: bool,
    /// Also extrapolate the rate to t = 0 from this many early bins.
    #[arg(long = "zero-time-bins")]
    zero_time_bins: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct TofArgs {
    #[command(flatten)]
    common: Common,
    /// Empirical mean of recorded events instead of a model.
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DensityArg::State)]
    density: DensityArg,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<timerep::DecayError> for Failure {
    fn from(e: timerep::DecayError) -> Self {
        Failure::Domain(e.into())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

/// Flags merged with the configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Resolved {
    hbar: f64,
    n0: u64,
    seed: u64,
    t_max: Option<f64>,
    dt: Option<f64>,
    tol: f64,
    format: Format,
    e_r: Option<f64>,
    gamma: Option<f64>,
    config: Option<ConfigFile>,
}

fn resolve(c: &Common, embedded: Option<ConfigFile>) -> Result<Resolved, Failure> {
    let config = match (embedded, &c.config) {
        (Some(cfg), _) => Some(cfg),
        (None, Some(path)) => Some(
            ConfigFile::load(path)
                .map_err(|e| anyhow::anyhow!("reading config {}: {e}", path.display()))?,
        ),
        (None, None) => None,
    };
    let pick = |cfg: Option<f64>, flag: Option<f64>| cfg.or(flag);
    let cfg = config.clone().unwrap_or_default();
    let hbar = pick(cfg.hbar, c.hbar).unwrap_or(1.0);
    let n0 = cfg.n0.or(c.n0).unwrap_or(1);
    let seed = cfg.seed.or(c.seed).unwrap_or(0);
    let (e_r, gamma) = match cfg.components.as_slice() {
        [one] => (Some(one.e_r), Some(one.gamma)),
        _ => (c.e_r, c.gamma),
    };
    Ok(Resolved {
        hbar,
        n0,
        seed,
        t_max: c.t_max,
        dt: c.dt,
        tol: c.tol,
        format: c.format,
        e_r,
        gamma,
        config,
    })
}

fn run(cli: Cli, argv: Vec<String>) -> Result<String, Failure> {
    let (command, argv, embedded) = match (&cli.replay, cli.command) {
        (Some(path), None) => {
            let m = output::Manifest::load(path)?;
            let replayed = Cli::try_parse_from(&m.argv).map_err(|e| Failure::Usage(e.to_string()))?;
            let Some(command) = replayed.command else {
                return usage("manifest holds no subcommand");
            };
            (command, m.argv, m.resolved.config)
        }
        (Some(_), Some(_)) => return usage("--replay takes no subcommand"),
        (None, Some(command)) => (command, argv, None),
        (None, None) => return usage("a subcommand is required (see --help)"),
    };
    let resolved = resolve(command.common(), embedded)?;
    let out = command.common().out.clone();
    let result = commands::dispatch(&command, &resolved)?;
    let written = output::emit(&result.payload, out.as_deref())?;
    if let Some(path) = out {
        let manifest = output::Manifest::new(command.name(), argv, resolved, written);
        manifest.save(&output::manifest_path(&path))?;
    }
    Ok(result.summary)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli, argv) {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
