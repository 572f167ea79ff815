mod commands;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use report::{Format, RunReport};

#[derive(Parser, Debug)]
#[command(name = "opcalc", version, about = "Functional calculus, divided differences and operator series on complex matrices")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct GlobalArgs {
    /// Seed for generated matrices (default 42)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplies every tolerance
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// TOML file with the same keys as the global flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Include wall-clock timings (makes reports run-dependent)
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    seed: Option<u64>,
    tol_scale: Option<f64>,
    output: Option<PathBuf>,
    format: Option<Format>,
    timings: Option<bool>,
}

/// Settings after merging flags over the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub tol_scale: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub timings: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scalar divided differences by one or all methods
    Dd(commands::DdArgs),
    /// Functional calculus, tensor divided differences and their pairing
    Funcalc(commands::FuncalcArgs),
    /// Noncommutative Newton interpolation
    Newton(commands::NewtonArgs),
    /// Taylor expansion with exact remainders
    Taylor(commands::TaylorArgs),
    /// Dyson expansion of exp(a + b)
    Dyson(commands::DysonArgs),
    /// Magnus exponent of a time-dependent linear system
    Magnus(commands::MagnusArgs),
    /// Rearrangement identity for a family of sector functions
    Rearrange(commands::RearrangeArgs),
    /// Runs the whole identity battery
    VerifyAll,
    /// Generates seeded test matrices
    Gen(commands::GenArgs),
}

fn settings(g: &GlobalArgs) -> Result<Settings> {
    let file = match &g.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str::<FileConfig>(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => FileConfig::default(),
    };
    let tol_scale = g.tol_scale.or(file.tol_scale).unwrap_or(1.0);
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        anyhow::bail!(opcalc::Error::Invalid(format!("--tol-scale must be positive, got {tol_scale}")));
    }
    Ok(Settings {
        seed: g.seed.or(file.seed).unwrap_or(opcalc::random::DEFAULT_SEED),
        tol_scale,
        output: g.output.clone().or(file.output),
        format: g.format.or(file.format).unwrap_or(Format::Json),
        timings: g.timings || file.timings.unwrap_or(false),
    })
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("OPCALC_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| opcalc::Error::Invalid(format!("OPCALC_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<RunReport> {
    init_threads()?;
    let s = settings(&cli.global)?;
    let mut report = match cli.command {
        Command::Dd(a) => commands::dd(&a, &s),
        Command::Funcalc(a) => commands::funcalc(&a, &s),
        Command::Newton(a) => commands::newton(&a, &s),
        Command::Taylor(a) => commands::taylor(&a, &s),
        Command::Dyson(a) => commands::dyson(&a, &s),
        Command::Magnus(a) => commands::magnus(&a, &s),
        Command::Rearrange(a) => commands::rearrange(&a, &s),
        Command::VerifyAll => verify::verify_all(&s),
        Command::Gen(a) => commands::gen(&a, &s),
    }?;
    if !s.timings {
        report.timings = None;
    }
    report.emit(&s)?;
    Ok(report)
}

/// Input problems exit with 2, numerical failures with 1.
fn is_input_error(e: &anyhow::Error) -> bool {
    use opcalc::Error as E;
    if let Some(err) = e.downcast_ref::<opcalc::Error>() {
        return matches!(
            err,
            E::Invalid(_)
                | E::DimensionMismatch(_)
                | E::SlotOutOfRange { .. }
                | E::CoincidentNodes { .. }
                | E::ZeroNodeNegativePower
                | E::PoleAtNode(_)
                | E::DomainViolation(_)
                | E::DecayViolation(_)
                | E::SectorViolation(_)
                | E::NonCommutingTuple { .. }
                | E::ArityCap(_)
                | E::EnumerationCap(_)
                | E::BranchRadiusExceeded(_)
                | E::ContourViolation(_)
                | E::ContourTooTight { .. }
        );
    }
    e.downcast_ref::<serde_json::Error>().is_some()
        || e.downcast_ref::<toml::de::Error>().is_some()
        || e.downcast_ref::<std::io::Error>().is_some()
        || e.downcast_ref::<rayon::ThreadPoolBuildError>().is_some()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(r) => {
            let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
            if failed.is_empty() {
                return ExitCode::SUCCESS;
            }
            for c in failed {
                eprintln!(
                    "identity violated: {} (residual {:.3e} exceeds tolerance {:.1e})",
                    c.identity, c.residual, c.tolerance
                );
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_input_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
