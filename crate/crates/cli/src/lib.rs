//! `abspin` command-line driver.
//!
//! Exit status: 0 on success or PASS, 1 on invalid input or configuration,
//! 2 when a report verdict is FAIL. Errors are printed as a single line
//! `error: <kind>: <message>`.

pub mod commands;
pub mod config;
pub mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use abspin_core::filament::Prescription;
use config::{OutputFormat, PartialConfig, PartialGrid, PartialSetup, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

/// Environment variable capping the worker thread count (0 = automatic).
pub const THREADS_VAR: &str = "ABSPIN_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] abspin_core::Error),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        use abspin_core::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e {
                E::Domain(_) => "domain",
                E::Overflow(_) => "overflow",
                E::DegenerateOrder(_) => "degenerate-order",
                E::MatchingSingular(_) => "matching-singular",
                E::NonConvergence(_) => "non-convergence",
                E::Consistency(_) => "consistency",
                E::ForwardSingularity(..) => "forward-singularity",
                E::InsufficientCutoff(_) => "insufficient-cutoff",
                E::EmptyGrid(_) => "empty-grid",
                E::NonUnitVector(_) => "non-unit-vector",
                E::NonFiniteAmplitude => "non-finite-amplitude",
                E::ZeroIntensity => "zero-intensity",
                E::InvalidInput(_) => "invalid-input",
            },
        }
    }

    /// `error: <kind>: <message>` on one line.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error: {}: {}", self.kind(), msg.trim())
    }
}

#[derive(Debug, Parser)]
#[command(name = "abspin", version, about = "Spin-1/2 Aharonov-Bohm scattering from a magnetized filament")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// R -> 0 phase shift of every channel |m| <= m_max, both spins.
    PhaseShifts(RunArgs),
    /// Polarized differential cross section over the angle grid.
    CrossSection(RunArgs),
    /// Check the two limits of the polarized cross section.
    LimitsReport(RunArgs),
    /// Spin dependence of the amplitudes under both boundary conditions.
    ComparePrescriptions(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::PhaseShifts(a)
            | Command::CrossSection(a)
            | Command::LimitsReport(a)
            | Command::ComparePrescriptions(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrescriptionArg {
    Regular,
    Singular,
}

impl From<PrescriptionArg> for Prescription {
    fn from(p: PrescriptionArg) -> Self {
        match p {
            PrescriptionArg::Regular => Prescription::RegularOnly,
            PrescriptionArg::Singular => Prescription::SingularAllowed,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flux in units of the flux quantum.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Wavenumber.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Partial-wave cutoff.
    #[arg(long)]
    pub m_max: Option<u32>,
    /// Number of scattering angles.
    #[arg(long)]
    pub phi_count: Option<usize>,
    /// Smallest scattering angle, radians.
    #[arg(long, value_parser = parse_radians, allow_negative_numbers = true)]
    pub phi_min: Option<f64>,
    /// Largest scattering angle, radians.
    #[arg(long, value_parser = parse_radians, allow_negative_numbers = true)]
    pub phi_max: Option<f64>,
    /// Incident polarization, x,y,z.
    #[arg(long, value_parser = parse_vector, allow_negative_numbers = true)]
    pub n: Option<[f64; 3]>,
    /// Detector acceptance polarization, x,y,z.
    #[arg(long, value_parser = parse_vector, allow_negative_numbers = true)]
    pub nprime: Option<[f64; 3]>,
    #[arg(long, value_enum)]
    pub prescription: Option<PrescriptionArg>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// TOML file with any of the settings above; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file, or `-` for standard output.
    #[arg(long, default_value = "-")]
    pub out: String,
    /// Seed of the randomized limit checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random setups in the limit checks.
    #[arg(long)]
    pub samples: Option<usize>,
}

fn parse_radians(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let lower = t.to_ascii_lowercase();
    if t.ends_with('°') || lower.ends_with("deg") || lower.ends_with("degrees") {
        return Err("angles are in radians; degrees are not accepted".into());
    }
    let v: f64 = t.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("angle `{s}` is not finite"));
    }
    Ok(v)
}

fn parse_vector(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("`{s}` is not of the form x,y,z"));
    }
    let mut v = [0.0_f64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse().map_err(|_| format!("`{p}` is not a number"))?;
        if !slot.is_finite() {
            return Err(format!("component `{p}` is not finite"));
        }
    }
    Ok(v)
}

impl RunArgs {
    fn as_partial(&self) -> PartialConfig {
        let grid = (self.phi_count.is_some() || self.phi_min.is_some() || self.phi_max.is_some()).then_some(
            PartialGrid {
                count: self.phi_count,
                min: self.phi_min,
                max: self.phi_max,
            },
        );
        let setup = (self.n.is_some() || self.nprime.is_some()).then_some(PartialSetup {
            n: self.n,
            n_prime: self.nprime,
        });
        PartialConfig {
            alpha: self.alpha,
            k: self.k,
            m_max: self.m_max,
            radius_schedule: None,
            phi_grid: grid,
            prescription: self.prescription.map(Into::into),
            setup,
            format: self.format,
            seed: self.seed,
            samples: self.samples,
        }
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => PartialConfig::from_toml_file(path)?,
            None => PartialConfig::default(),
        };
        base.overridden_by(self.as_partial()).resolve()
    }
}

/// Result of one invocation, before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn execute(command: &Command) -> Result<commands::CommandOutput, CliError> {
    let cfg = command.args().resolve()?;
    match command {
        Command::PhaseShifts(_) => commands::phase_shifts(&cfg),
        Command::CrossSection(_) => commands::cross_section(&cfg),
        Command::LimitsReport(_) => commands::limits_report(&cfg),
        Command::ComparePrescriptions(_) => commands::compare_prescriptions(&cfg),
    }
}

fn deliver(out: &str, body: &str) -> Result<Option<String>, CliError> {
    if out == "-" {
        return Ok(Some(body.to_string()));
    }
    std::fs::write(out, body).map_err(|e| CliError::Io(format!("cannot write {out}: {e}")))?;
    Ok(None)
}

/// Parse arguments and run, with the worker count given explicitly
/// (`None` or `Some(0)` = automatic).
pub fn run<I, T>(argv: I, threads: Option<usize>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: e.to_string(),
                    stderr: String::new(),
                },
                _ => {
                    let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
                    Outcome {
                        code: EXIT_INVALID,
                        stdout: String::new(),
                        stderr: CliError::Usage(first).line() + "\n",
                    }
                }
            };
        }
    };
    let result = with_threads(threads, || execute(&cli.command))
        .and_then(|r| r)
        .and_then(|r| deliver(&cli.command.args().out, &r.body).map(|printed| (r.failed, printed)));
    match result {
        Ok((failed, printed)) => Outcome {
            code: if failed { EXIT_FAIL } else { EXIT_OK },
            stdout: printed.unwrap_or_default(),
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: EXIT_INVALID,
            stdout: String::new(),
            stderr: e.line() + "\n",
        },
    }
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    Ok(f())
}

/// Thread count from [`THREADS_VAR`].
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{THREADS_VAR}: {e}"))),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{THREADS_VAR} = `{v}` is not a non-negative integer"))),
    }
}

/// Entry point of the binary.
pub fn main_with_env() -> i32 {
    let outcome = match threads_from_env() {
        Ok(t) => run(std::env::args_os(), t),
        Err(e) => Outcome {
            code: EXIT_INVALID,
            stdout: String::new(),
            stderr: e.line() + "\n",
        },
    };
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    outcome.code
}
