//! Command-line front end: binds a TOML config to the experiment pipelines
//! and writes CSV tables, a JSON report and a run manifest.

pub mod config;
pub mod manifest;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use lambshift_core::experiments::Pipeline;
use lambshift_core::selftest::run_selftest;
use lambshift_core::Error;

pub use config::{resolve, ConfigSources};
pub use manifest::RunManifest;

pub const OUT_DIR_ENV: &str = "LAMBSHIFT_OUT_DIR";

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Config { field: String, message: String },
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn config(field: &str, message: &str) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { field, message } => write!(f, "config error in `{field}`: {message}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { field, message } => CliError::Config { field, message },
            Error::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

const AFTER_HELP: &str = "\
Configuration is a TOML file with unit-suffixed keys (spacing_um, drive_time_us,
detuning_min_khz, ...). Precedence, lowest first: defaults, --config, --set,
then --seed/--realizations. The output directory defaults to $LAMBSHIFT_OUT_DIR,
then ./out. Each run writes <pipeline>.json, one CSV per table and
<command>_manifest.json.

Exit codes: 0 success, 2 config error, 3 numerical failure.";

#[derive(Debug, Parser)]
#[command(name = "lambshift", version, about = "Collective Lamb shift in 1D atom arrays", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady-state spectrum with skewed-Lorentzian fit.
    ///
    /// spectrum_spectrum.csv: delta_l_hz, fraction, stderr, n, analytic_fraction
    #[command(verbatim_doc_comment)]
    Spectrum(RunArgs),
    /// Fitted shift against spacing for each drive direction.
    ///
    /// shift_vs_spacing_shift.csv: spacing_um, spacing_lambda, parallel, shift_hz,
    ///   shift_err_hz, analytic_shift_hz, delta0_hz
    /// shift_vs_spacing_spectra.csv: spacing_um, parallel, delta_l_hz, fraction, stderr
    #[command(verbatim_doc_comment)]
    ShiftVsSpacing(RunArgs),
    /// Per-atom excitation along the chain.
    ///
    /// position_resolved_profile.csv: detuning_gamma, interactions, atom, excitation,
    ///   stderr, normalized, normalized_err
    #[command(verbatim_doc_comment)]
    PositionResolved(RunArgs),
    /// Fitted shift against Rabi frequency.
    ///
    /// shift_vs_power_shift.csv: rabi_gamma, shift_hz, shift_err_hz, peak_hz,
    ///   analytic_shift_hz, delta0_hz
    /// shift_vs_power_spectra.csv: rabi_gamma, delta_l_hz, fraction, stderr
    #[command(verbatim_doc_comment)]
    ShiftVsPower(RunArgs),
    /// Ramsey fringe shift against free evolution time.
    ///
    /// ramsey_shift.csv: pulse_area_pi, gamma_t, wait_us, shift_hz, shift_err_hz,
    ///   shift_envelope_hz, shift_envelope_err_hz, formula_shift_hz, delta0_hz
    /// ramsey_fringes.csv: pulse_area_pi, gamma_t, delta_l_hz, fraction, stderr
    #[command(verbatim_doc_comment)]
    Ramsey(RunArgs),
    /// Multilevel depump of the readout shelving pulse.
    ///
    /// depump_curve.csv: t_s, p_remain, p_depumped, p_excited
    #[command(verbatim_doc_comment)]
    Depump(RunArgs),
    /// Run the built-in oracle checks.
    ///
    /// selftest.json: name, value, tolerance and pass flag of each check
    #[command(verbatim_doc_comment)]
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config value, e.g. --set array.n_atoms=10 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of disorder realizations.
    #[arg(long)]
    pub realizations: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::ShiftVsSpacing(_) => "shift-vs-spacing",
            Command::PositionResolved(_) => "position-resolved",
            Command::ShiftVsPower(_) => "shift-vs-power",
            Command::Ramsey(_) => "ramsey",
            Command::Depump(_) => "depump",
            Command::Selftest(_) => "selftest",
        }
    }

    fn pipeline(&self) -> Option<Pipeline> {
        Some(match self {
            Command::Spectrum(_) => Pipeline::Spectrum,
            Command::ShiftVsSpacing(_) => Pipeline::ShiftVsSpacing,
            Command::PositionResolved(_) => Pipeline::PositionResolved,
            Command::ShiftVsPower(_) => Pipeline::ShiftVsPower,
            Command::Ramsey(_) => Pipeline::Ramsey,
            Command::Depump(_) => Pipeline::Depump,
            Command::Selftest(_) => return None,
        })
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Spectrum(a)
            | Command::ShiftVsSpacing(a)
            | Command::PositionResolved(a)
            | Command::ShiftVsPower(a)
            | Command::Ramsey(a)
            | Command::Depump(a) => &a.common,
            Command::Selftest(a) => &a.common,
        }
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::config("threads", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

fn execute(cmd: &Command, out_dir: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    let threads = cmd.common().threads;
    match cmd {
        Command::Selftest(_) => {
            let report = in_pool(threads, run_selftest)??;
            for c in &report.checks {
                println!(
                    "{:<24} {:>12.3e} <= {:<9.1e} {}",
                    c.name,
                    c.value,
                    c.tolerance,
                    if c.passed { "PASS" } else { "FAIL" }
                );
            }
            fs::create_dir_all(out_dir).map_err(|e| CliError::Io(e.to_string()))?;
            let path = out_dir.join("selftest.json");
            let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
            fs::write(&path, text + "\n").map_err(|e| CliError::Io(e.to_string()))?;
            manifest.artifacts.push(path);
            if !report.all_passed() {
                return Err(CliError::Numerical("selftest checks failed".into()));
            }
        }
        Command::Spectrum(a)
        | Command::ShiftVsSpacing(a)
        | Command::PositionResolved(a)
        | Command::ShiftVsPower(a)
        | Command::Ramsey(a)
        | Command::Depump(a) => {
            let cfg = resolve(&ConfigSources {
                path: a.config.as_deref(),
                overrides: &a.overrides,
                seed: a.seed,
                realizations: a.realizations,
            })?;
            manifest.seed = Some(cfg.seed);
            manifest.config = Some(cfg.clone());
            let pipeline = cmd.pipeline().expect("pipeline subcommand");
            let report = in_pool(threads, || pipeline.run(&cfg))??;
            manifest.artifacts = report.write_to(out_dir)?;
            for (k, v) in &report.summary {
                println!("{k} = {v}");
            }
        }
    }
    Ok(())
}

/// Run a parsed command, write its manifest and map the outcome to an exit
/// code. The manifest is written on numerical failure too.
pub fn run(cli: &Cli) -> ExitCode {
    let cmd = &cli.command;
    let out_dir = cmd.common().out.clone();
    let config_path = match cmd {
        Command::Selftest(_) => None,
        Command::Spectrum(a)
        | Command::ShiftVsSpacing(a)
        | Command::PositionResolved(a)
        | Command::ShiftVsPower(a)
        | Command::Ramsey(a)
        | Command::Depump(a) => a.config.clone(),
    };
    let mut manifest = RunManifest {
        command: cmd.name().into(),
        config_path,
        config: None,
        seed: None,
        out_dir: out_dir.clone(),
        threads: cmd.common().threads,
        started_unix_s: unix_now(),
        wall_clock_s: 0.0,
        success: false,
        error: None,
        artifacts: Vec::new(),
    };
    let clock = Instant::now();
    let outcome = execute(cmd, &out_dir, &mut manifest);
    manifest.wall_clock_s = clock.elapsed().as_secs_f64();
    manifest.success = outcome.is_ok();
    manifest.error = outcome.as_ref().err().map(|e| e.to_string());

    let code = match &outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lambshift {}: {e}", cmd.name());
            e.exit_code()
        }
    };
    if code != EXIT_CONFIG {
        match manifest.write() {
            Ok(p) => eprintln!("manifest: {}", p.display()),
            Err(e) => {
                eprintln!("lambshift {}: cannot write manifest: {e}", cmd.name());
                return ExitCode::from(EXIT_NUMERICAL);
            }
        }
    }
    ExitCode::from(code)
}
