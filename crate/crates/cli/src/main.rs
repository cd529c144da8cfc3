use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use spectra::analytic::LaplaceSign;
use spectra::config::config_hash;
use spectra::SubBandId;
use spectra_cli::distributions::show_distributions;
use spectra_cli::grid::parse_grid;
use spectra_cli::sweep::{run_sweep, summary, Engines, SweepSpec, SweptParameter};
use spectra_cli::validate::{validate_engines, ValidateSpec};
use spectra_cli::{load_config, parse_band, ConfigError};

/// Coverage and rate of multi-operator spectrum sharing, by closed form and
/// by Monte Carlo.
///
/// Exit status: 0 on success, 1 when engine validation fails or a run
/// cannot finish, 2 when the scenario file or the requested run is invalid.
/// Set SPECTRA_THREADS to bound the worker pool.
#[derive(Parser)]
#[command(name = "spectra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a scenario file, listing every problem found.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sweep one parameter and write a CSV of per-operator metrics.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweptParameter,
        /// `start:stop:steps` (inclusive) or a comma-separated list, in the
        /// parameter's units.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Any of analytic, sim, baseline, comma-separated.
        #[arg(long, default_value = "analytic,sim")]
        engines: Engines,
        #[arg(long, default_value_t = 20_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sub-band whose operators get coverage columns, as `seller:band`.
        #[arg(long, default_value = "0:0", value_parser = parse_band)]
        band: SubBandId,
        /// SINR threshold for coverage columns when sweeping something else.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        beta_db: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = SignArg::Negative, hide = true)]
        laplace_sign: SignArg,
    },
    /// Compare closed-form and simulated coverage on a threshold grid.
    ValidateEngines {
        #[arg(long)]
        config: PathBuf,
        /// SINR thresholds in dB.
        #[arg(long, default_value = "-10:20:13", allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value_t = 20_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.03)]
        tolerance: f64,
        #[arg(long, default_value = "0:0", value_parser = parse_band)]
        band: SubBandId,
        #[arg(long, value_enum, default_value_t = SignArg::Negative, hide = true)]
        laplace_sign: SignArg,
    },
    /// Tabulate the laws of the largest interference gain and the buyer
    /// power against their empirical counterparts.
    Distributions {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "0:0", value_parser = parse_band)]
        band: SubBandId,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Negative,
    AsPrinted,
}

impl From<SignArg> for LaplaceSign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Negative => LaplaceSign::Negative,
            SignArg::AsPrinted => LaplaceSign::AsPrinted,
        }
    }
}

enum Outcome {
    Done,
    ValidationFailed,
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("SPECTRA_THREADS") else { return Ok(()) };
    let n: usize = v.parse().with_context(|| format!("SPECTRA_THREADS=`{v}` is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn usage(e: anyhow::Error) -> ConfigError {
    ConfigError(format!("{e:#}"))
}

fn with_source(mut result: spectra_cli::table::SweepResult, config: &Path) -> spectra_cli::table::SweepResult {
    result.meta.insert(1, ("config".into(), config.display().to_string()));
    result
}

fn run(cli: Cli) -> Result<Outcome> {
    init_threads()?;
    match cli.command {
        Command::ValidateConfig { config } => {
            let cfg = spectra::config::load(&config).map_err(ConfigError::from)?;
            let violations = cfg.validate();
            if !violations.is_empty() {
                for v in &violations {
                    eprintln!("{v}");
                }
                return Err(ConfigError(format!("{} violation(s) in {}", violations.len(), config.display())).into());
            }
            println!(
                "{}: {} seller(s), {} buyer(s), {} sub-band(s), hash {}",
                config.display(),
                cfg.sellers.len(),
                cfg.buyers.len(),
                cfg.bands().count(),
                config_hash(&cfg)
            );
            Ok(Outcome::Done)
        }
        Command::Sweep { config, param, grid, engines, trials, seed, band, beta_db, out, laplace_sign } => {
            let cfg = load_config(&config)?;
            let spec = SweepSpec {
                parameter: param,
                grid: parse_grid(&grid).map_err(usage)?,
                engines,
                trials,
                seed,
                band,
                beta_db,
                sign: laplace_sign.into(),
            };
            let result = with_source(run_sweep(&cfg, &spec)?, &config);
            result.write(&out)?;
            println!("wrote {} row(s) to {}", result.rows.len(), out.display());
            for line in summary(&result) {
                println!("{line}");
            }
            Ok(Outcome::Done)
        }
        Command::ValidateEngines { config, grid, trials, seed, tolerance, band, laplace_sign } => {
            let cfg = load_config(&config)?;
            let spec = ValidateSpec {
                grid_db: parse_grid(&grid).map_err(usage)?,
                trials,
                seed,
                tolerance,
                band,
                sign: laplace_sign.into(),
            };
            let report = validate_engines(&cfg, &spec)?;
            for p in &report.points {
                let mark = if p.passes(tolerance) { "ok  " } else { "FAIL" };
                println!("{mark} {}", p.describe(tolerance));
            }
            let Some(worst) = report.worst() else { bail!("empty report") };
            if report.passed() {
                println!("PASS: {} points within tolerance; worst: {}", report.points.len(), worst.describe(tolerance));
                Ok(Outcome::Done)
            } else {
                println!(
                    "FAIL: {} of {} points outside tolerance; worst: {}",
                    report.failures(),
                    report.points.len(),
                    worst.describe(tolerance)
                );
                Ok(Outcome::ValidationFailed)
            }
        }
        Command::Distributions { config, band, samples, seed, points, out } => {
            let cfg = load_config(&config)?;
            let result = with_source(show_distributions(&cfg, band, samples, seed, points)?, &config);
            result.write(&out)?;
            println!(
                "wrote {} row(s) to {}; KS H {} P {}",
                result.rows.len(),
                out.display(),
                result.meta("ks_h").unwrap_or("?"),
                result.meta("ks_p").unwrap_or("?")
            );
            Ok(Outcome::Done)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
