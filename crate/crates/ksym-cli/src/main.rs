//! `ksym`: batch front end for the decomposition, identity and lattice suites.
//!
//! Exit codes: 0 pass, 1 identity failure, 2 input error, 3 solver divergence.

mod commands;
mod error;
mod fixture;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ksym::loopsys::Convention;

use crate::error::{CliError, Status};
use crate::report::Report;

#[derive(Debug, Parser)]
#[command(
    name = "ksym",
    version,
    about = "Verification suites for k'-symmetric spaces and their elliptic systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Fixture file (JSON) or built-in fixture name.
    #[arg(long)]
    fixture: Option<String>,
    /// Positional alternative to `--fixture`.
    #[arg(value_name = "FIXTURE")]
    positional: Option<String>,
    /// Pass/fail tolerance (command-specific default).
    #[arg(long)]
    tol: Option<f64>,
    /// Output path for the report (a directory for `solve`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for every randomized check.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn target(&self) -> Result<&str, CliError> {
        self.fixture
            .as_deref()
            .or(self.positional.as_deref())
            .ok_or_else(|| CliError::Input("no fixture given (use --fixture or a positional path)".into()))
    }

    fn tol(&self, default: f64) -> Result<f64, CliError> {
        let t = self.tol.unwrap_or(default);
        if t > 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(CliError::Input(format!(
                "tolerance must be positive and finite, got {t}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    Minus,
    Plus,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Minus => Convention::Minus,
            ConventionArg::Plus => Convention::Plus,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenspace decomposition, residuals and the system classification table.
    Decompose {
        #[command(flatten)]
        common: Common,
    },
    /// Runs the identity suite; prints one line per identity.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Restrict to the named identities (repeatable).
        #[arg(long)]
        only: Vec<String>,
    },
    /// Classifies a finite-order isometry given as `{"matrix": [[...]], "k": k}`.
    ClassifyIsometry {
        #[command(flatten)]
        common: Common,
    },
    /// Residuals of the order-m system on seeded random or supplied unknowns.
    SystemResiduals {
        #[command(flatten)]
        common: Common,
        /// System order (default: the minimal determined order).
        #[arg(long)]
        m: Option<usize>,
        /// Cells per side of the unit-square lattice.
        #[arg(long, default_value_t = 16)]
        cells: usize,
        #[arg(long, value_enum, default_value_t = ConventionArg::Minus)]
        convention: ConventionArg,
        /// System file with the unknowns `u_0..u_m`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Relaxes a perturbed geodesic towards a harmonic map.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Cells per side (points per side is one more).
        #[arg(long, default_value_t = 15)]
        cells: usize,
        #[arg(long, default_value_t = 5000)]
        steps: usize,
        /// Step size (default 0.2 h²).
        #[arg(long)]
        rate: Option<f64>,
        /// Amplitude of the interior perturbation.
        #[arg(long, default_value_t = 0.3)]
        amplitude: f64,
        /// CSV of per-point harmonic residual norms of the final field.
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
    },
    /// Writes a built-in fixture as a JSON fixture file.
    ExportFixture {
        #[command(flatten)]
        common: Common,
    },
}

const DEFAULT_TOL: f64 = 1e-9;
const SOLVER_TOL: f64 = 1e-10;

fn run(cli: Cli) -> Result<Status, CliError> {
    match cli.command {
        Command::Decompose { common } => {
            let tol = common.tol(DEFAULT_TOL)?;
            let f = fixture::load(common.target()?)?;
            let result = commands::decompose(&f);
            let status = if result.max_residual <= tol {
                Status::Pass
            } else {
                Status::Fail
            };
            Report::new("decompose", Some(f.id), tol, common.seed, result).emit(common.out.as_deref())?;
            Ok(status)
        }
        Command::Verify { common, only } => {
            let tol = common.tol(DEFAULT_TOL)?;
            let f = fixture::load(common.target()?)?;
            let result = verify::run(&f, tol, common.seed, &only)?;
            for i in &result.identities {
                println!(
                    "{:<34} {:>12.3e}  {}",
                    i.name,
                    i.residual,
                    if i.pass { "PASS" } else { "FAIL" }
                );
            }
            let status = if result.all_pass { Status::Pass } else { Status::Fail };
            if let Some(out) = &common.out {
                Report::new("verify", Some(f.id), tol, common.seed, result).emit(Some(out))?;
            }
            Ok(status)
        }
        Command::ClassifyIsometry { common } => {
            let tol = common.tol(ksym::isomtwist::ISOMETRY_TOL)?;
            let path = PathBuf::from(common.target()?);
            let result = commands::classify_isometry(&path, tol)?;
            let bytes = std::fs::read(&path)?;
            let id = fixture::FixtureId {
                name: path
                    .file_stem()
                    .map_or_else(String::new, |s| s.to_string_lossy().into_owned()),
                source: path.display().to_string(),
                sha256: fixture::sha256_hex(&bytes),
            };
            Report::new("classify-isometry", Some(id), tol, common.seed, result).emit(common.out.as_deref())?;
            Ok(Status::Pass)
        }
        Command::SystemResiduals {
            common,
            m,
            cells,
            convention,
            input,
        } => {
            let tol = common.tol(DEFAULT_TOL)?;
            let f = fixture::load(common.target()?)?;
            let args = commands::SystemArgs {
                m,
                cells,
                convention: convention.into(),
                input: input.as_deref(),
                seed: common.seed,
                tol,
            };
            let result = commands::system_residuals(&f, args)?;
            let gap = result.residuals.coefficient_gap / result.residuals.max_system.max(1.0);
            let status = if gap <= tol { Status::Pass } else { Status::Fail };
            Report::new("system-residuals", Some(f.id), tol, common.seed, result).emit(common.out.as_deref())?;
            Ok(status)
        }
        Command::Solve {
            common,
            cells,
            steps,
            rate,
            amplitude,
            emit_plot_data,
        } => {
            let tol = common.tol(SOLVER_TOL)?;
            let f = fixture::load(common.target()?)?;
            let args = commands::SolveArgs {
                cells,
                steps,
                rate,
                amplitude,
                tol,
                out_dir: common.out.as_deref(),
                plot: emit_plot_data.as_deref(),
            };
            let result = commands::solve(&f, args)?;
            let report = Report::new("solve", Some(f.id), tol, common.seed, result);
            match &common.out {
                Some(dir) => report.emit(Some(&dir.join("report.json")))?,
                None => report.emit(None)?,
            }
            Ok(Status::Pass)
        }
        Command::ExportFixture { common } => {
            let name = common.target()?;
            let f = ksym::fixtures::by_name(name)
                .ok_or_else(|| CliError::Input(format!("{name} is not a built-in fixture")))?;
            let mut text = serde_json::to_string_pretty(&f.to_spec()).expect("fixture spec serializes");
            text.push('\n');
            match &common.out {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(Status::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("ksym: {e}");
            e.exit_code()
        }
    }
}
