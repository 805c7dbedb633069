use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lpa_core::experiment::{run_scan, ConfigError, ScanConfig, ScanError};
use lpa_core::gallery::CATALOG;
use lpa_core::suites::{run_suite, SuiteError};
use lpa_core::Tolerances;

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "lpa", version, about = "Least-squares projection approximation diagnostics")]
struct Cli {
    /// Directory that relative output paths are written under.
    #[arg(long, global = true, value_name = "PATH")]
    out_dir: Option<PathBuf>,

    /// Relative rank cutoff used when a config leaves `rank_tol` unset.
    #[arg(long, global = true, env = "LPA_RANK_TOL", value_name = "TOL")]
    rank_tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence scan described by a JSON config file.
    Analyze { config: PathBuf },
    /// Run a seeded verification suite.
    Verify { suite: String },
    /// List the operator families.
    Gallery,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(tol) = cli.rank_tol {
        if !(tol.is_finite() && tol > 0.0) {
            eprintln!("error: rank tolerance must be positive and finite, got {tol}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match &cli.command {
        Command::Analyze { config } => analyze(&cli, config),
        Command::Verify { suite } => verify(&cli, suite),
        Command::Gallery => {
            gallery();
            ExitCode::SUCCESS
        }
    }
}

fn analyze(cli: &Cli, path: &Path) -> ExitCode {
    let mut config = match ScanConfig::from_path(path) {
        Ok(c) => c,
        Err(e @ ConfigError::Io { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
        Err(e) => {
            eprintln!("error: invalid config {}: {e}", path.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if config.tolerances.rank_tol.is_none() {
        config.tolerances.rank_tol = cli.rank_tol;
    }

    let report = match run_scan(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };

    print!("{}", report.to_csv());
    let v = &report.verdicts;
    println!("kernel_approximability: {:?}", v.kernel_approximability);
    println!("sup_theta_bounded: {:?}", v.sup_theta_bounded);
    println!(
        "bound_checks_passed: {}/{}",
        v.bound_checks_passed.passed, v.bound_checks_passed.total
    );

    match report.write_outputs(cli.out_dir.as_deref()) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e @ ScanError::Write { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn verify(cli: &Cli, suite: &str) -> ExitCode {
    let tolerances = Tolerances {
        rank_tol: cli.rank_tol,
        ..Tolerances::default()
    };
    let report = match run_suite(suite, tolerances) {
        Ok(r) => r,
        Err(e @ SuiteError::Unknown { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            eprintln!("error: suite {suite}: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    for check in &report.checks {
        let status = if check.pass { "PASS" } else { "FAIL" };
        println!("{status}  {}: {}", check.label, check.detail);
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    println!("{}: {} checks, {failed} failed", report.name, report.checks.len());
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn gallery() {
    for entry in CATALOG {
        println!("{}", entry.name);
        println!("  parameters: {}", entry.parameters);
        println!("  {}", entry.provenance);
    }
}
