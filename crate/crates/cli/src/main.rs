//! Command-line driver. Exit codes: 0 when every asserted check passes,
//! 1 on an assertion failure or a solver error (the failing report is still
//! written), 2 on usage problems (bad flags, malformed config).

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use robin_iso::verify::summary_line;

use commands::CommandOutput;
use config::JobConfig;

#[derive(Parser)]
#[command(
    name = "robin-iso",
    version,
    about = "Numerical verification of Robin-eigenvalue isoperimetric bounds \
             and boundary-flux energy comparisons"
)]
struct Cli {
    /// JSON job spec (domain, alpha, h, grids, tolerances); defaults run the
    /// canonical experiment of each subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory for report JSON and CSV artifacts.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Worker threads for verify-all.
    #[arg(long, global = true, value_name = "K", default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ball eigenvalue radius sweep with the independent shooting oracle.
    #[command(name = "ball-eig")]
    BallEig,
    /// Robin eigenvalue of the configured domain by P1 finite elements.
    #[command(name = "fem-eig")]
    FemEig,
    /// Green's function, harmonic radius and center, level-set and capacity
    /// tables.
    #[command(name = "harmonic")]
    Harmonic,
    /// End-to-end product inequality check on the configured domain.
    #[command(name = "theorem1")]
    Theorem1,
    /// Eigenvalue shape derivative vs the remeshed finite-difference oracle.
    #[command(name = "shape-deriv")]
    ShapeDeriv,
    /// Boundary-flux energy minimization and its comparison chain.
    #[command(name = "steklov")]
    Steklov,
    /// The full acceptance suite.
    #[command(name = "verify-all")]
    VerifyAll,
}

enum Failure {
    /// Bad invocation or config: exit 2, nothing computed.
    Usage(String),
    /// Computation failed: exit 1.
    Run(robin_iso::Error),
}

impl From<robin_iso::Error> for Failure {
    fn from(e: robin_iso::Error) -> Self {
        Failure::Run(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    if cli.jobs == 0 {
        return Err(Failure::Usage("--jobs must be at least 1".to_string()));
    }
    let cfg = match &cli.config {
        Some(path) => JobConfig::load(path).map_err(Failure::Usage)?,
        None => JobConfig::default(),
    };

    if matches!(cli.command, Command::ShapeDeriv) && !commands::is_star(&cfg.domain) {
        return Err(Failure::Usage(
            "shape-deriv requires a star domain spec".to_string(),
        ));
    }

    let output = match cli.command {
        Command::BallEig => commands::ball_eig(&cfg)?,
        Command::FemEig => commands::fem_eig(&cfg)?,
        Command::Harmonic => commands::harmonic(&cfg)?,
        Command::Theorem1 => commands::theorem1(&cfg)?,
        Command::ShapeDeriv => commands::shape_deriv(&cfg)?,
        Command::Steklov => commands::steklov(&cfg)?,
        Command::VerifyAll => commands::verify_all(cli.jobs)?,
    };

    write_output(&cli.out, &output).map_err(Failure::Usage)?;
    let mut all_passed = true;
    for rep in &output.reports {
        println!("{}", summary_line(rep));
        all_passed &= rep.passed();
    }
    Ok(all_passed)
}

/// Serialize every report as `<id>.json` plus the CSV artifacts under the
/// output directory.
fn write_output(dir: &Path, output: &CommandOutput) -> Result<(), String> {
    std::fs::create_dir_all(dir)
        .map_err(|e| format!("cannot create output dir {}: {e}", dir.display()))?;
    for rep in &output.reports {
        let path = dir.join(format!("{}.json", rep.id));
        let text = rep
            .to_json()
            .map_err(|e| format!("cannot serialize report {}: {e}", rep.id))?;
        std::fs::write(&path, text.as_bytes() as &[u8])
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    for (name, bytes) in &output.artifacts {
        let path = dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}
