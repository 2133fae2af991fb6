use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commonfix::solver::BoundMode;
use commonfix_cli::{run, Command, Options};

#[derive(Parser)]
#[command(
    name = "commonfix",
    version,
    about = "Find and certify common fixed points of contraction pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the hypothesis checks.
    Check(Common),
    /// Check, solve and certify.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Solve even when hypotheses fail.
        #[arg(long)]
        force: bool,
    },
    /// Certify a given point.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Grid scan for the fixed point of an expansive map.
    Scan(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    bound_mode: Option<Mode>,
    /// Omit `generated_at` so reports are byte-reproducible.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Apriori,
    Aposteriori,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common, force) = match cli.command {
        Cmd::Check(c) => (Command::Check, c, false),
        Cmd::Solve { common, force } => (Command::Solve, common, force),
        Cmd::Certify { common, point } => (Command::Certify { point }, common, false),
        Cmd::Scan(c) => (Command::Scan, c, false),
    };
    let opts = Options {
        seed: common.seed,
        tol: common.tol,
        bound_mode: common.bound_mode.map(|m| match m {
            Mode::Apriori => BoundMode::Apriori,
            Mode::Aposteriori => BoundMode::Aposteriori,
        }),
        force,
        timestamp: !common.no_timestamp,
    };
    let report = run(&cmd, &common.scenario, &opts);
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    let json = report.to_json();
    match &common.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(3);
            }
        }
        None => print!("{json}"),
    }
    ExitCode::from(report.exit_code as u8)
}
