//! Command-line front end: build and certify quadrature rules, run
//! approximation experiments and parameter sweeps, and execute the
//! operator-algebra verification suite.
//!
//! Exit codes: 0 success, 2 law mismatch, 3 configuration error, 4 I/O
//! failure.

mod commands;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "hypersphere",
    version,
    about = "Hyperinterpolation operators on the sphere and their algebra, verified numerically"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a quadrature rule (or re-certify one from a file).
    Rule(commands::RuleArgs),
    /// Apply an operator to a function and report its errors and sparsity.
    Approx(commands::ApproxArgs),
    /// Run the operator-algebra law suite and write a JSON report.
    Verify(commands::VerifyArgs),
    /// Error-versus-degree table (CSV, optional SVG chart).
    Table(commands::TableArgs),
}

/// Failure modes with their process exit codes.
pub enum Failure {
    /// Bad flags, malformed inputs, impossible requests.
    Config(String),
    /// Filesystem trouble.
    Io(String),
    /// The suite ran but some law did not match its expected status.
    LawMismatch(Vec<String>),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::LawMismatch(_) => ExitCode::from(2),
            Failure::Config(_) => ExitCode::from(3),
            Failure::Io(_) => ExitCode::from(4),
        }
    }
}

impl From<hypersphere::Error> for Failure {
    fn from(e: hypersphere::Error) -> Self {
        match e {
            hypersphere::Error::Io(err) => Failure::Io(err.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Rule(args) => commands::run_rule(args),
        Command::Approx(args) => commands::run_approx(args),
        Command::Verify(args) => commands::run_verify(args),
        Command::Table(args) => commands::run_table(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Config(msg) => eprintln!("configuration error: {msg}"),
                Failure::Io(msg) => eprintln!("i/o error: {msg}"),
                Failure::LawMismatch(laws) => {
                    eprintln!("law status mismatch for: {}", laws.join(", "))
                }
            }
            failure.exit_code()
        }
    }
}
