use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hyperbolic_fredholm::cli::{run_command, Command};

/// Spectral solver and Fredholm analysis for time-periodic hyperbolic systems.
#[derive(Parser)]
#[command(name = "hypfred", version)]
struct Args {
    command: Command,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "k-max")]
    k_max: Option<i64>,
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    // Usage errors share status 1 with other input errors; 2 is reserved.
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let status = run_command(args.command, &args.problem, &args.out, args.k_max, args.tol);
    ExitCode::from(status as u8)
}
