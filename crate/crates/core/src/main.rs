use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qmhd::app::{self, EXIT_FAILURE, EXIT_OK};
use qmhd::config::RunConfig;

/// Worker count for the operator kernels; defaults to all cores.
const THREADS_VAR: &str = "QMHD_THREADS";

#[derive(Parser)]
#[command(name = "qmhd", version, about = "Quaternionic operator checks and stationary MHD solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the operator invariant suite.
    Verify(RunArgs),
    /// Estimate the constants and evaluate the convergence conditions.
    Constants(RunArgs),
    /// Run the configured fixed-point solver.
    Solve(RunArgs),
    /// Print a config with every field at its default value.
    DefaultConfig,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("{THREADS_VAR} must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err(format!("{THREADS_VAR} must be positive"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> i32 {
    let (args, which) = match cli.command {
        Command::DefaultConfig => {
            println!("{}", RunConfig::reference_json());
            return EXIT_OK;
        }
        Command::Verify(a) => (a, "verify"),
        Command::Constants(a) => (a, "constants"),
        Command::Solve(a) => (a, "solve"),
    };
    let cfg = match app::load_config(&args.config, args.out, args.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    match which {
        "verify" => match app::cmd_verify(&cfg) {
            Ok(r) => {
                print!("{}", r.text());
                if r.all_passed() {
                    EXIT_OK
                } else {
                    eprintln!("verify: some checks failed");
                    EXIT_FAILURE
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                app::exit_code(&e)
            }
        },
        "constants" => match app::cmd_constants(&cfg) {
            Ok(r) => {
                print!("{}", r.text());
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                app::exit_code(&e)
            }
        },
        _ => match app::cmd_solve(&cfg) {
            Ok(s) => {
                let r = &s.report;
                println!(
                    "{}: {} after {} iterations, final change {:e}",
                    r.method.as_str(),
                    if r.converged { "converged" } else { "not converged" },
                    r.iterations,
                    r.state_changes.last().copied().unwrap_or(f64::NAN)
                );
                s.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                app::exit_code(&e)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_FAILURE as u8);
    }
    ExitCode::from(run(cli) as u8)
}
