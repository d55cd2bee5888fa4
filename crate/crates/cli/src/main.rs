use clap::{Parser, Subcommand};
use lrk_cli::runner::{load_config, resolve};
use lrk_cli::{run, CliError, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lrk", version, about = "Low-rank regularizing Krylov experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solvers listed in a JSON experiment config.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parse and print the resolved config without solving.
        #[arg(long)]
        validate_only: bool,
        /// Replace the problem seed.
        #[arg(long, value_name = "N")]
        seed_override: Option<u64>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let Command::Run {
        config,
        out,
        validate_only,
        seed_override,
    } = cli.command;
    let opts = RunOptions {
        out,
        seed_override,
        threads: None,
    };
    let config = load_config(&config)?;
    if validate_only {
        let resolved = resolve(config, &opts);
        resolved.plan()?;
        println!("{}", serde_json::to_string_pretty(&resolved).expect("config serializes"));
        return Ok(());
    }
    let summary = run(&config, &opts)?;
    for (label, s) in &summary.solvers {
        match (s.min_rel_error, s.best_iter) {
            (Some(e), Some(i)) => println!("{label}: min rel. error {e:.4e} at iteration {i}"),
            _ => println!("{label}: {} iterations", s.iterations),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lrk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
