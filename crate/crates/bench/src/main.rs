use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gpc_bench::commands::{cmd_converge, cmd_cost_compare, cmd_forward, CommandError};
use gpc_bench::BenchConfig;

/// Sparse gpc posterior-density benchmark for a 1D parametric diffusion problem.
#[derive(Parser, Debug)]
#[command(name = "gpc-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed: truth, noise and Monte Carlo seeds become seed, seed+1, seed+2
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Extra `key=value` overrides, applied after the config file
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the forward problem at y = 0 and at a prior sample
    Forward {
        /// Verify second-order h-convergence on a manufactured solution
        #[arg(long)]
        self_check: bool,
    },
    /// Convergence study of the truncated posterior density over the N list
    Converge {
        /// Also study the error from truncating the parameter dimension
        #[arg(long = "sweep-J")]
        sweep_j: bool,
    },
    /// Error per unit work for Monte Carlo against the gpc route
    CostCompare,
}

fn load(cli: &Cli) -> Result<BenchConfig, CommandError> {
    let mut cfg = match &cli.config {
        Some(path) => BenchConfig::from_file(path)?,
        None => BenchConfig::default(),
    };
    for kv in &cli.overrides {
        cfg.apply_text(kv)?;
    }
    if let Some(seed) = cli.seed {
        cfg.reseed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CommandError> {
    let cfg = load(cli)?;
    match cli.command {
        Command::Forward { self_check } => cmd_forward(&cfg, self_check),
        Command::Converge { sweep_j } => cmd_converge(&cfg, sweep_j),
        Command::CostCompare => cmd_cost_compare(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("gpc-bench: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
