use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lob_exec::commands::{cmd_policy, cmd_simulate, cmd_solve, cmd_sweep, cmd_verify};
use lob_exec::config::RunConfig;

#[derive(Parser)]
#[command(name = "lobexec", version, about = "Optimal execution in an equilibrium limit order book")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Root seed (overrides `mc.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the QVI and write the value field and slices.
    Solve,
    /// Simulate markets and evaluate a strategy.
    Simulate {
        /// twap, terminal, greedy or jumps (overrides `simulate.strategy`).
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Extract the optimal policy and roll it out against baselines.
    Policy {
        /// Stored value field; solved afresh when absent.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Run the verification suite; exits 1 if any check fails.
    Verify,
    /// Re-solve across one parameter axis.
    Sweep {
        #[arg(long)]
        axis: Option<String>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
}

fn run(cli: Cli) -> lob_exec::Result<bool> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = cli.common.out {
        cfg.output.dir = out;
    }
    if let Some(seed) = cli.common.seed {
        cfg.mc.seed = seed;
    }
    match cli.command {
        Command::Solve => {
            cmd_solve(&cfg)?;
        }
        Command::Simulate { strategy } => {
            if let Some(s) = strategy {
                cfg.simulate.strategy = s;
            }
            cmd_simulate(&cfg)?;
        }
        Command::Policy { field } => {
            cmd_policy(&cfg, field.as_deref())?;
        }
        Command::Verify => {
            let report = cmd_verify(&cfg)?;
            for c in &report.checks {
                println!("{:<26} {:?}  {:.4e} (tol {:.4e})", c.name, c.status, c.statistic, c.tolerance);
            }
            return Ok(report.passed());
        }
        Command::Sweep { axis, values } => {
            let r = cmd_sweep(&cfg, axis.as_deref(), values.as_deref())?;
            for p in &r.points {
                println!("{} = {}: v0 = {:.6}", r.axis, p.value, p.v0);
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
