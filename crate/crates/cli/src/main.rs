use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsapf_cli::{
    cmd_oracle_check, cmd_run, cmd_sweep, parse_seeds, parse_values, summary_line, CliError, SweepRequest,
};

#[derive(Parser)]
#[command(name = "dsapf", version, about = "Particle-filter spectrum access simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write slots.csv and summary.csv.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "DSA_PF_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Sweep one scenario field over several values and seeds.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        param: String,
        /// Comma list, or an inclusive integer range like 1..6.
        #[arg(long)]
        values: String,
        #[arg(long)]
        seeds: Option<String>,
        /// Concurrent cells; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, env = "DSA_PF_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Compare the simulated objective with the exhaustive optimum on a tiny scenario.
    OracleCheck {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        slots: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, seed, out } => {
            let outcome = cmd_run(config.as_deref(), seed, &out)?;
            println!("{} out={}", summary_line(&outcome.summary), out.display());
        }
        Command::Sweep {
            config,
            param,
            values,
            seeds,
            jobs,
            out,
        } => {
            let seeds = match seeds {
                Some(s) => parse_seeds(&s)?,
                None => Vec::new(),
            };
            let outcome = cmd_sweep(&SweepRequest {
                config: config.as_deref(),
                param: &param,
                values: parse_values(&values)?,
                seeds,
                jobs,
                out: &out,
            })?;
            for row in &outcome.rows {
                println!(
                    "parameter={} value={} metric={} mean={:.6e} std={:.6e}",
                    row.parameter, row.value, row.metric, row.mean, row.std
                );
            }
            println!("table={}", outcome.table.display());
        }
        Command::OracleCheck { config, slots, seed } => {
            let trace = cmd_oracle_check(config.as_deref(), slots, seed)?;
            for p in &trace {
                println!(
                    "slot={} realized={:.6e} optimum={:.6e} ratio={:.6}",
                    p.slot,
                    p.realized,
                    p.optimum,
                    p.ratio()
                );
            }
            if let Some(last) = trace.last() {
                println!("final_ratio={:.6} slots={}", last.ratio(), trace.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dsapf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
