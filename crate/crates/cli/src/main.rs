use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use jdd_cli::output::{read_reference, sort_rows, write_outputs, Axis};
use jdd_cli::sweeps::{run_bounds, run_optimize_split, run_pie_sweep, run_rate_sweep, NamedCode};
use jdd_cli::{CliError, Sweep, SweepConfig};

#[derive(Parser)]
#[command(name = "jdd", version, about = "Joint detection and decoding experiments on the BI-AWGN channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Sweep configuration (key = value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the configured base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the active-slot and density-sample trial counts.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Output directory for results.csv and manifest.txt.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Generator file of a code to simulate; repeatable.
    #[arg(long = "code", global = true)]
    codes: Vec<PathBuf>,

    /// Reference-curve CSV merged into the results; repeatable.
    #[arg(long = "ref", global = true)]
    refs: Vec<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Achievable and converse rates over a blocklength grid.
    RateSweep,
    /// Inclusive error rate over an SNR grid.
    PieSweep,
    /// Preamble length minimizing the inclusive-error bound.
    OptimizeSplit,
    /// Closed-form detection bounds.
    Bounds,
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = SweepConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.active_trials = trials;
        cfg.density_trials = trials;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    cfg.codes.extend(cli.codes);
    cfg.refs.extend(cli.refs);
    let codes = cfg
        .codes
        .iter()
        .map(|p| NamedCode::load(p))
        .collect::<Result<Vec<_>, _>>()?;

    let (mut run, extra) = match cli.command {
        Command::RateSweep => (run_rate_sweep(&cfg)?, None),
        Command::PieSweep => (run_pie_sweep(&cfg, &codes)?, None),
        Command::OptimizeSplit => {
            if codes.len() > 1 {
                return Err(CliError::Config("optimize-split takes at most one code".into()));
            }
            let (run, table) = run_optimize_split(&cfg, codes.first())?;
            (run, Some(table))
        }
        Command::Bounds => (run_bounds(&cfg)?, None),
    };

    let axis = match cfg.sweep {
        Sweep::Blocklength { .. } => Axis::Blocklength,
        Sweep::Snr { .. } => Axis::Snr,
    };
    for (i, r) in cfg.refs.iter().enumerate() {
        run.rows.extend(read_reference(r)?);
        run.manifest.set(format!("ref.{i}"), r.display());
    }
    for (i, c) in cfg.codes.iter().enumerate() {
        run.manifest.set(format!("code.{i}"), c.display());
    }
    sort_rows(&mut run.rows, axis);
    run.manifest.set("rows", run.rows.len());

    write_outputs(&cfg.out, &run.rows, &run.manifest)?;
    if let Some(table) = extra {
        std::fs::write(cfg.out.join("splits.csv"), table)?;
    }
    Ok(cfg.out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            println!("wrote {}", out.join("results.csv").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
            ExitCode::FAILURE
        }
    }
}
