use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use coadvise::batch::BatchOptions;
use coadvise::commands::{
    cmd_couple, cmd_emit, cmd_run, cmd_sweep, cmd_verify, default_couple_instances, default_verify_instances,
    CommandOutput,
};
use coadvise::config::CoupleGrid;
use coadvise::{parse_config, sinks, ExperimentConfig};

/// Default output directory when neither `--out` nor the config names one.
const OUT_ENV: &str = "COADVISE_OUT";

#[derive(Parser)]
#[command(name = "coadvise", version, about = "Two-player contextual bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: config `out`, then $COADVISE_OUT, then ./results].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use seeds 0..n instead of the configured list.
    #[arg(long, global = true)]
    seeds: Option<u64>,
    /// Worker threads [default: one per core].
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Tolerance for `couple` and `verify`.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run every (instance, algorithm, seed) cell and check regret bounds.
    Run,
    /// Run over the config's horizon grid and fit regret-vs-T slopes.
    Sweep,
    /// Check policy space independence of the configured instances.
    Verify,
    /// Check the directive-channel learner against EXP4 on the lifted problem.
    Couple,
    /// Convert transcripts in the output directory to plot data.
    Emit,
}

fn load(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let mut cfg = parse_config(path).with_context(|| format!("invalid config {}", path.display()))?;
    if let Some(n) = cli.seeds {
        anyhow::ensure!(n > 0, "--seeds must be at least 1");
        cfg = cfg.with_seed_count(n);
    }
    Ok(Some(cfg))
}

fn out_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.out.clone()))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn require(cfg: Option<ExperimentConfig>, command: &str) -> Result<ExperimentConfig> {
    cfg.with_context(|| format!("`{command}` needs --config"))
}

fn execute(cli: &Cli) -> Result<(CommandOutput, PathBuf)> {
    let cfg = load(cli)?;
    let out = out_dir(cli, cfg.as_ref());
    let opts = BatchOptions { jobs: cli.jobs };
    let output = match cli.command {
        Command::Run => cmd_run(&require(cfg, "run")?, &out, &opts)?,
        Command::Sweep => cmd_sweep(&require(cfg, "sweep")?, &out, &opts)?,
        Command::Verify => {
            let (instances, horizon) = match &cfg {
                Some(c) => (c.instances.clone(), c.horizon),
                None => (default_verify_instances(), 1000),
            };
            cmd_verify(&instances, horizon, cli.tol, &out)?
        }
        Command::Couple => {
            let (instances, mut grid) = match &cfg {
                Some(c) => (c.instances.clone(), c.couple.clone()),
                None => (default_couple_instances(), CoupleGrid::default()),
            };
            if let Some(t) = cli.tol {
                grid.tol = t;
            }
            if let Some(n) = cli.seeds {
                grid.seeds = (0..n).collect();
            }
            cmd_couple(&instances, &grid, cli.jobs, &out)?
        }
        Command::Emit => cmd_emit(&out)?,
    };
    Ok((output, out))
}

fn failure_note(out: &Path) -> String {
    format!("failing verdicts listed in {}", out.join(sinks::FAILURES).display())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok((output, out)) => {
            print!("{}", output.report);
            if output.passed() {
                ExitCode::SUCCESS
            } else {
                for f in &output.failures {
                    eprintln!("FAIL {}: {}", f.instance, f.reason);
                }
                eprintln!("{}", failure_note(&out));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
