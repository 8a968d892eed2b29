use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ondemand_cli::output::{self, Collector};
use ondemand_cli::{summarize, verify, ExperimentConfig, Suite};

#[derive(Parser, Debug)]
#[command(
    name = "ondemand",
    version,
    about = "Seeded experiments for on-demand multi-distribution learning"
)]
struct Cli {
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per grid point (random cases per suite for `verify`).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output CSV path; sidecar files are written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Dump full per-trial reports as JSON.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Boosting schedule on planted linear instances.
    Realizable,
    /// Lazy Hedge learner on planted or noisy finite instances.
    Agnostic,
    /// Lazy Hedge on adversarial concave objectives.
    Oods,
    /// Run whichever suite the config names.
    Sweep,
    /// Run the property suites; exits nonzero on any failure.
    Verify,
}

fn load_config(cli: &Cli, suite: Option<Suite>) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = suite {
        cfg.suite = s;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli, suite: Option<Suite>) -> Result<()> {
    let cfg = load_config(cli, suite)?;
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("results/{}.csv", cfg.suite)));
    log::info!(
        "{} suite: {} grid points x {} trials, seed {}, writing {}",
        cfg.suite,
        cfg.points().len(),
        cfg.trials,
        cfg.seed,
        out.display()
    );
    let mut collector = Collector::create(&out, cli.trace)?;
    run_and_collect(&cfg, cli.trace, &mut collector)?;
    let meta = collector.finish(&cfg)?;
    let rows = output::read_rows(&out)?;
    let summaries = summarize(&rows)?;
    output::write_csv(&output::summary_path(&out), &summaries)?;
    print!("{}", ondemand_cli::summary::render(&summaries));
    println!(
        "{} rows -> {} (config {})",
        meta.rows,
        out.display(),
        &meta.config_hash[..12]
    );
    Ok(())
}

fn run_and_collect(cfg: &ExperimentConfig, trace: bool, collector: &mut Collector) -> Result<()> {
    ondemand_cli::run_experiment(cfg, trace, |row| collector.push(row))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Realizable => run(&cli, Some(Suite::Realizable)),
        Command::Agnostic => run(&cli, Some(Suite::Agnostic)),
        Command::Oods => run(&cli, Some(Suite::Oods)),
        Command::Sweep => run(&cli, None),
        Command::Verify => {
            let checks = verify::run_all(cli.seed.unwrap_or(0), cli.trials.unwrap_or(200));
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                return ExitCode::SUCCESS;
            }
            eprintln!(
                "verify: {} suite(s) failed",
                checks.iter().filter(|c| !c.passed).count()
            );
            return ExitCode::FAILURE;
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
