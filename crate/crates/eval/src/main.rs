use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use uptrendz_core::catalog::log::Durability;
use uptrendz_core::Platform;
use uptrendz_eval::eval::{all_scenarios, run_eval, EvalConfig, Metric};
use uptrendz_eval::{movielens, oracle, walkthrough};

/// MovieLens-100k walkthrough and offline evaluation.
///
/// Without a subcommand, loads the dataset, configures the walkthrough
/// scenarios and evaluates them on a temporal per-user split.
#[derive(Parser)]
#[command(name = "uptrendz-eval", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    eval: EvalArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory holding u.item, u.user and u.data.
    #[arg(long, default_value = "data/ml-100k")]
    data: PathBuf,
    /// Fraction of each user's latest ratings held out for testing.
    #[arg(long, default_value_t = 0.2)]
    holdout: f64,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Comma-separated scenario ids, or `all`.
    #[arg(long, default_value = "all")]
    scenarios: String,
    /// Comma-separated subset of recall, precision, ndcg.
    #[arg(long, default_value = "recall,precision,ndcg")]
    metrics: String,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Breaks timestamp ties in the split.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Compare every engine against brute-force oracles on random instances.
    Oracles {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        instances: usize,
    },
    /// Load the dataset into a durable store, printing one line per
    /// acknowledged rating.
    Ingest {
        #[arg(long, default_value = "data/ml-100k")]
        data: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// Stop after this many ratings.
        #[arg(long)]
        limit: Option<usize>,
        /// fsync every append.
        #[arg(long)]
        sync: bool,
    },
}

fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let mut config = EvalConfig::new(&args.data);
    config.holdout_fraction = args.holdout;
    config.k = args.k;
    config.seed = args.seed;
    if args.scenarios != "all" {
        config.scenarios = args.scenarios.split(',').map(|s| s.trim().to_string()).collect();
        if let Some(bad) = config.scenarios.iter().find(|s| !all_scenarios().contains(s)) {
            bail!("unknown scenario {bad:?}; known: {}", all_scenarios().join(", "));
        }
    }
    config.metrics = args
        .metrics
        .split(',')
        .map(|m| m.trim().parse::<Metric>())
        .collect::<Result<_, _>>()
        .map_err(anyhow::Error::msg)?;
    let platform = Platform::in_memory();
    let report = run_eval(&platform, &config)?;
    print!("{}", report.table());
    if let Some(path) = args.report {
        std::fs::write(&path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn oracles(seed: u64, instances: usize) -> anyhow::Result<()> {
    let report = oracle::run_oracles(seed, instances);
    println!("{}", report.summary());
    match report.failures.first() {
        None => Ok(()),
        Some(failure) => {
            println!("{failure}");
            bail!("{} of {} instances mismatched", report.failures.len(), report.instances)
        }
    }
}

fn ingest(data: PathBuf, store: PathBuf, limit: Option<usize>, sync: bool) -> anyhow::Result<()> {
    let dataset = movielens::load(&data)?;
    let durability = if sync { Durability::Sync } else { Durability::Flush };
    let (platform, _) = Platform::open(&store, durability)?;
    let d = walkthrough::configure(&platform)?;
    walkthrough::ingest_catalog(&platform, &d, &dataset)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "domain {d}")?;
    let n = limit.unwrap_or(usize::MAX);
    for (i, rating) in dataset.ratings.iter().take(n).enumerate() {
        let ack = platform.record_interaction(d.as_str(), walkthrough::rating_event(rating))?;
        writeln!(out, "acked {} seq {}", i + 1, ack.sequence)?;
        out.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        None => eval(cli.eval),
        Some(Command::Oracles { seed, instances }) => oracles(seed, instances),
        Some(Command::Ingest { data, store, limit, sync }) => ingest(data, store, limit, sync),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
