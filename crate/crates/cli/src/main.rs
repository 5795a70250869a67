use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use matchlaw::harness::{run_config, selftest, selftest_with, ConfigFile, SelftestSize};
use matchlaw::matching::lcs_fast;

/// Monte Carlo checks of longest-match and shortest-distance laws.
#[derive(Parser)]
#[command(name = "matchlaw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Longest common substring of encoded symbolic sequences.
    LcsLaw(RunArgs),
    /// Highest-scoring common substring via the stretch encoder.
    ScrabbleLaw(RunArgs),
    /// Shortest distance between two observed orbits of a map.
    OrbitLaw(RunArgs),
    /// Shortest distance between two orbits of a random dynamical system.
    RandomOrbitLaw(RunArgs),
    /// Plug-in collision entropy against the closed form.
    Entropy(RunArgs),
    /// Oracle-equivalence and closed-form consistency checks.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; a built-in example runs when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the file.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct SelftestArgs {
    /// Smaller case counts.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

const FAIR_COIN: &str = include_str!("../../../configs/fair_coin.toml");
const SCRABBLE: &str = include_str!("../../../configs/scrabble.toml");
const TIMES2: &str = include_str!("../../../configs/times2.toml");
const TWO_THREE: &str = include_str!("../../../configs/two_three.toml");
const ENTROPY: &str = include_str!("../../../configs/entropy.toml");

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::LcsLaw(a) => run_kind(a, "lcs_law", FAIR_COIN),
        Command::ScrabbleLaw(a) => run_kind(a, "scrabble_law", SCRABBLE),
        Command::OrbitLaw(a) => run_kind(a, "orbit_law", TIMES2),
        Command::RandomOrbitLaw(a) => run_kind(a, "random_orbit_law", TWO_THREE),
        Command::Entropy(a) => run_kind(a, "entropy_check", ENTROPY),
        Command::Selftest(a) => {
            let report = in_pool(a.threads, || {
                if a.quick {
                    selftest_with(lcs_fast, SelftestSize::QUICK)
                } else {
                    selftest()
                }
            })?;
            print!("{report}");
            Ok(report.passed())
        }
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(f))
}

fn run_kind(args: RunArgs, kind: &str, builtin: &str) -> anyhow::Result<bool> {
    let cfg = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::from_toml(builtin)?,
    };
    for e in &cfg.experiments {
        let plan_kind = e.to_plan(0)?.kind.name();
        if plan_kind != kind {
            bail!(
                "experiment {:?} is a {plan_kind} experiment; this subcommand runs {kind}",
                e.name
            );
        }
    }
    let report = run_config(&cfg, args.seed, args.threads)?;
    match &args.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            report.write_csv(BufWriter::new(f))?;
        }
        None => report.write_csv(io::stdout().lock())?,
    }
    let mut err = io::stderr().lock();
    write!(err, "{}", report.summary())?;
    Ok(report.passed())
}
