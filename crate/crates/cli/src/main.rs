use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lab_cli::{replay, run, summary, CliResult, ConfigFile, Experiment, ExperimentConfig, Params};

#[derive(Parser)]
#[command(name = "lab", version, about = "Oracle-separation and random-circuit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// L1 dispersion of a unitary, or pseudo-dispersion of a group Fourier transform with --group.
    Dispersion(Common),
    /// Sign approximation against the (2/pi) bound and brute force.
    Signs(Common),
    /// Single-level oracle identification.
    Oracle(Common),
    /// Recursive problems: --mode find | classical | table | referee | coherent.
    Rfs(Common),
    /// Pauli chain: --mode gap | table | stationary | lumped | moments.
    Markov(Common),
    /// Monte Carlo check of the two-copy Pauli twirl.
    Ad2(Common),
    /// Collision statistics of random circuits.
    Qt(Common),
    /// Re-run every record in a JSONL file and compare metrics bit for bit.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    group: Option<String>,
    /// Constant in t = C·n³.
    #[arg(long = "C")]
    c: Option<f64>,
    /// hadamard | qft | identity | random
    #[arg(long)]
    unitary: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    /// JSON Lines file the record is appended to; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, env = "LAB_THREADS", default_value_t = 0)]
    threads: usize,
    /// JSON file whose fields override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    record: PathBuf,
    #[arg(long, env = "LAB_THREADS", default_value_t = 0)]
    threads: usize,
}

fn experiment_config(experiment: Experiment, c: Common) -> CliResult<ExperimentConfig> {
    let base = ExperimentConfig {
        experiment,
        params: Params {
            n: c.n,
            t: c.t,
            l: c.l,
            delta: c.delta,
            beta: c.beta,
            samples: c.samples,
            trials: c.trials,
            group: c.group,
            c: c.c,
            unitary: c.unitary,
            mode: c.mode,
        },
        master_seed: c.seed,
        out: c.out,
        csv: c.csv,
        threads: c.threads,
    };
    match c.config {
        Some(path) => ConfigFile::load(&path)?.apply(base),
        None => Ok(base),
    }
}

fn main_inner() -> CliResult<bool> {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Command::Replay(args) => {
            let report = replay(&args.record, args.threads)?;
            for m in &report.mismatches {
                println!("mismatch: {m}");
            }
            println!(
                "replayed {} records: {}",
                report.records,
                if report.all_match() { "all match" } else { "MISMATCH" }
            );
            return Ok(report.all_match());
        }
        Command::Dispersion(c) => (Experiment::Dispersion, c),
        Command::Signs(c) => (Experiment::Signs, c),
        Command::Oracle(c) => (Experiment::Oracle, c),
        Command::Rfs(c) => (Experiment::Rfs, c),
        Command::Markov(c) => (Experiment::Markov, c),
        Command::Ad2(c) => (Experiment::Ad2, c),
        Command::Qt(c) => (Experiment::Qt, c),
    };
    let config = experiment_config(experiment, common)?;
    let record = run(&config)?;
    if config.out.is_some() {
        print!("{}", summary(&record));
    } else {
        eprint!("{}", summary(&record));
        println!("{}", serde_json::to_string(&record)?);
    }
    Ok(record.passed)
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
