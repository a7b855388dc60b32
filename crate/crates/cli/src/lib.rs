//! Experiment driver for `lab-core`: configuration, seeding, JSON Lines
//! records and bit-exact replay.

pub mod config;
pub mod error;
pub mod experiments;
pub mod record;

use std::path::Path;
use std::time::Instant;

pub use config::{ConfigFile, Experiment, ExperimentConfig, Params};
pub use error::{CliError, CliResult};
pub use experiments::{execute, RunOutput, Table};
pub use record::{append_jsonl, read_jsonl, ResultRecord, SCHEMA_VERSION};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Runs the configured experiment, appends its record to `out` and writes the
/// CSV payload to `csv` when both are given.
pub fn run(config: &ExperimentConfig) -> CliResult<ResultRecord> {
    let params = config.params.resolved(config.experiment)?;
    let start = Instant::now();
    let output = in_pool(config.threads, || execute(config.experiment, &params, config.master_seed))??;
    let record = ResultRecord {
        schema_version: SCHEMA_VERSION,
        experiment: config.experiment,
        parameters: params,
        metrics: output.metrics,
        seed: config.master_seed,
        duration_s: start.elapsed().as_secs_f64(),
        threads: config.threads,
        passed: output.failed.is_empty(),
        failed: output.failed,
    };
    if let Some(path) = &config.out {
        append_jsonl(path, std::slice::from_ref(&record))?;
    }
    if let Some(path) = &config.csv {
        match &output.table {
            Some(t) => std::fs::write(path, t.to_csv())?,
            None => {
                return Err(CliError::Config(format!("experiment '{}' has no CSV output", config.experiment.name())))
            }
        }
    }
    Ok(record)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport {
    pub records: usize,
    pub mismatches: Vec<String>,
}

impl ReplayReport {
    pub fn all_match(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-runs every record and compares metrics bit for bit.
pub fn replay(path: &Path, threads: usize) -> CliResult<ReplayReport> {
    let records = read_jsonl(path)?;
    let mut mismatches = Vec::new();
    for (k, rec) in records.iter().enumerate() {
        let fresh = in_pool(threads, || execute(rec.experiment, &rec.parameters, rec.seed))??;
        let keys: std::collections::BTreeSet<&String> = rec.metrics.keys().chain(fresh.metrics.keys()).collect();
        for key in keys {
            match (rec.metrics.get(key), fresh.metrics.get(key)) {
                (Some(a), Some(b)) if a.to_bits() == b.to_bits() => {}
                (a, b) => mismatches
                    .push(format!("record {k} ({}): {key}: stored {a:?}, replayed {b:?}", rec.experiment.name())),
            }
        }
        if rec.failed != fresh.failed {
            mismatches.push(format!("record {k} ({}): failed assertions differ", rec.experiment.name()));
        }
    }
    Ok(ReplayReport { records: records.len(), mismatches })
}

/// Two-column text table of the record's metrics.
pub fn summary(record: &ResultRecord) -> String {
    let width = record.metrics.keys().map(|k| k.len()).max().unwrap_or(0).max(6);
    let mut s = format!("{} (seed {}, {:.3} s)\n", record.experiment.name(), record.seed, record.duration_s);
    for (k, v) in &record.metrics {
        s.push_str(&format!("  {k:<width$}  {v}\n"));
    }
    if record.passed {
        s.push_str("  result: pass\n");
    } else {
        for f in &record.failed {
            s.push_str(&format!("  FAILED: {f}\n"));
        }
    }
    s
}
