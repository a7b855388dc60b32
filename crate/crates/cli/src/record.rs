use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Experiment, Params};
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub parameters: Params,
    pub metrics: BTreeMap<String, f64>,
    pub seed: u64,
    pub duration_s: f64,
    pub threads: usize,
    pub passed: bool,
    pub failed: Vec<String>,
}

/// Appends one line per record. Each line goes out in a single write, so an
/// interrupted run leaves earlier lines intact.
pub fn append_jsonl(path: &Path, records: &[ResultRecord]) -> CliResult<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    for r in records {
        let mut line = serde_json::to_string(r)?;
        line.push('\n');
        f.write_all(line.as_bytes())?;
    }
    f.flush()?;
    Ok(())
}

/// Blank lines are skipped; a schema mismatch is an error.
pub fn read_jsonl(path: &Path) -> CliResult<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for line in BufReader::new(std::fs::File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: serde_json::Value = serde_json::from_str(&line)?;
        let found = raw.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if found != SCHEMA_VERSION {
            return Err(CliError::Schema { found, expected: SCHEMA_VERSION });
        }
        out.push(serde_json::from_value(raw)?);
    }
    Ok(out)
}
