use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::spec::RecursiveOracleSpec;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Answer {
    pub fn from_bit(b: u8) -> Self {
        if b == 0 {
            Answer::Zero
        } else {
            Answer::One
        }
    }

    pub fn bit(self) -> Option<u8> {
        match self {
            Answer::Zero => Some(0),
            Answer::One => Some(1),
            Answer::Fail => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub index: usize,
    pub path: Vec<usize>,
    pub guess: Option<usize>,
    pub result: Answer,
}

/// Oracle semantics without logging.
///
/// * `k = 0`: `O(a) = b_∅` if `a = s(∅)`, else FAIL.
/// * `1 ≤ k < ℓ`: `O(x_1..x_k, a) = f(s(x_1..x_{k−1}), x_k)` if `a = s(x_1..x_k)`, else FAIL.
/// * `k = ℓ`: `O(x_1..x_ℓ) = f(s(x_1..x_{ℓ−1}), x_ℓ)`.
pub fn evaluate(spec: &RecursiveOracleSpec, path: &[usize], guess: Option<usize>) -> Result<Answer> {
    spec.check_path(path)?;
    let k = path.len();
    match (k < spec.depth, guess) {
        (true, None) => return Err(Error::Protocol(format!("query at depth {k} needs a key"))),
        (false, Some(_)) => return Err(Error::Protocol("leaf queries take no key".into())),
        (true, Some(a)) if !spec.contains(a) => return Err(Error::Protocol(format!("key {a} is not in A"))),
        _ => {}
    }
    if let Some(a) = guess {
        if a != spec.secret_at(path)? {
            return Ok(Answer::Fail);
        }
    }
    if k == 0 {
        return Ok(Answer::from_bit(spec.b_root));
    }
    let parent = spec.secret_at(&path[..k - 1])?;
    Ok(Answer::from_bit(spec.f(parent, path[k - 1])?))
}

/// Oracle that appends every call to a log.
pub struct RecursiveOracle<'a> {
    spec: &'a RecursiveOracleSpec,
    log: Vec<QueryRecord>,
}

impl<'a> RecursiveOracle<'a> {
    pub fn new(spec: &'a RecursiveOracleSpec) -> Self {
        Self { spec, log: Vec::new() }
    }

    pub fn spec(&self) -> &RecursiveOracleSpec {
        self.spec
    }

    /// Malformed queries are rejected and not logged.
    pub fn query(&mut self, path: &[usize], guess: Option<usize>) -> Result<Answer> {
        let result = evaluate(self.spec, path, guess)?;
        self.log.push(QueryRecord { index: self.log.len(), path: path.to_vec(), guess, result });
        Ok(result)
    }

    pub fn queries(&self) -> usize {
        self.log.len()
    }

    pub fn log(&self) -> &[QueryRecord] {
        &self.log
    }

    pub fn into_log(self) -> Vec<QueryRecord> {
        self.log
    }
}

pub fn write_log_jsonl<W: Write>(log: &[QueryRecord], mut w: W) -> Result<()> {
    for r in log {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_log_jsonl<R: BufRead>(r: R) -> Result<Vec<QueryRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
