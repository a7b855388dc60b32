use rand::Rng;
use serde::{Deserialize, Serialize};

use super::oracle::{Answer, QueryRecord, RecursiveOracle};
use super::spec::RecursiveOracleSpec;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRun {
    pub answer: u8,
    pub queries: usize,
    pub log: Vec<QueryRecord>,
}

/// Learns each secret from its children's bits, children left to right,
/// eliminating labels in ascending order until one survives, then confirms
/// candidates with the node's own query. The confirming query returns the
/// node's bit, which is what the parent needs.
pub fn classical_solver(spec: &RecursiveOracleSpec) -> Result<ClassicalRun> {
    if spec.card_a() > 1 << 12 {
        return Err(Error::Size(format!("|A| = {} exceeds 2^12", spec.card_a())));
    }
    let mut oracle = RecursiveOracle::new(spec);
    let mut path = Vec::with_capacity(spec.depth);
    let answer = node_bit(&mut oracle, &mut path)?;
    let log = oracle.into_log();
    Ok(ClassicalRun { answer, queries: log.len(), log })
}

fn node_bit(oracle: &mut RecursiveOracle, path: &mut Vec<usize>) -> Result<u8> {
    let spec = oracle.spec().clone();
    if path.len() == spec.depth {
        return oracle.query(path, None)?.bit().ok_or_else(|| Error::Integrity("leaf query failed".into()));
    }
    let mut candidates: Vec<usize> = spec.labels().to_vec();
    for x in 0..spec.symbols() {
        if candidates.len() <= 1 {
            break;
        }
        path.push(x);
        let bit = node_bit(oracle, path)?;
        path.pop();
        let mut kept = Vec::with_capacity(candidates.len());
        for &a in &candidates {
            if spec.f(a, x)? == bit {
                kept.push(a);
            }
        }
        candidates = kept;
    }
    for a in candidates {
        match oracle.query(path, Some(a))? {
            Answer::Fail => continue,
            ans => return Ok(ans.bit().expect("non-FAIL answer is a bit")),
        }
    }
    Err(Error::Integrity(format!("no label in A is consistent with the children of {path:?}")))
}

/// Uniformly random queries: a random depth, random symbols and, above the
/// leaves, a random key from `A`.
pub fn random_strategy<R: Rng + ?Sized>(
    spec: &RecursiveOracleSpec,
    queries: usize,
    rng: &mut R,
) -> Result<Vec<QueryRecord>> {
    let mut oracle = RecursiveOracle::new(spec);
    for _ in 0..queries {
        let k = rng.random_range(0..=spec.depth);
        let path: Vec<usize> = (0..k).map(|_| rng.random_range(0..spec.symbols())).collect();
        let guess = (k < spec.depth).then(|| spec.labels()[rng.random_range(0..spec.card_a())]);
        oracle.query(&path, guess)?;
    }
    Ok(oracle.into_log())
}
