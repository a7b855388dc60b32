use std::collections::HashMap;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::oracle1::{build_oracle, SingleLevelOracle};
use crate::rng::{self, derive_seed};
use crate::simcore::Hadamard;
use crate::{Error, Result};

/// Domain separator for the secret hash.
const SECRET_KEY: u64 = 0x5EC2_E7A1_B0B5_F00D;

/// Secret tree of a recursive problem. Secrets are never stored: the secret at
/// `path` is `A[H(master_seed, path) mod |A|]` with `H` a SplitMix64 chain over
/// the path length and symbols.
#[derive(Clone, Debug)]
pub struct RecursiveOracleSpec {
    pub depth: usize,
    pub oracle: SingleLevelOracle,
    pub master_seed: u64,
    pub b_root: u8,
    position: HashMap<usize, usize>,
}

impl RecursiveOracleSpec {
    pub fn new(oracle: SingleLevelOracle, depth: usize, master_seed: u64, b_root: u8) -> Result<Self> {
        if depth < 1 {
            return Err(Error::Depth("recursive problems need depth at least 1".into()));
        }
        if b_root > 1 {
            return Err(Error::InvalidConfig(format!("root answer must be a bit, got {b_root}")));
        }
        let position = oracle.labels.iter().enumerate().map(|(k, &a)| (a, k)).collect();
        Ok(Self { depth, oracle, master_seed, b_root, position })
    }

    /// Root answer drawn from the master seed.
    pub fn generate(oracle: SingleLevelOracle, depth: usize, master_seed: u64) -> Result<Self> {
        let b_root = (derive_seed(master_seed ^ SECRET_KEY, u64::MAX) & 1) as u8;
        Self::new(oracle, depth, master_seed, b_root)
    }

    pub fn n(&self) -> usize {
        self.oracle.n
    }

    pub fn symbols(&self) -> usize {
        1 << self.oracle.n
    }

    pub fn labels(&self) -> &[usize] {
        &self.oracle.labels
    }

    pub fn card_a(&self) -> usize {
        self.oracle.labels.len()
    }

    pub fn contains(&self, a: usize) -> bool {
        self.position.contains_key(&a)
    }

    /// `f(a, x)`.
    pub fn f(&self, a: usize, x: usize) -> Result<u8> {
        let k = *self.position.get(&a).ok_or_else(|| Error::Label(format!("label {a} is not in A")))?;
        if x >= self.symbols() {
            return Err(Error::Protocol(format!("symbol {x} outside X")));
        }
        Ok(((self.oracle.f_bits[k][x / 64] >> (x % 64)) & 1) as u8)
    }

    pub fn check_path(&self, path: &[usize]) -> Result<()> {
        if path.len() > self.depth {
            return Err(Error::Depth(format!("path of length {} in a depth-{} tree", path.len(), self.depth)));
        }
        if let Some(x) = path.iter().find(|&&x| x >= self.symbols()) {
            return Err(Error::Protocol(format!("symbol {x} outside X")));
        }
        Ok(())
    }

    /// `s(path)`; leaves carry no secret.
    pub fn secret_at(&self, path: &[usize]) -> Result<usize> {
        self.check_path(path)?;
        if path.len() >= self.depth {
            return Err(Error::Depth(format!("leaf {path:?} has no secret")));
        }
        let mut h = derive_seed(self.master_seed ^ SECRET_KEY, path.len() as u64);
        for &x in path {
            h = derive_seed(h, x as u64);
        }
        Ok(self.oracle.labels[(h % self.oracle.labels.len() as u64) as usize])
    }

    pub fn to_file(&self, oracle_ref: OracleRef) -> SpecFile {
        SpecFile {
            l: self.depth,
            n: self.n(),
            alpha_n: (self.card_a() as f64).log2(),
            master_seed: self.master_seed,
            b_root: self.b_root,
            oracle_ref,
        }
    }

    pub fn from_file(file: &SpecFile) -> Result<Self> {
        let oracle = file.oracle_ref.resolve()?;
        if oracle.n != file.n {
            return Err(Error::Integrity(format!("spec says n = {}, oracle has n = {}", file.n, oracle.n)));
        }
        Self::new(oracle, file.l, file.master_seed, file.b_root)
    }
}

/// Where the single-level oracle of a spec comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleRef {
    Hadamard { n: usize, card_a: usize, label_seed: u64 },
    Instance { path: String },
}

impl OracleRef {
    pub fn resolve(&self) -> Result<SingleLevelOracle> {
        match self {
            OracleRef::Hadamard { n, card_a, label_seed } => hadamard_family(*n, *card_a, *label_seed),
            OracleRef::Instance { path } => SingleLevelOracle::from_instance_json(&std::fs::read_to_string(path)?),
        }
    }
}

/// Spec file: `{l, n, alpha_n, master_seed, b_root, oracle_ref}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    pub l: usize,
    pub n: usize,
    pub alpha_n: f64,
    pub master_seed: u64,
    pub b_root: u8,
    pub oracle_ref: OracleRef,
}

/// Oracle compiled from `H^⊗n` on `card_a` labels. All labels when
/// `card_a = 2^n`, otherwise a seeded subset in ascending order.
pub fn hadamard_family(n: usize, card_a: usize, label_seed: u64) -> Result<SingleLevelOracle> {
    if n < 1 || n > 12 {
        return Err(Error::Size(format!("hadamard family needs 1 <= n <= 12, got {n}")));
    }
    let all = 1usize << n;
    if card_a < 1 || card_a > all {
        return Err(Error::InvalidConfig(format!("|A| = {card_a} is not in [1, 2^{n}]")));
    }
    let labels: Vec<usize> = if card_a == all {
        (0..all).collect()
    } else {
        let mut v = sample(&mut rng::stream(label_seed), all, card_a).into_vec();
        v.sort_unstable();
        v
    };
    let mut oracle = build_oracle(&Hadamard { n }, &labels)?;
    oracle.seed = Some(label_seed);
    Ok(oracle)
}
