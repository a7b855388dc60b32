//! Single-level oracle identification: compile a unitary and a label set into
//! a binary oracle `f(a, x)`, prepare `|φ_a⟩ = 2^{-n/2} Σ_x (−1)^{f(a,x)} |x⟩`
//! with one query, then measure the label register after `U`.
//!
//! For label `a` with measured rows `R_a` and ancilla vector `ψ_a` on them,
//! the compiled row is `c_x = Σ_{r∈R_a} conj(ψ_r)⟨r|U|x⟩`, the signs come from
//! [`best_phase_signs`] and `f(a, x) = (1 − θ_x)/2`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::signs::best_phase_signs;
use crate::simcore::{PureState, UnitaryAction, MAX_QUBITS};
use crate::{Error, Result, C64};

/// How the `2^n` output rows group into measured labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Measurement {
    /// Every basis state is its own label.
    Full,
    /// The label is the low `m` bits; the high `n − m` bits are ancilla.
    LowBits(usize),
    /// Explicit partition of the rows, one block per label.
    Blocks(Vec<Vec<usize>>),
}

impl Measurement {
    pub fn outcome_count(&self, n: usize) -> usize {
        match self {
            Measurement::Full => 1 << n,
            Measurement::LowBits(m) => 1 << m,
            Measurement::Blocks(b) => b.len(),
        }
    }

    pub fn rows(&self, n: usize, label: usize) -> Vec<usize> {
        match self {
            Measurement::Full => vec![label],
            Measurement::LowBits(m) => (0..1usize << (n - m)).map(|y| label | (y << m)).collect(),
            Measurement::Blocks(b) => b[label].clone(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Measurement::Full => Ok(()),
            Measurement::LowBits(m) if *m <= n => Ok(()),
            Measurement::LowBits(m) => {
                Err(Error::InvalidConfig(format!("label register of {m} bits exceeds {n} qubits")))
            }
            Measurement::Blocks(blocks) => {
                let mut seen = vec![false; 1 << n];
                for r in blocks.iter().flatten() {
                    if *r >= seen.len() || std::mem::replace(&mut seen[*r], true) {
                        return Err(Error::InvalidConfig(format!(
                            "measurement blocks do not partition the rows (row {r})"
                        )));
                    }
                }
                if seen.iter().all(|&s| s) {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig("measurement blocks do not cover every row".into()))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelMeta {
    /// `Σ_x |c_x| / 2^{n/2}`.
    pub beta: f64,
    /// `(2β/π)²`.
    pub predicted: f64,
    /// `(|Σ_x θ_x c_x| / 2^{n/2})²`, the bound actually delivered by the signs.
    pub achieved_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleLevelOracle {
    pub n: usize,
    pub measurement: Measurement,
    pub labels: Vec<usize>,
    /// Per label, bit `x` of the packed words is `f(a, x)`.
    pub f_bits: Vec<Vec<u64>>,
    /// Per label, the ancilla vector on the measured rows.
    pub psi: Vec<Vec<C64>>,
    pub meta: Vec<LabelMeta>,
    pub hidden: usize,
    pub seed: Option<u64>,
}

/// Compiles `U` with one measured row per label.
pub fn build_oracle(u: &dyn UnitaryAction, labels: &[usize]) -> Result<SingleLevelOracle> {
    let psi = vec![vec![C64::new(1.0, 0.0)]; labels.len()];
    build_oracle_with(u, Measurement::Full, labels, psi)
}

/// Compiles `U` with an arbitrary measurement and per-label ancilla vectors.
pub fn build_oracle_with(
    u: &dyn UnitaryAction,
    measurement: Measurement,
    labels: &[usize],
    psi: Vec<Vec<C64>>,
) -> Result<SingleLevelOracle> {
    let n = u.n_qubits();
    if n > MAX_QUBITS {
        return Err(Error::Size(format!("{n} qubits exceeds the dense limit of {MAX_QUBITS}")));
    }
    if labels.is_empty() {
        return Err(Error::InvalidConfig("oracle needs at least one label".into()));
    }
    measurement.validate(n)?;
    if psi.len() != labels.len() {
        return Err(Error::InvalidConfig("one ancilla vector per label is required".into()));
    }
    let outcomes = measurement.outcome_count(n);
    let compiled = labels
        .par_iter()
        .zip(&psi)
        .map(|(&a, p)| {
            if a >= outcomes {
                return Err(Error::Label(format!("label {a} outside the {outcomes} outcomes")));
            }
            let rows = measurement.rows(n, a);
            if rows.len() != p.len() {
                return Err(Error::InvalidConfig(format!(
                    "ancilla for label {a} has length {}, expected {}",
                    p.len(),
                    rows.len()
                )));
            }
            let norm: f64 = p.iter().map(|z| z.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidState(format!("ancilla for label {a} has squared norm {norm}")));
            }
            compile_label(u, &rows, p)
        })
        .collect::<Result<Vec<_>>>()?;
    let (f_bits, meta) = compiled.into_iter().unzip();
    Ok(SingleLevelOracle { n, measurement, labels: labels.to_vec(), f_bits, psi, meta, hidden: labels[0], seed: None })
}

/// `c_x = conj(⟨x|U†|Ψ⟩)` with `Ψ = Σ_r ψ_r |r⟩`.
fn compiled_row(u: &dyn UnitaryAction, rows: &[usize], psi: &[C64]) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 1 << u.n_qubits()];
    for (&r, &p) in rows.iter().zip(psi) {
        v[r] = p;
    }
    u.apply_adjoint(&mut v);
    v.iter().map(|z| z.conj()).collect()
}

fn compile_label(u: &dyn UnitaryAction, rows: &[usize], psi: &[C64]) -> Result<(Vec<u64>, LabelMeta)> {
    let n = u.n_qubits();
    let c = compiled_row(u, rows, psi);
    let sol = best_phase_signs(&c)?;
    let scale = 2f64.powf(-(n as f64) / 2.0);
    let beta = sol.l1 * scale;
    let mut bits = vec![0u64; words(n)];
    for (x, &t) in sol.theta.iter().enumerate() {
        if t < 0 {
            bits[x / 64] |= 1 << (x % 64);
        }
    }
    let two_beta_over_pi = 2.0 * beta / std::f64::consts::PI;
    Ok((
        bits,
        LabelMeta { beta, predicted: two_beta_over_pi * two_beta_over_pi, achieved_bound: (sol.value * scale).powi(2) },
    ))
}

fn words(n: usize) -> usize {
    (1usize << n).div_ceil(64)
}

impl SingleLevelOracle {
    pub fn position(&self, a: usize) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == a)
            .ok_or_else(|| Error::Label(format!("label {a} is not in the oracle's label set")))
    }

    /// `f(a, x)`.
    pub fn f(&self, a: usize, x: usize) -> Result<u8> {
        let k = self.position(a)?;
        if x >> self.n != 0 {
            return Err(Error::InvalidConfig(format!("input {x} has more than {} bits", self.n)));
        }
        Ok(((self.f_bits[k][x / 64] >> (x % 64)) & 1) as u8)
    }

    /// Testing oracle `T_a(a′) = δ_{a,a′}` against the hidden label.
    pub fn test(&self, guess: usize) -> bool {
        guess == self.hidden
    }

    pub fn hide(&mut self, a: usize) -> Result<()> {
        self.position(a)?;
        self.hidden = a;
        Ok(())
    }

    pub fn meta_for(&self, a: usize) -> Result<&LabelMeta> {
        Ok(&self.meta[self.position(a)?])
    }

    /// Oracle instance file: `f_bits` as lowercase hex, bit `x` of the table
    /// is bit `x mod 4` of hex digit `x / 4`.
    pub fn to_instance_json(&self) -> String {
        let file = InstanceFile {
            n: self.n,
            m: match &self.measurement {
                Measurement::Full => self.n,
                Measurement::LowBits(m) => *m,
                Measurement::Blocks(_) => 0,
            },
            measurement: self.measurement.clone(),
            labels: self.labels.clone(),
            f_bits: self.f_bits.iter().map(|b| to_hex(b, 1 << self.n)).collect(),
            beta: self.meta.iter().map(|m| m.beta).collect(),
            meta: self.meta.clone(),
            psi: self.psi.clone(),
            hidden: self.hidden,
            seed: self.seed,
        };
        serde_json::to_string(&file).expect("oracle instance always serializes")
    }

    pub fn from_instance_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let f_bits = file.f_bits.iter().map(|h| from_hex(h, file.n)).collect::<Result<Vec<_>>>()?;
        if f_bits.len() != file.labels.len()
            || file.meta.len() != file.labels.len()
            || file.psi.len() != file.labels.len()
        {
            return Err(Error::Integrity("instance file has mismatched per-label arrays".into()));
        }
        file.measurement.validate(file.n)?;
        let oracle = Self {
            n: file.n,
            measurement: file.measurement,
            labels: file.labels,
            f_bits,
            psi: file.psi,
            meta: file.meta,
            hidden: file.hidden,
            seed: file.seed,
        };
        oracle.position(oracle.hidden)?;
        Ok(oracle)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    m: usize,
    measurement: Measurement,
    labels: Vec<usize>,
    f_bits: Vec<String>,
    beta: Vec<f64>,
    meta: Vec<LabelMeta>,
    psi: Vec<Vec<C64>>,
    hidden: usize,
    seed: Option<u64>,
}

fn to_hex(bits: &[u64], len: usize) -> String {
    (0..len.div_ceil(4))
        .map(|d| {
            let nib = (0..4).filter(|b| 4 * d + b < len).fold(0u32, |acc, b| {
                let x = 4 * d + b;
                acc | ((((bits[x / 64] >> (x % 64)) & 1) as u32) << b)
            });
            char::from_digit(nib, 16).expect("nibble")
        })
        .collect()
}

fn from_hex(s: &str, n: usize) -> Result<Vec<u64>> {
    let len = 1usize << n;
    if s.len() != len.div_ceil(4) {
        return Err(Error::Integrity(format!("hex table has {} digits, expected {}", s.len(), len.div_ceil(4))));
    }
    let mut bits = vec![0u64; words(n)];
    for (d, ch) in s.chars().enumerate() {
        let nib = ch.to_digit(16).ok_or_else(|| Error::Integrity(format!("bad hex digit {ch}")))?;
        for b in 0..4 {
            let x = 4 * d + b;
            if nib >> b & 1 == 1 {
                if x >= len {
                    return Err(Error::Integrity("hex table sets bits beyond the input range".into()));
                }
                bits[x / 64] |= 1 << (x % 64);
            }
        }
    }
    Ok(bits)
}

/// `|φ_a⟩`; one oracle query.
pub fn prepare_phi(oracle: &SingleLevelOracle, a: usize) -> Result<PureState> {
    let k = oracle.position(a)?;
    let amp = ((1usize << oracle.n) as f64).sqrt().recip();
    let amps = (0..1usize << oracle.n)
        .map(|x| if (oracle.f_bits[k][x / 64] >> (x % 64)) & 1 == 1 { C64::new(-amp, 0.0) } else { C64::new(amp, 0.0) })
        .collect();
    PureState::from_amplitudes(amps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentificationOutcome {
    pub success_prob: f64,
    pub sampled_hits: u64,
    pub shots: u64,
    /// Oracle queries charged: one for preparing `|φ_a⟩`.
    pub queries: u64,
}

/// Probability of each measurement outcome after `U|φ_a⟩`.
pub fn outcome_distribution(u: &dyn UnitaryAction, oracle: &SingleLevelOracle, a: usize) -> Result<Vec<f64>> {
    if u.n_qubits() != oracle.n {
        return Err(Error::InvalidConfig(format!("unitary on {} qubits, oracle on {}", u.n_qubits(), oracle.n)));
    }
    let mut phi = prepare_phi(oracle, a)?;
    u.apply(phi.amplitudes_mut());
    let outcomes = oracle.measurement.outcome_count(oracle.n);
    Ok((0..outcomes).map(|l| oracle.measurement.rows(oracle.n, l).iter().map(|&r| phi.probability(r)).sum()).collect())
}

pub fn identify<R: Rng + ?Sized>(
    u: &dyn UnitaryAction,
    oracle: &SingleLevelOracle,
    a: usize,
    shots: u64,
    rng: &mut R,
) -> Result<IdentificationOutcome> {
    let dist = outcome_distribution(u, oracle, a)?;
    let success_prob = dist[a].clamp(0.0, 1.0);
    let sampled_hits = if shots == 0 {
        0
    } else {
        Binomial::new(shots, success_prob).map_err(|e| Error::InvalidState(e.to_string()))?.sample(rng)
    };
    Ok(IdentificationOutcome { success_prob, sampled_hits, shots, queries: 1 })
}

/// `min(1, 2^{q − αn})`: a classical strategy with `q` one-bit answers cannot
/// beat this against a uniform label.
pub fn classical_guess_bound(q: u32, alpha_n: f64) -> f64 {
    2f64.powf(q as f64 - alpha_n).min(1.0)
}

/// Ideal bisection against a uniform label in `[0, 2^k)`: each of the `q`
/// answers reveals one bit of the label, then the player guesses uniformly
/// among the survivors. Returns whether the guess was right.
pub fn bisection_trial<R: Rng + ?Sized>(k: u32, q: u32, rng: &mut R) -> bool {
    let a = rng.random_range(0..1u64 << k);
    let known = q.min(k);
    let mask = (1u64 << known) - 1;
    let guess = (a & mask) | (rng.random_range(0..1u64 << (k - known)) << known);
    guess == a
}

/// Classical play against a compiled oracle: query the given inputs, keep the
/// labels consistent with the answers and guess one of them uniformly.
pub fn consistent_guess_trial<R: Rng + ?Sized>(
    oracle: &SingleLevelOracle,
    a: usize,
    xs: &[usize],
    rng: &mut R,
) -> Result<bool> {
    let answers = xs.iter().map(|&x| oracle.f(a, x)).collect::<Result<Vec<_>>>()?;
    let mut survivors = Vec::new();
    for &b in &oracle.labels {
        let mut ok = true;
        for (&x, &ans) in xs.iter().zip(&answers) {
            if oracle.f(b, x)? != ans {
                ok = false;
                break;
            }
        }
        if ok {
            survivors.push(b);
        }
    }
    Ok(survivors[rng.random_range(0..survivors.len())] == a)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::rng;
    use crate::simcore::{hadamard_all, CyclicQft, Hadamard, Identity, RandomCircuit};

    #[test]
    fn hadamard_oracle_is_inner_product() {
        let n = 5;
        let labels: Vec<usize> = (0..32).collect();
        let o = build_oracle(&Hadamard { n }, &labels).unwrap();
        for &a in &labels {
            let dot = |x: usize| ((a & x).count_ones() % 2) as u8;
            let flip = o.f(a, 0).unwrap();
            for x in 0..32 {
                assert_eq!(o.f(a, x).unwrap(), dot(x) ^ flip);
            }
            let m = o.meta_for(a).unwrap();
            assert!((m.beta - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hadamard_identification_is_exact() {
        let n = 6;
        let labels: Vec<usize> = (0..64).collect();
        let o = build_oracle(&Hadamard { n }, &labels).unwrap();
        let mut r = rng::stream(4);
        for &a in &labels {
            let phi = prepare_phi(&o, a).unwrap();
            assert!((hadamard_all(&phi).probability(a) - 1.0).abs() < 1e-9);
            let out = identify(&Hadamard { n }, &o, a, 100, &mut r).unwrap();
            assert!((out.success_prob - 1.0).abs() < 1e-9);
            assert_eq!(out.sampled_hits, 100);
            assert_eq!(out.queries, 1);
        }
    }

    #[test]
    fn identity_oracle() {
        let n = 4;
        let o = build_oracle(&Identity { n }, &[3]).unwrap();
        let m = o.meta_for(3).unwrap();
        assert!((m.beta - 0.25).abs() < 1e-15);
        assert!((m.predicted - (0.5 / PI).powi(2)).abs() < 1e-15);
        let out = identify(&Identity { n }, &o, 3, 0, &mut rng::stream(0)).unwrap();
        assert!(out.success_prob >= m.predicted);
        assert!((out.success_prob - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn cyclic_qft_meets_the_bound() {
        let u = CyclicQft::new(8);
        let labels: Vec<usize> = (0..256).collect();
        let o = build_oracle(&u, &labels).unwrap();
        let bound = (2.0 / PI) * (2.0 / PI);
        for &a in &labels {
            assert!(o.meta_for(a).unwrap().predicted >= bound - 1e-9);
            let out = identify(&u, &o, a, 0, &mut rng::stream(0)).unwrap();
            assert!(out.success_prob >= bound - 1e-9);
        }
    }

    #[test]
    fn random_circuit_success_beats_prediction() {
        let n = 6;
        let labels: Vec<usize> = (0..64).collect();
        for seed in 0..3 {
            let c = RandomCircuit::generate(n, 4 * n * n * n, seed).unwrap();
            let o = build_oracle(&c, &labels).unwrap();
            for &a in &labels {
                let dist = outcome_distribution(&c, &o, a).unwrap();
                assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                let m = o.meta_for(a).unwrap();
                assert!(dist[a] >= m.achieved_bound - 1e-9);
                assert!(m.achieved_bound >= m.predicted - 1e-12);
            }
        }
    }

    #[test]
    fn ancilla_measurement_uses_all_ancilla_rows() {
        // Two label bits, one ancilla bit; ψ = |1⟩ on the ancilla.
        let n = 3;
        let u = Hadamard { n };
        let psi = vec![vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]; 4];
        let o = build_oracle_with(&u, Measurement::LowBits(2), &[0, 1, 2, 3], psi).unwrap();
        for a in 0..4 {
            let out = identify(&u, &o, a, 0, &mut rng::stream(0)).unwrap();
            assert!((out.success_prob - 1.0).abs() < 1e-9);
            // The compiled signs are those of row a | 4, i.e. x ↦ (a|4)·x.
            let flip = o.f(a, 0).unwrap();
            for x in 0..8 {
                assert_eq!(o.f(a, x).unwrap() ^ flip, (((a | 4) & x).count_ones() % 2) as u8);
            }
        }
    }

    #[test]
    fn prepare_phi_cases() {
        let mut o = build_oracle(&Identity { n: 3 }, &[0]).unwrap();
        o.f_bits[0] = vec![0];
        let phi = prepare_phi(&o, 0).unwrap();
        assert_eq!(phi, PureState::uniform(3).unwrap());
        assert!((phi.norm_sqr() - 1.0).abs() < 1e-15);
        o.f_bits[0] = vec![0b1010_1010];
        let phi = prepare_phi(&o, 0).unwrap();
        for x in 0..8 {
            let expect = if x % 2 == 1 { -1.0 } else { 1.0 } / 8f64.sqrt();
            assert_eq!(phi.amplitudes()[x].re, expect);
        }
        assert!(matches!(prepare_phi(&o, 5), Err(Error::Label(_))));
    }

    #[test]
    fn rejects_empty_labels_and_bad_blocks() {
        assert!(matches!(build_oracle(&Identity { n: 2 }, &[]), Err(Error::InvalidConfig(_))));
        let blocks = Measurement::Blocks(vec![vec![0, 1], vec![1, 2, 3]]);
        assert!(build_oracle_with(&Identity { n: 2 }, blocks, &[0], vec![vec![C64::new(1.0, 0.0); 2]]).is_err());
    }

    #[test]
    fn instance_file_round_trip() {
        let c = RandomCircuit::generate(5, 40, 9).unwrap();
        let mut o = build_oracle(&c, &(0..32).step_by(3).collect::<Vec<_>>()).unwrap();
        o.seed = Some(9);
        o.hide(6).unwrap();
        let back = SingleLevelOracle::from_instance_json(&o.to_instance_json()).unwrap();
        assert_eq!(back, o);
        assert!(o.test(6) && !o.test(3));
    }

    #[test]
    fn hex_is_lsb_first() {
        let mut bits = vec![0u64; 1];
        bits[0] = 0b0001_0010;
        assert_eq!(to_hex(&bits, 8), "21");
        assert_eq!(from_hex("21", 3).unwrap(), bits);
    }

    #[test]
    fn classical_bound_and_harness() {
        assert_eq!(classical_guess_bound(0, 10.0), 2f64.powi(-10));
        assert_eq!(classical_guess_bound(10, 10.0), 1.0);
        let mut r = rng::stream(11);
        let trials = 20_000;
        let wins = (0..trials).filter(|_| bisection_trial(6, 2, &mut r)).count() as f64 / trials as f64;
        let p = 2f64.powi(-4);
        assert!((wins - p).abs() < 4.0 * (p * (1.0 - p) / trials as f64).sqrt());
    }

    #[test]
    fn consistent_guessing_against_hadamard_oracle() {
        let n = 4;
        let o = build_oracle(&Hadamard { n }, &(0..16).collect::<Vec<_>>()).unwrap();
        let mut r = rng::stream(12);
        // Querying the four unit vectors pins the label down up to the global flip.
        let xs = [0, 1, 2, 4, 8];
        for a in 0..16 {
            assert!(consistent_guess_trial(&o, a, &xs, &mut r).unwrap());
        }
    }
}
