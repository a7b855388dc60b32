//! L1 dispersion of circuit rows, the pseudo-dispersion search over group
//! Fourier transforms, and the fourth-moment inequality
//! `E|Y| ≥ (E Y²)^{3/2} / (E Y⁴)^{1/2}`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::simcore::linalg::random_unit_vector;
use crate::simcore::{FourierMatrix, PureState, UnitaryAction, MAX_QUBITS};
use crate::{Error, Result, C64};

/// Slack applied to every threshold comparison.
pub const THRESHOLD_SLACK: f64 = 1e-12;

/// `Σ_x |⟨a|U|x⟩|`, computed as the L1 norm of `U†|a⟩`.
pub fn l1_row(u: &dyn UnitaryAction, a: usize) -> Result<f64> {
    Ok(adjoint_column(u, a)?.l1_norm())
}

/// `U†|a⟩`.
pub fn adjoint_column(u: &dyn UnitaryAction, a: usize) -> Result<PureState> {
    let mut s = PureState::basis(u.n_qubits(), a)?;
    u.apply_adjoint(s.amplitudes_mut());
    Ok(s)
}

/// `Σ_x |amplitude(x)|⁴`.
pub fn collision(state: &PureState) -> f64 {
    state.amplitudes().iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub n: usize,
    pub beta: f64,
    pub per_label_l1: Vec<f64>,
    pub achieving_set: Vec<usize>,
    /// `log₂|A| / n`, or 0 when `A` is empty.
    pub alpha_achieved: f64,
}

impl DispersionReport {
    pub fn threshold(&self) -> f64 {
        self.beta * 2f64.powf(self.n as f64 / 2.0)
    }
}

/// Enumerates every label and collects those with `L1 ≥ β·2^{n/2}`.
pub fn certify_dispersing(u: &dyn UnitaryAction, beta: f64) -> Result<DispersionReport> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidConfig(format!("beta must lie in (0, 1], got {beta}")));
    }
    let n = u.n_qubits();
    if n > MAX_QUBITS {
        return Err(Error::Size(format!("{n} qubits exceeds the dense limit of {MAX_QUBITS}")));
    }
    let per_label_l1 = (0..1usize << n).into_par_iter().map(|a| l1_row(u, a)).collect::<Result<Vec<_>>>()?;
    let threshold = beta * 2f64.powf(n as f64 / 2.0);
    let achieving_set: Vec<usize> =
        per_label_l1.iter().enumerate().filter(|(_, &v)| v >= threshold - THRESHOLD_SLACK).map(|(a, _)| a).collect();
    let alpha_achieved =
        if achieving_set.is_empty() || n == 0 { 0.0 } else { (achieving_set.len() as f64).log2() / n as f64 };
    Ok(DispersionReport { n, beta, per_label_l1, achieving_set, alpha_achieved })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoDispersionReport {
    pub group: String,
    pub irrep: usize,
    pub index: usize,
    /// `log₂` of the number of `(λ, i)` labels.
    pub m_bits: f64,
    /// `log₂|G|`; fractional when the group order is not a power of two.
    pub n_bits: f64,
    pub power_of_two: bool,
    pub samples: usize,
    pub l1_values: Vec<f64>,
    pub mean: f64,
    pub std_err: f64,
    pub best_value: f64,
    /// Ancilla vector on the second irrep index achieving `best_value`.
    pub best_psi: Vec<C64>,
    /// `√(|G|/2)`.
    pub bound: f64,
    /// `log Σ_λ d_λ / log |G|`.
    pub alpha: f64,
}

/// `Σ_g |Σ_j conj(ψ_j)·F[(λ,i,j), g]|` for the rows of the label `(λ, i)`.
pub fn pseudo_l1(f: &FourierMatrix, rows: &[usize], psi: &[C64]) -> f64 {
    (0..f.order()).map(|g| rows.iter().zip(psi).map(|(&r, p)| p.conj() * f.entries[(r, g)]).sum::<C64>().norm()).sum()
}

/// Samples ψ uniformly on the unit sphere of `V = span{U†|λ,i,j⟩}` and
/// records `Σ_g |⟨g|ψ⟩|` for each draw.
pub fn pseudo_search<R: Rng + ?Sized>(
    f: &FourierMatrix,
    irrep: usize,
    index: usize,
    samples: usize,
    rng: &mut R,
) -> Result<PseudoDispersionReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig("pseudo_search needs at least one sample".into()));
    }
    let rows = f.label_rows(irrep, index)?;
    let mut l1_values = Vec::with_capacity(samples);
    let mut best_psi = Vec::new();
    let mut best_value = f64::NEG_INFINITY;
    for _ in 0..samples {
        let psi = random_unit_vector(rows.len(), rng);
        let v = pseudo_l1(f, &rows, &psi);
        if v > best_value {
            best_value = v;
            best_psi = psi;
        }
        l1_values.push(v);
    }
    let (mean, std_err) = mean_and_std_err(&l1_values);
    let order = f.order() as f64;
    let labels = f.labels().len() as f64;
    Ok(PseudoDispersionReport {
        group: f.group.name.clone(),
        irrep,
        index,
        m_bits: labels.log2(),
        n_bits: order.log2(),
        power_of_two: f.order().is_power_of_two(),
        samples,
        l1_values,
        mean,
        std_err,
        best_value,
        best_psi,
        bound: (order / 2.0).sqrt(),
        alpha: labels.ln() / order.ln(),
    })
}

/// Sample mean and standard error of the mean.
pub fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourthMoment {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Evaluates both sides of the fourth-moment inequality on the empirical
/// distribution of `values`.
pub fn fourth_moment_check(values: &[f64]) -> Result<FourthMoment> {
    if values.is_empty() || values.iter().all(|&y| y == 0.0) {
        return Err(Error::DegenerateInput("fourth-moment check needs a nonzero sample".into()));
    }
    let n = values.len() as f64;
    let m1 = values.iter().map(|y| y.abs()).sum::<f64>() / n;
    let m2 = values.iter().map(|y| y * y).sum::<f64>() / n;
    let m4 = values.iter().map(|y| (y * y) * (y * y)).sum::<f64>() / n;
    let rhs = m2.powf(1.5) / m4.sqrt();
    Ok(FourthMoment { lhs: m1, rhs, pass: m1 >= rhs - THRESHOLD_SLACK * rhs.max(1.0) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovTail {
    /// Fraction of collisions at or above `2^{-n}/β²`.
    pub fraction: f64,
    /// `mean(Q)·2^n·β²`, the Markov bound on that fraction.
    pub bound: f64,
    pub cutoff: f64,
}

pub fn markov_tail(collisions: &[f64], n: usize, beta: f64) -> MarkovTail {
    let cutoff = 2f64.powi(-(n as i32)) / (beta * beta);
    let hits = collisions.iter().filter(|&&q| q >= cutoff).count();
    let mean = collisions.iter().sum::<f64>() / collisions.len() as f64;
    MarkovTail {
        fraction: hits as f64 / collisions.len() as f64,
        bound: mean * 2f64.powi(n as i32) * beta * beta,
        cutoff,
    }
}
