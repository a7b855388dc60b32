use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use super::linalg::unitarity_deviation;
use super::state::PureState;
use crate::{Error, Result, C64};

/// A unitary on `n` qubits, available as an in-place action and its adjoint.
pub trait UnitaryAction: Send + Sync {
    fn n_qubits(&self) -> usize;

    /// `amps ← U·amps`.
    fn apply(&self, amps: &mut [C64]);

    /// `amps ← U†·amps`.
    fn apply_adjoint(&self, amps: &mut [C64]);

    fn name(&self) -> String;

    fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    /// Dense matrix, built column by column from `apply`.
    fn to_matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut col = vec![C64::new(0.0, 0.0); d];
        for c in 0..d {
            col.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            col[c] = C64::new(1.0, 0.0);
            self.apply(&mut col);
            for r in 0..d {
                m[(r, c)] = col[r];
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Identity {
    pub n: usize,
}

impl UnitaryAction for Identity {
    fn n_qubits(&self) -> usize {
        self.n
    }
    fn apply(&self, _: &mut [C64]) {}
    fn apply_adjoint(&self, _: &mut [C64]) {}
    fn name(&self) -> String {
        format!("identity(n={})", self.n)
    }
}

/// H^⊗n, applied as a fast Walsh–Hadamard transform.
#[derive(Clone, Copy, Debug)]
pub struct Hadamard {
    pub n: usize,
}

impl Hadamard {
    fn transform(amps: &mut [C64]) {
        let dim = amps.len();
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let mut half = 1;
        while half < dim {
            for block in (0..dim).step_by(2 * half) {
                for k in block..block + half {
                    let (a, b) = (amps[k], amps[k + half]);
                    amps[k] = (a + b) * scale;
                    amps[k + half] = (a - b) * scale;
                }
            }
            half *= 2;
        }
    }
}

impl UnitaryAction for Hadamard {
    fn n_qubits(&self) -> usize {
        self.n
    }
    fn apply(&self, amps: &mut [C64]) {
        Self::transform(amps)
    }
    fn apply_adjoint(&self, amps: &mut [C64]) {
        Self::transform(amps)
    }
    fn name(&self) -> String {
        format!("hadamard(n={})", self.n)
    }
}

/// H^⊗n applied to a state.
pub fn hadamard_all(state: &PureState) -> PureState {
    let mut out = state.clone();
    Hadamard::transform(out.amplitudes_mut());
    out
}

/// Cyclic QFT on N = 2^n: `⟨j|F|k⟩ = ω^{jk}/√N`, ω = e^{2πi/N}.
#[derive(Clone)]
pub struct CyclicQft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
}

impl CyclicQft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let len = 1usize << n;
        Self {
            n,
            // rustfft's "inverse" direction carries the e^{+2πi jk/N} kernel.
            forward: planner.plan_fft_inverse(len),
            backward: planner.plan_fft_forward(len),
        }
    }
}

impl std::fmt::Debug for CyclicQft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CyclicQft").field("n", &self.n).finish()
    }
}

impl UnitaryAction for CyclicQft {
    fn n_qubits(&self) -> usize {
        self.n
    }
    fn apply(&self, amps: &mut [C64]) {
        self.forward.process(amps);
        let s = (amps.len() as f64).sqrt().recip();
        amps.iter_mut().for_each(|z| *z *= s);
    }
    fn apply_adjoint(&self, amps: &mut [C64]) {
        self.backward.process(amps);
        let s = (amps.len() as f64).sqrt().recip();
        amps.iter_mut().for_each(|z| *z *= s);
    }
    fn name(&self) -> String {
        format!("qft(N={})", 1usize << self.n)
    }
}

/// Explicit 2^n × 2^n unitary.
#[derive(Clone, Debug)]
pub struct DenseUnitary {
    n: usize,
    m: DMatrix<C64>,
    label: String,
}

impl DenseUnitary {
    pub fn new(m: DMatrix<C64>, label: impl Into<String>) -> Result<Self> {
        let d = m.nrows();
        if d != m.ncols() || !d.is_power_of_two() {
            return Err(Error::InvalidState(format!("{}x{} matrix is not a qubit unitary", d, m.ncols())));
        }
        let dev = unitarity_deviation(&m);
        if dev > 1e-10 {
            return Err(Error::InvalidState(format!("matrix deviates from unitary by {dev:e}")));
        }
        Ok(Self { n: d.trailing_zeros() as usize, m, label: label.into() })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }
}

impl UnitaryAction for DenseUnitary {
    fn n_qubits(&self) -> usize {
        self.n
    }
    fn apply(&self, amps: &mut [C64]) {
        let d = amps.len();
        let out: Vec<C64> = (0..d).map(|r| (0..d).map(|c| self.m[(r, c)] * amps[c]).sum()).collect();
        amps.copy_from_slice(&out);
    }
    fn apply_adjoint(&self, amps: &mut [C64]) {
        let d = amps.len();
        let out: Vec<C64> = (0..d).map(|r| (0..d).map(|c| self.m[(c, r)].conj() * amps[c]).sum()).collect();
        amps.copy_from_slice(&out);
    }
    fn name(&self) -> String {
        self.label.clone()
    }
    fn to_matrix(&self) -> DMatrix<C64> {
        self.m.clone()
    }
}
