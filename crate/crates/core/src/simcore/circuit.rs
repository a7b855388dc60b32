use rand::Rng;

use super::gate::{apply_gate_in_place, sample_haar_two_qubit, TwoQubitGate};
use super::state::{PureState, MAX_QUBITS};
use super::unitary::UnitaryAction;
use crate::{rng, Error, Result, C64};

/// One step of a random circuit: a Haar gate on the unordered pair `{i, j}`, `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    pub i: usize,
    pub j: usize,
    pub gate: TwoQubitGate,
}

/// Length-`t` random circuit on `n` qubits, regenerated bit-identically from `(n, t, seed)`.
///
/// Each step picks a uniformly random unordered pair of distinct qubits and an
/// independent Haar gate on it. The simulator applies the sampled gates in
/// order to an input `|a⟩`; that composed operator is taken to be `U†`, so as a
/// [`UnitaryAction`] this circuit's `apply_adjoint` runs the sampled sequence
/// and `apply` runs the reversed sequence of adjoints.
#[derive(Clone, Debug)]
pub struct RandomCircuit {
    n: usize,
    t: usize,
    seed: u64,
    placements: Vec<Placement>,
}

impl RandomCircuit {
    pub fn generate(n: usize, t: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("random circuit needs n >= 2, got {n}")));
        }
        if n > MAX_QUBITS {
            return Err(Error::Size(format!("{n} qubits exceeds the dense cap of {MAX_QUBITS}")));
        }
        let mut r = rng::stream(seed);
        let placements = (0..t)
            .map(|_| {
                let a = r.random_range(0..n);
                let mut b = r.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                let gate = sample_haar_two_qubit(&mut r);
                Placement { i: a.min(b), j: a.max(b), gate }
            })
            .collect();
        Ok(Self { n, t, seed, placements })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.t
    }

    pub fn is_empty(&self) -> bool {
        self.t == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    /// Runs the sampled gate sequence in order.
    pub fn run_sampled(&self, amps: &mut [C64]) {
        for p in &self.placements {
            apply_gate_in_place(amps, &p.gate, p.i, p.j).expect("placements are validated at generation");
        }
    }

    /// Inverse of [`run_sampled`](Self::run_sampled).
    pub fn run_sampled_inverse(&self, amps: &mut [C64]) {
        for p in self.placements.iter().rev() {
            apply_gate_in_place(amps, &p.gate.adjoint(), p.i, p.j).expect("placements are validated at generation");
        }
    }

    /// The simulated state `U†|a⟩`.
    pub fn state_from_basis(&self, a: usize) -> Result<PureState> {
        let mut psi = PureState::basis(self.n, a)?;
        self.run_sampled(psi.amplitudes_mut());
        Ok(psi)
    }
}

impl UnitaryAction for RandomCircuit {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn apply(&self, amps: &mut [C64]) {
        self.run_sampled_inverse(amps);
    }

    fn apply_adjoint(&self, amps: &mut [C64]) {
        self.run_sampled(amps);
    }

    fn name(&self) -> String {
        format!("random(n={}, t={}, seed={})", self.n, self.t, self.seed)
    }
}
