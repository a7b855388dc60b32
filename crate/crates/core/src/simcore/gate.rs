use nalgebra::{Matrix2, Matrix4};
use rand::Rng;

use super::linalg::haar_unitary;
use super::state::PureState;
use crate::{Error, Result, C64};

const UNITARY_TOL: f64 = 1e-12;

/// A 4×4 unitary acting on an ordered qubit pair. Row/column index is `2·b_i + b_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitGate {
    m: Matrix4<C64>,
}

impl TwoQubitGate {
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        let gate = Self { m };
        let dev = gate.unitarity_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::InvalidState(format!("gate deviates from unitary by {dev:e}")));
        }
        Ok(gate)
    }

    pub fn identity() -> Self {
        Self { m: Matrix4::identity() }
    }

    pub fn swap() -> Self {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        #[rustfmt::skip]
        let m = Matrix4::new(
            l, o, o, o,
            o, o, l, o,
            o, l, o, o,
            o, o, o, l,
        );
        Self { m }
    }

    /// `a` on the first qubit of the placement, `b` on the second.
    pub fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Result<Self> {
        Self::new(a.kronecker(b))
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// SWAP·G·SWAP: the same physical gate with its qubit roles exchanged.
    pub fn swapped(&self) -> Self {
        let s = Self::swap().m;
        Self { m: s * self.m * s }
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let g = self.m.adjoint() * self.m;
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                let t = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((g[(r, c)] - C64::new(t, 0.0)).norm());
            }
        }
        worst
    }
}

/// Haar-random element of U(4).
pub fn sample_haar_two_qubit<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitGate {
    let u = haar_unitary(4, rng);
    TwoQubitGate { m: Matrix4::from_fn(|r, c| u[(r, c)]) }
}

/// Applies `gate` to qubits `(i, j)` of a raw amplitude vector of length 2^n.
pub fn apply_gate_in_place(amps: &mut [C64], gate: &TwoQubitGate, i: usize, j: usize) -> Result<()> {
    let dim = amps.len();
    let n = dim.trailing_zeros() as usize;
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidPlacement { i, j, n });
    }
    let (mi, mj) = (1usize << i, 1usize << j);
    let mask = mi | mj;
    let m = &gate.m;
    for base in 0..dim {
        if base & mask != 0 {
            continue;
        }
        let idx = [base, base | mj, base | mi, base | mask];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for r in 0..4 {
            amps[idx[r]] = m[(r, 0)] * v[0] + m[(r, 1)] * v[1] + m[(r, 2)] * v[2] + m[(r, 3)] * v[3];
        }
    }
    Ok(())
}

/// Returns `gate` applied to qubits `(i, j)` of `state`.
pub fn apply_gate(state: &PureState, gate: &TwoQubitGate, i: usize, j: usize) -> Result<PureState> {
    let mut out = state.clone();
    apply_gate_in_place(out.amplitudes_mut(), gate, i, j)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::simcore::linalg::random_unit_vector;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn h() -> Matrix2<C64> {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        Matrix2::new(s, s, s, -s)
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let mut r = rng::stream(3);
        let psi = PureState::from_amplitudes(random_unit_vector(8, &mut r)).unwrap();
        let out = apply_gate(&psi, &TwoQubitGate::identity(), 2, 0).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn swap_moves_the_excitation() {
        // |01⟩: qubit 0 = 1, qubit 1 = 0, basis index 1.
        let psi = PureState::basis(2, 0b01).unwrap();
        let out = apply_gate(&psi, &TwoQubitGate::swap(), 0, 1).unwrap();
        assert_eq!(out.probability(0b10), 1.0);
    }

    #[test]
    fn hadamard_on_first_qubit_of_pair() {
        // kron(H, I) on (0, 1) of |00⟩ = (|00⟩ + |01⟩)/√2 under little-endian indexing.
        let g = TwoQubitGate::kron(&h(), &Matrix2::identity()).unwrap();
        let out = apply_gate(&PureState::basis(2, 0).unwrap(), &g, 0, 1).unwrap();
        let expect = [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0];
        for (a, e) in out.amplitudes().iter().zip(expect) {
            assert!((a - C64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn invalid_placements() {
        let mut psi = PureState::basis(3, 0).unwrap();
        let g = TwoQubitGate::identity();
        assert!(matches!(apply_gate(&psi, &g, 1, 1), Err(Error::InvalidPlacement { .. })));
        assert!(apply_gate_in_place(psi.amplitudes_mut(), &g, 0, 3).is_err());
    }

    #[test]
    fn rejects_non_unitary() {
        let mut m = Matrix4::<C64>::identity();
        m[(0, 0)] = C64::new(1.1, 0.0);
        assert!(TwoQubitGate::new(m).is_err());
    }

    #[test]
    fn haar_samples_are_unitary() {
        let mut r = rng::stream(4);
        for _ in 0..200 {
            assert!(sample_haar_two_qubit(&mut r).unitarity_deviation() <= 1e-12);
        }
    }
}
