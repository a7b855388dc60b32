//! Dense state-vector simulation and the unitaries used by the experiments.
//!
//! Bit convention: qubit `k` is bit `k` of the basis index, so qubit 0 is the
//! least-significant bit. A [`TwoQubitGate`] placed on `(i, j)` sees the local
//! index `2·b_i + b_j`, i.e. `kron(A, B)` applies `A` to qubit `i` and `B` to
//! qubit `j`.

mod circuit;
mod fourier;
mod gate;
mod group;
pub mod linalg;
mod state;
mod unitary;

pub use circuit::{Placement, RandomCircuit};
pub use fourier::{group_fourier, parse_csv_cell, qft_cyclic, FourierMatrix, RowLabel};
pub use gate::{apply_gate, apply_gate_in_place, sample_haar_two_qubit, TwoQubitGate};
pub use group::{GroupSpec, Irrep};
pub use state::{PureState, MAX_QUBITS};
pub use unitary::{hadamard_all, CyclicQft, DenseUnitary, Hadamard, Identity, UnitaryAction};
