use crate::{Error, Result, C64};

/// Default cap on dense simulation width (2^14 amplitudes).
pub const MAX_QUBITS: usize = 14;

const NORM_TOL: f64 = 1e-9;

/// Normalized amplitude vector over `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Computational basis state `|label⟩`.
    pub fn basis(n: usize, label: usize) -> Result<Self> {
        check_width(n)?;
        let dim = 1usize << n;
        if label >= dim {
            return Err(Error::Label(format!("basis label {label} out of range for {n} qubits")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[label] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Uniform superposition over all 2^n basis states.
    pub fn uniform(n: usize) -> Result<Self> {
        check_width(n)?;
        let dim = 1usize << n;
        let a = C64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self { n, amps: vec![a; dim] })
    }

    /// Wraps an amplitude vector; the length must be a power of two and the
    /// norm within 1e-9 of one.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!("length {dim} is not a power of two")));
        }
        let n = dim.trailing_zeros() as usize;
        check_width(n)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm} is not 1")));
        }
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Mutable access for in-place kernels. Callers must keep the state unit norm.
    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, x: usize) -> f64 {
        self.amps[x].norm_sqr()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Σ_x |⟨x|ψ⟩|.
    pub fn l1_norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm()).sum()
    }
}

fn check_width(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        Err(Error::Size(format!("{n} qubits exceeds the dense cap of {MAX_QUBITS}")))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_and_uniform_are_normalized() {
        let b = PureState::basis(3, 5).unwrap();
        assert_eq!(b.probability(5), 1.0);
        let u = PureState::uniform(4).unwrap();
        assert!((u.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((u.l1_norm() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PureState::basis(2, 4).is_err());
        assert!(PureState::basis(MAX_QUBITS + 1, 0).is_err());
        assert!(PureState::from_amplitudes(vec![C64::new(1.0, 0.0); 3]).is_err());
        assert!(PureState::from_amplitudes(vec![C64::new(1.0, 0.0); 2]).is_err());
    }
}
