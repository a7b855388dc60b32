use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// `p ∈ {0,1,2,3}^n`, two bits per site, site `i` in bits `2i..2i+2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    n: usize,
    bits: u128,
}

impl PauliString {
    pub const MAX_SITES: usize = 64;

    pub fn identity(n: usize) -> Result<Self> {
        if n > Self::MAX_SITES {
            return Err(Error::Size(format!("{n} sites exceeds {}", Self::MAX_SITES)));
        }
        Ok(Self { n, bits: 0 })
    }

    pub fn from_codes(codes: &[u8]) -> Result<Self> {
        let mut p = Self::identity(codes.len())?;
        for (i, &c) in codes.iter().enumerate() {
            if c > 3 {
                return Err(Error::InvalidConfig(format!("Pauli code {c} at site {i}")));
            }
            p.set(i, c);
        }
        Ok(p)
    }

    /// Inverse of [`PauliString::index`].
    pub fn from_index(n: usize, index: usize) -> Self {
        Self { n, bits: index as u128 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn code(&self, i: usize) -> u8 {
        ((self.bits >> (2 * i)) & 3) as u8
    }

    pub fn set(&mut self, i: usize, c: u8) {
        self.bits = (self.bits & !(3u128 << (2 * i))) | ((c as u128 & 3) << (2 * i));
    }

    pub fn codes(&self) -> Vec<u8> {
        (0..self.n).map(|i| self.code(i)).collect()
    }

    pub fn weight(&self) -> usize {
        (0..self.n).filter(|&i| self.code(i) != 0).count()
    }

    /// Base-4 index with site 0 least significant; meaningful for small `n`.
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    /// `σ_p |ψ⟩` for qubit `i` on site `i`.
    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        let mut flip = 0usize;
        let mut z_mask = 0usize;
        let mut y_count = 0u32;
        for i in 0..self.n {
            match self.code(i) {
                1 => z_mask |= 1 << i,
                2 => flip |= 1 << i,
                3 => {
                    flip |= 1 << i;
                    z_mask |= 1 << i;
                    y_count += 1;
                }
                _ => {}
            }
        }
        // σ_y|b⟩ = i(−1)^b |1−b⟩ and σ_z|b⟩ = (−1)^b |b⟩.
        let i_pow =
            [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][(y_count % 4) as usize];
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for (x, a) in amps.iter().enumerate() {
            let sign = if (x & z_mask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[x ^ flip] = a * i_pow * sign;
        }
        out
    }

    /// `⟨ψ|σ_p|ψ⟩`, real for Hermitian `σ_p`.
    pub fn expectation(&self, amps: &[C64]) -> f64 {
        self.apply(amps).iter().zip(amps).map(|(b, a)| a.conj() * b).sum::<C64>().re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_and_weight() {
        let p = PauliString::from_codes(&[0, 3, 1, 0, 2]).unwrap();
        assert_eq!(p.codes(), vec![0, 3, 1, 0, 2]);
        assert_eq!(p.weight(), 3);
        assert_eq!(PauliString::from_index(5, p.index()), p);
        assert!(PauliString::from_codes(&[4]).is_err());
        assert!(PauliString::identity(65).is_err());
    }

    #[test]
    fn single_qubit_matrices() {
        let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let one = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let y = PauliString::from_codes(&[3]).unwrap();
        assert_eq!(y.apply(&zero), vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0)]);
        assert_eq!(y.apply(&one), vec![C64::new(0.0, -1.0), C64::new(0.0, 0.0)]);
        let z = PauliString::from_codes(&[1]).unwrap();
        assert_eq!(z.expectation(&one), -1.0);
        let x = PauliString::from_codes(&[2]).unwrap();
        let plus = [C64::new(0.5f64.sqrt(), 0.0), C64::new(0.5f64.sqrt(), 0.0)];
        assert!((x.expectation(&plus) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn site_order_is_little_endian() {
        // σ_x on site 1 maps |00⟩ to |10⟩ = index 2.
        let p = PauliString::from_codes(&[0, 2]).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); 4];
        v[0] = C64::new(1.0, 0.0);
        assert_eq!(p.apply(&v)[2], C64::new(1.0, 0.0));
    }
}
