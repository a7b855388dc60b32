use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::pauli::PauliString;
use crate::rng;
use crate::{Error, Result};

/// One step: uniform distinct pair; unless both sites are 0, replace them by
/// one of the 15 nonzero pairs uniformly.
pub fn chain_step<R: Rng + ?Sized>(p: &PauliString, rng: &mut R) -> PauliString {
    let n = p.n();
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let mut q = *p;
    if p.code(i) == 0 && p.code(j) == 0 {
        return q;
    }
    let k: u8 = rng.random_range(1..16);
    q.set(i, k & 3);
    q.set(j, k >> 2);
    q
}

/// Runs `walkers` independent chains of `t` steps from `start`; walker `w`
/// uses stream `child(seed, w)`.
pub fn run_walkers(start: &PauliString, t: usize, walkers: usize, seed: u64) -> Result<Vec<PauliString>> {
    if start.n() < 2 {
        return Err(Error::InvalidConfig("the chain needs at least two sites".into()));
    }
    Ok((0..walkers)
        .into_par_iter()
        .map(|w| {
            let mut r = rng::child(seed, w as u64);
            let mut p = *start;
            for _ in 0..t {
                p = chain_step(&p, &mut r);
            }
            p
        })
        .collect())
}

/// Fraction of walkers at each weight `0..=n`.
pub fn weight_histogram(walkers: &[PauliString], n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n + 1];
    for p in walkers {
        h[p.weight()] += 1.0;
    }
    let total = walkers.len() as f64;
    h.iter_mut().for_each(|x| *x /= total);
    h
}

/// Total-variation distance between the walkers' empirical law and the
/// uniform law on the `4^n − 1` nonzero strings.
pub fn uniform_nonzero_tv(walkers: &[PauliString]) -> Result<f64> {
    let n = walkers.first().map_or(0, |p| p.n());
    if n > 8 {
        return Err(Error::Size(format!("dense histogram over 4^{n} strings")));
    }
    let states = 1usize << (2 * n);
    let mut counts = vec![0.0; states];
    for p in walkers {
        counts[p.index()] += 1.0;
    }
    let total = walkers.len() as f64;
    let u = 1.0 / (states - 1) as f64;
    Ok(0.5 * counts.iter().enumerate().map(|(k, c)| (c / total - if k == 0 { 0.0 } else { u }).abs()).sum::<f64>())
}

/// Row-stochastic `4^n × 4^n` matrix of the full chain, indexed by
/// [`PauliString::index`].
pub fn full_transition_matrix(n: usize) -> Result<DMatrix<f64>> {
    if !(2..=5).contains(&n) {
        return Err(Error::Size(format!("full chain matrix needs 2 <= n <= 5, got {n}")));
    }
    let states = 1usize << (2 * n);
    // Integer counts over the common denominator 15·C(n,2).
    let den = (15 * n * (n - 1) / 2) as f64;
    let mut m = DMatrix::<f64>::zeros(states, states);
    for s in 0..states {
        let p = PauliString::from_index(n, s);
        for i in 0..n {
            for j in i + 1..n {
                if p.code(i) == 0 && p.code(j) == 0 {
                    m[(s, s)] += 15.0;
                    continue;
                }
                for k in 1u8..16 {
                    let mut q = p;
                    q.set(i, k & 3);
                    q.set(j, k >> 2);
                    m[(s, q.index())] += 1.0;
                }
            }
        }
    }
    Ok(m / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_string_is_absorbing() {
        let p = PauliString::identity(5).unwrap();
        let mut r = rng::stream(0);
        let mut q = p;
        for _ in 0..100 {
            q = chain_step(&q, &mut r);
        }
        assert_eq!(q, p);
    }

    #[test]
    fn two_sites_from_one_nonzero() {
        let p = PauliString::from_codes(&[1, 0]).unwrap();
        let mut r = rng::stream(1);
        let steps = 100_000;
        let mut counts = [0f64; 16];
        for _ in 0..steps {
            counts[chain_step(&p, &mut r).index()] += 1.0;
        }
        assert_eq!(counts[0], 0.0);
        for c in &counts[1..] {
            assert!((c / steps as f64 - 1.0 / 15.0).abs() < 0.01);
        }
    }

    #[test]
    fn weight_law_from_a_full_pair() {
        let p = PauliString::from_codes(&[2, 3]).unwrap();
        let mut r = rng::stream(2);
        let steps = 60_000;
        let ones = (0..steps).filter(|_| chain_step(&p, &mut r).weight() == 1).count() as f64 / steps as f64;
        assert!((ones - 6.0 / 15.0).abs() < 0.01);
    }

    #[test]
    fn nonzero_sector_is_preserved() {
        let mut r = rng::stream(3);
        for _ in 0..2000 {
            let n = r.random_range(2..10);
            let codes: Vec<u8> = (0..n).map(|_| r.random_range(0..4)).collect();
            let p = PauliString::from_codes(&codes).unwrap();
            let q = chain_step(&p, &mut r);
            assert_eq!(q.weight() == 0, p.weight() == 0);
        }
    }

    #[test]
    fn full_matrix_is_stochastic() {
        for n in 2..=4 {
            let m = full_transition_matrix(n).unwrap();
            for r in 0..m.nrows() {
                assert!((m.row(r).sum() - 1.0).abs() < 1e-12);
            }
            assert_eq!(m[(0, 0)], 1.0);
        }
    }

    #[test]
    fn walkers_are_reproducible() {
        let start = PauliString::from_codes(&[1, 0, 0]).unwrap();
        assert_eq!(run_walkers(&start, 10, 50, 4).unwrap(), run_walkers(&start, 10, 50, 4).unwrap());
    }
}
