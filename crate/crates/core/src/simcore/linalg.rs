//! Small dense helpers: Haar unitaries, random unit vectors, orthonormal completion.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::C64;

/// Standard complex Gaussian (independent N(0,1) real and imaginary parts).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniformly random unit vector in C^dim.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-distributed unitary of size `dim`.
///
/// Fills a matrix with complex Gaussians and orthonormalizes the columns by
/// Gram–Schmidt (two passes). Each column is divided by the real positive norm
/// of its residual, which is exactly the QR factorization whose triangular
/// factor has a real-positive diagonal, so no further phase fix is needed and
/// the result is exactly Haar. Rank-deficient draws are redrawn.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    'draw: loop {
        let mut m = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
        for c in 0..dim {
            for _ in 0..2 {
                for p in 0..c {
                    let proj: C64 = (0..dim).map(|r| m[(r, p)].conj() * m[(r, c)]).sum();
                    for r in 0..dim {
                        let v = m[(r, p)];
                        m[(r, c)] -= proj * v;
                    }
                }
            }
            let norm = (0..dim).map(|r| m[(r, c)].norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue 'draw;
            }
            for r in 0..dim {
                m[(r, c)] /= norm;
            }
        }
        return m;
    }
}

/// A unitary whose column `col` equals the unit vector `v`; the remaining
/// columns complete the standard basis by Gram–Schmidt.
pub fn unitary_with_column(v: &[C64], col: usize) -> DMatrix<C64> {
    let dim = v.len();
    let mut basis: Vec<Vec<C64>> = vec![v.to_vec()];
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut w = vec![C64::new(0.0, 0.0); dim];
        w[e] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in &basis {
                let proj: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(w.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut order: Vec<usize> = (1..dim).collect();
    order.insert(col, 0);
    DMatrix::from_fn(dim, dim, |r, c| basis[order[c]][r])
}

/// max_{ij} |(M†M − I)_{ij}|.
pub fn unitarity_deviation(m: &DMatrix<C64>) -> f64 {
    let g = m.adjoint() * m;
    let mut worst = 0.0f64;
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((g[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn haar_is_unitary() {
        let mut r = rng::stream(1);
        for d in [1, 2, 4, 8] {
            assert!(unitarity_deviation(&haar_unitary(d, &mut r)) < 1e-12);
        }
    }

    #[test]
    fn completion_keeps_the_column() {
        let mut r = rng::stream(2);
        let v = random_unit_vector(8, &mut r);
        let u = unitary_with_column(&v, 5);
        assert!(unitarity_deviation(&u) < 1e-12);
        for k in 0..8 {
            assert!((u[(k, 5)] - v[k]).norm() < 1e-15);
        }
    }
}
