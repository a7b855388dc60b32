use nalgebra::{DMatrix, Matrix4, SMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pauli::PauliString;
use crate::simcore::sample_haar_two_qubit;
use crate::{rng, Error, Result, C64};

const DIM: usize = 16;
const DIM2: usize = DIM * DIM;
const CHUNK: usize = 256;
const IMAG_TOL: f64 = 1e-12;

pub type AdMatrix = SMatrix<f64, DIM, DIM>;

/// Two-qubit Pauli matrices, index `k` = code of qubit 0 + 4·code of qubit 1.
fn paulis() -> Vec<Matrix4<C64>> {
    (0..DIM)
        .map(|k| {
            let p = PauliString::from_index(2, k);
            let mut m = Matrix4::zeros();
            for col in 0..4 {
                let mut e = vec![C64::new(0.0, 0.0); 4];
                e[col] = C64::new(1.0, 0.0);
                for (row, v) in p.apply(&e).into_iter().enumerate() {
                    m[(row, col)] = v;
                }
            }
            m
        })
        .collect()
}

/// `⟨p|ad_W|q⟩ = tr(σ_p W σ_q W†)/4` and the largest discarded imaginary part.
pub fn ad_matrix(w: &Matrix4<C64>) -> (AdMatrix, f64) {
    let sig = paulis();
    let wd = w.adjoint();
    let mut ad = AdMatrix::zeros();
    let mut imag = 0.0f64;
    for q in 0..DIM {
        let conj = w * sig[q] * wd;
        for p in 0..DIM {
            let v = (sig[p] * conj).trace() / 4.0;
            ad[(p, q)] = v.re;
            imag = imag.max(v.im.abs());
        }
    }
    (ad, imag)
}

/// `|00⟩⟨00| + |ξ⟩⟨ξ|` with `|ξ⟩ = 15^{-1/2} Σ_{p≠0} |p⟩|p⟩`, pair index `16p + p'`.
pub fn xi_projector() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(DIM2, DIM2);
    m[(0, 0)] = 1.0;
    for p in 1..DIM {
        for q in 1..DIM {
            m[(p * DIM + p, q * DIM + q)] = 1.0 / 15.0;
        }
    }
    m
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ad2Report {
    pub samples: usize,
    /// `‖mean ad_W^⊗2 − (|00⟩⟨00| + |ξ⟩⟨ξ|)‖_F`.
    pub frobenius: f64,
    /// The same distance restricted to the sixteen `⟨p,p|` rows.
    pub pp_rows_distance: f64,
    /// `√((256 − 2)/samples)`: expected distance from sampling noise alone,
    /// since `‖ad_W^⊗2‖_F² = 256` for every orthogonal `ad_W`.
    pub expected_noise: f64,
    pub max_orthogonality_dev: f64,
    pub max_first_row_dev: f64,
    pub max_imag: f64,
}

/// Monte Carlo mean of `ad_W^⊗2` over Haar `W ∈ U(4)`; sample `i` uses
/// stream `child(seed, i)`.
pub fn verify_mean_ad2(samples: usize, seed: u64) -> Result<Ad2Report> {
    if samples < 100 {
        return Err(Error::InvalidConfig(format!("need at least 100 samples, got {samples}")));
    }
    let chunks: Vec<(Vec<f64>, f64, f64, f64)> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0f64; DIM2 * DIM2];
            let (mut orth, mut first, mut imag) = (0.0f64, 0.0f64, 0.0f64);
            for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let w = sample_haar_two_qubit(&mut rng::child(seed, i as u64));
                let (ad, im) = ad_matrix(w.matrix());
                imag = imag.max(im);
                orth = orth.max((ad.transpose() * ad - AdMatrix::identity()).abs().max());
                for k in 0..DIM {
                    let e = if k == 0 { 1.0 } else { 0.0 };
                    first = first.max((ad[(0, k)] - e).abs()).max((ad[(k, 0)] - e).abs());
                }
                for p1 in 0..DIM {
                    for p2 in 0..DIM {
                        let row = (p1 * DIM + p2) * DIM2;
                        for q1 in 0..DIM {
                            let a = ad[(p1, q1)];
                            for q2 in 0..DIM {
                                acc[row + q1 * DIM + q2] += a * ad[(p2, q2)];
                            }
                        }
                    }
                }
            }
            (acc, orth, first, imag)
        })
        .collect();
    let mut sum = vec![0.0f64; DIM2 * DIM2];
    let (mut orth, mut first, mut imag) = (0.0f64, 0.0f64, 0.0f64);
    for (acc, o, f, i) in &chunks {
        sum.iter_mut().zip(acc).for_each(|(s, x)| *s += x);
        orth = orth.max(*o);
        first = first.max(*f);
        imag = imag.max(*i);
    }
    if imag > IMAG_TOL {
        return Err(Error::Integrity(format!("ad_W has an imaginary part of {imag:e}")));
    }
    let target = xi_projector();
    let mut total = 0.0;
    let mut pp = 0.0;
    for r in 0..DIM2 {
        for c in 0..DIM2 {
            let d = sum[r * DIM2 + c] / samples as f64 - target[(r, c)];
            total += d * d;
            if r / DIM == r % DIM {
                pp += d * d;
            }
        }
    }
    Ok(Ad2Report {
        samples,
        frobenius: total.sqrt(),
        pp_rows_distance: pp.sqrt(),
        expected_noise: ((DIM2 - 2) as f64 / samples as f64).sqrt(),
        max_orthogonality_dev: orth,
        max_first_row_dev: first,
        max_imag: imag,
    })
}
