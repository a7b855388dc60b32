use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const EXACT_MAX_N: usize = 8;
const MAX_N: usize = 64;

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_N).contains(&n) {
        return Err(Error::Size(format!("weight chain needs 2 <= n <= {MAX_N}, got {n}")));
    }
    Ok(())
}

/// Integer numerators of `P(w → w')` over the common denominator `15·C(n,2)`,
/// indexed `w − 1`.
fn numerators(n: usize) -> (Vec<Vec<i64>>, i64) {
    let n = n as i64;
    let c2 = |k: i64| k * (k - 1) / 2;
    let den = 15 * c2(n);
    let size = n as usize;
    let mut m = vec![vec![0i64; size]; size];
    for w in 1..=n {
        let r = (w - 1) as usize;
        // Neither site nonzero: stay.
        m[r][r] += 15 * c2(n - w);
        // One nonzero site leaves; the new pair adds one (6/15) or two (9/15).
        let one = w * (n - w);
        m[r][r] += 6 * one;
        if w < n {
            m[r][r + 1] += 9 * one;
        }
        // Two nonzero sites leave.
        let both = c2(w);
        if w >= 2 {
            m[r][r - 1] += 6 * both;
        }
        m[r][r] += 9 * both;
    }
    (m, den)
}

/// Lumped transition matrix in exact rational arithmetic, `n ≤ 8`.
pub fn lumped_matrix_exact(n: usize) -> Result<Vec<Vec<Ratio<i64>>>> {
    check_n(n)?;
    if n > EXACT_MAX_N {
        return Err(Error::Size(format!("exact assembly is limited to n <= {EXACT_MAX_N}")));
    }
    let (m, den) = numerators(n);
    Ok(m.into_iter().map(|row| row.into_iter().map(|x| Ratio::new(x, den)).collect()).collect())
}

/// Unnormalized stationary weights `C(n,w)·3^w`, exact for `n ≤ 8`.
fn stationary_exact(n: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(n);
    let mut binom = 1i64;
    for w in 1..=n as i64 {
        binom = binom * (n as i64 - w + 1) / w;
        out.push(binom * 3i64.pow(w as u32));
    }
    out
}

/// Weight chain on `w ∈ {1..n}` (the absorbing identity string removed).
#[derive(Clone, Debug)]
pub struct WeightChain {
    pub n: usize,
    pub transition: DMatrix<f64>,
    /// `π(w) = C(n,w)·3^w / (4^n − 1)`, indexed `w − 1`.
    pub stationary: Vec<f64>,
}

pub fn lumped_matrix(n: usize) -> Result<WeightChain> {
    check_n(n)?;
    let transition = if n <= EXACT_MAX_N {
        let exact = lumped_matrix_exact(n)?;
        DMatrix::from_fn(n, n, |r, c| *exact[r][c].numer() as f64 / *exact[r][c].denom() as f64)
    } else {
        let (m, den) = numerators(n);
        DMatrix::from_fn(n, n, |r, c| m[r][c] as f64 / den as f64)
    };
    let total = 4f64.powi(n as i32) - 1.0;
    let mut stationary = Vec::with_capacity(n);
    let mut binom = 1.0f64;
    for w in 1..=n {
        binom = binom * (n - w + 1) as f64 / w as f64;
        stationary.push(binom * 3f64.powi(w as i32) / total);
    }
    Ok(WeightChain { n, transition, stationary })
}

impl WeightChain {
    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.n).map(|r| (self.transition.row(r).sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest `|π(w)P(w,w') − π(w')P(w',w)|`.
    pub fn detailed_balance_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.n {
            for b in 0..self.n {
                let lhs = self.stationary[a] * self.transition[(a, b)];
                let rhs = self.stationary[b] * self.transition[(b, a)];
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    /// Same as [`detailed_balance_error`](Self::detailed_balance_error) but
    /// relative to the larger flow, so tiny stationary masses are not hidden.
    pub fn detailed_balance_relative_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.n {
            for b in 0..self.n {
                let lhs = self.stationary[a] * self.transition[(a, b)];
                let rhs = self.stationary[b] * self.transition[(b, a)];
                let scale = lhs.abs().max(rhs.abs());
                if scale > 0.0 {
                    worst = worst.max((lhs - rhs).abs() / scale);
                }
            }
        }
        worst
    }

    /// `D^{1/2} P D^{-1/2}` with `D = diag(π)`; symmetric by reversibility.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let s: Vec<f64> = self.stationary.iter().map(|x| x.sqrt()).collect();
        DMatrix::from_fn(self.n, self.n, |r, c| s[r] * self.transition[(r, c)] / s[c])
    }

    /// Row vector `dist · P^t` over weights `1..n`.
    pub fn evolve(&self, dist: &[f64], t: usize) -> Result<Vec<f64>> {
        if dist.len() != self.n {
            return Err(Error::Size(format!("distribution has {} entries, chain has {}", dist.len(), self.n)));
        }
        let mut v = dist.to_vec();
        for _ in 0..t {
            let mut next = vec![0.0; self.n];
            for (a, &mass) in v.iter().enumerate() {
                if mass != 0.0 {
                    for (b, x) in next.iter_mut().enumerate() {
                        *x += mass * self.transition[(a, b)];
                    }
                }
            }
            v = next;
        }
        Ok(v)
    }
}

/// `1 − λ₂` of the weight chain.
pub fn exact_gap(n: usize) -> Result<f64> {
    check_n(n)?;
    if n == 2 {
        // Two states: λ₂ = P(1,1) + P(2,2) − 1, evaluated exactly.
        let p = lumped_matrix_exact(2)?;
        let lambda2 = p[0][0] + p[1][1] - Ratio::from_integer(1);
        let gap = Ratio::from_integer(1) - lambda2;
        return Ok(*gap.numer() as f64 / *gap.denom() as f64);
    }
    let chain = lumped_matrix(n)?;
    let mut eig: Vec<f64> = SymmetricEigen::new(chain.symmetrized()).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(1.0 - eig[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: usize,
    pub gap: f64,
    pub gap_n: f64,
    pub gap_n2: f64,
}

pub fn gap_table(ns: &[usize]) -> Result<Vec<GapRow>> {
    ns.iter()
        .map(|&n| {
            let gap = exact_gap(n)?;
            Ok(GapRow { n, gap, gap_n: gap * n as f64, gap_n2: gap * (n * n) as f64 })
        })
        .collect()
}

impl GapRow {
    pub const CSV_HEADER: &'static str = "n,gap,gap_n,gap_n2";

    pub fn csv_line(&self) -> String {
        format!("{},{:.16e},{:.16e},{:.16e}", self.n, self.gap, self.gap_n, self.gap_n2)
    }
}

/// Rows summing to one and detailed balance against `C(n,w)·3^w`, both
/// checked in rational arithmetic for `n ≤ 8`.
pub fn exact_balance_check(n: usize) -> Result<(bool, bool)> {
    let p = lumped_matrix_exact(n)?;
    let pi = stationary_exact(n);
    let rows = p.iter().all(|row| row.iter().copied().sum::<Ratio<i64>>() == Ratio::from_integer(1));
    let balance = (0..n).all(|a| (0..n).all(|b| p[a][b] * pi[a] == p[b][a] * pi[b]));
    Ok((rows, balance))
}
