use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::full_transition_matrix;
use super::pauli::PauliString;
use crate::dispersion::{collision, mean_and_std_err};
use crate::simcore::{PureState, RandomCircuit};
use crate::{rng, Error, Result};

const GAMMA_MAX_N: usize = 6;
const COMPARE_MAX_N: usize = 4;
const COMPARE_MAX_T: usize = 50;
const QT_MAX_N: usize = 12;

/// Dense `γ_t²` over all `4^n` strings, indexed by [`PauliString::index`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaDistribution {
    pub n: usize,
    pub t: usize,
    pub masses: Vec<f64>,
}

impl GammaDistribution {
    pub fn mass(&self, p: &PauliString) -> f64 {
        self.masses[p.index()]
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Mass aggregated by weight, keyed `0..=n`.
    pub fn weight_distribution(&self) -> BTreeMap<usize, f64> {
        let mut out: BTreeMap<usize, f64> = (0..=self.n).map(|w| (w, 0.0)).collect();
        for (k, m) in self.masses.iter().enumerate() {
            *out.get_mut(&PauliString::from_index(self.n, k).weight()).unwrap() += m;
        }
        out
    }
}

/// `γ²(p) = 2^{-n} ⟨ψ|σ_p|ψ⟩²` by explicit Pauli traces.
pub fn gamma_squared(state: &PureState, t: usize) -> Result<GammaDistribution> {
    let n = state.n_qubits();
    if n > GAMMA_MAX_N {
        return Err(Error::Size(format!("Pauli expansion limited to n <= {GAMMA_MAX_N}, got {n}")));
    }
    let scale = 1.0 / (1u64 << n) as f64;
    let masses = (0..1usize << (2 * n))
        .map(|k| {
            let e = PauliString::from_index(n, k).expectation(state.amplitudes());
            scale * e * e
        })
        .collect();
    Ok(GammaDistribution { n, t, masses })
}

/// Expansion of any `|a⟩⟨a|`: mass `2^{-n}` on each string over `{I, σ_z}`.
pub fn initial_gamma(n: usize) -> Result<GammaDistribution> {
    if n > GAMMA_MAX_N {
        return Err(Error::Size(format!("Pauli expansion limited to n <= {GAMMA_MAX_N}, got {n}")));
    }
    let mut masses = vec![0.0; 1 << (2 * n)];
    let m = 1.0 / (1u64 << n) as f64;
    for x in 0..1usize << n {
        masses[z_string(n, x).index()] = m;
    }
    Ok(GammaDistribution { n, t: 0, masses })
}

/// The string with `σ_z` on the set bits of `x` and `I` elsewhere.
fn z_string(n: usize, x: usize) -> PauliString {
    let mut p = PauliString::from_index(n, 0);
    for i in 0..n {
        if (x >> i) & 1 == 1 {
            p.set(i, 1);
        }
    }
    p
}

/// `Σ_{p ∈ {I,σ_z}^n} γ²(p)`, which equals `Σ_x |⟨x|ψ⟩|⁴`.
pub fn collision_from_gamma(dist: &GammaDistribution) -> f64 {
    (0..1usize << dist.n).map(|x| dist.mass(&z_string(dist.n, x))).sum()
}

/// `dist · P^t` with the full `4^n`-state transition matrix.
pub fn chain_evolve(dist: &GammaDistribution, t: usize) -> Result<GammaDistribution> {
    let p = full_transition_matrix(dist.n)?;
    let states = dist.masses.len();
    let mut v = dist.masses.clone();
    for _ in 0..t {
        let mut next = vec![0.0; states];
        for (a, &m) in v.iter().enumerate() {
            if m != 0.0 {
                for (b, x) in next.iter_mut().enumerate() {
                    *x += m * p[(a, b)];
                }
            }
        }
        v = next;
    }
    Ok(GammaDistribution { n: dist.n, t: dist.t + t, masses: v })
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentComparison {
    pub n: usize,
    pub t: usize,
    pub circuits: usize,
    pub tv: f64,
    pub averaged: GammaDistribution,
    pub evolved: GammaDistribution,
}

/// Circuit-averaged `γ_t²` from `|0^n⟩` against the chain evolved from
/// `γ_0²`. Circuit `k` is generated from `derive_seed(seed, k)`.
pub fn moment_compare(n: usize, t: usize, circuits: usize, seed: u64) -> Result<MomentComparison> {
    if n > COMPARE_MAX_N {
        return Err(Error::Size(format!("moment comparison limited to n <= {COMPARE_MAX_N}, got {n}")));
    }
    if t > COMPARE_MAX_T {
        return Err(Error::InvalidConfig(format!("moment comparison limited to t <= {COMPARE_MAX_T}, got {t}")));
    }
    if circuits == 0 {
        return Err(Error::InvalidConfig("need at least one circuit".into()));
    }
    let per_circuit: Vec<Vec<f64>> = (0..circuits)
        .into_par_iter()
        .map(|k| {
            let c = RandomCircuit::generate(n, t, rng::derive_seed(seed, k as u64))?;
            Ok(gamma_squared(&c.state_from_basis(0)?, t)?.masses)
        })
        .collect::<Result<_>>()?;
    let mut sum = vec![0.0; 1 << (2 * n)];
    for v in &per_circuit {
        sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
    }
    let masses: Vec<f64> = sum.iter().map(|s| s / circuits as f64).collect();
    let averaged = GammaDistribution { n, t, masses };
    let evolved = chain_evolve(&initial_gamma(n)?, t)?;
    let tv = total_variation(&averaged.masses, &evolved.masses);
    Ok(MomentComparison { n, t, circuits, tv, averaged, evolved })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QtStats {
    pub n: usize,
    pub t: usize,
    pub circuits: usize,
    pub labels: Vec<usize>,
    pub values: Vec<f64>,
    pub mean: f64,
    pub std_err: f64,
}

/// `Q_t = Σ_x |⟨x|ψ_t⟩|⁴` over independent circuits, from `|0^n⟩` or from a
/// uniformly random `|a⟩` per circuit.
pub fn q_t_statistics(n: usize, t: usize, circuits: usize, seed: u64, random_a: bool) -> Result<QtStats> {
    if n > QT_MAX_N {
        return Err(Error::Size(format!("collision statistics limited to n <= {QT_MAX_N}, got {n}")));
    }
    if circuits == 0 {
        return Err(Error::InvalidConfig("need at least one circuit".into()));
    }
    let rows: Vec<(usize, f64)> = (0..circuits)
        .into_par_iter()
        .map(|k| {
            let circuit_seed = rng::derive_seed(seed, k as u64);
            let a = if random_a { rng::child(circuit_seed, u64::MAX).random_range(0..1usize << n) } else { 0 };
            let c = RandomCircuit::generate(n, t, circuit_seed)?;
            Ok((a, collision(&c.state_from_basis(a)?)))
        })
        .collect::<Result<_>>()?;
    let (labels, values): (Vec<usize>, Vec<f64>) = rows.into_iter().unzip();
    let (mean, std_err) = mean_and_std_err(&values);
    Ok(QtStats { n, t, circuits, labels, values, mean, std_err })
}

/// `Q` for every label `a` of every circuit; row `k` belongs to the circuit
/// generated from `derive_seed(seed, k)`.
pub fn circuit_collisions(n: usize, t: usize, circuits: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n > QT_MAX_N {
        return Err(Error::Size(format!("collision statistics limited to n <= {QT_MAX_N}, got {n}")));
    }
    (0..circuits)
        .into_par_iter()
        .map(|k| {
            let c = RandomCircuit::generate(n, t, rng::derive_seed(seed, k as u64))?;
            (0..1usize << n).map(|a| Ok(collision(&c.state_from_basis(a)?))).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use proptest::prelude::*;

    #[test]
    fn initial_distribution() {
        for n in 1..=4 {
            let g = initial_gamma(n).unwrap();
            assert_eq!(g.masses.iter().filter(|&&m| m > 0.0).count(), 1 << n);
            assert!((g.total() - 1.0).abs() < 1e-15);
            for a in 0..1usize << n {
                let from_state = gamma_squared(&PureState::basis(n, a).unwrap(), 0).unwrap();
                assert_eq!(from_state, g);
            }
        }
    }

    #[test]
    fn zero_steps_match_exactly() {
        let r = moment_compare(2, 0, 10, 5).unwrap();
        assert_eq!(r.tv, 0.0);
    }

    #[test]
    fn moments_follow_the_chain() {
        let r = moment_compare(2, 5, 2000, 6).unwrap();
        assert!(r.tv <= 0.03, "tv = {}", r.tv);
        let r3 = moment_compare(3, 3, 1500, 7).unwrap();
        assert!(r3.tv <= 0.05, "tv = {}", r3.tv);
    }

    #[test]
    fn preconditions() {
        assert!(moment_compare(5, 1, 1, 0).is_err());
        assert!(moment_compare(2, 51, 1, 0).is_err());
        assert!(q_t_statistics(13, 1, 1, 0, false).is_err());
    }

    #[test]
    fn zero_depth_collision_is_one() {
        let s = q_t_statistics(4, 0, 20, 1, true).unwrap();
        assert!(s.values.iter().all(|&q| q == 1.0));
        assert_eq!(s.std_err, 0.0);
    }

    #[test]
    fn deep_circuits_approach_two_over_dim() {
        let s = q_t_statistics(4, 4 * 64, 400, 2, false).unwrap();
        // Haar value 2/(2^n + 1).
        assert!((s.mean - 2.0 / 17.0).abs() < 4.0 * s.std_err + 1e-3, "{} ± {}", s.mean, s.std_err);
    }

    #[test]
    fn collision_grid_matches_single_label_runs() {
        let grid = circuit_collisions(3, 20, 4, 9).unwrap();
        let stats = q_t_statistics(3, 20, 4, 9, false).unwrap();
        for (row, q) in grid.iter().zip(&stats.values) {
            assert_eq!(row[0], *q);
        }
    }

    #[test]
    fn weight_map_sums() {
        let g = initial_gamma(3).unwrap();
        let w = g.weight_distribution();
        assert_eq!(w.len(), 4);
        assert!((w[&0] - 0.125).abs() < 1e-15 && (w[&3] - 0.125).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn gamma_is_a_distribution(seed in any::<u64>(), n in 1usize..5) {
            let mut r = rng::stream(seed);
            let amps = crate::simcore::linalg::random_unit_vector(1 << n, &mut r);
            let psi = PureState::from_amplitudes(amps).unwrap();
            let g = gamma_squared(&psi, 0).unwrap();
            prop_assert!(g.masses.iter().all(|&m| m >= 0.0));
            prop_assert!((g.total() - 1.0).abs() < 1e-9);
            prop_assert!((g.masses[0] - 1.0 / (1u64 << n) as f64).abs() < 1e-12);
            prop_assert!((collision_from_gamma(&g) - collision(&psi)).abs() < 1e-12);
        }

        #[test]
        fn global_phase_is_invisible(seed in any::<u64>(), phase in 0.0f64..6.28) {
            let mut r = rng::stream(seed);
            let amps = crate::simcore::linalg::random_unit_vector(8, &mut r);
            let rotated: Vec<C64> = amps.iter().map(|a| a * C64::from_polar(1.0, phase)).collect();
            let g1 = gamma_squared(&PureState::from_amplitudes(amps).unwrap(), 0).unwrap();
            let g2 = gamma_squared(&PureState::from_amplitudes(rotated).unwrap(), 0).unwrap();
            prop_assert!(total_variation(&g1.masses, &g2.masses) < 1e-12);
        }
    }
}
