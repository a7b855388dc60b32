//! Pauli-basis dynamics of random circuits.
//!
//! Writing `ψ_t = 2^{-n/2} Σ_p γ_t(p) σ_p` with `σ_0..σ_3 = I, σ_z, σ_x, σ_y`,
//! the circuit-averaged masses `E γ_t²(p)` follow a Markov chain on
//! `{0,1,2,3}^n`: pick two distinct sites; if both are 0 do nothing, otherwise
//! replace them by a uniform element of `{0,1,2,3}² \ {(0,0)}`. Since the
//! update only sees which sites are zero, the chain lumps onto the weight
//! (number of nonzero sites), which is what the spectral gaps are computed on.

mod ad2;
mod chain;
mod lumped;
mod moments;
mod pauli;

pub use ad2::{ad_matrix, verify_mean_ad2, xi_projector, Ad2Report};
pub use chain::{chain_step, full_transition_matrix, run_walkers, uniform_nonzero_tv, weight_histogram};
pub use lumped::{exact_balance_check, exact_gap, gap_table, lumped_matrix, lumped_matrix_exact, GapRow, WeightChain};
pub use moments::{
    chain_evolve, circuit_collisions, collision_from_gamma, gamma_squared, initial_gamma, moment_compare,
    q_t_statistics, total_variation, GammaDistribution, MomentComparison, QtStats,
};
pub use pauli::PauliString;
