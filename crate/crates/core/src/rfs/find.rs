//! Error and query accounting for FIND.
//!
//! Each internal node at depth `k` rebuilds `|φ_{s}⟩` over the child register
//! from child answers of the form
//! `√(1−ε_x)|0⟩|a⟩|ζ⟩ + √ε_x|1⟩|ζ′⟩`. The phase applied only on the success
//! branch gives the overlap `1 − (2/|X|) Σ_{x: f(s,x)=1} ε_x` with the ideal
//! state; after uncomputation the copy is `√(1−4η)|φ⟩ + √(4η)|φ′⟩` with
//! `1 − 4η` the squared overlap. A copy succeeds with probability at least
//! `⟨φ|Π_s|φ⟩ − 4√η`, and `m` copies all fail with probability `(1 − p)^m`,
//! which becomes the node's own error.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::oracle::evaluate;
use super::spec::RecursiveOracleSpec;
use crate::oracle1::{outcome_distribution, prepare_phi};
use crate::rng::{self, derive_seed};
use crate::simcore::linalg::complex_gaussian;
use crate::simcore::UnitaryAction;
use crate::{Error, Result, C64};

/// Internal nodes visited by one simulation.
const MAX_NODES: usize = 1 << 20;

/// Size of the junk register in the sampled mode.
const JUNK_DIM: usize = 2;

pub fn find_epsilon(delta: f64) -> f64 {
    (delta / 8.0).powi(2)
}

/// `⌈(4/δ) ln(8/δ)⌉`.
pub fn find_copies(delta: f64) -> usize {
    ((4.0 / delta) * (8.0 / delta).ln()).ceil() as usize
}

/// `Σ_{j=1}^{ℓ} (2m)^j`, the solution of `Q(k) = 2mQ(k+1) + 2m`, `Q(ℓ) = 0`.
pub fn query_count_closed_form(m: usize, depth: usize) -> u128 {
    (1..=depth as u32).map(|j| (2 * m as u128).pow(j)).sum()
}

/// `(2m)^{2ℓ}`, the estimate quoted alongside the recurrence.
pub fn query_count_paper(m: usize, depth: usize) -> f64 {
    (2.0 * m as f64).powi(2 * depth as i32)
}

/// Counts queries by walking the procedure: per copy, a child call, the
/// phase query and the uncomputing child call; then one test per copy.
pub fn count_queries(m: usize, depth: usize) -> u128 {
    fn level(k: usize, m: usize, depth: usize) -> u128 {
        if k == depth {
            return 0;
        }
        let mut q = 0u128;
        for _ in 0..m {
            q += level(k + 1, m, depth);
            q += 1;
            q += level(k + 1, m, depth);
        }
        q + m as u128
    }
    level(0, m, depth)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum JunkMode {
    /// Every bound taken at its extreme: child errors at their certified
    /// value, success reduced by the full trace-distance penalty.
    WorstCase,
    /// Junk drawn Haar-random orthogonal to the ideal copy; success averaged
    /// over `draws`.
    Sampled { draws: usize, seed: u64 },
}

/// Extra error injected into the answers of the given root children.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corruption {
    pub eps: f64,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FindParams {
    pub delta: f64,
    pub m_override: Option<usize>,
    pub junk: JunkMode,
    pub corruption: Option<Corruption>,
}

impl FindParams {
    pub fn worst_case(delta: f64) -> Self {
        Self { delta, m_override: None, junk: JunkMode::WorstCase, corruption: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub nodes: usize,
    /// Largest child error feeding this level.
    pub max_child_error: f64,
    /// Largest `η` with copies `√(1−4η)|φ⟩ + √(4η)|φ′⟩`.
    pub max_perturbation: f64,
    pub min_exact_success: f64,
    pub min_copy_success: f64,
    /// Largest `(1 − p)^m`: the error this level hands to its parent.
    pub max_failure_amp_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FindReport {
    pub delta: f64,
    pub epsilon: f64,
    pub m: usize,
    pub depth: usize,
    pub junk: JunkMode,
    pub levels: Vec<LevelReport>,
    /// Every copy at every node succeeds with probability ≥ δ/2.
    pub copies_certified: bool,
    /// Every node's error is ≤ ε.
    pub errors_certified: bool,
    pub root_success: f64,
    pub answer: Option<u8>,
    pub answer_correct: bool,
    pub q0_counted: u128,
    pub q0_closed_form: u128,
    pub q0_paper: f64,
}

struct Ctx<'a> {
    spec: &'a RecursiveOracleSpec,
    u: &'a dyn UnitaryAction,
    params: &'a FindParams,
    m: usize,
    exact: HashMap<usize, f64>,
    levels: Vec<LevelReport>,
}

pub fn find_simulate(spec: &RecursiveOracleSpec, u: &dyn UnitaryAction, params: &FindParams) -> Result<FindReport> {
    let delta = params.delta;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidConfig(format!("delta must lie in (0, 1], got {delta}")));
    }
    if u.n_qubits() != spec.n() {
        return Err(Error::InvalidConfig(format!("unitary on {} qubits, symbols of {} bits", u.n_qubits(), spec.n())));
    }
    let internal: usize = (0..spec.depth).map(|k| spec.symbols().saturating_pow(k as u32)).sum();
    if internal > MAX_NODES {
        return Err(Error::Size(format!("{internal} internal nodes exceed the simulation limit of {MAX_NODES}")));
    }
    if let JunkMode::Sampled { draws: 0, .. } = params.junk {
        return Err(Error::InvalidConfig("sampled junk needs at least one draw".into()));
    }
    let m = params.m_override.unwrap_or_else(|| find_copies(delta));
    if m == 0 {
        return Err(Error::InvalidConfig("FIND needs at least one copy".into()));
    }
    let epsilon = find_epsilon(delta);
    let levels = (0..spec.depth)
        .map(|level| LevelReport {
            level,
            nodes: 0,
            max_child_error: 0.0,
            max_perturbation: 0.0,
            min_exact_success: f64::INFINITY,
            min_copy_success: f64::INFINITY,
            max_failure_amp_sq: 0.0,
        })
        .collect();
    let mut ctx = Ctx { spec, u, params, m, exact: HashMap::new(), levels };
    let mut path = Vec::with_capacity(spec.depth);
    let root_error = node(&mut ctx, &mut path)?;

    let copies_certified = ctx.levels.iter().all(|l| l.min_copy_success >= delta / 2.0);
    let errors_certified = ctx.levels.iter().all(|l| l.max_failure_amp_sq <= epsilon);
    let root_success = 1.0 - root_error;
    let answer =
        if root_success >= 1.0 - epsilon { evaluate(spec, &[], Some(spec.secret_at(&[])?))?.bit() } else { None };
    Ok(FindReport {
        delta,
        epsilon,
        m,
        depth: spec.depth,
        junk: params.junk.clone(),
        levels: ctx.levels,
        copies_certified,
        errors_certified,
        root_success,
        answer,
        answer_correct: answer == Some(spec.b_root),
        q0_counted: count_queries(m, spec.depth),
        q0_closed_form: query_count_closed_form(m, spec.depth),
        q0_paper: query_count_paper(m, spec.depth),
    })
}

fn exact_success(ctx: &mut Ctx, a: usize) -> Result<f64> {
    if let Some(&p) = ctx.exact.get(&a) {
        return Ok(p);
    }
    let p = outcome_distribution(ctx.u, &ctx.spec.oracle, a)?[a];
    if p < ctx.params.delta {
        return Err(Error::Certification { label: a, success: p, delta: ctx.params.delta });
    }
    ctx.exact.insert(a, p);
    Ok(p)
}

/// Returns the node's error `(1 − p_copy)^m`.
fn node(ctx: &mut Ctx, path: &mut Vec<usize>) -> Result<f64> {
    let k = path.len();
    let spec = ctx.spec;
    let s = spec.secret_at(path)?;
    let p_exact = exact_success(ctx, s)?;

    let symbols = spec.symbols();
    let mut child_err = vec![0.0; symbols];
    if k + 1 < spec.depth {
        for (x, e) in child_err.iter_mut().enumerate() {
            path.push(x);
            *e = node(ctx, path)?;
            path.pop();
        }
    }
    if k == 0 {
        if let Some(c) = &ctx.params.corruption {
            for &x in &c.children {
                let e = child_err
                    .get_mut(x)
                    .ok_or_else(|| Error::InvalidConfig(format!("corrupted child {x} outside X")))?;
                *e = 1.0 - (1.0 - *e) * (1.0 - c.eps);
            }
        }
    }

    let mut flipped = 0.0;
    for (x, e) in child_err.iter().enumerate() {
        if spec.f(s, x)? == 1 {
            flipped += e;
        }
    }
    let overlap = 1.0 - 2.0 * flipped / symbols as f64;
    let eta = ((1.0 - overlap * overlap) / 4.0).max(0.0);

    let p_copy = match &ctx.params.junk {
        JunkMode::WorstCase => p_exact - 4.0 * eta.sqrt(),
        JunkMode::Sampled { draws, seed } => {
            let mut h = derive_seed(*seed, k as u64);
            for &x in path.iter() {
                h = derive_seed(h, x as u64);
            }
            let mut total = 0.0;
            for d in 0..*draws {
                total += sampled_copy_success(ctx, s, eta, &mut rng::child(h, d as u64))?;
            }
            total / *draws as f64
        }
    };
    let failure = (1.0 - p_copy.clamp(0.0, 1.0)).powi(ctx.m as i32);

    let lvl = &mut ctx.levels[k];
    lvl.nodes += 1;
    lvl.max_child_error = lvl.max_child_error.max(child_err.iter().cloned().fold(0.0, f64::max));
    lvl.max_perturbation = lvl.max_perturbation.max(eta);
    lvl.min_exact_success = lvl.min_exact_success.min(p_exact);
    lvl.min_copy_success = lvl.min_copy_success.min(p_copy);
    lvl.max_failure_amp_sq = lvl.max_failure_amp_sq.max(failure);
    Ok(failure)
}

/// `⟨φ̃|Π_s ⊗ I|φ̃⟩` for `φ̃ = √(1−4η)|φ⟩|0⟩ + √(4η)|φ′⟩`, `φ′` Haar-random
/// orthogonal to `|φ⟩|0⟩` in the copy register times a junk qubit.
fn sampled_copy_success(ctx: &Ctx, s: usize, eta: f64, r: &mut rng::Stream) -> Result<f64> {
    let phi = prepare_phi(&ctx.spec.oracle, s)?;
    let dim = phi.dim();
    let mut junk: Vec<C64> = (0..dim * JUNK_DIM).map(|_| complex_gaussian(r)).collect();
    let proj: C64 = phi.amplitudes().iter().zip(&junk).map(|(p, j)| p.conj() * j).sum();
    for (j, p) in junk.iter_mut().zip(phi.amplitudes()) {
        *j -= proj * p;
    }
    let norm = junk.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let (a, b) = ((1.0 - 4.0 * eta).max(0.0).sqrt(), (4.0 * eta).min(1.0).sqrt());
    let mut total = 0.0;
    for block in 0..JUNK_DIM {
        let mut v: Vec<C64> = junk[block * dim..(block + 1) * dim].iter().map(|z| z * (b / norm)).collect();
        if block == 0 {
            for (vi, p) in v.iter_mut().zip(phi.amplitudes()) {
                *vi += p * a;
            }
        }
        ctx.u.apply(&mut v);
        total += ctx.spec.oracle.measurement.rows(ctx.spec.n(), s).iter().map(|&r| v[r].norm_sqr()).sum::<f64>();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle1::build_oracle;
    use crate::rfs::hadamard_family;
    use crate::simcore::{Hadamard, RandomCircuit};

    #[test]
    fn parameters_for_delta_0_2() {
        assert!((find_epsilon(0.2) - 6.25e-4).abs() < 1e-18);
        assert_eq!(find_copies(0.2), 74);
        assert_eq!(query_count_closed_form(74, 2), 22052);
        assert_eq!(count_queries(74, 2), 22052);
        assert_eq!(query_count_paper(74, 2), 148f64.powi(4));
    }

    #[test]
    fn counted_queries_match_closed_form() {
        for m in 1..6 {
            for l in 1..4 {
                assert_eq!(count_queries(m, l), query_count_closed_form(m, l));
            }
        }
        assert_eq!(query_count_closed_form(74, 1), 148);
    }

    #[test]
    fn copies_suffice_for_the_failure_bound() {
        for delta in [0.05, 0.1, 0.2, 0.5, 0.9] {
            let m = find_copies(delta);
            assert!((1.0 - delta / 2.0).powi(m as i32) <= find_epsilon(delta));
        }
    }

    #[test]
    fn hadamard_worst_case() {
        for l in 1..=3 {
            let spec = RecursiveOracleSpec::generate(hadamard_family(3, 8, 0).unwrap(), l, 5).unwrap();
            let r = find_simulate(&spec, &Hadamard { n: 3 }, &FindParams::worst_case(0.2)).unwrap();
            assert!(r.copies_certified && r.errors_certified);
            assert_eq!(r.answer, Some(spec.b_root));
            assert_eq!(r.q0_counted, r.q0_closed_form);
            assert_eq!(r.levels.len(), l);
            assert_eq!(r.levels.last().unwrap().nodes, 8usize.pow(l as u32 - 1));
            for lvl in &r.levels {
                assert!((lvl.min_exact_success - 1.0).abs() < 1e-9);
                assert!(lvl.min_copy_success >= 0.1);
            }
        }
    }

    #[test]
    fn noisy_children_stay_certified() {
        // A random circuit oracle with δ below its weakest label: children
        // carry nonzero error, which the parent must absorb.
        let n = 4;
        let c = RandomCircuit::generate(n, 4 * n * n * n, 1).unwrap();
        let o = build_oracle(&c, &(0..16).collect::<Vec<_>>()).unwrap();
        let weakest = (0..16).map(|a| outcome_distribution(&c, &o, a).unwrap()[a]).fold(1.0, f64::min);
        let delta = weakest.min(0.4);
        let spec = RecursiveOracleSpec::generate(o, 2, 3).unwrap();
        let r = find_simulate(&spec, &c, &FindParams::worst_case(delta)).unwrap();
        assert!(r.levels[0].max_child_error > 0.0);
        assert!(r.levels[0].max_child_error <= r.epsilon);
        assert!(r.copies_certified && r.errors_certified);
        assert!(r.levels[0].max_perturbation <= r.levels[0].max_child_error);
    }

    #[test]
    fn certification_error_names_the_label() {
        let o = build_oracle(&crate::simcore::Identity { n: 3 }, &(0..8).collect::<Vec<_>>()).unwrap();
        let spec = RecursiveOracleSpec::generate(o, 1, 0).unwrap();
        let root = spec.secret_at(&[]).unwrap();
        match find_simulate(&spec, &crate::simcore::Identity { n: 3 }, &FindParams::worst_case(0.2)) {
            Err(Error::Certification { label, .. }) => assert_eq!(label, root),
            other => panic!("expected a certification error, got {other:?}"),
        }
    }

    #[test]
    fn sampled_mode_sits_above_worst_case() {
        let spec = RecursiveOracleSpec::generate(hadamard_family(2, 4, 0).unwrap(), 2, 9).unwrap();
        let corruption = Some(Corruption { eps: 0.2, children: vec![0, 1, 2, 3] });
        let worst = find_simulate(
            &spec,
            &Hadamard { n: 2 },
            &FindParams { delta: 0.2, m_override: Some(1), junk: JunkMode::WorstCase, corruption: corruption.clone() },
        )
        .unwrap();
        let sampled = find_simulate(
            &spec,
            &Hadamard { n: 2 },
            &FindParams {
                delta: 0.2,
                m_override: Some(1),
                junk: JunkMode::Sampled { draws: 200, seed: 1 },
                corruption,
            },
        )
        .unwrap();
        assert!(sampled.root_success >= worst.root_success);
        assert!(sampled.root_success <= 1.0);
    }
}
