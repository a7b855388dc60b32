//! Literal state-vector execution of FIND on a handful of qubits.
//!
//! Registers are laid out in allocation order. Every step is either a dense
//! unitary on a register (possibly selected by the value of other qubits), a
//! ±1 phase, or an XOR of a function of other qubits into a target register,
//! so the uncomputing call is the reversed list with adjoint matrices.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::find::Corruption;
use super::oracle::{evaluate, Answer};
use super::spec::RecursiveOracleSpec;
use crate::simcore::linalg::{random_unit_vector, unitary_with_column};
use crate::simcore::{Hadamard, UnitaryAction};
use crate::{Error, Result, C64};

pub const COHERENT_QUBIT_BUDGET: usize = 22;

type Reg = Vec<usize>;
type Select<'a> = Arc<dyn Fn(usize) -> usize + Send + Sync + 'a>;
type Flip<'a> = Arc<dyn Fn(usize) -> bool + Send + Sync + 'a>;
type XorFn<'a> = Arc<dyn Fn(usize) -> usize + Send + Sync + 'a>;

#[derive(Clone)]
enum Op<'a> {
    /// `mats[select(index)]` on `targets`; `select` must ignore the targets.
    Local { targets: Reg, mats: Arc<Vec<DMatrix<C64>>>, select: Option<Select<'a>> },
    /// Multiplies amplitudes by −1 where the predicate holds.
    Phase(Flip<'a>),
    /// `index ^= g(index)`; `g` sets only target bits and ignores them.
    Xor(XorFn<'a>),
}

impl Op<'_> {
    fn adjoint(&self) -> Self {
        match self {
            Op::Local { targets, mats, select } => Op::Local {
                targets: targets.clone(),
                mats: Arc::new(mats.iter().map(|m| m.adjoint()).collect()),
                select: select.clone(),
            },
            other => other.clone(),
        }
    }

    fn apply(&self, amps: &mut [C64]) {
        match self {
            Op::Local { targets, mats, select } => {
                let t = targets.len();
                let tmask: usize = targets.iter().map(|&q| 1 << q).sum();
                let offsets: Vec<usize> = (0..1usize << t)
                    .map(|l| (0..t).filter(|b| l >> b & 1 == 1).map(|b| 1 << targets[b]).sum())
                    .collect();
                let mut buf = vec![C64::new(0.0, 0.0); 1 << t];
                for base in 0..amps.len() {
                    if base & tmask != 0 {
                        continue;
                    }
                    let m = &mats[select.as_ref().map_or(0, |s| s(base))];
                    for (b, &o) in buf.iter_mut().zip(&offsets) {
                        *b = amps[base | o];
                    }
                    for (r, &o) in offsets.iter().enumerate() {
                        amps[base | o] = (0..buf.len()).map(|c| m[(r, c)] * buf[c]).sum();
                    }
                }
            }
            Op::Phase(flip) => {
                for (i, a) in amps.iter_mut().enumerate() {
                    if flip(i) {
                        *a = -*a;
                    }
                }
            }
            Op::Xor(g) => {
                for i in 0..amps.len() {
                    let j = i ^ g(i);
                    if j > i {
                        amps.swap(i, j);
                    }
                }
            }
        }
    }
}

fn value(index: usize, reg: &[usize]) -> usize {
    reg.iter().enumerate().map(|(b, &q)| ((index >> q) & 1) << b).sum()
}

fn place(v: usize, reg: &[usize]) -> usize {
    reg.iter().enumerate().map(|(b, &q)| ((v >> b) & 1) << q).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentReport {
    pub qubits: usize,
    /// Probability that the root call reports success.
    pub success_prob: f64,
    /// Root answer read with the most likely reported secret.
    pub answer: Option<u8>,
    /// Norm of the first root copy's child workspace away from `|0⟩` right
    /// after uncomputation; `None` at depth 1.
    pub uncompute_residual: Option<f64>,
}

struct Builder<'a, R: Rng> {
    spec: &'a RecursiveOracleSpec,
    u: Arc<Vec<DMatrix<C64>>>,
    u_adj: Arc<Vec<DMatrix<C64>>>,
    h: Arc<Vec<DMatrix<C64>>>,
    m: usize,
    corruption: Option<&'a Corruption>,
    rng: &'a mut R,
    next: usize,
    /// Ops index after the first root copy's uncomputation, and the qubit
    /// range of its child workspace.
    probe: Option<(usize, std::ops::Range<usize>)>,
}

impl<'a, R: Rng> Builder<'a, R> {
    fn alloc(&mut self, k: usize) -> Reg {
        let r = (self.next..self.next + k).collect();
        self.next += k;
        r
    }

    /// FIND at depth `k` with the ancestors' symbols in `path_regs`. Returns
    /// the ops, the failure flag qubit and the output label register.
    fn find(&mut self, path_regs: &[Reg]) -> Result<(Vec<Op<'a>>, usize, Reg)> {
        let spec = self.spec;
        let n = spec.n();
        let k = path_regs.len();
        let mut ops = Vec::new();
        let mut copies = Vec::new();
        for c in 0..self.m {
            let x = self.alloc(n);
            ops.push(Op::Local { targets: x.clone(), mats: self.h.clone(), select: None });
            let mut regs = path_regs.to_vec();
            regs.push(x.clone());
            let path_of = {
                let regs = regs.clone();
                move |i: usize| regs.iter().map(|r| value(i, r)).collect::<Vec<_>>()
            };
            if k + 1 < spec.depth {
                let start = self.next;
                let (mut child, cflag, clabel) = self.find(&regs)?;
                if k == 0 {
                    if let Some(op) = self.corruption_op(&x, cflag, &clabel)? {
                        child.push(op);
                    }
                }
                let end = self.next;
                ops.extend(child.iter().cloned());
                let clabel_q = clabel.clone();
                ops.push(Op::Phase(Arc::new(move |i| {
                    (i >> cflag) & 1 == 0
                        && matches!(evaluate(spec, &path_of(i), Some(value(i, &clabel_q))), Ok(Answer::One))
                })));
                ops.extend(child.iter().rev().map(Op::adjoint));
                if k == 0 && c == 0 {
                    self.probe = Some((ops.len(), start..end));
                }
            } else {
                ops.push(Op::Phase(Arc::new(move |i| matches!(evaluate(spec, &path_of(i), None), Ok(Answer::One)))));
            }
            copies.push(x);
        }

        for x in &copies {
            ops.push(Op::Local { targets: x.clone(), mats: self.u.clone(), select: None });
        }
        let tests: Vec<usize> = (0..copies.len()).map(|_| self.alloc(1)[0]).collect();
        let prefix: Vec<Reg> = path_regs.to_vec();
        for (x, &t) in copies.iter().zip(&tests) {
            let (x, prefix) = (x.clone(), prefix.clone());
            ops.push(Op::Xor(Arc::new(move |i| {
                let path: Vec<usize> = prefix.iter().map(|r| value(i, r)).collect();
                let pass = matches!(evaluate(spec, &path, Some(value(i, &x))), Ok(Answer::Zero | Answer::One));
                usize::from(pass) << t
            })));
        }
        let label = self.alloc(n);
        let flag = self.alloc(1)[0];
        {
            let (copies, tests, label) = (copies.clone(), tests.clone(), label.clone());
            ops.push(Op::Xor(Arc::new(move |i| match tests.iter().position(|&t| (i >> t) & 1 == 1) {
                Some(c) => place(value(i, &copies[c]), &label),
                None => 1 << flag,
            })));
        }
        for x in &copies {
            ops.push(Op::Local { targets: x.clone(), mats: self.u_adj.clone(), select: None });
        }
        Ok((ops, flag, label))
    }

    /// Maps `|0⟩|s(x)⟩|0⟩` on (flag, label, junk) to
    /// `√(1−ε)|0⟩|s(x)⟩|0⟩ + √ε|1⟩|ζ′_x⟩` for each corrupted root child `x`.
    fn corruption_op(&mut self, x: &[usize], cflag: usize, clabel: &[usize]) -> Result<Option<Op<'a>>> {
        let Some(c) = self.corruption else {
            return Ok(None);
        };
        let n = self.spec.n();
        let junk = self.alloc(1)[0];
        let mut targets = vec![cflag];
        targets.extend_from_slice(clabel);
        targets.push(junk);
        let dim = 1usize << (n + 2);
        let mut mats = vec![DMatrix::<C64>::identity(dim, dim)];
        let mut which = vec![0usize; self.spec.symbols()];
        for &child in &c.children {
            if child >= self.spec.symbols() {
                return Err(Error::InvalidConfig(format!("corrupted child {child} outside X")));
            }
            let secret = self.spec.secret_at(&[child])?;
            let col = secret << 1;
            let zeta = random_unit_vector(dim / 2, self.rng);
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[col] = C64::new((1.0 - c.eps).sqrt(), 0.0);
            for (j, z) in zeta.iter().enumerate() {
                v[2 * j + 1] += z * c.eps.sqrt();
            }
            which[child] = mats.len();
            mats.push(unitary_with_column(&v, col));
        }
        let x = x.to_vec();
        Ok(Some(Op::Local { targets, mats: Arc::new(mats), select: Some(Arc::new(move |i| which[value(i, &x)])) }))
    }
}

/// Runs FIND literally with `m` copies at every level. `U` must be the
/// identifying unitary of the single-level oracle with one measured row per label.
pub fn find_coherent_tiny<R: Rng>(
    spec: &RecursiveOracleSpec,
    u: &dyn UnitaryAction,
    m: usize,
    corruption: Option<&Corruption>,
    rng: &mut R,
) -> Result<CoherentReport> {
    let n = spec.n();
    if n > 2 || spec.depth > 2 || m == 0 || m > 3 {
        return Err(Error::Size(format!(
            "coherent FIND handles n <= 2, depth <= 2, 1 <= m <= 3 (got {n}, {}, {m})",
            spec.depth
        )));
    }
    if u.n_qubits() != n {
        return Err(Error::InvalidConfig(format!("unitary on {} qubits, symbols of {n} bits", u.n_qubits())));
    }
    if spec.oracle.measurement != crate::oracle1::Measurement::Full {
        return Err(Error::InvalidConfig("coherent FIND measures the full copy register".into()));
    }
    let um = u.to_matrix();
    let mut b = Builder {
        spec,
        u_adj: Arc::new(vec![um.adjoint()]),
        u: Arc::new(vec![um]),
        h: Arc::new(vec![Hadamard { n }.to_matrix()]),
        m,
        corruption,
        rng,
        next: 0,
        probe: None,
    };
    let (ops, flag, label) = b.find(&[])?;
    let qubits = b.next;
    if qubits > COHERENT_QUBIT_BUDGET {
        return Err(Error::Size(format!("{qubits} qubits exceed the budget of {COHERENT_QUBIT_BUDGET}")));
    }
    let probe = b.probe.clone();

    let mut amps = vec![C64::new(0.0, 0.0); 1 << qubits];
    amps[0] = C64::new(1.0, 0.0);
    let mut uncompute_residual = None;
    for (i, op) in ops.iter().enumerate() {
        op.apply(&mut amps);
        if let Some((at, range)) = &probe {
            if i + 1 == *at {
                let mask: usize = range.clone().map(|q| 1 << q).sum();
                let r2: f64 = amps.iter().enumerate().filter(|(j, _)| j & mask != 0).map(|(_, a)| a.norm_sqr()).sum();
                uncompute_residual = Some(r2.sqrt());
            }
        }
    }

    let mut by_label = vec![0.0; 1 << n];
    for (j, a) in amps.iter().enumerate() {
        if (j >> flag) & 1 == 0 {
            by_label[value(j, &label)] += a.norm_sqr();
        }
    }
    let success_prob: f64 = by_label.iter().sum();
    let best = (0..by_label.len()).max_by(|&a, &b| by_label[a].total_cmp(&by_label[b])).unwrap_or(0);
    let answer = if success_prob > 0.5 && spec.contains(best) { evaluate(spec, &[], Some(best))?.bit() } else { None };
    Ok(CoherentReport { qubits, success_prob, answer, uncompute_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rfs::{find_simulate, hadamard_family, FindParams, JunkMode};
    use crate::rng;

    fn spec(depth: usize, seed: u64) -> RecursiveOracleSpec {
        RecursiveOracleSpec::generate(hadamard_family(2, 4, 0).unwrap(), depth, seed).unwrap()
    }

    #[test]
    fn register_helpers() {
        let reg = vec![3, 1];
        assert_eq!(value(0b1010, &reg), 0b11);
        assert_eq!(value(0b1000, &reg), 0b01);
        assert_eq!(place(0b10, &reg), 0b0010);
    }

    #[test]
    fn depth_one_is_exact() {
        for seed in 0..4 {
            let s = spec(1, seed);
            let r = find_coherent_tiny(&s, &Hadamard { n: 2 }, 1, None, &mut rng::stream(0)).unwrap();
            assert!((r.success_prob - 1.0).abs() < 1e-9);
            assert_eq!(r.answer, Some(s.b_root));
            assert_eq!(r.uncompute_residual, None);
        }
    }

    #[test]
    fn depth_two_is_exact_and_uncomputes() {
        let s = spec(2, 3);
        let r = find_coherent_tiny(&s, &Hadamard { n: 2 }, 1, None, &mut rng::stream(0)).unwrap();
        assert_eq!(r.qubits, 12);
        assert!((r.success_prob - 1.0).abs() < 1e-9);
        assert!(r.uncompute_residual.unwrap() < 1e-9);
        assert_eq!(r.answer, Some(s.b_root));
    }

    #[test]
    fn corruption_lowers_success_and_bounds_the_residual() {
        // Find a root whose oracle row has a flipped child so the phase matters.
        let s = (0..50).map(|seed| spec(2, seed)).find(|s| s.secret_at(&[]).unwrap() != 0).unwrap();
        let root = s.secret_at(&[]).unwrap();
        let flipped: Vec<usize> = (0..4).filter(|&x| s.f(root, x).unwrap() == 1).collect();
        let eps = 0.2;
        let c = Corruption { eps, children: vec![flipped[0]] };
        let r = find_coherent_tiny(&s, &Hadamard { n: 2 }, 1, Some(&c), &mut rng::stream(5)).unwrap();
        assert!(r.success_prob < 1.0 - 1e-3);
        assert!(r.uncompute_residual.unwrap() <= (4.0 * eps).sqrt() + 1e-12);
        // One corrupted flipped child out of four: the clean component keeps
        // amplitude 1 − ε/2 on the right label.
        assert!(r.success_prob >= (1.0 - eps / 2.0).powi(2) - 1e-9);

        let sim = find_simulate(
            &s,
            &Hadamard { n: 2 },
            &FindParams {
                delta: 0.2,
                m_override: Some(1),
                junk: JunkMode::Sampled { draws: 100, seed: 1 },
                corruption: Some(c),
            },
        )
        .unwrap();
        assert!((sim.root_success - r.success_prob).abs() < 0.05);
    }

    #[test]
    fn budget_is_enforced() {
        let s = spec(2, 0);
        assert!(matches!(
            find_coherent_tiny(&s, &Hadamard { n: 2 }, 3, None, &mut rng::stream(0)),
            Err(Error::Size(_))
        ));
        let big = RecursiveOracleSpec::generate(hadamard_family(3, 8, 0).unwrap(), 1, 0).unwrap();
        assert!(matches!(
            find_coherent_tiny(&big, &Hadamard { n: 3 }, 1, None, &mut rng::stream(0)),
            Err(Error::Size(_))
        ));
    }
}
