use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linalg::unitarity_deviation;
use crate::{Error, Result, C64};

const S3_JSON: &str = include_str!("../../data/s3.json");
const D4_JSON: &str = include_str!("../../data/d4.json");
const Q8_JSON: &str = include_str!("../../data/q8.json");

/// Associativity is checked exhaustively only up to this order.
const EXHAUSTIVE_ORDER: usize = 64;

/// Unitary irreducible representation: one `dim × dim` matrix per group element.
#[derive(Clone, Debug, PartialEq)]
pub struct Irrep {
    pub label: String,
    pub dim: usize,
    pub matrices: Vec<DMatrix<C64>>,
}

/// Finite group given by its multiplication table and a full set of irreps.
///
/// `mult_table[g][h]` is the index of `g·h`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSpec {
    pub name: String,
    pub order: usize,
    pub mult_table: Vec<Vec<usize>>,
    pub irreps: Vec<Irrep>,
}

#[derive(Serialize, Deserialize)]
struct IrrepFile {
    label: String,
    dim: usize,
    matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Serialize, Deserialize)]
struct GroupFile {
    name: String,
    order: usize,
    mult_table: Vec<Vec<usize>>,
    irreps: Vec<IrrepFile>,
}

impl GroupSpec {
    /// Parses the group data file format and validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GroupFile = serde_json::from_str(text)?;
        let mut irreps = Vec::with_capacity(raw.irreps.len());
        for ir in raw.irreps {
            let mut matrices = Vec::with_capacity(ir.matrices.len());
            for m in &ir.matrices {
                if m.len() != ir.dim || m.iter().any(|row| row.len() != ir.dim) {
                    return Err(Error::InvalidGroupData(format!("irrep {} has a matrix of the wrong shape", ir.label)));
                }
                matrices.push(DMatrix::from_fn(ir.dim, ir.dim, |r, c| C64::new(m[r][c][0], m[r][c][1])));
            }
            irreps.push(Irrep { label: ir.label, dim: ir.dim, matrices });
        }
        let g = Self { name: raw.name, order: raw.order, mult_table: raw.mult_table, irreps };
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        let raw = GroupFile {
            name: self.name.clone(),
            order: self.order,
            mult_table: self.mult_table.clone(),
            irreps: self
                .irreps
                .iter()
                .map(|ir| IrrepFile {
                    label: ir.label.clone(),
                    dim: ir.dim,
                    matrices: ir
                        .matrices
                        .iter()
                        .map(|m| {
                            (0..ir.dim).map(|r| (0..ir.dim).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("group data always serializes")
    }

    /// Z_N with characters k ↦ ω^{jk}.
    pub fn cyclic(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidGroupData("cyclic group of order 0".into()));
        }
        let mult_table = (0..order).map(|a| (0..order).map(|b| (a + b) % order).collect()).collect();
        let irreps = (0..order)
            .map(|j| Irrep {
                label: format!("chi{j}"),
                dim: 1,
                matrices: (0..order)
                    .map(|k| {
                        let phase = 2.0 * PI * ((j * k) % order) as f64 / order as f64;
                        DMatrix::from_element(1, 1, C64::from_polar(1.0, phase))
                    })
                    .collect(),
            })
            .collect();
        Ok(Self { name: format!("Z{order}"), order, mult_table, irreps })
    }

    /// Z_2^k with characters x ↦ (−1)^{a·x}; elements are bit strings.
    pub fn elementary_abelian(k: usize) -> Result<Self> {
        if k > 12 {
            return Err(Error::Size(format!("Z2^{k} is too large for a dense table")));
        }
        let order = 1usize << k;
        let mult_table = (0..order).map(|a| (0..order).map(|b| a ^ b).collect()).collect();
        let irreps = (0..order)
            .map(|a| Irrep {
                label: format!("chi{a}"),
                dim: 1,
                matrices: (0..order)
                    .map(|x: usize| {
                        let s = if (a & x).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        DMatrix::from_element(1, 1, C64::new(s, 0.0))
                    })
                    .collect(),
            })
            .collect();
        Ok(Self { name: format!("Z2^{k}"), order, mult_table, irreps })
    }

    pub fn s3() -> Self {
        Self::from_json(S3_JSON).expect("embedded S3 data is valid")
    }

    pub fn d4() -> Self {
        Self::from_json(D4_JSON).expect("embedded D4 data is valid")
    }

    pub fn q8() -> Self {
        Self::from_json(Q8_JSON).expect("embedded Q8 data is valid")
    }

    /// Embedded groups by name: `S3`, `D4`, `Q8`, `Z<N>`, `Z2^<k>`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "S3" => Ok(Self::s3()),
            "D4" => Ok(Self::d4()),
            "Q8" => Ok(Self::q8()),
            _ => {
                if let Some(k) = name.strip_prefix("Z2^") {
                    let k = k.parse().map_err(|_| Error::InvalidGroupData(format!("bad group name {name}")))?;
                    Self::elementary_abelian(k)
                } else if let Some(n) = name.strip_prefix('Z') {
                    let n = n.parse().map_err(|_| Error::InvalidGroupData(format!("bad group name {name}")))?;
                    Self::cyclic(n)
                } else {
                    Err(Error::InvalidGroupData(format!("unknown group {name}")))
                }
            }
        }
    }

    pub fn identity_element(&self) -> Option<usize> {
        (0..self.order).find(|&e| (0..self.order).all(|g| self.mult_table[e][g] == g && self.mult_table[g][e] == g))
    }

    /// Checks the group axioms, irrep unitarity, the homomorphism property and
    /// Σ d_λ² = |G|.
    pub fn validate(&self) -> Result<()> {
        let n = self.order;
        let bad = |msg: String| Err(Error::InvalidGroupData(format!("{}: {msg}", self.name)));
        if self.mult_table.len() != n || self.mult_table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return bad("multiplication table has the wrong shape".into());
        }
        let Some(e) = self.identity_element() else {
            return bad("no identity element".into());
        };
        for g in 0..n {
            if !(0..n).any(|h| self.mult_table[g][h] == e && self.mult_table[h][g] == e) {
                return bad(format!("element {g} has no inverse"));
            }
        }
        if n <= EXHAUSTIVE_ORDER {
            for a in 0..n {
                for b in 0..n {
                    let ab = self.mult_table[a][b];
                    for c in 0..n {
                        if self.mult_table[ab][c] != self.mult_table[a][self.mult_table[b][c]] {
                            return bad(format!("({a}·{b})·{c} != {a}·({b}·{c})"));
                        }
                    }
                }
            }
        }
        let burnside: usize = self.irreps.iter().map(|ir| ir.dim * ir.dim).sum();
        if burnside != n {
            return bad(format!("sum of squared irrep dimensions is {burnside}, not {n}"));
        }
        for ir in &self.irreps {
            if ir.matrices.len() != n {
                return bad(format!("irrep {} has {} matrices", ir.label, ir.matrices.len()));
            }
            for (g, m) in ir.matrices.iter().enumerate() {
                if m.nrows() != ir.dim || m.ncols() != ir.dim {
                    return bad(format!("irrep {} matrix {g} has the wrong shape", ir.label));
                }
                let dev = unitarity_deviation(m);
                if dev > 1e-12 {
                    return bad(format!("irrep {} matrix {g} deviates from unitary by {dev:e}", ir.label));
                }
            }
            if n <= EXHAUSTIVE_ORDER {
                for a in 0..n {
                    for b in 0..n {
                        let lhs = &ir.matrices[a] * &ir.matrices[b];
                        let diff =
                            (lhs - &ir.matrices[self.mult_table[a][b]]).iter().map(|z| z.norm()).fold(0.0, f64::max);
                        if diff > 1e-10 {
                            return bad(format!("irrep {} is not a homomorphism at ({a}, {b})", ir.label));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_groups_validate() {
        for g in [GroupSpec::s3(), GroupSpec::d4(), GroupSpec::q8()] {
            g.validate().unwrap();
            assert_eq!(g.identity_element(), Some(0));
        }
        GroupSpec::cyclic(12).unwrap().validate().unwrap();
        GroupSpec::elementary_abelian(3).unwrap().validate().unwrap();
    }

    #[test]
    fn dimensions() {
        let dims = |g: &GroupSpec| g.irreps.iter().map(|i| i.dim).collect::<Vec<_>>();
        assert_eq!(dims(&GroupSpec::s3()), vec![1, 1, 2]);
        assert_eq!(dims(&GroupSpec::d4()), vec![1, 1, 1, 1, 2]);
        assert_eq!(dims(&GroupSpec::q8()), vec![1, 1, 1, 1, 2]);
    }

    #[test]
    fn s3_and_q8_are_nonabelian() {
        for g in [GroupSpec::s3(), GroupSpec::q8(), GroupSpec::d4()] {
            let n = g.order;
            assert!((0..n).any(|a| (0..n).any(|b| g.mult_table[a][b] != g.mult_table[b][a])));
        }
    }

    #[test]
    fn json_round_trip() {
        let g = GroupSpec::d4();
        assert_eq!(GroupSpec::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn rejects_broken_data() {
        let mut g = GroupSpec::s3();
        g.irreps.pop();
        assert!(matches!(g.validate(), Err(Error::InvalidGroupData(_))));

        let mut g = GroupSpec::s3();
        g.irreps[2].matrices[1][(0, 0)] *= 2.0;
        assert!(g.validate().is_err());

        let mut g = GroupSpec::q8();
        g.mult_table[2][3] = 2;
        assert!(g.validate().is_err());
    }

    #[test]
    fn by_name() {
        assert_eq!(GroupSpec::by_name("Z5").unwrap().order, 5);
        assert_eq!(GroupSpec::by_name("Z2^3").unwrap().order, 8);
        assert!(GroupSpec::by_name("A5").is_err());
    }
}
