use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::group::GroupSpec;
use super::linalg::unitarity_deviation;
use super::unitary::DenseUnitary;
use crate::{Error, Result, C64};

/// Row `(λ, i, j)` of a Fourier matrix, 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowLabel {
    pub irrep: usize,
    pub i: usize,
    pub j: usize,
}

/// `|G| × |G|` Fourier transform with `entry((λ,i,j), g) = √(d_λ/|G|)·[λ(g)]_{ij}`.
///
/// Rows are ordered by irrep, then `i`, then `j`.
#[derive(Clone, Debug)]
pub struct FourierMatrix {
    pub group: GroupSpec,
    pub entries: DMatrix<C64>,
    pub rows: Vec<RowLabel>,
}

impl FourierMatrix {
    pub fn order(&self) -> usize {
        self.group.order
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.entries)
    }

    /// Row indices `(λ, i, ·)`, i.e. the measured label `(λ, i)` with the
    /// second index left as ancilla.
    pub fn label_rows(&self, irrep: usize, i: usize) -> Result<Vec<usize>> {
        let dim =
            self.group.irreps.get(irrep).map(|ir| ir.dim).ok_or_else(|| Error::Label(format!("no irrep {irrep}")))?;
        if i >= dim {
            return Err(Error::Label(format!("index {i} out of range for irrep {irrep} of dimension {dim}")));
        }
        Ok(self.rows.iter().enumerate().filter(|(_, r)| r.irrep == irrep && r.i == i).map(|(k, _)| k).collect())
    }

    /// Every `(λ, i)` label.
    pub fn labels(&self) -> Vec<(usize, usize)> {
        self.group.irreps.iter().enumerate().flat_map(|(l, ir)| (0..ir.dim).map(move |i| (l, i))).collect()
    }

    /// Qubit unitary when `|G|` is a power of two.
    pub fn as_unitary(&self) -> Result<DenseUnitary> {
        DenseUnitary::new(self.entries.clone(), format!("fourier({})", self.group.name))
    }

    /// Row-major CSV, each cell `re±imj` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.entries.nrows() {
            let cells: Vec<String> = (0..self.entries.ncols()).map(|c| format_cell(self.entries[(r, c)])).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

fn format_cell(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{}{:.16e}j", z.re, sign, z.im.abs())
}

/// Parses one `re±imj` cell written by [`FourierMatrix::to_csv`].
pub fn parse_csv_cell(cell: &str) -> Result<C64> {
    let body = cell.trim().strip_suffix('j').ok_or_else(|| Error::InvalidState(format!("bad cell {cell}")))?;
    // The sign separating the parts is the last '+'/'-' not preceded by 'e'.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && bytes[k - 1] != b'e')
        .ok_or_else(|| Error::InvalidState(format!("bad cell {cell}")))?;
    let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::InvalidState(format!("bad cell {cell}")));
    let re = parse(&body[..split])?;
    let im = parse(&body[split + 1..])?;
    Ok(C64::new(re, if bytes[split] == b'-' { -im } else { im }))
}

/// Fourier matrix of a validated group.
pub fn group_fourier(group: &GroupSpec) -> Result<FourierMatrix> {
    group.validate()?;
    let order = group.order;
    let mut rows = Vec::with_capacity(order);
    for (l, ir) in group.irreps.iter().enumerate() {
        for i in 0..ir.dim {
            for j in 0..ir.dim {
                rows.push(RowLabel { irrep: l, i, j });
            }
        }
    }
    let entries = DMatrix::from_fn(order, order, |r, g| {
        let RowLabel { irrep, i, j } = rows[r];
        let ir = &group.irreps[irrep];
        ir.matrices[g][(i, j)] * (ir.dim as f64 / order as f64).sqrt()
    });
    let f = FourierMatrix { group: group.clone(), entries, rows };
    let dev = f.unitarity_deviation();
    if dev > 1e-10 {
        return Err(Error::InvalidGroupData(format!("Fourier matrix deviates from unitary by {dev:e}")));
    }
    Ok(f)
}

/// Cyclic QFT over Z_N: `entry(j, k) = ω^{jk}/√N`.
pub fn qft_cyclic(order: usize) -> Result<FourierMatrix> {
    if order < 2 {
        return Err(Error::InvalidConfig(format!("cyclic QFT needs N >= 2, got {order}")));
    }
    let scale = (order as f64).sqrt().recip();
    let entries = DMatrix::from_fn(order, order, |j, k| {
        C64::from_polar(scale, 2.0 * PI * ((j * k) % order) as f64 / order as f64)
    });
    let rows = (0..order).map(|l| RowLabel { irrep: l, i: 0, j: 0 }).collect();
    Ok(FourierMatrix { group: GroupSpec::cyclic(order)?, entries, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::simcore::linalg::random_unit_vector;
    use crate::simcore::{CyclicQft, Hadamard, UnitaryAction};

    #[test]
    fn z2_is_hadamard() {
        let h = Hadamard { n: 1 }.to_matrix();
        for f in [group_fourier(&GroupSpec::cyclic(2).unwrap()).unwrap(), qft_cyclic(2).unwrap()] {
            assert!((f.entries.clone() - &h).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn qft4_entry() {
        let f = qft_cyclic(4).unwrap();
        assert!((f.entries[(1, 3)] - C64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn qft_unitary_and_matches_group_route() {
        for n in [2, 3, 5, 8, 16] {
            let f = qft_cyclic(n).unwrap();
            assert!(f.unitarity_deviation() < 1e-12);
            let g = group_fourier(&GroupSpec::cyclic(n).unwrap()).unwrap();
            assert!((f.entries.clone() - &g.entries).iter().all(|z| z.norm() < 1e-12));
        }
        let f = qft_cyclic(16).unwrap();
        let q = CyclicQft::new(4).to_matrix();
        assert!((f.entries - q).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn nonabelian_transforms_are_unitary() {
        for g in [GroupSpec::s3(), GroupSpec::d4(), GroupSpec::q8()] {
            let f = group_fourier(&g).unwrap();
            assert_eq!(f.rows.len(), g.order);
            assert!(f.unitarity_deviation() < 1e-10);
        }
    }

    #[test]
    fn plancherel() {
        let mut r = rng::stream(8);
        for g in [GroupSpec::s3(), GroupSpec::d4(), GroupSpec::q8(), GroupSpec::cyclic(7).unwrap()] {
            let f = group_fourier(&g).unwrap();
            for _ in 0..100 {
                let x = nalgebra::DVector::from_vec(random_unit_vector(g.order, &mut r));
                assert!(((&f.entries * &x).norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn label_rows_for_s3() {
        let f = group_fourier(&GroupSpec::s3()).unwrap();
        assert_eq!(f.label_rows(2, 1).unwrap(), vec![4, 5]);
        assert_eq!(f.label_rows(0, 0).unwrap(), vec![0]);
        assert!(f.label_rows(0, 1).is_err());
        assert_eq!(f.labels().len(), 4);
    }

    #[test]
    fn csv_cells_round_trip() {
        let f = group_fourier(&GroupSpec::q8()).unwrap();
        let csv = f.to_csv();
        for (r, line) in csv.lines().enumerate() {
            for (c, cell) in line.split(',').enumerate() {
                assert_eq!(parse_csv_cell(cell).unwrap(), f.entries[(r, c)]);
            }
        }
        assert!(parse_csv_cell("1.0e0").is_err());
    }
}
