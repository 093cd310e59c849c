use super::TransferMatrix;
use crate::circuit::{GateAssignment, InitialState};
use crate::tensor::{dot, leading_pair, norm, ComplexTensor, LinearOperator};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

/// How fixed points are extracted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointMethod {
    /// Columns of the rank-one product of `2t` transfer matrices. Exact for
    /// product initial states.
    #[default]
    MatrixPower,
    /// Leading eigenvectors of a single cell. Needs translation invariance.
    Power,
}

/// Right and left fixed points at one cut, normalised to `<l|r> = 1` and
/// `tr M_r = 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPointPair {
    pub t: usize,
    /// Cell index of the cut.
    pub cut: usize,
    /// Dimension of one copy; vectors have `copy_dim^2` entries.
    pub copy_dim: usize,
    pub method: FixedPointMethod,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    /// Relative deviation from rank one of the matrix-power products.
    pub rank_one_residual: Option<f64>,
}

const MAX_POWER_ITERATIONS: usize = 100_000;

/// Deterministic dense probe vectors.
fn probe(n: usize, k: usize) -> Vec<C64> {
    (0..n)
        .map(|i| {
            let x = (i as f64 + 1.0) * (0.754_877_666 + 0.1 * k as f64);
            C64::new(1.0 + 0.5 * (7.1 * x).sin(), 0.5 * (3.3 * x + k as f64).cos())
        })
        .collect()
}

/// `|v - u <u|v>/<u|u>| / |v|`: how far `v` is from the line through `u`.
fn off_line(u: &[C64], v: &[C64]) -> f64 {
    let c = dot(u, v) / dot(u, u);
    let diff: f64 = u
        .iter()
        .zip(v)
        .map(|(a, b)| (b - c * a).norm_sqr())
        .sum::<f64>()
        .sqrt();
    diff / norm(v).max(1e-300)
}

/// Rescales to `tr M_r = 1` and `<l|r> = 1`.
pub(crate) fn normalise(pair: &mut FixedPointPair) -> Result<()> {
    let d = pair.copy_dim;
    let tr: C64 = (0..d).map(|k| pair.right[k * d + k]).sum();
    if tr.norm() < 1e-300 {
        return Err(Error::DegenerateFixedPoints(tr.norm()));
    }
    pair.right.iter_mut().for_each(|z| *z /= tr);
    let overlap = dot(&pair.left, &pair.right);
    if overlap.norm() < 1e-14 * norm(&pair.left) * norm(&pair.right) {
        return Err(Error::DegenerateFixedPoints(overlap.norm()));
    }
    let c = (C64::new(1.0, 0.0) / overlap).conj();
    pair.left.iter_mut().for_each(|z| *z *= c);
    Ok(())
}

/// Fixed points of a translation-invariant transfer matrix `cell`.
///
/// With [`FixedPointMethod::MatrixPower`] the right fixed point is
/// `T^k p` and the left one `(T^dagger)^k q` for probes `p`, `q` and
/// `k = max(2t, 1)`; a second probe checks that `T^k` is rank one to within `tol`. With
/// [`FixedPointMethod::Power`] they are the leading eigenvectors, whose
/// eigenvalue must be one to within `tol`.
pub fn fixed_points(cell: &TransferMatrix, method: FixedPointMethod, tol: f64) -> Result<FixedPointPair> {
    let k = (2 * cell.t()).max(1);
    let span = cell.power(k);
    match method {
        FixedPointMethod::MatrixPower => from_spans(&span, &span, cell.first_cell(), method, tol),
        FixedPointMethod::Power => from_cells(cell, cell, cell.first_cell(), tol),
    }
}

/// Fixed points at the cut in front of cell `cut` of a circuit truncated to
/// `t` steps. The right one comes from the `2t` cells before the cut, the
/// left one from the `2t` cells after it.
pub fn interface_fixed_points(
    gates: &GateAssignment,
    init: &InitialState,
    t: usize,
    cut: usize,
    method: FixedPointMethod,
    tol: f64,
) -> Result<FixedPointPair> {
    let l = gates.lattice().l;
    let cut = cut % l;
    match method {
        FixedPointMethod::MatrixPower => {
            let k = (2 * t).max(1);
            let before = TransferMatrix::span(gates, init, t, (cut + l * k - k) % l, k)?;
            let after = TransferMatrix::span(gates, init, t, cut, k)?;
            from_spans(&before, &after, cut, method, tol)
        }
        FixedPointMethod::Power => {
            let before = TransferMatrix::column(gates, init, t, (cut + l - 1) % l)?;
            let after = TransferMatrix::column(gates, init, t, cut)?;
            from_cells(&before, &after, cut, tol)
        }
    }
}

fn from_spans(
    before: &TransferMatrix,
    after: &TransferMatrix,
    cut: usize,
    method: FixedPointMethod,
    tol: f64,
) -> Result<FixedPointPair> {
    let n = before.dim();
    let right = before.apply(&probe(n, 0));
    let left = after.apply_adjoint(&probe(n, 1));
    let residual = off_line(&right, &before.apply(&probe(n, 2)))
        .max(off_line(&left, &after.apply_adjoint(&probe(n, 3))));
    if residual > tol {
        return Err(Error::NotRankOne { residual, tol });
    }
    let mut pair = FixedPointPair {
        t: before.t(),
        cut,
        copy_dim: before.copy_dim(),
        method,
        right,
        left,
        rank_one_residual: Some(residual),
    };
    normalise(&mut pair)?;
    Ok(pair)
}

fn from_cells(before: &TransferMatrix, after: &TransferMatrix, cut: usize, tol: f64) -> Result<FixedPointPair> {
    let r = leading_pair(before, tol, MAX_POWER_ITERATIONS)?;
    let l = leading_pair(after, tol, MAX_POWER_ITERATIONS)?;
    for mu in [r.eigenvalue, l.eigenvalue] {
        if (mu - 1.0).norm() > tol.max(1e-8) {
            return Err(Error::InvalidArgument(format!(
                "leading transfer eigenvalue {mu:.6} is not one"
            )));
        }
    }
    let mut pair = FixedPointPair {
        t: before.t(),
        cut,
        copy_dim: before.copy_dim(),
        method: FixedPointMethod::Power,
        right: r.right,
        left: l.left,
        rank_one_residual: None,
    };
    normalise(&mut pair)?;
    Ok(pair)
}

impl FixedPointPair {
    /// `|T r - r|` and `|T^dagger l - l|`, relative to the vector norms.
    pub fn defect(&self, cell_before: &TransferMatrix, cell_after: &TransferMatrix) -> (f64, f64) {
        let rel = |a: &[C64], b: &[C64]| {
            a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt() / norm(b).max(1e-300)
        };
        (
            rel(&cell_before.apply(&self.right), &self.right),
            rel(&cell_after.apply_adjoint(&self.left), &self.left),
        )
    }

    /// `(c r, l / conj(c))`: the same fixed points in another gauge.
    pub fn rescaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.right.iter_mut().for_each(|z| *z *= c);
        let inv = (C64::new(1.0, 0.0) / c).conj();
        out.left.iter_mut().for_each(|z| *z *= inv);
        out
    }
}

/// `(M_l, M_r)`: the fixed points reshaped to `copy_dim x copy_dim`, ket
/// index as row.
pub fn fixed_point_operators(pair: &FixedPointPair) -> Result<(ComplexTensor, ComplexTensor)> {
    let d = pair.copy_dim;
    Ok((
        ComplexTensor::matrix(d, d, pair.left.clone())?,
        ComplexTensor::matrix(d, d, pair.right.clone())?,
    ))
}

/// Distance of a transfer-matrix product from `|right><left|`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FactorizationCheck {
    /// Frobenius norm of `T - |right><left|`.
    pub residual: f64,
    /// `residual / |T|_F`.
    pub relative: f64,
    /// `lambda^{cells - 2t - 1}` for an MPS with transfer gap `lambda`.
    pub predicted_scale: Option<f64>,
}

/// Column-by-column Frobenius distance between `product` and
/// `|right><left|`. `gap` is the MPS transfer gap, if any.
pub fn factorization_check(
    product: &TransferMatrix,
    right: &[C64],
    left: &[C64],
    gap: Option<f64>,
) -> Result<FactorizationCheck> {
    let n = product.dim();
    if right.len() != n || left.len() != n {
        return Err(Error::Shape(format!(
            "fixed points of length {}/{} for an operator of dimension {n}",
            right.len(),
            left.len()
        )));
    }
    let cols = crate::par::map_range(crate::par::Exec::default(), n, |j| {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        let col = product.apply(&e);
        let lj = left[j].conj();
        let diff: f64 = col.iter().zip(right).map(|(c, r)| (c - r * lj).norm_sqr()).sum();
        (diff, norm(&col).powi(2))
    });
    let residual = cols.iter().map(|c| c.0).sum::<f64>().sqrt();
    let total = cols.iter().map(|c| c.1).sum::<f64>().sqrt();
    let excess = product.cell_count() as i64 - 2 * product.t() as i64 - 1;
    Ok(FactorizationCheck {
        residual,
        relative: residual / total.max(1e-300),
        predicted_scale: gap.map(|g| g.powi(excess as i32)),
    })
}
