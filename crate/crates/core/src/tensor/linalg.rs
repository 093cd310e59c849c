use super::ComplexTensor;
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, SymmetricEigen};

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexTensor,
}

impl HermitianEigen {
    /// `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> ComplexTensor {
        let n = self.values.len();
        let v = &self.vectors;
        ComplexTensor::from_fn(vec![n, n], |ij| {
            (0..n)
                .map(|k| v.at(ij[0], k) * self.values[k] * v.at(ij[1], k).conj())
                .sum()
        })
    }
}

const ROTATION_SEED: u64 = 0x5eed;

/// Diagonalises `m` after checking `max |M - M^dagger| <= tol`. The input is
/// symmetrised before the solve.
pub fn hermitian_eigs(m: &ComplexTensor, tol: f64) -> Result<HermitianEigen> {
    let deviation = m.hermitian_deviation();
    if deviation.is_nan() || deviation > tol {
        return Err(Error::NotHermitian { deviation, tol });
    }
    let n = m.rows();
    let h = m.hermitian_part().to_dmatrix()?;
    let mut eig = SymmetricEigen::new(h.clone());
    if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
        // The solver can hit 0/0 on exactly structured input such as
        // stabilizer projectors; a fixed unitary rotation breaks the structure.
        let q = super::haar_unitary(n, ROTATION_SEED)?.to_dmatrix()?;
        let hq = q.adjoint() * &h * &q;
        let hq = (&hq + hq.adjoint()).map(|z| z * 0.5);
        eig = SymmetricEigen::new(hq);
        if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: f64::NAN,
            });
        }
        eig.eigenvectors = q * eig.eigenvectors;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexTensor::from_fn(vec![n, n], |ij| eig.eigenvectors[(ij[0], order[ij[1]])]);
    Ok(HermitianEigen { values, vectors })
}

/// `sum |lambda|^alpha` over eigenvalues with `|lambda| > floor`.
pub fn spectrum_power_sum(values: &[f64], alpha: f64, floor: f64) -> f64 {
    values
        .iter()
        .filter(|x| x.abs() > floor)
        .map(|x| x.abs().powf(alpha))
        .sum()
}

/// `tr M^alpha` for a positive semidefinite `M`, via its eigenvalues.
///
/// `clip` is relative to the largest eigenvalue magnitude: eigenvalues within
/// `clip * max|lambda|` of zero count as zero, anything more negative is an
/// error.
pub fn frac_power_trace(m: &ComplexTensor, alpha: f64, clip: f64) -> Result<f64> {
    let eig = hermitian_eigs(m, 1e-8 * m.max_abs().max(1.0))?;
    clipped_power_sum(&eig.values, alpha, clip)
}

pub(crate) fn clipped_power_sum(values: &[f64], alpha: f64, clip: f64) -> Result<f64> {
    let scale = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let threshold = clip * scale;
    let mut sum = 0.0;
    for &x in values {
        if x < -threshold {
            return Err(Error::NegativeSpectrum {
                value: x,
                clip: threshold,
            });
        }
        if x > threshold {
            sum += x.powf(alpha);
        }
    }
    Ok(sum)
}

/// Principal square root of a Hermitian positive semidefinite matrix.
/// Eigenvalues within `clip * max|lambda|` of zero are set to zero.
pub fn psd_sqrt(m: &ComplexTensor, clip: f64) -> Result<ComplexTensor> {
    let mut eig = hermitian_eigs(m, 1e-8 * m.max_abs().max(1.0))?;
    let scale = eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    for x in eig.values.iter_mut() {
        if *x < -clip * scale {
            return Err(Error::NegativeSpectrum {
                value: *x,
                clip: clip * scale,
            });
        }
        *x = if *x > clip * scale { x.sqrt() } else { 0.0 };
    }
    Ok(eig.reconstruct())
}

/// Triangular factor `R` (at most `cols x cols`) of the rows `range` of a
/// tall matrix delivered in blocks: `fill(r0, block)` writes rows
/// `r0..r0 + block.nrows()`. Singular values of `R` are those of the rows,
/// with absolute accuracy for the small ones, unlike square roots of
/// Gram-matrix eigenvalues; memory stays at one block.
pub(crate) fn tall_r_factor<F>(range: std::ops::Range<usize>, cols: usize, block: usize, mut fill: F) -> DMatrix<C64>
where
    F: FnMut(usize, &mut DMatrix<C64>),
{
    let block = block.max(cols).max(1);
    let mut r = DMatrix::<C64>::zeros(0, cols);
    let mut r0 = range.start;
    while r0 < range.end {
        let b = block.min(range.end - r0);
        let mut chunk = DMatrix::<C64>::zeros(b, cols);
        fill(r0, &mut chunk);
        r = stack_r(&r, &chunk);
        r0 += b;
    }
    r
}

/// `R` factor of `[top; bottom]`.
pub(crate) fn stack_r(top: &DMatrix<C64>, bottom: &DMatrix<C64>) -> DMatrix<C64> {
    let cols = bottom.ncols();
    let mut m = DMatrix::<C64>::zeros(top.nrows() + bottom.nrows(), cols);
    m.rows_mut(0, top.nrows()).copy_from(top);
    m.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    if m.nrows() <= cols {
        return m;
    }
    m.qr().r()
}

/// Singular values, descending.
pub(crate) fn sorted_singular_values(m: DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.singular_values().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Eigenvalues of a general square matrix (Schur form), unsorted.
pub(crate) fn general_eigenvalues(m: &ComplexTensor) -> Result<Vec<C64>> {
    let dm = m.to_dmatrix()?;
    let values = dm.schur().eigenvalues().ok_or(Error::NoConvergence {
        iterations: 0,
        residual: f64::NAN,
    })?;
    Ok(values.iter().copied().collect())
}
