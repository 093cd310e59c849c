//! Dense complex tensors in row-major layout.
//!
//! [`ComplexTensor`] is the single container used for gates, reduced density
//! matrices, dense transfer matrices and fixed-point operators. Indices are
//! explicit: a `shape` of extents plus a flat row-major `data` vector. Matrix
//! helpers treat a rank-2 tensor as `rows x cols`.

mod haar;
mod linalg;
mod operator;

pub use haar::{ginibre, haar_unitary, haar_unitary_rng, random_unit_vector};
pub use linalg::{
    frac_power_trace, hermitian_eigs, psd_sqrt, spectrum_power_sum, HermitianEigen,
};
pub(crate) use linalg::{
    clipped_power_sum, general_eigenvalues, sorted_singular_values, stack_r, tall_r_factor,
};
pub use operator::{
    dot, leading_pair, materialize, norm, normalize, DenseOperator, LeadingPair, LinearOperator,
};

use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct ComplexTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

#[derive(Deserialize)]
struct RawTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl TryFrom<RawTensor> for ComplexTensor {
    type Error = Error;
    fn try_from(raw: RawTensor) -> Result<Self> {
        ComplexTensor::new(raw.shape, raw.data)
    }
}

fn volume(shape: &[usize]) -> usize {
    shape.iter().product()
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

impl ComplexTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::ZeroDimension);
        }
        if volume(&shape) != data.len() {
            return Err(Error::Shape(format!(
                "shape {:?} holds {} entries, got {}",
                shape,
                volume(&shape),
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        assert!(shape.iter().all(|&e| e > 0), "zero extent in {shape:?}");
        let n = volume(&shape);
        Self {
            shape,
            data: vec![ZERO; n],
        }
    }

    /// Builds a tensor from a function of the multi-index.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let mut t = Self::zeros(shape);
        let mut idx = vec![0usize; t.shape.len()];
        for slot in t.data.iter_mut() {
            *slot = f(&idx);
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < t.shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        t
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![ONE; n])
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut t = Self::zeros(vec![n, n]);
        for (i, &x) in diag.iter().enumerate() {
            t.data[i * n + i] = x;
        }
        t
    }

    /// Column vector `v` as an `n x 1` matrix.
    pub fn column(v: &[C64]) -> Self {
        Self {
            shape: vec![v.len(), 1],
            data: v.to_vec(),
        }
    }

    /// `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let mut t = Self::zeros(vec![a.len(), b.len()]);
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                t.data[i * b.len() + j] = x * y.conj();
            }
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C64) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.shape.len());
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &e)| {
                assert!(i < e, "index {i} out of range {e}");
                acc * e + i
            })
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    /// Reorders axes: output axis `k` is input axis `axes[k]`.
    pub fn permute(&self, axes: &[usize]) -> Result<Self> {
        let r = self.shape.len();
        let mut seen = vec![false; r];
        if axes.len() != r || axes.iter().any(|&a| a >= r || std::mem::replace(&mut seen[a], true))
        {
            return Err(Error::Shape(format!(
                "{axes:?} is not a permutation of {r} axes"
            )));
        }
        let in_strides = strides(&self.shape);
        let new_shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let src_strides: Vec<usize> = axes.iter().map(|&a| in_strides[a]).collect();
        let mut out = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; r];
        let mut src = 0usize;
        for _ in 0..self.data.len() {
            out.push(self.data[src]);
            for k in (0..r).rev() {
                idx[k] += 1;
                src += src_strides[k];
                if idx[k] < new_shape[k] {
                    break;
                }
                src -= src_strides[k] * new_shape[k];
                idx[k] = 0;
            }
        }
        Ok(Self {
            shape: new_shape,
            data: out,
        })
    }

    fn require_matrix(&self) -> Result<(usize, usize)> {
        match self.shape[..] {
            [r, c] => Ok((r, c)),
            _ => Err(Error::Shape(format!(
                "expected a matrix, got shape {:?}",
                self.shape
            ))),
        }
    }

    fn require_square(&self) -> Result<usize> {
        let (r, c) = self.require_matrix()?;
        if r != c {
            return Err(Error::Shape(format!("expected a square matrix, got {r}x{c}")));
        }
        Ok(r)
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    /// Matrix entry `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.shape[1] + j]
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let (n, k) = self.require_matrix()?;
        let (k2, m) = other.require_matrix()?;
        if k != k2 {
            return Err(Error::Shape(format!(
                "cannot multiply {n}x{k} by {k2}x{m}"
            )));
        }
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let row = &mut out[i * m..(i + 1) * m];
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[p * m..(p + 1) * m];
                for (o, &b) in row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        Ok(Self {
            shape: vec![n, m],
            data: out,
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let (n, k) = self.require_matrix()?;
        if v.len() != k {
            return Err(Error::Shape(format!("{n}x{k} matrix applied to length {}", v.len())));
        }
        Ok((0..n)
            .map(|i| {
                self.data[i * k..(i + 1) * k]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn transpose(&self) -> Self {
        let (r, c) = self.require_matrix().expect("transpose of non-matrix");
        let mut out = vec![ZERO; r * c];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = self.data[i * c + j];
            }
        }
        Self {
            shape: vec![c, r],
            data: out,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn trace(&self) -> Result<C64> {
        let n = self.require_square()?;
        Ok((0..n).map(|i| self.data[i * n + i]).sum())
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.require_matrix()?;
        let (c, d) = other.require_matrix()?;
        let mut out = Self::zeros(vec![a * c, b * d]);
        let cols = b * d;
        for i in 0..a {
            for j in 0..b {
                let x = self.data[i * b + j];
                for k in 0..c {
                    for l in 0..d {
                        out.data[(i * c + k) * cols + j * d + l] = x * other.data[k * d + l];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other|` entrywise; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M - M^dagger|`.
    pub fn hermitian_deviation(&self) -> f64 {
        match self.require_square() {
            Ok(n) => {
                let mut dev: f64 = 0.0;
                for i in 0..n {
                    for j in i..n {
                        dev = dev.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
                    }
                }
                dev
            }
            Err(_) => f64::INFINITY,
        }
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.require_square().expect("hermitian part of non-square");
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
            }
        }
        out
    }

    /// `max |U^dagger U - 1|`; infinite for non-square input.
    pub fn unitarity_residual(&self) -> f64 {
        let Ok(n) = self.require_square() else {
            return f64::INFINITY;
        };
        let prod = self.adjoint().matmul(self).expect("square");
        prod.max_abs_diff(&Self::identity(n))
    }

    pub fn to_dmatrix(&self) -> Result<DMatrix<C64>> {
        let (r, c) = self.require_matrix()?;
        Ok(DMatrix::from_row_slice(r, c, &self.data))
    }

    pub fn from_dmatrix(m: &DMatrix<C64>) -> Self {
        let (r, c) = m.shape();
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                data.push(m[(i, j)]);
            }
        }
        Self {
            shape: vec![r, c],
            data,
        }
    }
}
