use super::ComplexTensor;
use crate::par::{self, Exec};
use crate::{Error, Result, C64};

/// A square linear map known only through its action.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[C64]) -> Vec<C64>;
    fn apply_adjoint(&self, v: &[C64]) -> Vec<C64>;
}

/// A dense matrix viewed as a [`LinearOperator`].
#[derive(Clone, Debug)]
pub struct DenseOperator(pub ComplexTensor);

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.rows()
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.0.apply(v).expect("dimension checked by caller")
    }

    fn apply_adjoint(&self, v: &[C64]) -> Vec<C64> {
        let n = self.0.rows();
        let m = self.0.data();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(&m[i * n..(i + 1) * n]) {
                *o += a.conj() * vi;
            }
        }
        out
    }
}

/// `<a|b>`, antilinear in `a`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Scales `v` to unit norm and returns the old norm.
pub fn normalize(v: &mut [C64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
    n
}

/// Dense matrix of `op`, one column per basis vector.
pub fn materialize(op: &dyn LinearOperator, exec: Exec) -> ComplexTensor {
    let n = op.dim();
    let cols = par::map_range(exec, n, |j| {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        op.apply(&e)
    });
    ComplexTensor::from_fn(vec![n, n], |ij| cols[ij[1]][ij[0]])
}

/// Leading eigenvalue with right and left eigenvectors, `<left|right> = 1`.
#[derive(Clone, Debug)]
pub struct LeadingPair {
    pub eigenvalue: C64,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    pub iterations: usize,
}

fn start_vector(n: usize) -> Vec<C64> {
    // Fixed, dense, irregular start: overlaps every eigenvector generically.
    let mut v: Vec<C64> = (0..n)
        .map(|i| {
            let x = (i as f64 + 1.0) * 0.618_033_988_749_895;
            C64::new(1.0 + (x.fract() - 0.5), 0.3 * (2.7 * x).sin())
        })
        .collect();
    normalize(&mut v);
    v
}

fn power_iterate(
    n: usize,
    step: impl Fn(&[C64]) -> Vec<C64>,
    tol: f64,
    max_iter: usize,
) -> Result<(C64, Vec<C64>, usize)> {
    let mut v = start_vector(n);
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let w = step(&v);
        let mu = dot(&v, &w);
        residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - mu * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            return Ok((mu, v, it));
        }
        v = w;
        if normalize(&mut v) == 0.0 {
            // Nilpotent on the start vector: the leading eigenvalue is zero.
            return Err(Error::NoConvergence {
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Power iteration on `op` and its adjoint.
///
/// Convergence is declared when `|T v - mu v| <= tol` for unit `v`. The left
/// vector is rescaled so that `<left|right> = 1`.
pub fn leading_pair(op: &dyn LinearOperator, tol: f64, max_iter: usize) -> Result<LeadingPair> {
    let n = op.dim();
    let (mu, right, it_r) = power_iterate(n, |v| op.apply(v), tol, max_iter)?;
    let (_, mut left, it_l) = power_iterate(n, |v| op.apply_adjoint(v), tol, max_iter)?;
    let overlap = dot(&left, &right);
    if overlap.norm() < 1e-14 {
        return Err(Error::DegenerateFixedPoints(overlap.norm()));
    }
    let c = (C64::new(1.0, 0.0) / overlap).conj();
    left.iter_mut().for_each(|z| *z *= c);
    Ok(LeadingPair {
        eigenvalue: mu,
        right,
        left,
        iterations: it_r.max(it_l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::haar_unitary;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_operator() {
        let op = DenseOperator(ComplexTensor::from_diag(&[c(1.0, 0.0), c(0.5, 0.0)]));
        let p = leading_pair(&op, 1e-12, 1000).unwrap();
        assert!((p.eigenvalue - c(1.0, 0.0)).norm() < 1e-11);
        assert!(p.right[1].norm() < 1e-11);
        assert!((dot(&p.left, &p.right) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn materialize_round_trip() {
        let u = haar_unitary(6, 1).unwrap();
        let op = DenseOperator(u.clone());
        for exec in [Exec::Sequential, Exec::Parallel] {
            assert!(materialize(&op, exec).max_abs_diff(&u) < 1e-15);
        }
        let adj = DenseOperator(u.adjoint());
        let v: Vec<C64> = (0..6).map(|i| c(i as f64, 1.0)).collect();
        let a = op.apply_adjoint(&v);
        let b = adj.apply(&v);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-14));
    }

    #[test]
    fn linearity_on_probes() {
        let op = DenseOperator(haar_unitary(5, 2).unwrap());
        let u: Vec<C64> = (0..5).map(|i| c(i as f64, -1.0)).collect();
        let v: Vec<C64> = (0..5).map(|i| c(0.5, i as f64)).collect();
        let (al, be) = (c(0.3, 1.1), c(-2.0, 0.4));
        let mix: Vec<C64> = u.iter().zip(&v).map(|(x, y)| al * x + be * y).collect();
        let lhs = op.apply(&mix);
        let (mu, mv) = (op.apply(&u), op.apply(&v));
        for i in 0..5 {
            assert!((lhs[i] - al * mu[i] - be * mv[i]).norm() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn rank_one_factors_recovered(
            a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..8),
            seed in any::<u64>(),
        ) {
            let n = a.len();
            let a: Vec<C64> = a.into_iter().map(|(x, y)| c(x, y)).collect();
            prop_assume!(norm(&a) > 0.1);
            let u = haar_unitary(n, seed).unwrap();
            let mut b: Vec<C64> = (0..n).map(|i| u.at(i, 0)).collect();
            let ov = dot(&b, &a);
            prop_assume!(ov.norm() > 0.05);
            let s = (c(1.0, 0.0) / ov).conj();
            b.iter_mut().for_each(|z| *z *= s);
            let op = DenseOperator(ComplexTensor::outer(&a, &b));
            let p = leading_pair(&op, 1e-12, 100).unwrap();
            prop_assert!((p.eigenvalue - c(1.0, 0.0)).norm() < 1e-10);
            // Gauge-free comparison: |r><l| must equal |a><b|.
            let got = ComplexTensor::outer(&p.right, &p.left);
            let want = ComplexTensor::outer(&a, &b);
            prop_assert!(got.max_abs_diff(&want) < 1e-10 * want.max_abs().max(1.0));
        }
    }
}
