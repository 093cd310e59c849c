use super::ComplexTensor;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `dim x dim` matrix of i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary from `rng`: QR of a Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary_rng<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexTensor> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let qr = ginibre(dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(ComplexTensor::from_dmatrix(&q))
}

/// Deterministic Haar unitary for `seed`.
pub fn haar_unitary(dim: usize, seed: u64) -> Result<ComplexTensor> {
    haar_unitary_rng(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Uniformly random unit vector in `C^dim`.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_for_several_dims() {
        for dim in [1, 2, 4, 9, 16] {
            for seed in 0..5 {
                let u = haar_unitary(dim, seed).unwrap();
                assert!(u.unitarity_residual() < 1e-12, "dim {dim}");
            }
        }
        let u = haar_unitary(4, 42).unwrap();
        assert!(u.unitarity_residual() < 1e-12);
        let one = haar_unitary(1, 5).unwrap();
        assert!((one.at(0, 0).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(haar_unitary(4, 7).unwrap(), haar_unitary(4, 7).unwrap());
        assert_ne!(haar_unitary(4, 7).unwrap(), haar_unitary(4, 8).unwrap());
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(matches!(haar_unitary(0, 1), Err(Error::ZeroDimension)));
    }

    #[test]
    fn phase_fix_gives_flat_trace_statistics() {
        // E|tr U|^2 = 1 for Haar unitaries; an unfixed QR biases it upward.
        let n = 4000;
        let mean: f64 = (0..n)
            .map(|s| haar_unitary(3, s).unwrap().trace().unwrap().norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.1, "mean |tr U|^2 = {mean}");
    }
}
