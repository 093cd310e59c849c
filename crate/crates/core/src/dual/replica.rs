//! Replica matrix elements between copies of the fixed points.
//!
//! `2n` copies of a folded fixed point live on `4n` sheets ordered
//! `(ket_1, bra_1, ket_2, bra_2, ...)`. A sheet permutation `sigma` acts as
//! `P_sigma[a, s] = prod_i delta(a_i, s_{sigma(i)})`, so that
//! `P_sigma P_tau = P_{tau o sigma}` and `P_sigma^dagger = P_{sigma^-1}`.

use super::{fixed_point_operators, DualSpectrum, FixedPointPair};
use crate::tensor::ComplexTensor;
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

/// Largest number of terms a replica matrix element may sum.
pub const REPLICA_GUARD: usize = 1 << 26;

/// The two sheet permutations of the `n`-th replica trick. Entries are
/// one-based: `pi1[i - 1] = pi1(i)`.
///
/// `pi1` cycles the ket sheets backwards (`1 -> 4n-1`, `2k+1 -> 2k-1`) and
/// fixes the bra sheets; `pi2` does the same to the bra sheets and fixes the
/// kets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicaPermutation {
    pub n: u32,
    pub pi1: Vec<usize>,
    pub pi2: Vec<usize>,
}

impl ReplicaPermutation {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("replica index must be positive".into()));
        }
        let sheets = 4 * n as usize;
        let pi1 = (1..=sheets)
            .map(|i| match i {
                1 => sheets - 1,
                i if i % 2 == 1 => i - 2,
                i => i,
            })
            .collect();
        let pi2 = (1..=sheets)
            .map(|i| match i {
                2 => sheets,
                i if i % 2 == 0 => i - 2,
                i => i,
            })
            .collect();
        Ok(Self { n, pi1, pi2 })
    }

    pub fn sheets(&self) -> usize {
        self.pi1.len()
    }

    /// The matrix of `P_sigma` on `dim^sheets` entries, for small cases.
    pub fn matrix(sigma: &[usize], dim: usize) -> Result<ComplexTensor> {
        let total = checked_pow(dim, sigma.len())?;
        if total > 1 << 12 {
            return Err(Error::SizeGuard {
                what: "permutation matrix rows",
                required: total,
                limit: 1 << 12,
            });
        }
        let digits = |mut x: usize| -> Vec<usize> {
            let mut v = vec![0; sigma.len()];
            for k in (0..sigma.len()).rev() {
                v[k] = x % dim;
                x /= dim;
            }
            v
        };
        Ok(ComplexTensor::from_fn(vec![total, total], |ij| {
            let (a, s) = (digits(ij[0]), digits(ij[1]));
            let hit = (0..sigma.len()).all(|i| a[i] == s[sigma[i] - 1]);
            C64::new(if hit { 1.0 } else { 0.0 }, 0.0)
        }))
    }
}

fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    base.checked_pow(exp as u32).ok_or(Error::SizeGuard {
        what: "replica terms",
        required: usize::MAX,
        limit: REPLICA_GUARD,
    })
}

/// `sigma^-1`, one-based.
pub(crate) fn inverse(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; sigma.len()];
    for (i, &s) in sigma.iter().enumerate() {
        inv[s - 1] = i + 1;
    }
    inv
}

/// `(tau o sigma)(i) = tau(sigma(i))`, one-based.
fn compose(tau: &[usize], sigma: &[usize]) -> Vec<usize> {
    sigma.iter().map(|&s| tau[s - 1]).collect()
}

/// `<l^{(x)m}| P_sigma |r^{(x)m}>` with `m = sigma.len() / 2` copies, summed
/// term by term.
pub fn replica_matrix_element(m_l: &ComplexTensor, m_r: &ComplexTensor, sigma: &[usize]) -> Result<C64> {
    let dim = m_r.rows();
    let sheets = sigma.len();
    if sheets % 2 == 1 || m_l.shape() != m_r.shape() {
        return Err(Error::Shape("replica sheets come in ket/bra pairs".into()));
    }
    let total = checked_pow(dim, sheets)?;
    if total > REPLICA_GUARD {
        return Err(Error::SizeGuard {
            what: "replica terms",
            required: total,
            limit: REPLICA_GUARD,
        });
    }
    let l_conj: Vec<C64> = m_l.data().iter().map(|z| z.conj()).collect();
    let r = m_r.data();
    let zero_based: Vec<usize> = sigma.iter().map(|s| s - 1).collect();
    // Sum over s of prod_k r[s_{2k}, s_{2k+1}] conj(l)[s_{sigma(2k)}, s_{sigma(2k+1)}].
    let chunk = dim.pow(2);
    let outer = total / chunk;
    let partial = crate::par::map_range(crate::par::Exec::default(), chunk, |first| {
        let mut s = vec![0usize; sheets];
        s[0] = first / dim;
        s[1] = first % dim;
        let mut acc = C64::new(0.0, 0.0);
        for rest in 0..outer {
            let mut x = rest;
            for k in (2..sheets).rev() {
                s[k] = x % dim;
                x /= dim;
            }
            let mut term = C64::new(1.0, 0.0);
            for k in 0..sheets / 2 {
                term *= r[s[2 * k] * dim + s[2 * k + 1]]
                    * l_conj[s[zero_based[2 * k]] * dim + s[zero_based[2 * k + 1]]];
            }
            acc += term;
        }
        acc
    });
    Ok(partial.into_iter().sum())
}

/// Differences between the three replica matrix elements and their trace
/// forms.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ReplicaResiduals {
    /// `|<l|P_pi1^dagger|r> - tr X^{2n}|`.
    pub pi1: f64,
    /// `|<l|P_pi2|r> - tr X^{2n}|`.
    pub pi2: f64,
    /// `|<l|P_pi1 P_pi2^dagger|r> - (tr X^n)^2|`.
    pub mixed: f64,
}

impl ReplicaResiduals {
    pub fn max(&self) -> f64 {
        self.pi1.max(self.pi2).max(self.mixed)
    }
}

/// Evaluates the three replica matrix elements of order `n` term by term
/// and compares them with traces of powers of `M_l^dagger M_r`.
pub fn replica_identity_check(pair: &FixedPointPair, n: u32) -> Result<ReplicaResiduals> {
    let perm = ReplicaPermutation::new(n)?;
    let (m_l, m_r) = fixed_point_operators(pair)?;
    let x = m_l.adjoint().matmul(&m_r)?;
    let power = |k: u32| -> Result<C64> {
        let mut p = ComplexTensor::identity(x.rows());
        for _ in 0..k {
            p = p.matmul(&x)?;
        }
        p.trace()
    };
    let (t2n, tn) = (power(2 * n)?, power(n)?);
    let e1 = replica_matrix_element(&m_l, &m_r, &inverse(&perm.pi1))?;
    let e2 = replica_matrix_element(&m_l, &m_r, &perm.pi2)?;
    let mixed = compose(&inverse(&perm.pi2), &perm.pi1);
    let e3 = replica_matrix_element(&m_l, &m_r, &mixed)?;
    // The spectral route must agree with the plain matrix powers too.
    let s = DualSpectrum::from_operators(&m_l, &m_r)?;
    let spectral = (s.trace_power(2.0 * n as f64)? - t2n.re).abs();
    Ok(ReplicaResiduals {
        pi1: (e1 - t2n).norm().max(spectral),
        pi2: (e2 - t2n).norm(),
        mixed: (e3 - tn * tn).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateAssignment, GateFamily, InitialState, LatticeSpec};
    use crate::dual::{fixed_points, FixedPointMethod, TransferMatrix};
    use proptest::prelude::*;

    #[test]
    fn first_replica_tables() {
        let p = ReplicaPermutation::new(1).unwrap();
        assert_eq!(p.pi1, vec![3, 2, 1, 4]);
        assert_eq!(p.pi2, vec![1, 4, 3, 2]);
        let q = ReplicaPermutation::new(2).unwrap();
        assert_eq!(q.pi1, vec![7, 2, 1, 4, 3, 6, 5, 8]);
        assert_eq!(q.pi2, vec![1, 8, 3, 2, 5, 4, 7, 6]);
    }

    #[test]
    fn permutation_matrices_are_unitary_and_compose() {
        let p = ReplicaPermutation::new(1).unwrap();
        let a = ReplicaPermutation::matrix(&p.pi1, 3).unwrap();
        let b = ReplicaPermutation::matrix(&p.pi2, 3).unwrap();
        let id = ComplexTensor::identity(81);
        assert_eq!(a.adjoint().matmul(&a).unwrap().max_abs_diff(&id), 0.0);
        let ab = a.matmul(&b).unwrap();
        let composed = ReplicaPermutation::matrix(&compose(&p.pi2, &p.pi1), 3).unwrap();
        assert_eq!(ab.max_abs_diff(&composed), 0.0);
        let inv = ReplicaPermutation::matrix(&inverse(&[2, 3, 4, 1]), 2).unwrap();
        let fwd = ReplicaPermutation::matrix(&[2, 3, 4, 1], 2).unwrap();
        assert_eq!(inv.max_abs_diff(&fwd.adjoint()), 0.0);
    }

    fn haar_pair(t: usize, seed: u64) -> FixedPointPair {
        let lat = LatticeSpec::new(2, 6).unwrap();
        let g = GateAssignment::from_family(lat, t, GateFamily::Haar, seed, true, &[]).unwrap();
        let init = InitialState::basis(lat, 0);
        let cell = TransferMatrix::column(&g, &init, t, 0).unwrap();
        fixed_points(&cell, FixedPointMethod::MatrixPower, 1e-9).unwrap()
    }

    #[test]
    fn first_replica_identities_hold() {
        let r = replica_identity_check(&haar_pair(1, 7), 1).unwrap();
        assert!(r.max() < 1e-9, "{r:?}");
    }

    #[test]
    fn rank_one_fixed_points_are_exact() {
        let v = ComplexTensor::from_diag(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        for sigma in [vec![3, 2, 1, 4], vec![1, 4, 3, 2], vec![3, 4, 1, 2]] {
            let e = replica_matrix_element(&v, &v, &sigma).unwrap();
            assert!((e - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn guard_refuses_large_sums() {
        let big = ComplexTensor::identity(64);
        let p = ReplicaPermutation::new(2).unwrap();
        assert!(matches!(
            replica_matrix_element(&big, &big, &p.pi2),
            Err(Error::SizeGuard { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn element_matches_dense_permutation(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut m = || ComplexTensor::from_fn(vec![2, 2], |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let (ml, mr) = (m(), m());
            let sigma = [2usize, 4, 1, 3];
            let p = ReplicaPermutation::matrix(&sigma, 2).unwrap();
            // Two vectorised copies: digits ordered (ket1, bra1, ket2, bra2).
            let lvec: Vec<C64> = (0..16).map(|i| ml.data()[i >> 2] * ml.data()[i & 3]).collect();
            let rvec: Vec<C64> = (0..16).map(|i| mr.data()[i >> 2] * mr.data()[i & 3]).collect();
            let pr = p.apply(&rvec).unwrap();
            let want: C64 = lvec.iter().zip(&pr).map(|(a, b)| a.conj() * b).sum();
            let got = replica_matrix_element(&ml, &mr, &sigma).unwrap();
            prop_assert!((got - want).norm() < 1e-12);
        }
    }
}
