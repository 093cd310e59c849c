//! Space-time dual route: contract the folded circuit sideways.
//!
//! Turning a two-site gate by ninety degrees gives the dual gate
//! `dual[(i d + j), (k d + l)] = U[(l d + j), (k d + i)]`, which maps the
//! segments `(k, l)` of one worldline to the same segments `(i, j)` of the
//! next. Stacking dual gates, the initial-state tensor and the coupling of
//! the two folded copies gives the [`TransferMatrix`] of a two-site cell.
//!
//! In the early-time regime a product of `2t` consecutive cells is rank one,
//! `|r><l|`, and every entanglement quantity follows from the spectrum of
//! `M_l^dagger M_r` at the interfaces between blocks ([`DualSpectrum`],
//! [`DualReport`]).

mod fixed;
mod mps;
mod replica;
mod transfer;

pub use fixed::{
    factorization_check, fixed_point_operators, fixed_points, interface_fixed_points,
    FactorizationCheck, FixedPointMethod, FixedPointPair,
};
pub use mps::{mps_transfer, MpsTransfer};
pub use replica::{replica_identity_check, replica_matrix_element, ReplicaPermutation, ReplicaResiduals, REPLICA_GUARD};
pub use transfer::{build_transfer, ColumnData, TransferMatrix};

use crate::circuit::{GateAssignment, InitialState};
use crate::entanglement::{renyi_from_spectrum, Partition};
use crate::tensor::{clipped_power_sum, hermitian_eigs, psd_sqrt, ComplexTensor};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

/// Relative threshold below which eigenvalues count as zero.
pub const SPECTRUM_CLIP: f64 = 1e-10;

/// Gate turned sideways.
#[derive(Clone, Debug)]
pub struct DualGate {
    matrix: ComplexTensor,
    d: usize,
}

impl DualGate {
    pub fn new(u: &ComplexTensor) -> Result<Self> {
        if u.rank() != 2 || u.rows() != u.cols() {
            return Err(Error::Shape(format!("gate must be square, got {:?}", u.shape())));
        }
        let d = (u.rows() as f64).sqrt().round() as usize;
        if d * d != u.rows() || d == 0 {
            return Err(Error::Shape(format!("gate dimension {} is not d^2", u.rows())));
        }
        let matrix = ComplexTensor::from_fn(vec![d * d, d * d], |ij| {
            let (i, j) = (ij[0] / d, ij[0] % d);
            let (k, l) = (ij[1] / d, ij[1] % d);
            u.at(l * d + j, k * d + i)
        });
        Ok(Self { matrix, d })
    }

    pub fn matrix(&self) -> &ComplexTensor {
        &self.matrix
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `max |dual^dagger dual - 1|`; zero for dual-unitary gates.
    pub fn unitarity_residual(&self) -> f64 {
        self.matrix.unitarity_residual()
    }
}

/// The reshuffled matrix of `u`. Applying it twice returns `u`.
pub fn dual_gate(u: &ComplexTensor) -> Result<ComplexTensor> {
    Ok(DualGate::new(u)?.matrix)
}

/// Spectrum of `M_l^dagger M_r` at one interface.
///
/// It is read off `Y = M_r^{1/2} M_l^dagger M_r^{1/2}`, which shares the
/// nonzero spectrum and is Hermitian whenever `M_l` is. The anti-Hermitian
/// part of `Y` is dropped and its size kept in `anti_hermitian`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualSpectrum {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    pub anti_hermitian: f64,
}

impl DualSpectrum {
    pub fn from_operators(m_l: &ComplexTensor, m_r: &ComplexTensor) -> Result<Self> {
        if m_l.shape() != m_r.shape() || m_l.rank() != 2 || m_l.rows() != m_l.cols() {
            return Err(Error::Shape(format!(
                "fixed-point operators {:?} and {:?}",
                m_l.shape(),
                m_r.shape()
            )));
        }
        let scale = m_r.max_abs().max(1e-300);
        let root = psd_sqrt(&m_r.scale(C64::new(1.0 / scale, 0.0)), SPECTRUM_CLIP)?
            .scale(C64::new(scale.sqrt(), 0.0));
        let y = root.matmul(&m_l.adjoint())?.matmul(&root)?;
        let anti_hermitian = y.hermitian_deviation();
        let values = hermitian_eigs(&y.hermitian_part(), f64::INFINITY)?.values;
        Ok(Self {
            values,
            anti_hermitian,
        })
    }

    /// Spectrum of a pair after fixing its gauge to `tr M_r = 1`,
    /// `<left|right> = 1`; any rescaling `(c r, l / conj c)` gives the same result.
    pub fn from_pair(pair: &FixedPointPair) -> Result<Self> {
        let mut pair = pair.clone();
        fixed::normalise(&mut pair)?;
        let (m_l, m_r) = fixed_point_operators(&pair)?;
        Self::from_operators(&m_l, &m_r)
    }

    /// `tr X^alpha` over the eigenvalues above the clip threshold.
    pub fn trace_power(&self, alpha: f64) -> Result<f64> {
        clipped_power_sum(&self.values, alpha, SPECTRUM_CLIP)
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    fn log_trace_power(&self, alpha: f64) -> Result<f64> {
        Ok(self.trace_power(alpha)?.ln())
    }

    /// `(1 - n)^{-1} ln tr X^n`, von Neumann at `n = 1`.
    fn half_renyi(&self, n: f64) -> Result<f64> {
        let values: Vec<f64> = self
            .values
            .iter()
            .map(|&x| if x > 0.0 { x } else { 0.0 })
            .collect();
        let scale = values.iter().copied().fold(0.0, f64::max);
        let kept: Vec<f64> = values.into_iter().filter(|&x| x > SPECTRUM_CLIP * scale).collect();
        renyi_from_spectrum(&kept, n)
    }
}

fn spectrum(m_l: &ComplexTensor, m_r: &ComplexTensor) -> Result<DualSpectrum> {
    let s = DualSpectrum::from_operators(m_l, m_r)?;
    let tr = s.trace();
    if (tr - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "tr[M_l^dagger M_r] = {tr:.12} instead of 1"
        )));
    }
    Ok(s)
}

/// Logarithmic negativity `2 ln tr X^{1/2}` with `X = M_l^dagger M_r`.
pub fn dual_negativity(m_l: &ComplexTensor, m_r: &ComplexTensor) -> Result<f64> {
    Ok(2.0 * spectrum(m_l, m_r)?.log_trace_power(0.5)?)
}

/// Rényi entropy `2/(1-n) ln tr X^n` of a block bounded by two equivalent
/// interfaces.
pub fn dual_renyi(m_l: &ComplexTensor, m_r: &ComplexTensor, n: f64) -> Result<f64> {
    Ok(2.0 * spectrum(m_l, m_r)?.half_renyi(n)?)
}

/// Rényi mutual information; same closed form as [`dual_renyi`].
pub fn dual_mutual_information(m_l: &ComplexTensor, m_r: &ComplexTensor, n: f64) -> Result<f64> {
    dual_renyi(m_l, m_r, n)
}

/// Negativity moment `E_{2n}` in two forms.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DualMoments {
    /// `2 ln(tr X^{2n} tr X^n)`.
    pub closed_form: f64,
    /// `ln` of the product of the three replica matrix elements, each
    /// evaluated as a trace: `tr X^{2n} * tr X^{2n} * (tr X^n)^2`.
    pub element_product: f64,
}

/// `E_{2n}` at a homogeneous set of interfaces.
pub fn dual_moments(m_l: &ComplexTensor, m_r: &ComplexTensor, n: u32) -> Result<DualMoments> {
    let s = spectrum(m_l, m_r)?;
    moments_at(&s, &s, &s, n)
}

fn moments_at(ca: &DualSpectrum, ab: &DualSpectrum, bc: &DualSpectrum, n: u32) -> Result<DualMoments> {
    if n == 0 {
        return Err(Error::InvalidArgument("moment order must be positive".into()));
    }
    let two_n = 2.0 * n as f64;
    let (a1, a2) = (ca.trace_power(two_n)?, bc.trace_power(two_n)?);
    let b = ab.trace_power(n as f64)?;
    Ok(DualMoments {
        closed_form: a1.ln() + a2.ln() + 2.0 * b.ln(),
        element_product: (a1 * a2 * b * b).ln(),
    })
}

/// Dual spectra at the three interfaces of a tripartition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualReport {
    pub t: usize,
    pub ca: DualSpectrum,
    pub ab: DualSpectrum,
    pub bc: DualSpectrum,
}

impl DualReport {
    /// Fixed points at every interface of `partition` after `t` steps.
    pub fn compute(
        gates: &GateAssignment,
        init: &InitialState,
        t: usize,
        partition: &Partition,
        method: FixedPointMethod,
        tol: f64,
    ) -> Result<Self> {
        partition.check(gates.lattice().l)?;
        let [x_ca, x_ab, x_bc] = partition.interfaces();
        let at = |x| -> Result<DualSpectrum> {
            let pair = interface_fixed_points(gates, init, t, x, method, tol)?;
            DualSpectrum::from_pair(&pair)
        };
        let ab = at(x_ab)?;
        let (ca, bc) = if gates.table().len() == 1 && init.is_translation_invariant() {
            (ab.clone(), ab.clone())
        } else {
            (at(x_ca)?, at(x_bc)?)
        };
        Ok(Self { t, ca, ab, bc })
    }

    pub fn log_negativity(&self) -> Result<f64> {
        self.negativity_alpha(1.0)
    }

    /// `E_alpha = ln(tr X_CA^alpha tr X_BC^alpha (tr X_AB^{alpha/2})^2)`.
    pub fn negativity_alpha(&self, alpha: f64) -> Result<f64> {
        Ok(self.ca.log_trace_power(alpha)?
            + self.bc.log_trace_power(alpha)?
            + 2.0 * self.ab.log_trace_power(alpha / 2.0)?)
    }

    pub fn moment(&self, n: u32) -> Result<DualMoments> {
        moments_at(&self.ca, &self.ab, &self.bc, n)
    }

    pub fn s_a(&self, n: f64) -> Result<f64> {
        Ok(self.ca.half_renyi(n)? + self.ab.half_renyi(n)?)
    }

    pub fn s_b(&self, n: f64) -> Result<f64> {
        Ok(self.ab.half_renyi(n)? + self.bc.half_renyi(n)?)
    }

    pub fn s_ab(&self, n: f64) -> Result<f64> {
        Ok(self.ca.half_renyi(n)? + self.bc.half_renyi(n)?)
    }

    /// `I_{A:B} = 2/(1-n) ln tr X_AB^n`.
    pub fn mutual_information(&self, n: f64) -> Result<f64> {
        Ok(2.0 * self.ab.half_renyi(n)?)
    }

    /// `R_alpha = E_alpha - (1 - alpha) S_AB^(alpha)`.
    pub fn ratio_r(&self, alpha: f64) -> Result<f64> {
        let s_ab = if (alpha - 1.0).abs() < 1e-12 {
            0.0
        } else {
            self.s_ab(alpha)?
        };
        Ok(self.negativity_alpha(alpha)? - (1.0 - alpha) * s_ab)
    }

    /// Largest anti-Hermitian part dropped at any interface.
    pub fn anti_hermitian(&self) -> f64 {
        self.ca.anti_hermitian.max(self.ab.anti_hermitian).max(self.bc.anti_hermitian)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{cnot_gate, dual_unitary_rng, identity_gate, swap_gate};
    use crate::tensor::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn swap_is_self_dual() {
        let s = swap_gate(3);
        let dual = dual_gate(&s).unwrap();
        assert!(dual.max_abs_diff(&s) < 1e-15);
        assert!(DualGate::new(&s).unwrap().unitarity_residual() < 1e-14);
    }

    #[test]
    fn identity_dual_is_rank_one() {
        let d = 2;
        let dual = dual_gate(&identity_gate(d)).unwrap();
        // d |phi><phi| with |phi> = sum_i |ii> / sqrt(d).
        for i in 0..d * d {
            for j in 0..d * d {
                let want = if i % (d + 1) == 0 && j % (d + 1) == 0 { 1.0 } else { 0.0 };
                assert_eq!(dual.at(i, j), c(want));
            }
        }
        let sq = dual.matmul(&dual).unwrap();
        assert!(sq.max_abs_diff(&dual.scale(c(d as f64))) < 1e-15);
    }

    #[test]
    fn dual_is_an_involution() {
        for seed in 0..5 {
            let u = haar_unitary(9, seed).unwrap();
            let back = dual_gate(&dual_gate(&u).unwrap()).unwrap();
            assert!(back.max_abs_diff(&u) < 1e-15);
        }
    }

    #[test]
    fn dual_unitary_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let u = dual_unitary_rng(2, &mut rng).unwrap();
            assert!(DualGate::new(&u).unwrap().unitarity_residual() < 1e-12);
        }
        assert!(DualGate::new(&cnot_gate()).unwrap().unitarity_residual() > 0.5);
        assert!(DualGate::new(&haar_unitary(4, 1).unwrap()).unwrap().unitarity_residual() > 1e-3);
    }

    #[test]
    fn closed_forms_on_simple_operators() {
        let p = ComplexTensor::from_diag(&[c(1.0), c(0.0)]);
        assert!(dual_negativity(&p, &p).unwrap().abs() < 1e-14);
        assert!(dual_renyi(&p, &p, 2.0).unwrap().abs() < 1e-14);
        assert!(dual_moments(&p, &p, 1).unwrap().closed_form.abs() < 1e-14);

        let half = ComplexTensor::identity(2).scale(c(0.5));
        let id = ComplexTensor::identity(2);
        let ln2 = std::f64::consts::LN_2;
        assert!((dual_negativity(&id, &half).unwrap() - ln2).abs() < 1e-14);
        assert!((dual_renyi(&id, &half, 0.5).unwrap() - 2.0 * ln2).abs() < 1e-14);
        let m = dual_moments(&id, &half, 2).unwrap();
        assert!((m.closed_form - m.element_product).abs() < 1e-14);
        assert!((m.closed_form - 2.0 * (0.125f64 * 0.5).ln()).abs() < 1e-13);
    }

    #[test]
    fn half_renyi_is_twice_negativity() {
        let m_r = ComplexTensor::from_diag(&[c(0.6), c(0.3), c(0.1)]);
        let id = ComplexTensor::identity(3);
        let e = dual_negativity(&id, &m_r).unwrap();
        let i = dual_mutual_information(&id, &m_r, 0.5).unwrap();
        assert!((2.0 * e - i).abs() < 1e-13);
    }

    #[test]
    fn rejects_unnormalised_operators() {
        let id = ComplexTensor::identity(2);
        assert!(dual_negativity(&id, &id).is_err());
    }
}
