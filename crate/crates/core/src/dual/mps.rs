use crate::tensor::{general_eigenvalues, leading_pair, ComplexTensor, DenseOperator};
use crate::{Error, Result, C64};

/// Transfer matrix of a two-site MPS tensor,
/// `tau[(mu2 nu2), (mu1 nu1)] = sum_{s1 s2} W[mu1, mu2, s1, s2] conj(W[nu1, nu2, s1, s2])`.
#[derive(Clone, Debug)]
pub struct MpsTransfer {
    /// Built from `normalized_tensor`, so its leading eigenvalue is one.
    pub tau: ComplexTensor,
    /// Leading eigenvalue magnitude of the transfer matrix of the input.
    pub leading: f64,
    /// `|lambda_2| / |lambda_1|`; zero for `chi = 1`.
    pub gap: f64,
    pub injective: bool,
    /// Input divided by `sqrt(leading)`.
    pub normalized_tensor: ComplexTensor,
    /// Leading right and left eigenvectors of `tau`, `<left|right> = 1`.
    /// Only computed for injective tensors.
    pub fixed_points: Option<(Vec<C64>, Vec<C64>)>,
}

const INJECTIVITY_MARGIN: f64 = 1e-9;

fn transfer(w: &ComplexTensor) -> ComplexTensor {
    let [chi, _, d, _] = [w.shape()[0], w.shape()[1], w.shape()[2], w.shape()[3]];
    ComplexTensor::from_fn(vec![chi * chi, chi * chi], |ij| {
        let (m2, n2) = (ij[0] / chi, ij[0] % chi);
        let (m1, n1) = (ij[1] / chi, ij[1] % chi);
        let mut acc = C64::new(0.0, 0.0);
        for s1 in 0..d {
            for s2 in 0..d {
                acc += w.get(&[m1, m2, s1, s2]) * w.get(&[n1, n2, s1, s2]).conj();
            }
        }
        acc
    })
}

pub fn mps_transfer(w: &ComplexTensor) -> Result<MpsTransfer> {
    let s = w.shape();
    if s.len() != 4 || s[0] != s[1] || s[2] != s[3] {
        return Err(Error::Shape(format!("MPS tensor must be (chi, chi, d, d), got {s:?}")));
    }
    let mut mags: Vec<f64> = general_eigenvalues(&transfer(w))?.iter().map(|z| z.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let leading = mags[0];
    if !(leading > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let gap = mags.get(1).map_or(0.0, |x| x / leading);
    let normalized_tensor = w.scale(C64::new(1.0 / leading.sqrt(), 0.0));
    let tau = transfer(&normalized_tensor);
    let injective = gap < 1.0 - INJECTIVITY_MARGIN;
    let fixed_points = if injective {
        let p = leading_pair(&DenseOperator(tau.clone()), 1e-13, 1_000_000)?;
        Some((p.right, p.left))
    } else {
        None
    };
    Ok(MpsTransfer {
        tau,
        leading,
        gap,
        injective,
        normalized_tensor,
        fixed_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::InitialState;

    #[test]
    fn product_tensor() {
        let w = ComplexTensor::from_fn(vec![1, 1, 2, 2], |i| C64::new([1.0, 2.0][i[2]] * [1.0, 0.5][i[3]], 0.0));
        let m = mps_transfer(&w).unwrap();
        assert!((m.leading - 6.25).abs() < 1e-12);
        assert_eq!(m.gap, 0.0);
        assert!(m.injective);
        assert!((m.tau.at(0, 0) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn ghz_is_not_injective() {
        let InitialState::Mps { w, .. } = InitialState::ghz() else {
            unreachable!()
        };
        let m = mps_transfer(&w[0]).unwrap();
        assert!((m.gap - 1.0).abs() < 1e-12);
        assert!(!m.injective);
        assert!(m.fixed_points.is_none());
    }

    #[test]
    fn perturbed_product_is_gapped() {
        let InitialState::Mps { w, .. } = InitialState::perturbed_mps(2, 2, 0.3, 5).unwrap() else {
            unreachable!()
        };
        let m = mps_transfer(&w[0]).unwrap();
        assert!((m.leading - 1.0).abs() < 1e-10);
        assert!(m.gap > 0.0 && m.gap < 1.0);
        let (r, l) = m.fixed_points.unwrap();
        let tr = crate::tensor::dot(&l, &r);
        assert!((tr - 1.0).norm() < 1e-10);
    }
}
