use super::LatticeSpec;
use crate::dual::mps_transfer;
use crate::tensor::{random_unit_vector, ComplexTensor};
use crate::{Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Initial state of the quench.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialState {
    /// One unit vector per site, or a single vector used on every site.
    Product { psi: Vec<Vec<C64>> },
    /// Two-site MPS. `w[j]` has shape `(chi, chi, d, d)`, indexed
    /// `[mu_left, mu_right, s_odd, s_even]`, and covers sites `(2j+1, 2j+2)`.
    /// A single tensor is used for every cell.
    Mps { chi: usize, w: Vec<ComplexTensor> },
}

impl InitialState {
    pub fn uniform_product(psi: Vec<C64>) -> Self {
        InitialState::Product { psi: vec![psi] }
    }

    /// `|s s ... s>`.
    pub fn basis(lattice: LatticeSpec, s: usize) -> Self {
        let mut psi = vec![C64::new(0.0, 0.0); lattice.d];
        psi[s] = C64::new(1.0, 0.0);
        InitialState::Product { psi: vec![psi] }
    }

    /// Independent random unit vector on every site.
    pub fn random_product(lattice: LatticeSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        InitialState::Product {
            psi: (0..lattice.sites())
                .map(|_| random_unit_vector(lattice.d, &mut rng))
                .collect(),
        }
    }

    /// MPS with each cell tensor rescaled so its transfer matrix has leading
    /// eigenvalue one.
    pub fn mps(chi: usize, d: usize, w: Vec<ComplexTensor>) -> Result<Self> {
        let w = w
            .into_iter()
            .map(|t| {
                if t.shape() != [chi, chi, d, d] {
                    return Err(Error::Shape(format!(
                        "MPS tensor must be {:?}, got {:?}",
                        [chi, chi, d, d],
                        t.shape()
                    )));
                }
                let tau = mps_transfer(&t)?;
                Ok(tau.normalized_tensor)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(InitialState::Mps { chi, w })
    }

    /// Qubit GHZ state as a bond-dimension-2 MPS.
    pub fn ghz() -> Self {
        let w = ComplexTensor::from_fn(vec![2, 2, 2, 2], |i| {
            if i[0] == i[1] && i[1] == i[2] && i[2] == i[3] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        InitialState::Mps { chi: 2, w: vec![w] }
    }

    /// Translation-invariant MPS near the product state `|psi psi ...>`:
    /// `W = psi psi (x) diag(1, 0, ...) + epsilon * noise`.
    pub fn perturbed_mps(d: usize, chi: usize, epsilon: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_unit_vector(d, &mut rng);
        let w = ComplexTensor::from_fn(vec![chi, chi, d, d], |i| {
            let base = if i[0] == 0 && i[1] == 0 {
                psi[i[2]] * psi[i[3]]
            } else {
                C64::new(0.0, 0.0)
            };
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            base + C64::new(re, im) * epsilon
        });
        Self::mps(chi, d, vec![w])
    }

    pub fn bond_dim(&self) -> usize {
        match self {
            InitialState::Product { .. } => 1,
            InitialState::Mps { chi, .. } => *chi,
        }
    }

    /// Same tensor in every cell.
    pub fn is_translation_invariant(&self) -> bool {
        match self {
            InitialState::Product { psi } => psi.len() == 1 || psi.windows(3).all(|w| w[0] == w[2]),
            InitialState::Mps { w, .. } => w.len() == 1,
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, InitialState::Product { .. })
    }

    pub fn validate(&self, lattice: LatticeSpec) -> Result<()> {
        let d = lattice.d;
        match self {
            InitialState::Product { psi } => {
                if psi.len() != 1 && psi.len() != lattice.sites() {
                    return Err(Error::Shape(format!(
                        "product state needs 1 or {} site vectors, got {}",
                        lattice.sites(),
                        psi.len()
                    )));
                }
                for (k, v) in psi.iter().enumerate() {
                    if v.len() != d {
                        return Err(Error::Shape(format!(
                            "site vector {k} has length {}, expected {d}",
                            v.len()
                        )));
                    }
                    let n = crate::tensor::norm(v);
                    if (n - 1.0).abs() > 1e-10 {
                        return Err(Error::InvalidArgument(format!(
                            "site vector {k} has norm {n}, expected 1"
                        )));
                    }
                }
            }
            InitialState::Mps { chi, w } => {
                if w.len() != 1 && w.len() != lattice.l {
                    return Err(Error::Shape(format!(
                        "MPS needs 1 or {} cell tensors, got {}",
                        lattice.l,
                        w.len()
                    )));
                }
                for t in w {
                    if t.shape() != [*chi, *chi, d, d] {
                        return Err(Error::Shape(format!(
                            "MPS tensor must be {:?}, got {:?}",
                            [*chi, *chi, d, d],
                            t.shape()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Site vector of a product state.
    pub fn site_vector(&self, site: usize) -> &[C64] {
        match self {
            InitialState::Product { psi } => &psi[if psi.len() == 1 { 0 } else { site }],
            InitialState::Mps { .. } => panic!("site_vector on an MPS"),
        }
    }

    /// Cell tensor covering sites `(2j+1, 2j+2)`, shape `(chi, chi, d, d)`.
    /// Product states give `chi = 1` and `psi_{2j+1} (x) psi_{2j+2}`.
    pub fn cell_tensor(&self, j: usize, d: usize) -> ComplexTensor {
        match self {
            InitialState::Product { psi } => {
                let n = if psi.len() == 1 { 1 } else { psi.len() };
                let a = &psi[(2 * j + 1) % n];
                let b = &psi[(2 * j + 2) % n];
                ComplexTensor::from_fn(vec![1, 1, d, d], |i| a[i[2]] * b[i[3]])
            }
            InitialState::Mps { w, .. } => w[if w.len() == 1 { 0 } else { j }].clone(),
        }
    }
}
