//! Exact tripartite spectra of an MPS ring without building the state vector.
//!
//! Each two-site cell tensor `W^{s1 s2}_{mu nu}` is split into a site tensor
//! `A^{s1}_{mu, (s2, nu)}` on the odd site and a copy tensor on the even site,
//! so every cut between cells carries a bond of dimension `D = d chi`. With
//! `K_S(s)` the product of site matrices over a block `S`:
//!
//! * `G_S = sum_s K_S(s)^* (x) K_S(s)`, reshaped to `(alpha beta), (alpha' beta')`;
//! * `H_S` is the same object for the complement, transposed and conjugated;
//! * the nonzero spectrum of `rho_S` is that of `G^{1/2} H G^{1/2}`;
//! * the spectrum of `rho_AB^{T_A}` is that of `P^{1/2} Z P^{1/2}` with
//!   `P = G_A^T (x) G_B` and `Z` built from the `C` block, a `D^4`-dimensional
//!   problem independent of the block lengths.

use super::TripartiteSpectra;
use crate::circuit::{InitialState, LatticeSpec};
use crate::tensor::{hermitian_eigs, psd_sqrt, ComplexTensor};
use crate::{Error, Result, C64};

struct SiteTensor {
    din: usize,
    dout: usize,
    /// `[s][in][out]`.
    data: Vec<C64>,
}

/// MPS ring split into single-site tensors.
pub struct MpsRing {
    lattice: LatticeSpec,
    bond: usize,
    sites: Vec<SiteTensor>,
}

const CLIP: f64 = 1e-9;

impl MpsRing {
    pub fn new(lattice: LatticeSpec, init: &InitialState) -> Result<Self> {
        init.validate(lattice)?;
        let (d, chi, n) = (lattice.d, init.bond_dim(), lattice.sites());
        let big = d * chi;
        let sites = (0..n)
            .map(|i| {
                if i % 2 == 1 {
                    let w = init.cell_tensor((i - 1) / 2, d);
                    let mut data = vec![C64::new(0.0, 0.0); d * chi * big];
                    for s in 0..d {
                        for mu in 0..chi {
                            for s2 in 0..d {
                                for nu in 0..chi {
                                    data[(s * chi + mu) * big + s2 * chi + nu] =
                                        w.get(&[mu, nu, s, s2]);
                                }
                            }
                        }
                    }
                    SiteTensor {
                        din: chi,
                        dout: big,
                        data,
                    }
                } else {
                    let mut data = vec![C64::new(0.0, 0.0); d * big * chi];
                    for s in 0..d {
                        for nu in 0..chi {
                            data[(s * big + s * chi + nu) * chi + nu] = C64::new(1.0, 0.0);
                        }
                    }
                    SiteTensor {
                        din: big,
                        dout: chi,
                        data,
                    }
                }
            })
            .collect();
        Ok(Self {
            lattice,
            bond: big,
            sites,
        })
    }

    /// `E[(a a'), (b b')] = sum_s conj(A^s_{ab}) A^s_{a'b'}`.
    fn site_transfer(&self, i: usize) -> ComplexTensor {
        let t = &self.sites[i];
        let (di, dout) = (t.din, t.dout);
        let d = self.lattice.d;
        ComplexTensor::from_fn(vec![di * di, dout * dout], |ij| {
            let (a, a2) = (ij[0] / di, ij[0] % di);
            let (b, b2) = (ij[1] / dout, ij[1] % dout);
            (0..d)
                .map(|s| {
                    t.data[(s * di + a) * dout + b].conj() * t.data[(s * di + a2) * dout + b2]
                })
                .sum()
        })
    }

    /// Doubled transfer of the block of `cells` cells starting at cell `start`
    /// (first site `2 start`).
    fn block_transfer(&self, start: usize, cells: usize) -> Result<ComplexTensor> {
        let n = self.lattice.sites();
        let mut r = self.site_transfer((2 * start) % n);
        for k in 1..2 * cells {
            r = r.matmul(&self.site_transfer((2 * start + k) % n))?;
        }
        Ok(r)
    }

    /// `(alpha alpha'), (beta beta')` to `(alpha beta), (alpha' beta')`.
    fn gram(&self, r: &ComplexTensor) -> ComplexTensor {
        let dd = self.bond;
        ComplexTensor::from_fn(vec![dd * dd, dd * dd], |ij| {
            let (a, b) = (ij[0] / dd, ij[0] % dd);
            let (a2, b2) = (ij[1] / dd, ij[1] % dd);
            r.at(a * dd + a2, b * dd + b2)
        })
    }

    /// `H[(alpha beta), (alpha' beta')] = conj(R[(beta beta'), (alpha alpha')])`.
    fn complement(&self, r: &ComplexTensor) -> ComplexTensor {
        let dd = self.bond;
        ComplexTensor::from_fn(vec![dd * dd, dd * dd], |ij| {
            let (a, b) = (ij[0] / dd, ij[0] % dd);
            let (a2, b2) = (ij[1] / dd, ij[1] % dd);
            r.at(b * dd + b2, a * dd + a2).conj()
        })
    }

    fn block_spectrum(&self, g: &ComplexTensor, h: &ComplexTensor) -> Result<(Vec<f64>, f64)> {
        let root = psd_sqrt(g, CLIP)?;
        let m = root.matmul(h)?.matmul(&root)?.hermitian_part();
        let values = hermitian_eigs(&m, 1e-8 * m.max_abs().max(1e-300))?.values;
        let norm = g.matmul(h)?.trace()?.re;
        Ok((values, norm))
    }

    /// Spectra of `rho_A`, `rho_B`, `rho_C`, `rho_AB` and `rho_AB^{T_A}`.
    pub fn spectra(&self, partition: &crate::entanglement::Partition) -> Result<TripartiteSpectra> {
        partition.check(self.lattice.l)?;
        let [x_ca, x_ab, x_bc] = partition.interfaces();
        let ra = self.block_transfer(x_ca, partition.l_a)?;
        let rb = self.block_transfer(x_ab, partition.l_b)?;
        let rc = self.block_transfer(x_bc, partition.l_c)?;
        let rbc = rb.matmul(&rc)?;
        let rca = rc.matmul(&ra)?;
        let rab = ra.matmul(&rb)?;

        let (a, norm) = self.block_spectrum(&self.gram(&ra), &self.complement(&rbc))?;
        if !(norm > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let scaled = |(v, _): (Vec<f64>, f64)| v.into_iter().map(|x| x / norm).collect::<Vec<_>>();
        let a = a.into_iter().map(|x| x / norm).collect();
        let b = scaled(self.block_spectrum(&self.gram(&rb), &self.complement(&rca))?);
        let c = scaled(self.block_spectrum(&self.gram(&rc), &self.complement(&rab))?);
        let ab = scaled(self.block_spectrum(&self.gram(&rab), &self.complement(&rc))?);

        // Partial transpose on A.
        let dd = self.bond;
        let d2 = dd * dd;
        let (ga, gb) = (self.gram(&ra), self.gram(&rb));
        let p = ga.transpose().kron(&gb)?;
        // cmat[(g a), (g' a')] = conj(R_C[(g g'), (a a')]).
        let cmat = |g: usize, a: usize, g2: usize, a2: usize| rc.at(g * dd + g2, a * dd + a2).conj();
        let z = ComplexTensor::from_fn(vec![d2 * d2, d2 * d2], |ij| {
            let r = [ij[0] / (dd * d2), (ij[0] / d2) % dd, (ij[0] / dd) % dd, ij[0] % dd];
            let c = [ij[1] / (dd * d2), (ij[1] / d2) % dd, (ij[1] / dd) % dd, ij[1] % dd];
            if r[2] != c[1] || r[1] != c[2] {
                return C64::new(0.0, 0.0);
            }
            cmat(r[3], c[0], c[3], r[0])
        });
        let root = psd_sqrt(&p, CLIP)?;
        let m = root.matmul(&z)?.matmul(&root)?.hermitian_part();
        let pt = hermitian_eigs(&m, 1e-8 * m.max_abs().max(1e-300))?
            .values
            .into_iter()
            .map(|x| x / norm)
            .collect();
        Ok(TripartiteSpectra {
            a,
            b,
            c,
            ab: Some(ab),
            pt: Some(pt),
            floor: crate::entanglement::EIG_FLOOR,
        })
    }
}
