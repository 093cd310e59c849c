//! Brute-force entanglement oracle.
//!
//! Reduced density matrices come straight from the state vector; every
//! quantity is a function of a Hermitian spectrum. Eigenvalues with
//! magnitude below [`EIG_FLOOR`] are discarded before powers are taken.
//!
//! For tripartitions `A | B | C` of the ring the entropy of `AB` is read off
//! `rho_C` (the global state is pure), so `rho_AB` itself is only needed for
//! the partial transpose.
//!
//! `renyi_entropy` accepts `alpha = 1` as the von Neumann limit.

pub mod ring;

pub use ring::MpsRing;

use crate::circuit::PureState;
use crate::par::{self, Exec};
use crate::tensor::{hermitian_eigs, sorted_singular_values, spectrum_power_sum, stack_r, tall_r_factor, ComplexTensor};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

/// Eigenvalues below this magnitude count as zero.
pub const EIG_FLOOR: f64 = 1e-12;

/// Schmidt weights below this (singular values below `1e-15`) are rounding
/// noise.
pub const SCHMIDT_FLOOR: f64 = 1e-30;

/// Largest reduced density matrix (rows) [`reduce`] builds.
pub const MAX_REDUCED_DIM: usize = 4096;

/// Tripartition of the ring into adjacent blocks `A`, `B`, `C` of `2 L_S`
/// sites each. `A` starts at site `2 * offset`; `C` wraps around.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub l_a: usize,
    pub l_b: usize,
    pub l_c: usize,
    #[serde(default)]
    pub offset: usize,
}

impl Partition {
    pub fn new(l_a: usize, l_b: usize, l_c: usize) -> Result<Self> {
        if l_a == 0 || l_b == 0 || l_c == 0 {
            return Err(Error::InvalidArgument(format!(
                "partition ({l_a}, {l_b}, {l_c}) has an empty block"
            )));
        }
        Ok(Self {
            l_a,
            l_b,
            l_c,
            offset: 0,
        })
    }

    pub fn with_offset(mut self, offset: usize) -> Self {
        self.offset = offset % self.l();
        self
    }

    /// Half the number of sites of the ring.
    pub fn l(&self) -> usize {
        self.l_a + self.l_b + self.l_c
    }

    pub fn check(&self, l: usize) -> Result<()> {
        if self.l_a == 0 || self.l_b == 0 || self.l_c == 0 {
            return Err(Error::InvalidArgument("partition has an empty block".into()));
        }
        if self.l() != l {
            return Err(Error::InvalidArgument(format!(
                "L_A + L_B + L_C = {} but L = {l}",
                self.l()
            )));
        }
        Ok(())
    }

    pub fn min_len(&self) -> usize {
        self.l_a.min(self.l_b).min(self.l_c)
    }

    /// Early-time regime: every block at least `2 t` cells long.
    pub fn in_regime(&self, t: usize) -> bool {
        self.min_len() >= 2 * t
    }

    /// Cells `j` of the three interfaces `[x_CA, x_AB, x_BC]`; the cut at
    /// cell `j` lies between sites `2j - 1` and `2j`.
    pub fn interfaces(&self) -> [usize; 3] {
        let l = self.l();
        [
            self.offset % l,
            (self.offset + self.l_a) % l,
            (self.offset + self.l_a + self.l_b) % l,
        ]
    }

    fn block(&self, start_cell: usize, cells: usize) -> Vec<usize> {
        let n = 2 * self.l();
        (0..2 * cells).map(|k| (2 * start_cell + k) % n).collect()
    }

    pub fn sites_a(&self) -> Vec<usize> {
        self.block(self.offset, self.l_a)
    }

    pub fn sites_b(&self) -> Vec<usize> {
        self.block(self.offset + self.l_a, self.l_b)
    }

    pub fn sites_c(&self) -> Vec<usize> {
        self.block(self.offset + self.l_a + self.l_b, self.l_c)
    }

    pub fn sites_ab(&self) -> Vec<usize> {
        self.block(self.offset, self.l_a + self.l_b)
    }
}

/// Reduced state on an ordered list of sites; row index digits follow the
/// order of `sites`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexTensor,
    sites: Vec<usize>,
    d: usize,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexTensor, sites: Vec<usize>, d: usize) -> Result<Self> {
        let dim = d.pow(sites.len() as u32);
        if matrix.shape() != [dim, dim] {
            return Err(Error::Shape(format!(
                "density matrix on {} sites must be {dim}x{dim}",
                sites.len()
            )));
        }
        Ok(Self { matrix, sites, d })
    }

    pub fn matrix(&self) -> &ComplexTensor {
        &self.matrix
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Eigenvalues, descending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigs(&self.matrix, 1e-10)?.values)
    }
}

/// Eigenvalues of a partially transposed density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct NegativitySpectrum {
    pub eigenvalues: Vec<f64>,
}

fn check_sites(sites: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &s in sites {
        if s >= n {
            return Err(Error::Sites(format!("site {s} outside 0..{n}")));
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::Sites(format!("site {s} listed twice")));
        }
    }
    Ok(())
}

pub fn reduce(state: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    reduce_with(state, keep, Exec::default())
}

/// `rho = tr_rest |psi><psi|` over the sites in `keep`.
pub fn reduce_with(state: &PureState, keep: &[usize], exec: Exec) -> Result<DensityMatrix> {
    let lat = state.lattice();
    let (d, n) = (lat.d, lat.sites());
    if keep.is_empty() {
        return Err(Error::Sites("empty site set".into()));
    }
    check_sites(keep, n)?;
    let dk = d
        .checked_pow(keep.len() as u32)
        .filter(|&x| x <= MAX_REDUCED_DIM)
        .ok_or(Error::SizeGuard {
            what: "reduced density matrix",
            required: d.saturating_pow(keep.len() as u32),
            limit: MAX_REDUCED_DIM,
        })?;
    let stride = |site: usize| d.pow((n - 1 - site) as u32);
    let rest: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let dr = d.pow(rest.len() as u32);

    let offsets = |sites: &[usize], idx: usize| {
        let mut off = 0;
        let mut r = idx;
        for &s in sites.iter().rev() {
            off += (r % d) * stride(s);
            r /= d;
        }
        off
    };
    let koff: Vec<usize> = (0..dk).map(|k| offsets(keep, k)).collect();
    let amps = state.amplitudes();

    // Split the traced index range; each group accumulates its own upper
    // triangle, bounded to about 64 MB in total.
    let groups = if exec.is_parallel() {
        (((1usize << 22) / (dk * dk)).clamp(1, 16)).min(dr)
    } else {
        1
    };
    let per = dr.div_ceil(groups);
    const BLOCK: usize = 64;
    let partials = par::map_range(exec, groups, |g| {
        let (lo, hi) = (g * per, ((g + 1) * per).min(dr));
        let mut acc = vec![C64::new(0.0, 0.0); dk * dk];
        let mut buf = vec![C64::new(0.0, 0.0); dk * BLOCK];
        let mut r0 = lo;
        while r0 < hi {
            let b = BLOCK.min(hi - r0);
            for j in 0..b {
                let roff = offsets(&rest, r0 + j);
                for k in 0..dk {
                    buf[k * BLOCK + j] = amps[koff[k] + roff];
                }
            }
            for k in 0..dk {
                let rk = &buf[k * BLOCK..k * BLOCK + b];
                for k2 in k..dk {
                    let rk2 = &buf[k2 * BLOCK..k2 * BLOCK + b];
                    acc[k * dk + k2] += rk.iter().zip(rk2).map(|(x, y)| x * y.conj()).sum::<C64>();
                }
            }
            r0 += b;
        }
        acc
    });
    let mut rho = vec![C64::new(0.0, 0.0); dk * dk];
    for p in partials {
        rho.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
    }
    for k in 0..dk {
        rho[k * dk + k] = C64::new(rho[k * dk + k].re, 0.0);
        for k2 in k + 1..dk {
            rho[k2 * dk + k] = rho[k * dk + k2].conj();
        }
    }
    DensityMatrix::new(ComplexTensor::matrix(dk, dk, rho)?, keep.to_vec(), d)
}

/// Schmidt weights of `state` across `keep` and the rest (the spectrum of
/// `rho_keep`), descending, from the singular values of the reshaped state.
pub fn schmidt_weights(state: &PureState, keep: &[usize], exec: Exec) -> Result<Vec<f64>> {
    let lat = state.lattice();
    let (d, n) = (lat.d, lat.sites());
    if keep.is_empty() {
        return Err(Error::Sites("empty site set".into()));
    }
    check_sites(keep, n)?;
    let dk = d
        .checked_pow(keep.len() as u32)
        .filter(|&x| x <= MAX_REDUCED_DIM)
        .ok_or(Error::SizeGuard {
            what: "Schmidt decomposition",
            required: d.saturating_pow(keep.len() as u32),
            limit: MAX_REDUCED_DIM,
        })?;
    let rest: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let dr = d.pow(rest.len() as u32);
    let stride = |site: usize| d.pow((n - 1 - site) as u32);
    let offsets = |sites: &[usize], idx: usize| {
        let mut off = 0;
        let mut r = idx;
        for &s in sites.iter().rev() {
            off += (r % d) * stride(s);
            r /= d;
        }
        off
    };
    let koff: Vec<usize> = (0..dk).map(|k| offsets(keep, k)).collect();
    let amps = state.amplitudes();
    // Rows are indexed by the rest, columns by `keep`.
    let groups = if exec.is_parallel() { dr.div_ceil(4 * dk.max(256)).clamp(1, 16) } else { 1 };
    let per = dr.div_ceil(groups);
    let factors = par::map_range(exec, groups, |g| {
        tall_r_factor(g * per..((g + 1) * per).min(dr), dk, 4 * dk.max(64), |r0, block| {
            for j in 0..block.nrows() {
                let roff = offsets(&rest, r0 + j);
                for (k, &ko) in koff.iter().enumerate() {
                    block[(j, k)] = amps[ko + roff];
                }
            }
        })
    });
    let r = factors.iter().fold(nalgebra::DMatrix::zeros(0, dk), |acc, f| stack_r(&acc, f));
    Ok(sorted_singular_values(r).into_iter().map(|s| s * s).collect())
}

/// Transposes the digits of the sites in `a` (a subset of `rho`'s sites).
pub fn partial_transpose(rho: &DensityMatrix, a: &[usize]) -> Result<ComplexTensor> {
    let sites = rho.sites();
    let mut positions = Vec::with_capacity(a.len());
    for s in a {
        match sites.iter().position(|x| x == s) {
            Some(p) => positions.push(p),
            None => {
                return Err(Error::Sites(format!(
                    "site {s} is not among the density matrix sites {sites:?}"
                )))
            }
        }
    }
    let (d, m) = (rho.d, sites.len());
    let dim = rho.matrix.rows();
    let masks: Vec<usize> = positions.iter().map(|&p| d.pow((m - 1 - p) as u32)).collect();
    let digit = |idx: usize, w: usize| (idx / w) % d;
    let src = rho.matrix.data();
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let (mut i2, mut j2) = (i, j);
            for &w in &masks {
                let (di, dj) = (digit(i, w), digit(j, w));
                i2 = i2 - di * w + dj * w;
                j2 = j2 - dj * w + di * w;
            }
            out[i * dim + j] = src[i2 * dim + j2];
        }
    }
    ComplexTensor::matrix(dim, dim, out)
}

pub fn negativity_spectrum(rho: &DensityMatrix, a: &[usize]) -> Result<NegativitySpectrum> {
    let pt = partial_transpose(rho, a)?;
    Ok(NegativitySpectrum {
        eigenvalues: hermitian_eigs(&pt, 1e-10)?.values,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// `ln sum |lambda|^alpha`, the even-branch continuation of the moments.
pub fn spectral_log_moment(values: &[f64], alpha: f64) -> f64 {
    spectrum_power_sum(values, alpha, EIG_FLOOR).ln()
}

/// `ln sum |lambda|`.
pub fn log_negativity(rho: &DensityMatrix, a: &[usize]) -> Result<f64> {
    Ok(spectral_log_moment(&negativity_spectrum(rho, a)?.eigenvalues, 1.0))
}

/// `ln sum lambda^(2n)`.
pub fn negativity_moments(rho: &DensityMatrix, a: &[usize], n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("moment order must be positive".into()));
    }
    Ok(spectral_log_moment(&negativity_spectrum(rho, a)?.eigenvalues, 2.0 * n as f64))
}

/// `ln sum |lambda|^alpha`.
pub fn negativity_alpha(rho: &DensityMatrix, a: &[usize], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(spectral_log_moment(&negativity_spectrum(rho, a)?.eigenvalues, alpha))
}

/// Rényi entropy of a probability spectrum; `alpha = 1` is von Neumann.
pub fn renyi_from_spectrum(values: &[f64], alpha: f64) -> Result<f64> {
    renyi_above(values, alpha, EIG_FLOOR)
}

fn renyi_above(values: &[f64], alpha: f64, floor: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if (alpha - 1.0).abs() < 1e-14 {
        return Ok(-values
            .iter()
            .filter(|&&x| x > floor)
            .map(|&x| x * x.ln())
            .sum::<f64>());
    }
    Ok(spectrum_power_sum(values, alpha, floor).ln() / (1.0 - alpha))
}

pub fn renyi_entropy(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    renyi_from_spectrum(&rho.spectrum()?, alpha)
}

/// `R_alpha = ln( sum |lambda(rho^T_A)|^alpha / sum mu(rho)^alpha )`.
pub fn ratio_r(rho: &DensityMatrix, a: &[usize], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let pt = negativity_spectrum(rho, a)?;
    Ok(spectral_log_moment(&pt.eigenvalues, alpha) - spectral_log_moment(&rho.spectrum()?, alpha))
}

/// Spectra needed for every tripartite quantity. `ab` and `pt` are absent
/// when `rho_AB` exceeds the size guard.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TripartiteSpectra {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub ab: Option<Vec<f64>>,
    pub pt: Option<Vec<f64>>,
    /// Weights of `a`, `b`, `c` at or below this are dropped.
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    EIG_FLOOR
}

impl TripartiteSpectra {
    /// Schmidt weights of `A`, `B`, `C` and, if it fits, the spectra of
    /// `rho_AB` and its partial transpose on `A`.
    pub fn compute(state: &PureState, partition: &Partition, exec: Exec) -> Result<Self> {
        partition.check(state.lattice().l)?;
        let spec = |sites: &[usize]| schmidt_weights(state, sites, exec);
        let (a, b, c) = (
            spec(&partition.sites_a())?,
            spec(&partition.sites_b())?,
            spec(&partition.sites_c())?,
        );
        let (ab, pt) = match reduce_with(state, &partition.sites_ab(), exec) {
            Ok(rho) => (
                Some(rho.spectrum()?),
                Some(negativity_spectrum(&rho, &partition.sites_a())?.eigenvalues),
            ),
            Err(Error::SizeGuard { .. }) => (None, None),
            Err(e) => return Err(e),
        };
        Ok(Self {
            a,
            b,
            c,
            ab,
            pt,
            floor: SCHMIDT_FLOOR,
        })
    }

    pub fn has_pt(&self) -> bool {
        self.pt.is_some()
    }

    pub fn s_a(&self, alpha: f64) -> Result<f64> {
        renyi_above(&self.a, alpha, self.floor)
    }

    pub fn s_b(&self, alpha: f64) -> Result<f64> {
        renyi_above(&self.b, alpha, self.floor)
    }

    /// `S_AB`, from `rho_C`.
    pub fn s_ab(&self, alpha: f64) -> Result<f64> {
        renyi_above(&self.c, alpha, self.floor)
    }

    /// `I_{A:B} = S_A + S_B - S_AB`.
    pub fn mutual_information(&self, alpha: f64) -> Result<f64> {
        Ok(self.s_a(alpha)? + self.s_b(alpha)? - self.s_ab(alpha)?)
    }

    fn pt_or_skip(&self) -> Result<&[f64]> {
        self.pt.as_deref().ok_or(Error::SizeGuard {
            what: "partial transpose of rho_AB",
            required: 0,
            limit: MAX_REDUCED_DIM,
        })
    }

    pub fn log_negativity(&self) -> Result<f64> {
        Ok(spectral_log_moment(self.pt_or_skip()?, 1.0))
    }

    pub fn negativity_alpha(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(spectral_log_moment(self.pt_or_skip()?, alpha))
    }

    pub fn moment(&self, n: u32) -> Result<f64> {
        self.negativity_alpha(2.0 * n as f64)
    }

    /// `R_alpha`, using `rho_C` for the spectrum of `rho_AB`.
    pub fn ratio_r(&self, alpha: f64) -> Result<f64> {
        Ok(self.negativity_alpha(alpha)? - spectrum_power_sum(&self.c, alpha, self.floor).ln())
    }
}

/// `I^(alpha)_{A:B}` with `S_AB` taken from `rho_C`.
pub fn mutual_information(state: &PureState, partition: &Partition, alpha: f64) -> Result<f64> {
    partition.check(state.lattice().l)?;
    let s = |sites: Vec<usize>| -> Result<f64> { renyi_entropy(&reduce(state, &sites)?, alpha) };
    let ab = partition.sites_ab();
    let c = partition.sites_c();
    let s_ab = if c.len() <= ab.len() { s(c)? } else { s(ab)? };
    Ok(s(partition.sites_a())? + s(partition.sites_b())? - s_ab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{
        build_state, evolve, GateAssignment, GateFamily, InitialState, LatticeSpec,
    };
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn state_from(l: usize, amps: Vec<C64>) -> PureState {
        PureState::new(LatticeSpec::new(2, l).unwrap(), amps).unwrap()
    }

    /// Bell pair on sites (0, 1), |0> elsewhere (4 sites).
    fn bell() -> PureState {
        let mut v = vec![c(0.0); 16];
        v[0] = c(1.0);
        v[0b1100] = c(1.0);
        state_from(2, v)
    }

    fn ghz4() -> PureState {
        let mut v = vec![c(0.0); 16];
        v[0] = c(1.0);
        v[15] = c(1.0);
        state_from(2, v)
    }

    fn haar_state(seed: u64, t: usize) -> PureState {
        let lat = LatticeSpec::new(2, 6).unwrap();
        let s = build_state(lat, &InitialState::basis(lat, 0)).unwrap();
        let g = GateAssignment::from_family(lat, t.max(1), GateFamily::Haar, seed, true, &[]).unwrap();
        evolve(&s, &g, t).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let s = bell();
        let rho = reduce(&s, &[0]).unwrap();
        assert!(rho.matrix().max_abs_diff(&ComplexTensor::identity(2).scale(c(0.5))) < 1e-15);
        let full = reduce(&s, &[0, 1, 2, 3]).unwrap();
        let pure = ComplexTensor::outer(s.amplitudes(), s.amplitudes());
        assert!(full.matrix().max_abs_diff(&pure) < 1e-15);
        let g = reduce(&ghz4(), &[1, 2]).unwrap();
        let want = ComplexTensor::from_diag(&[c(0.5), c(0.0), c(0.0), c(0.5)]);
        assert!(g.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn reduce_orders_digits_like_keep() {
        let s = haar_state(3, 1);
        let a = reduce(&s, &[3, 7]).unwrap();
        let b = reduce(&s, &[7, 3]).unwrap();
        let swapped = ComplexTensor::from_fn(vec![4, 4], |ij| {
            let f = |x: usize| (x % 2) * 2 + x / 2;
            b.matrix().at(f(ij[0]), f(ij[1]))
        });
        assert!(a.matrix().max_abs_diff(&swapped) < 1e-14);
    }

    #[test]
    fn reduce_policies_agree() {
        let s = haar_state(5, 2);
        let a = reduce_with(&s, &[0, 1, 5, 6], Exec::Sequential).unwrap();
        let b = reduce_with(&s, &[0, 1, 5, 6], Exec::Parallel).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
    }

    #[test]
    fn reduce_guards() {
        let s = bell();
        assert!(matches!(reduce(&s, &[]), Err(Error::Sites(_))));
        assert!(matches!(reduce(&s, &[0, 0]), Err(Error::Sites(_))));
        assert!(matches!(reduce(&s, &[9]), Err(Error::Sites(_))));
        let lat = LatticeSpec::new(2, 7).unwrap();
        let big = build_state(lat, &InitialState::basis(lat, 0)).unwrap();
        let all: Vec<usize> = (0..13).collect();
        assert!(matches!(reduce(&big, &all), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn bell_negativity_spectrum() {
        let rho = reduce(&bell(), &[0, 1]).unwrap();
        let mut ev = negativity_spectrum(&rho, &[0]).unwrap().eigenvalues;
        ev.sort_by(f64::total_cmp);
        let want = [-0.5, 0.5, 0.5, 0.5];
        assert!(ev.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-14));
        assert!((log_negativity(&rho, &[0]).unwrap() - LN_2).abs() < 1e-14);
        assert!(negativity_moments(&rho, &[0], 1).unwrap().abs() < 1e-14);
        assert!((negativity_alpha(&rho, &[0], 1.0).unwrap() - LN_2).abs() < 1e-14);
        assert!(negativity_alpha(&rho, &[0], 0.0).is_err());
    }

    #[test]
    fn product_states_have_no_negativity() {
        let lat = LatticeSpec::new(2, 2).unwrap();
        let s = build_state(lat, &InitialState::random_product(lat, 1)).unwrap();
        let rho = reduce(&s, &[0, 1, 2]).unwrap();
        assert!(log_negativity(&rho, &[0, 2]).unwrap().abs() < 1e-12);
        // Mixed I/2 (x) I/2 from two Bell pairs.
        let mut v = vec![c(0.0); 16];
        for a in 0..2 {
            for b in 0..2 {
                v[(a << 3) | (b << 2) | (a << 1) | b] = c(1.0);
            }
        }
        let rho = reduce(&state_from(2, v), &[0, 1]).unwrap();
        assert!((negativity_moments(&rho, &[0], 1).unwrap() - 0.25f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn ghz_counterexample_values() {
        let s = ghz4();
        let p = Partition::new(1, 1, 0).err();
        assert!(p.is_some());
        // GHZ on sites split as A = {0}, B = {1}, C = {2, 3}.
        let rho = reduce(&s, &[0, 1]).unwrap();
        assert!(log_negativity(&rho, &[0]).unwrap().abs() < 1e-12);
        let s_a = renyi_entropy(&reduce(&s, &[0]).unwrap(), 0.5).unwrap();
        let s_c = renyi_entropy(&reduce(&s, &[2, 3]).unwrap(), 0.5).unwrap();
        assert!((s_a + s_a - s_c - LN_2).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let mixed = DensityMatrix::new(ComplexTensor::identity(2).scale(c(0.5)), vec![0], 2).unwrap();
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            assert!((renyi_entropy(&mixed, alpha).unwrap() - LN_2).abs() < 1e-14);
        }
        let pure = reduce(&bell(), &[0, 1]).unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            assert!(renyi_entropy(&pure, alpha).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn partition_geometry() {
        let p = Partition::new(2, 1, 3).unwrap().with_offset(4);
        assert_eq!(p.sites_a(), vec![8, 9, 10, 11]);
        assert_eq!(p.sites_b(), vec![0, 1]);
        assert_eq!(p.sites_c(), vec![2, 3, 4, 5, 6, 7]);
        assert_eq!(p.interfaces(), [4, 0, 1]);
        assert!(p.check(6).is_ok() && p.check(5).is_err());
        assert!(p.in_regime(0) && !p.in_regime(1));
    }

    #[test]
    fn t1_relation_on_oracle() {
        let s = haar_state(7, 1);
        let p = Partition::new(2, 2, 2).unwrap();
        let sp = TripartiteSpectra::compute(&s, &p, Exec::default()).unwrap();
        let e = sp.log_negativity().unwrap();
        let i = sp.mutual_information(0.5).unwrap();
        assert!(e > 1e-3);
        assert!((2.0 * e - i).abs() < 1e-9);
        assert!((mutual_information(&s, &p, 0.5).unwrap() - i).abs() < 1e-10);
        assert!((sp.ratio_r(4.0).unwrap() + sp.mutual_information(2.0).unwrap()).abs() < 1e-9);
        // Purity identity holds at any time.
        assert!(sp.ratio_r(2.0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn alpha_continuation_decreases() {
        let s = haar_state(2, 1);
        let p = Partition::new(2, 2, 2).unwrap();
        let sp = TripartiteSpectra::compute(&s, &p, Exec::default()).unwrap();
        let grid: Vec<f64> = (1..=40).map(|k| k as f64 * 0.1).collect();
        let vals: Vec<f64> = grid.iter().map(|&a| sp.negativity_alpha(a).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!((sp.moment(1).unwrap() - sp.negativity_alpha(2.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn pure_bipartition_degenerate_case() {
        // C empty: rho_AB is the full pure state, so E = S^(1/2)_A.
        let lat = LatticeSpec::new(2, 2).unwrap();
        let s = build_state(lat, &InitialState::random_product(lat, 3)).unwrap();
        let g = GateAssignment::from_family(lat, 2, GateFamily::Haar, 5, false, &[]).unwrap();
        let s = evolve(&s, &g, 2).unwrap();
        let rho = reduce(&s, &[0, 1, 2, 3]).unwrap();
        let e = log_negativity(&rho, &[0, 1]).unwrap();
        let s_half = renyi_entropy(&reduce(&s, &[0, 1]).unwrap(), 0.5).unwrap();
        assert!(e > 1e-3);
        assert!((e - s_half).abs() < 1e-10);
    }

    fn random_rho(seed: u64, sites: usize) -> DensityMatrix {
        let lat = LatticeSpec::new(2, 3).unwrap();
        let s = build_state(lat, &InitialState::random_product(lat, seed)).unwrap();
        let g = GateAssignment::from_family(lat, 2, GateFamily::Haar, seed, false, &[]).unwrap();
        let s = evolve(&s, &g, 2).unwrap();
        reduce(&s, &(0..sites).collect::<Vec<_>>()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn partial_transpose_properties(seed in any::<u64>(), mask in 1u32..15) {
            let rho = random_rho(seed, 4);
            let a: Vec<usize> = (0..4).filter(|k| mask >> k & 1 == 1).collect();
            let pt = partial_transpose(&rho, &a).unwrap();
            prop_assert!(pt.hermitian_deviation() < 1e-14);
            prop_assert!((pt.trace().unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
            let back = partial_transpose(&DensityMatrix::new(pt.clone(), rho.sites().to_vec(), 2).unwrap(), &a).unwrap();
            prop_assert!(back.max_abs_diff(rho.matrix()) < 1e-15);
            let ev = negativity_spectrum(&rho, &a).unwrap().eigenvalues;
            prop_assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            // Purity identity.
            let p2: f64 = ev.iter().map(|x| x * x).sum();
            let q2: f64 = rho.spectrum().unwrap().iter().map(|x| x * x).sum();
            prop_assert!((p2 - q2).abs() < 1e-10);
            prop_assert!(log_negativity(&rho, &a).unwrap() >= -1e-12);
        }

        #[test]
        fn global_purity(seed in any::<u64>(), alpha in 0.2f64..4.0) {
            let lat = LatticeSpec::new(2, 3).unwrap();
            let s = build_state(lat, &InitialState::random_product(lat, seed)).unwrap();
            let g = GateAssignment::from_family(lat, 2, GateFamily::Haar, seed, false, &[]).unwrap();
            let s = evolve(&s, &g, 2).unwrap();
            let ab = renyi_entropy(&reduce(&s, &[0, 1, 2, 3]).unwrap(), alpha).unwrap();
            let cc = renyi_entropy(&reduce(&s, &[4, 5]).unwrap(), alpha).unwrap();
            prop_assert!((ab - cc).abs() < 1e-9);
        }
    }

    #[test]
    fn partial_transpose_rejects_foreign_sites() {
        let rho = random_rho(1, 2);
        assert!(matches!(partial_transpose(&rho, &[3]), Err(Error::Sites(_))));
    }
}
