//! Stabilizer simulation of qubit Clifford brick-work circuits.
//!
//! A pure stabilizer state on `N` qubits is stored as `N` commuting Pauli
//! generators in binary symplectic form. The entropy of a region `R` in
//! units of `ln 2` is `rank(generators restricted to R) - |R|`, for every
//! Rényi index.

mod group;

pub use group::{two_qubit_group, CliffordGroup, Generator};

use crate::circuit::{GateAssignment, GateLabel, PureState};
use crate::entanglement::{Partition, TripartiteSpectra};
use crate::par::Exec;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Generator rows `X^x Z^z` with sign bits; bit `q` of a row is qubit `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: Vec<bool>,
}

impl StabilizerTableau {
    /// Computational basis state; `bits[q]` is the value of qubit `q`.
    pub fn basis(bits: &[bool]) -> Self {
        let n = bits.len();
        let words = n.div_ceil(64).max(1);
        let mut t = Self {
            n,
            words,
            x: vec![0; n * words],
            z: vec![0; n * words],
            sign: bits.to_vec(),
        };
        for q in 0..n {
            t.z[q * words + q / 64] |= 1 << (q % 64);
        }
        t
    }

    pub fn zeros(n: usize) -> Self {
        Self::basis(&vec![false; n])
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    fn bit(v: &[u64], words: usize, row: usize, q: usize) -> bool {
        v[row * words + q / 64] >> (q % 64) & 1 == 1
    }

    fn flip(v: &mut [u64], words: usize, row: usize, q: usize) {
        v[row * words + q / 64] ^= 1 << (q % 64);
    }

    fn x_bit(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.x, self.words, row, q)
    }

    fn z_bit(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.z, self.words, row, q)
    }

    pub fn hadamard(&mut self, q: usize) {
        for r in 0..self.n {
            let (x, z) = (self.x_bit(r, q), self.z_bit(r, q));
            self.sign[r] ^= x && z;
            if x != z {
                Self::flip(&mut self.x, self.words, r, q);
                Self::flip(&mut self.z, self.words, r, q);
            }
        }
    }

    pub fn phase(&mut self, q: usize) {
        for r in 0..self.n {
            let (x, z) = (self.x_bit(r, q), self.z_bit(r, q));
            self.sign[r] ^= x && z;
            if x {
                Self::flip(&mut self.z, self.words, r, q);
            }
        }
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        for r in 0..self.n {
            let (xa, za) = (self.x_bit(r, control), self.z_bit(r, control));
            let (xb, zb) = (self.x_bit(r, target), self.z_bit(r, target));
            self.sign[r] ^= xa && zb && (xb == za);
            if xa {
                Self::flip(&mut self.x, self.words, r, target);
            }
            if zb {
                Self::flip(&mut self.z, self.words, r, control);
            }
        }
    }

    /// Applies a group element to qubits `(left, right)`.
    pub fn apply_element(&mut self, index: usize, left: usize, right: usize) {
        for g in two_qubit_group().word(index) {
            match g {
                Generator::H0 => self.hadamard(left),
                Generator::H1 => self.hadamard(right),
                Generator::S0 => self.phase(left),
                Generator::S1 => self.phase(right),
                Generator::Cnot01 => self.cnot(left, right),
            }
        }
    }

    /// Generator `r` as a string such as `"+XZI"`, qubit 0 first.
    pub fn row_string(&self, r: usize) -> String {
        let mut s = String::from(if self.sign[r] { "-" } else { "+" });
        for q in 0..self.n {
            s.push(match (self.x_bit(r, q), self.z_bit(r, q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            });
        }
        s
    }

    /// True when all generators commute pairwise and are independent.
    pub fn is_valid(&self) -> bool {
        let all: Vec<usize> = (0..self.n).collect();
        for a in 0..self.n {
            for b in a + 1..self.n {
                let sym = (0..self.n)
                    .filter(|&q| (self.x_bit(a, q) && self.z_bit(b, q)) ^ (self.z_bit(a, q) && self.x_bit(b, q)))
                    .count();
                if sym % 2 == 1 {
                    return false;
                }
            }
        }
        self.restricted_rank(&all) == self.n
    }

    /// GF(2) rank of the generator matrix restricted to the columns of `region`.
    fn restricted_rank(&self, region: &[usize]) -> usize {
        let cols = 2 * region.len();
        let words = cols.div_ceil(64).max(1);
        let mut rows: Vec<Vec<u64>> = (0..self.n)
            .map(|r| {
                let mut v = vec![0u64; words];
                for (k, &q) in region.iter().enumerate() {
                    if self.x_bit(r, q) {
                        v[(2 * k) / 64] |= 1 << ((2 * k) % 64);
                    }
                    if self.z_bit(r, q) {
                        v[(2 * k + 1) / 64] |= 1 << ((2 * k + 1) % 64);
                    }
                }
                v
            })
            .collect();
        let mut rank = 0;
        for c in 0..cols {
            let (w, b) = (c / 64, 1u64 << (c % 64));
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
                continue;
            };
            rows.swap(rank, p);
            for r in 0..rows.len() {
                if r != rank && rows[r][w] & b != 0 {
                    let pivot = rows[rank].clone();
                    rows[r].iter_mut().zip(&pivot).for_each(|(a, p)| *a ^= p);
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Entropy of `region` in units of `ln 2`.
pub fn stabilizer_entropy(tableau: &StabilizerTableau, region: &[usize]) -> usize {
    tableau.restricted_rank(region) - region.len()
}

/// Evolves `tableau` through the first `steps` steps of a Clifford circuit.
pub fn clifford_evolve(
    tableau: &StabilizerTableau,
    gates: &GateAssignment,
    steps: usize,
) -> Result<StabilizerTableau> {
    let lat = gates.lattice();
    if lat.d != 2 || tableau.qubits() != lat.sites() {
        return Err(Error::InvalidArgument(format!(
            "tableau on {} qubits does not fit d={}, 2L={}",
            tableau.qubits(),
            lat.d,
            lat.sites()
        )));
    }
    if steps > gates.steps() {
        return Err(Error::InvalidArgument(format!("{steps} steps requested, {} assigned", gates.steps())));
    }
    let group = two_qubit_group();
    let mut out = tableau.clone();
    for step in 0..steps {
        for half in 0..2 {
            for pair in 0..lat.l {
                let index = match gates.label(step, half, pair) {
                    GateLabel::Clifford { index } => index,
                    _ => group
                        .find(gates.gate(step, half, pair))
                        .ok_or(Error::NotClifford(gates.id(step, half, pair)))?,
                };
                let (left, right) = lat.pair_sites(half, pair);
                out.apply_element(index, left, right);
            }
        }
    }
    Ok(out)
}

/// Bell-pair and GHZ content of a tripartite stabilizer state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordDecomposition {
    pub e_ab: usize,
    pub e_bc: usize,
    pub e_ca: usize,
    pub g_abc: usize,
}

const INTEGRALITY_TOL: f64 = 1e-6;

fn integral(what: &'static str, value: f64) -> Result<i64> {
    let r = value.round();
    if !value.is_finite() || (value - r).abs() > INTEGRALITY_TOL {
        return Err(Error::NonIntegral { what, value });
    }
    Ok(r as i64)
}

fn count(what: &'static str, value: i64) -> Result<usize> {
    usize::try_from(value).map_err(|_| Error::NonIntegral { what, value: value as f64 })
}

/// Decomposition from dense spectra: `E / ln 2` gives the `AB` Bell pairs,
/// `I^(2) / ln 2 - 2 e_AB` the GHZ triples, the block entropies the rest.
pub fn decomposition_from_spectra(spectra: &TripartiteSpectra) -> Result<CliffordDecomposition> {
    let e_ab = integral("E / ln 2", spectra.log_negativity()? / LN_2)?;
    let i2 = integral("I2 / ln 2", spectra.mutual_information(2.0)? / LN_2)?;
    let s_a = integral("S_A / ln 2", spectra.s_a(2.0)? / LN_2)?;
    let s_b = integral("S_B / ln 2", spectra.s_b(2.0)? / LN_2)?;
    let s_c = integral("S_C / ln 2", spectra.s_ab(2.0)? / LN_2)?;
    let g = i2 - 2 * e_ab;
    let e_ca = s_a - e_ab - g;
    let e_bc = s_b - e_ab - g;
    if e_ca + e_bc + g != s_c {
        return Err(Error::NonIntegral {
            what: "S_C / ln 2 - (e_CA + e_BC + g)",
            value: (s_c - e_ca - e_bc - g) as f64,
        });
    }
    Ok(CliffordDecomposition {
        e_ab: count("e_AB", e_ab)?,
        e_bc: count("e_BC", e_bc)?,
        e_ca: count("e_CA", e_ca)?,
        g_abc: count("g_ABC", g)?,
    })
}

/// Decomposition of a stabilizer state vector; needs `rho_AB` to fit.
pub fn ghz_bell_counts(state: &PureState, partition: &Partition) -> Result<CliffordDecomposition> {
    let spectra = TripartiteSpectra::compute(state, partition, Exec::default())?;
    if !spectra.has_pt() {
        return Err(Error::SizeGuard {
            what: "rho_AB for the Bell/GHZ decomposition",
            required: partition.sites_ab().len(),
            limit: crate::entanglement::MAX_REDUCED_DIM.ilog2() as usize,
        });
    }
    decomposition_from_spectra(&spectra)
}

/// Block entropies `[s_A, s_B, s_C]` of a tableau in units of `ln 2`.
pub fn block_entropies(tableau: &StabilizerTableau, partition: &Partition) -> [usize; 3] {
    [
        stabilizer_entropy(tableau, &partition.sites_a()),
        stabilizer_entropy(tableau, &partition.sites_b()),
        stabilizer_entropy(tableau, &partition.sites_c()),
    ]
}
