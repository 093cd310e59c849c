use super::DualGate;
use crate::circuit::{check_gate, GateAssignment, InitialState};
use crate::kernel::apply_local;
use crate::par::{self, Exec};
use crate::tensor::{ComplexTensor, LinearOperator};
use crate::{Error, Result, C64};

/// Gates and initial-state tensor feeding one cell of the dual contraction.
///
/// Cell `j` covers sites `2j` and `2j+1`. `odd[s]` is the gate on pair
/// `(2j, 2j+1)` in step `s`, `even[s]` the gate on `(2j+1, 2j+2)`, and `w`
/// the initial-state tensor of shape `(chi, chi, d, d)` covering sites
/// `(2j+1, 2j+2)`.
#[derive(Clone, Debug)]
pub struct ColumnData {
    pub odd: Vec<ComplexTensor>,
    pub even: Vec<ComplexTensor>,
    pub w: ComplexTensor,
}

impl ColumnData {
    /// Column `cell` of a circuit truncated to `t` steps.
    pub fn from_circuit(
        gates: &GateAssignment,
        init: &InitialState,
        t: usize,
        cell: usize,
    ) -> Result<Self> {
        let lat = gates.lattice();
        if t > gates.steps() {
            return Err(Error::InvalidArgument(format!(
                "t = {t} exceeds the {} assigned steps",
                gates.steps()
            )));
        }
        let j = cell % lat.l;
        Ok(Self {
            odd: (0..t).map(|s| gates.gate(s, 0, j).clone()).collect(),
            even: (0..t).map(|s| gates.gate(s, 1, j).clone()).collect(),
            w: init.cell_tensor(j, lat.d),
        })
    }
}

#[derive(Clone, Debug)]
struct LocalOp {
    ket: Vec<C64>,
    bra: Vec<C64>,
    ket_adj: Vec<C64>,
    bra_adj: Vec<C64>,
    n: usize,
    /// Stride of the lowest digit inside one copy.
    low: usize,
}

impl LocalOp {
    fn new(m: &ComplexTensor, low: usize) -> Self {
        let conj = m.conj();
        Self {
            ket: m.data().to_vec(),
            bra: conj.data().to_vec(),
            ket_adj: m.adjoint().into_data(),
            bra_adj: conj.adjoint().into_data(),
            n: m.rows(),
            low,
        }
    }

    fn apply(&self, v: &mut [C64], copy_dim: usize, adjoint: bool, exec: Exec) {
        let (k, b) = if adjoint {
            (&self.ket_adj, &self.bra_adj)
        } else {
            (&self.ket, &self.bra)
        };
        apply_local(v, k, self.n, self.low * copy_dim, exec);
        apply_local(v, b, self.n, self.low, exec);
    }
}

#[derive(Clone, Debug)]
struct Cell {
    odd: Vec<LocalOp>,
    boundary: LocalOp,
    even: Vec<LocalOp>,
}

/// Space transfer matrix of one or more consecutive cells, acting on the
/// folded space `H_t (x) H_t` with `H_t = C^chi (x) (C^d)^(2t+1)`.
///
/// A copy index is `mu * d^(2t+1) + sum_h seg_h d^(2t-h)`: bond first, then
/// the worldline segments `0..=2t` from the initial state upwards. The folded
/// index is `ket * D + bra`. The operator maps the cut in front of its first
/// cell to the cut behind its last one.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    t: usize,
    d: usize,
    chi: usize,
    first_cell: usize,
    cells: Vec<Cell>,
    exec: Exec,
}

/// Builds the transfer matrix of consecutive columns.
pub fn build_transfer(
    t: usize,
    columns: &[ColumnData],
    d: usize,
    chi: usize,
) -> Result<TransferMatrix> {
    TransferMatrix::from_columns(t, columns, d, chi, 0)
}

impl TransferMatrix {
    pub fn from_columns(
        t: usize,
        columns: &[ColumnData],
        d: usize,
        chi: usize,
        first_cell: usize,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidArgument("no columns".into()));
        }
        let ns = 2 * t + 1;
        let cells = columns
            .iter()
            .map(|c| {
                if c.odd.len() != t || c.even.len() != t {
                    return Err(Error::Shape(format!(
                        "column has {}/{} gates for t = {t}",
                        c.odd.len(),
                        c.even.len()
                    )));
                }
                if c.w.shape() != [chi, chi, d, d] {
                    return Err(Error::Shape(format!(
                        "cell tensor {:?} does not match chi={chi}, d={d}",
                        c.w.shape()
                    )));
                }
                let mk = |g: &ComplexTensor, seg: usize| -> Result<LocalOp> {
                    check_gate(g, d)?;
                    // Segments (seg, seg + 1); the lower one has stride d^(ns-2-seg).
                    Ok(LocalOp::new(
                        DualGate::new(g)?.matrix(),
                        d.pow((ns - 2 - seg) as u32),
                    ))
                };
                let odd = (0..t).map(|s| mk(&c.odd[s], 2 * s)).collect::<Result<_>>()?;
                let even = (0..t).map(|s| mk(&c.even[s], 2 * s + 1)).collect::<Result<_>>()?;
                // (mu_left, s_odd) -> (mu_right, s_even) on the (bond, segment 0) digits.
                let w = &c.w;
                let wmat = ComplexTensor::from_fn(vec![chi * d, chi * d], |ij| {
                    let (m2, s2) = (ij[0] / d, ij[0] % d);
                    let (m1, s1) = (ij[1] / d, ij[1] % d);
                    w.get(&[m1, m2, s1, s2])
                });
                Ok(Cell {
                    odd,
                    boundary: LocalOp::new(&wmat, d.pow((ns - 1) as u32)),
                    even,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t,
            d,
            chi,
            first_cell,
            cells,
            exec: Exec::default(),
        })
    }

    /// Cells `first_cell .. first_cell + count` (mod L) of a circuit.
    pub fn span(
        gates: &GateAssignment,
        init: &InitialState,
        t: usize,
        first_cell: usize,
        count: usize,
    ) -> Result<Self> {
        let lat = gates.lattice();
        init.validate(lat)?;
        let cols = (0..count)
            .map(|k| ColumnData::from_circuit(gates, init, t, (first_cell + k) % lat.l))
            .collect::<Result<Vec<_>>>()?;
        Self::from_columns(t, &cols, lat.d, init.bond_dim(), first_cell % lat.l)
    }

    /// Single cell `cell` of a circuit.
    pub fn column(
        gates: &GateAssignment,
        init: &InitialState,
        t: usize,
        cell: usize,
    ) -> Result<Self> {
        Self::span(gates, init, t, cell, 1)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// `self` repeated `k` times.
    pub fn power(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.cells = (0..k).flat_map(|_| self.cells.iter().cloned()).collect();
        out
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &Self) -> Result<Self> {
        if (self.t, self.d, self.chi) != (other.t, other.d, other.chi) {
            return Err(Error::Shape("transfer matrices of different spaces".into()));
        }
        let mut out = self.clone();
        out.cells.extend(other.cells.iter().cloned());
        Ok(out)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn chi(&self) -> usize {
        self.chi
    }

    pub fn first_cell(&self) -> usize {
        self.first_cell
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Dimension of one copy, `chi d^(2t+1)`.
    pub fn copy_dim(&self) -> usize {
        self.chi * self.d.pow((2 * self.t + 1) as u32)
    }

    /// Traces ket against bra on the top segment, then re-emits a delta.
    fn couple(&self, v: &mut [C64]) {
        let (d, dim) = (self.d, self.copy_dim());
        par::for_each_chunk_mut(self.exec, v, d * dim, |_, c| {
            for bh in 0..dim / d {
                let base = bh * d;
                let s: C64 = (0..d).map(|x| c[base + x * dim + x]).sum();
                for a in 0..d {
                    for b in 0..d {
                        c[base + a * dim + b] = if a == b { s } else { C64::new(0.0, 0.0) };
                    }
                }
            }
        });
    }

    fn apply_cell(&self, cell: &Cell, v: &mut [C64]) {
        let dim = self.copy_dim();
        self.couple(v);
        for op in &cell.odd {
            op.apply(v, dim, false, self.exec);
        }
        cell.boundary.apply(v, dim, false, self.exec);
        for op in &cell.even {
            op.apply(v, dim, false, self.exec);
        }
    }

    fn apply_cell_adjoint(&self, cell: &Cell, v: &mut [C64]) {
        let dim = self.copy_dim();
        for op in cell.even.iter().rev() {
            op.apply(v, dim, true, self.exec);
        }
        cell.boundary.apply(v, dim, true, self.exec);
        for op in cell.odd.iter().rev() {
            op.apply(v, dim, true, self.exec);
        }
        self.couple(v);
    }
}

impl LinearOperator for TransferMatrix {
    fn dim(&self) -> usize {
        let d = self.copy_dim();
        d * d
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut w = v.to_vec();
        for cell in &self.cells {
            self.apply_cell(cell, &mut w);
        }
        w
    }

    fn apply_adjoint(&self, v: &[C64]) -> Vec<C64> {
        let mut w = v.to_vec();
        for cell in self.cells.iter().rev() {
            self.apply_cell_adjoint(cell, &mut w);
        }
        w
    }
}
