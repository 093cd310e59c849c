use crate::clifford;
use crate::tensor::{haar_unitary_rng, ComplexTensor};
use crate::{Error, Result, C64};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest tolerated `max |U^dagger U - 1|` for a gate.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateFamily {
    Haar,
    DualUnitary,
    Clifford,
    Identity,
    Swap,
    Custom,
}

/// Where a gate in a [`GateTable`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateLabel {
    Haar,
    Clifford { index: usize },
    Identity,
    Swap,
    DualUnitary,
    Custom,
}

pub fn identity_gate(d: usize) -> ComplexTensor {
    ComplexTensor::identity(d * d)
}

/// `SWAP |a b> = |b a>`.
pub fn swap_gate(d: usize) -> ComplexTensor {
    ComplexTensor::from_fn(vec![d * d, d * d], |ij| {
        let (o, i) = (ij[0], ij[1]);
        if o / d == i % d && o % d == i / d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// CNOT with the left qubit as control.
pub fn cnot_gate() -> ComplexTensor {
    let one = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    ComplexTensor::matrix(
        4,
        4,
        vec![
            one, z, z, z, //
            z, one, z, z, //
            z, z, z, one, //
            z, z, one, z,
        ],
    )
    .expect("4x4")
}

/// Random dual-unitary gate `(u1 x u2) SWAP D (u3 x u4)` with `D` a diagonal
/// of random phases and `u_k` Haar single-site unitaries.
pub fn dual_unitary_rng<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<ComplexTensor> {
    let u: Vec<ComplexTensor> = (0..4)
        .map(|_| haar_unitary_rng(d, rng))
        .collect::<Result<_>>()?;
    let phases: Vec<C64> = (0..d * d)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let core = swap_gate(d).matmul(&ComplexTensor::from_diag(&phases))?;
    u[0].kron(&u[1])?.matmul(&core)?.matmul(&u[2].kron(&u[3])?)
}

/// Validates shape and unitarity of a two-site gate.
pub fn check_gate(gate: &ComplexTensor, d: usize) -> Result<()> {
    if gate.shape() != [d * d, d * d] {
        return Err(Error::Shape(format!(
            "two-site gate for d={d} must be {0}x{0}, got {1:?}",
            d * d,
            gate.shape()
        )));
    }
    let r = gate.unitarity_residual();
    if r.is_nan() || r > UNITARITY_TOL {
        return Err(Error::NotUnitary(r));
    }
    Ok(())
}

/// Identifier-indexed gate storage.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateTable {
    d: usize,
    gates: Vec<ComplexTensor>,
    labels: Vec<GateLabel>,
}

impl GateTable {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            gates: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Adds a gate and returns its identifier.
    pub fn push(&mut self, gate: ComplexTensor, label: GateLabel) -> Result<usize> {
        check_gate(&gate, self.d)?;
        self.gates.push(gate);
        self.labels.push(label);
        Ok(self.gates.len() - 1)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gate(&self, id: usize) -> &ComplexTensor {
        &self.gates[id]
    }

    pub fn label(&self, id: usize) -> GateLabel {
        self.labels[id]
    }

    /// Draws one gate of `family` from `rng`. `custom` supplies the gate for
    /// [`GateFamily::Custom`].
    pub fn draw<R: Rng + ?Sized>(
        &mut self,
        family: GateFamily,
        rng: &mut R,
        custom: Option<&ComplexTensor>,
    ) -> Result<usize> {
        let d = self.d;
        let (gate, label) = match family {
            GateFamily::Haar => (haar_unitary_rng(d * d, rng)?, GateLabel::Haar),
            GateFamily::DualUnitary => (dual_unitary_rng(d, rng)?, GateLabel::DualUnitary),
            GateFamily::Clifford => {
                if d != 2 {
                    return Err(Error::InvalidArgument(
                        "the Clifford family requires d = 2".into(),
                    ));
                }
                let group = clifford::two_qubit_group();
                let index = rng.random_range(0..group.len());
                (group.unitary(index), GateLabel::Clifford { index })
            }
            GateFamily::Identity => (identity_gate(d), GateLabel::Identity),
            GateFamily::Swap => (swap_gate(d), GateLabel::Swap),
            GateFamily::Custom => (
                custom
                    .ok_or_else(|| {
                        Error::InvalidArgument("custom family needs custom_gates".into())
                    })?
                    .clone(),
                GateLabel::Custom,
            ),
        };
        self.push(gate, label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_gates_are_unitary() {
        for d in 2..5 {
            check_gate(&swap_gate(d), d).unwrap();
            check_gate(&identity_gate(d), d).unwrap();
        }
        check_gate(&cnot_gate(), 2).unwrap();
    }

    #[test]
    fn swap_exchanges_digits() {
        let s = swap_gate(3);
        // |1 2> -> |2 1>
        assert_eq!(s.at(2 * 3 + 1, 3 + 2), C64::new(1.0, 0.0));
        assert_eq!(s.matmul(&s).unwrap(), ComplexTensor::identity(9));
    }

    #[test]
    fn table_rejects_bad_gates() {
        let mut t = GateTable::new(2);
        let bad = identity_gate(2).scale(C64::new(1.1, 0.0));
        assert!(matches!(t.push(bad, GateLabel::Custom), Err(Error::NotUnitary(_))));
        assert!(matches!(
            t.push(identity_gate(3), GateLabel::Custom),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn dual_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [2, 3] {
            check_gate(&dual_unitary_rng(d, &mut rng).unwrap(), d).unwrap();
        }
    }
}
