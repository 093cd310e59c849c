use super::{GateAssignment, GateFamily, InitialState, LatticeSpec};
use crate::tensor::ComplexTensor;
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

/// Complex number as `[re, im]`.
pub type Pair = [f64; 2];

fn to_complex(v: &[Pair]) -> Vec<C64> {
    v.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

/// Initial-state description in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// `|s s ... s>`.
    Basis {
        #[serde(default)]
        state: usize,
    },
    /// One vector for every site, or one per site.
    Product { psi: Vec<Vec<Pair>> },
    /// Independent random site vectors.
    RandomProduct { seed: u64 },
    /// Row-major `(chi, chi, d, d)` tensors, one shared or one per cell.
    Mps { chi: usize, w: Vec<Vec<Pair>> },
    PerturbedMps { chi: usize, epsilon: f64, seed: u64 },
    Ghz,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Basis { state: 0 }
    }
}

impl InitSpec {
    pub fn resolve(&self, lattice: LatticeSpec) -> Result<InitialState> {
        let d = lattice.d;
        let state = match self {
            InitSpec::Basis { state } => {
                if *state >= d {
                    return Err(Error::InvalidArgument(format!(
                        "basis state {state} out of range for d={d}"
                    )));
                }
                InitialState::basis(lattice, *state)
            }
            InitSpec::Product { psi } => InitialState::Product {
                psi: psi.iter().map(|v| to_complex(v)).collect(),
            },
            InitSpec::RandomProduct { seed } => InitialState::random_product(lattice, *seed),
            InitSpec::Mps { chi, w } => {
                let tensors = w
                    .iter()
                    .map(|v| ComplexTensor::new(vec![*chi, *chi, d, d], to_complex(v)))
                    .collect::<Result<Vec<_>>>()?;
                InitialState::mps(*chi, d, tensors)?
            }
            InitSpec::PerturbedMps { chi, epsilon, seed } => {
                InitialState::perturbed_mps(d, *chi, *epsilon, *seed)?
            }
            InitSpec::Ghz => {
                if d != 2 {
                    return Err(Error::InvalidArgument("GHZ init requires d = 2".into()));
                }
                InitialState::ghz()
            }
        };
        state.validate(lattice)?;
        Ok(state)
    }
}

fn default_true() -> bool {
    true
}

/// JSON description of a circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub t_max: usize,
    pub gate_family: GateFamily,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub homogeneous: bool,
    #[serde(default)]
    pub init: InitSpec,
    /// Row-major `d^2 x d^2` matrices.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub custom_gates: Vec<Vec<Pair>>,
}

impl CircuitConfig {
    pub fn lattice(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.d, self.l)
    }

    pub fn initial_state(&self) -> Result<InitialState> {
        self.init.resolve(self.lattice()?)
    }

    /// Gates for `seed` (overriding the configured one).
    pub fn gates_for_seed(&self, seed: u64) -> Result<GateAssignment> {
        let dd = self.d * self.d;
        let custom = self
            .custom_gates
            .iter()
            .map(|g| ComplexTensor::new(vec![dd, dd], to_complex(g)))
            .collect::<Result<Vec<_>>>()?;
        GateAssignment::from_family(
            self.lattice()?,
            self.t_max,
            self.gate_family,
            seed,
            self.homogeneous,
            &custom,
        )
    }

    pub fn gates(&self) -> Result<GateAssignment> {
        self.gates_for_seed(self.seed)
    }
}

/// Deserialises JSON, reporting the failing field path.
pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let c: CircuitConfig =
            from_json(r#"{"d":2,"L":3,"t_max":2,"gate_family":"haar","seed":4}"#).unwrap();
        assert!(c.homogeneous);
        assert_eq!(c.init, InitSpec::Basis { state: 0 });
        let g = c.gates().unwrap();
        assert_eq!(g.steps(), 2);
        assert_eq!(g.table().len(), 1);
    }

    #[test]
    fn reports_field_path() {
        let err = from_json::<CircuitConfig>(
            r#"{"d":2,"L":3,"t_max":1,"gate_family":"haar","init":{"kind":"random_product","seed":"x"}}"#,
        )
        .unwrap_err();
        match err {
            Error::Config { path, .. } => assert!(path.starts_with("init"), "{path}"),
            other => panic!("{other}"),
        }
        let err = from_json::<CircuitConfig>(r#"{"d":2,"L":3,"t_max":1,"gate_family":"magic"}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "gate_family"));
    }

    #[test]
    fn custom_gate_round_trip() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut g = vec![[0.0, 0.0]; 16];
        // Hadamard on the left qubit: rows (o_l o_r), cols (i_l i_r).
        for (o, i, v) in [(0, 0, h), (0, 2, h), (2, 0, h), (2, 2, -h), (1, 1, h), (1, 3, h), (3, 1, h), (3, 3, -h)] {
            g[o * 4 + i] = [v, 0.0];
        }
        let c = CircuitConfig {
            d: 2,
            l: 2,
            t_max: 1,
            gate_family: GateFamily::Custom,
            seed: 0,
            homogeneous: true,
            init: InitSpec::Ghz,
            custom_gates: vec![g],
        };
        let text = serde_json::to_string(&c).unwrap();
        let back: CircuitConfig = from_json(&text).unwrap();
        assert_eq!(back, c);
        assert!(back.gates().is_ok());
        assert!(back.initial_state().is_ok());
    }
}
