//! Brick-work circuits on a periodic chain of `2L` qudits.
//!
//! # Site labels
//!
//! Positions carry half-integer labels `1/2, 1, 3/2, ..., L`. Internally a
//! site is an index in `0..2L`; label `y` maps to index `(2y) mod 2L`, so
//! `1/2 -> 1`, `1 -> 2`, ..., `L -> 0`. Functions that take labels accept
//! twice the label as an integer (see [`LatticeSpec::site_of_label`]).
//!
//! # Layers
//!
//! One time step applies two half-layers. The first couples the pairs
//! `(2j, 2j+1)` (gates whose right edge sits at a half-odd-integer label), the
//! second the pairs `(2j+1, 2j+2)` including the wrap-around pair `(2L-1, 0)`.
//!
//! # Amplitude layout
//!
//! Basis state `|s_0 s_1 ... s_{2L-1}>` is stored at index
//! `sum_i s_i d^(2L-1-i)`: site 0 is the most significant digit. A two-site
//! gate acts as `U[(o_left d + o_right), (i_left d + i_right)]`.

mod config;
mod gates;
mod init;

pub use config::{from_json, CircuitConfig, InitSpec, Pair};
pub use gates::{
    check_gate, cnot_gate, dual_unitary_rng, identity_gate, swap_gate, GateFamily, GateLabel,
    GateTable, UNITARITY_TOL,
};
pub use init::InitialState;

use crate::kernel;
use crate::par::{self, Exec};
use crate::tensor::ComplexTensor;
use crate::{Error, Result, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Chain geometry. The light-cone speed is fixed to one site per half-layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub d: usize,
    /// Half the number of sites.
    pub l: usize,
}

impl LatticeSpec {
    pub const V_MAX: usize = 1;

    pub fn new(d: usize, l: usize) -> Result<Self> {
        if d < 2 || l < 2 {
            return Err(Error::InvalidArgument(format!(
                "lattice needs d >= 2 and L >= 2, got d={d}, L={l}"
            )));
        }
        Ok(Self { d, l })
    }

    pub fn sites(&self) -> usize {
        2 * self.l
    }

    /// `d^(2L)`, or `None` on overflow.
    pub fn hilbert_dim(&self) -> Option<usize> {
        self.d.checked_pow(self.sites() as u32)
    }

    /// Site index of label `twice_label / 2`.
    pub fn site_of_label(&self, twice_label: usize) -> usize {
        twice_label % self.sites()
    }

    /// Twice the label of a site index, in `1..=2L`.
    pub fn label_of_site(&self, site: usize) -> usize {
        if site.is_multiple_of(self.sites()) {
            self.sites()
        } else {
            site % self.sites()
        }
    }

    /// Sites `(left, right)` touched by pair `j` of half-layer `half`.
    pub fn pair_sites(&self, half: usize, pair: usize) -> (usize, usize) {
        let left = 2 * pair + half;
        (left % self.sites(), (left + 1) % self.sites())
    }
}

/// Gate identifier for every space-time point of a brick-work circuit.
///
/// Identifiers index a [`GateTable`], so a disorder realisation is
/// reproducible from its `(family, seed)` pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateAssignment {
    lattice: LatticeSpec,
    steps: usize,
    table: GateTable,
    /// Flat `[step][half][pair]`.
    ids: Vec<usize>,
}

impl GateAssignment {
    /// Assignment with `ids = f(step, half, pair)`.
    pub fn from_fn(
        lattice: LatticeSpec,
        steps: usize,
        table: GateTable,
        mut f: impl FnMut(usize, usize, usize) -> usize,
    ) -> Result<Self> {
        if table.d() != lattice.d {
            return Err(Error::Shape(format!(
                "gate table for d={} used on a d={} lattice",
                table.d(),
                lattice.d
            )));
        }
        let mut ids = Vec::with_capacity(steps * 2 * lattice.l);
        for s in 0..steps {
            for h in 0..2 {
                for p in 0..lattice.l {
                    let id = f(s, h, p);
                    if id >= table.len() {
                        return Err(Error::InvalidArgument(format!(
                            "gate id {id} missing from a table of {}",
                            table.len()
                        )));
                    }
                    ids.push(id);
                }
            }
        }
        Ok(Self {
            lattice,
            steps,
            table,
            ids,
        })
    }

    /// The same gate everywhere.
    pub fn homogeneous(
        lattice: LatticeSpec,
        steps: usize,
        gate: ComplexTensor,
        label: GateLabel,
    ) -> Result<Self> {
        let mut table = GateTable::new(lattice.d);
        table.push(gate, label)?;
        Self::from_fn(lattice, steps, table, |_, _, _| 0)
    }

    /// Gates drawn from `family` with a ChaCha stream seeded by `seed`, either
    /// a single gate or one per space-time point in `(step, half, pair)`
    /// order. For [`GateFamily::Custom`], `custom` holds either one gate or
    /// one per space-time point.
    pub fn from_family(
        lattice: LatticeSpec,
        steps: usize,
        family: GateFamily,
        seed: u64,
        homogeneous: bool,
        custom: &[ComplexTensor],
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = GateTable::new(lattice.d);
        let points = steps * 2 * lattice.l;
        let fixed = matches!(family, GateFamily::Identity | GateFamily::Swap);
        if family == GateFamily::Custom && custom.len() != 1 && custom.len() != points {
            return Err(Error::InvalidArgument(format!(
                "custom_gates must hold 1 or {points} gates, got {}",
                custom.len()
            )));
        }
        if homogeneous || fixed || (family == GateFamily::Custom && custom.len() == 1) {
            table.draw(family, &mut rng, custom.first())?;
            return Self::from_fn(lattice, steps, table, |_, _, _| 0);
        }
        for k in 0..points {
            table.draw(family, &mut rng, custom.get(k))?;
        }
        let l = lattice.l;
        Self::from_fn(lattice, steps, table, |s, h, p| (s * 2 + h) * l + p)
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    /// Number of full time steps covered.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn table(&self) -> &GateTable {
        &self.table
    }

    pub fn id(&self, step: usize, half: usize, pair: usize) -> usize {
        assert!(step < self.steps && half < 2 && pair < self.lattice.l);
        self.ids[(step * 2 + half) * self.lattice.l + pair]
    }

    pub fn gate(&self, step: usize, half: usize, pair: usize) -> &ComplexTensor {
        self.table.gate(self.id(step, half, pair))
    }

    pub fn label(&self, step: usize, half: usize, pair: usize) -> GateLabel {
        self.table.label(self.id(step, half, pair))
    }

    /// Gate id with right edge at label `x2 / 2` in layer `tau2 / 2`
    /// (`tau2 = 1` is the first half-layer). `None` when no brick sits there.
    pub fn id_at_label(&self, x2: usize, tau2: usize) -> Option<usize> {
        if tau2 == 0 || tau2 > 2 * self.steps {
            return None;
        }
        let (step, half) = ((tau2 - 1) / 2, (tau2 - 1) % 2);
        let right = self.lattice.site_of_label(x2);
        let n = self.lattice.sites();
        let left = (right + n - 1) % n;
        if left % 2 != half {
            return None;
        }
        Some(self.id(step, half, left / 2))
    }

    /// Copy with one space-time point replaced by `gate`.
    pub fn with_gate(
        &self,
        step: usize,
        half: usize,
        pair: usize,
        gate: ComplexTensor,
    ) -> Result<Self> {
        let mut out = self.clone();
        let id = out.table.push(gate, GateLabel::Custom)?;
        out.ids[(step * 2 + half) * self.lattice.l + pair] = id;
        Ok(out)
    }

    /// True when every gate comes from the Clifford group.
    pub fn is_clifford(&self) -> bool {
        self.ids
            .iter()
            .all(|&id| matches!(self.table.label(id), GateLabel::Clifford { .. }))
    }
}

/// Normalised state vector on the full chain.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    lattice: LatticeSpec,
    amps: Vec<C64>,
}

impl PureState {
    /// Wraps `amps`, normalising them.
    pub fn new(lattice: LatticeSpec, mut amps: Vec<C64>) -> Result<Self> {
        let dim = lattice
            .hilbert_dim()
            .ok_or(Error::SizeGuard {
                what: "state vector",
                required: usize::MAX,
                limit: usize::MAX,
            })?;
        if amps.len() != dim {
            return Err(Error::Shape(format!(
                "state of {} amplitudes on a chain of dimension {dim}",
                amps.len()
            )));
        }
        let n = crate::tensor::normalize(&mut amps);
        if !(n > 1e-300) {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { lattice, amps })
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        crate::tensor::norm(&self.amps)
    }

    /// Amplitudes as a tensor of shape `(d, d, ..., d)`.
    pub fn into_tensor(self) -> ComplexTensor {
        let shape = vec![self.lattice.d; self.lattice.sites()];
        ComplexTensor::new(shape, self.amps).expect("length matches lattice")
    }
}

/// Largest chain (in amplitudes) [`build_state`] will allocate.
pub const MAX_STATE_DIM: usize = 1 << 26;

/// Builds the normalised initial state.
pub fn build_state(lattice: LatticeSpec, init: &InitialState) -> Result<PureState> {
    init.validate(lattice)?;
    let dim = lattice.hilbert_dim().unwrap_or(usize::MAX);
    if dim > MAX_STATE_DIM {
        return Err(Error::SizeGuard {
            what: "state vector",
            required: dim,
            limit: MAX_STATE_DIM,
        });
    }
    let amps = match init {
        InitialState::Product { .. } => {
            let mut v = vec![C64::new(1.0, 0.0)];
            for site in 0..lattice.sites() {
                let psi = init.site_vector(site);
                v = v
                    .iter()
                    .flat_map(|&a| psi.iter().map(move |&b| a * b))
                    .collect();
            }
            v
        }
        InitialState::Mps { .. } => mps_ring(lattice, init),
    };
    PureState::new(lattice, amps)
}

/// `tr[W_0^{s1 s2} W_1^{s3 s4} ... W_{L-1}^{s_{2L-1} s_0}]` for every basis state.
fn mps_ring(lattice: LatticeSpec, init: &InitialState) -> Vec<C64> {
    let d = lattice.d;
    let chi = init.bond_dim();
    let zero = C64::new(0.0, 0.0);
    // blocks[r] is a chi x chi matrix for the partial string r of s_1..s_k.
    let w0 = init.cell_tensor(0, d);
    let mut blocks: Vec<Vec<C64>> = (0..d * d)
        .map(|s| {
            let (s1, s2) = (s / d, s % d);
            (0..chi * chi)
                .map(|m| w0.get(&[m / chi, m % chi, s1, s2]))
                .collect()
        })
        .collect();
    for j in 1..lattice.l {
        let w = init.cell_tensor(j, d);
        let mut next = Vec::with_capacity(blocks.len() * d * d);
        for b in &blocks {
            for s in 0..d * d {
                let (s1, s2) = (s / d, s % d);
                let mut m = vec![zero; chi * chi];
                for a in 0..chi {
                    for c in 0..chi {
                        let x = b[a * chi + c];
                        if x == zero {
                            continue;
                        }
                        for e in 0..chi {
                            m[a * chi + e] += x * w.get(&[c, e, s1, s2]);
                        }
                    }
                }
                next.push(m);
            }
        }
        blocks = next;
    }
    // blocks are indexed by (s_1 .. s_{2L-1}, s_0); site 0 must lead.
    let n = lattice.sites();
    let rest = d.pow((n - 1) as u32);
    let mut amps = vec![zero; rest * d];
    for (r, b) in blocks.iter().enumerate() {
        let (head, s0) = (r / d, r % d);
        amps[s0 * rest + head] = (0..chi).map(|a| b[a * chi + a]).sum();
    }
    amps
}

/// Applies `gate` to sites `(left, left + 1 mod 2L)` in place.
pub fn apply_two_site_with(
    state: &mut PureState,
    gate: &ComplexTensor,
    left: usize,
    exec: Exec,
) -> Result<()> {
    let lat = state.lattice;
    let (d, n) = (lat.d, lat.sites());
    check_gate(gate, d)?;
    if left >= n {
        return Err(Error::Sites(format!("site {left} outside 0..{n}")));
    }
    let dd = d * d;
    let g = gate.data();
    if left + 1 < n {
        let stride = d.pow((n - 2 - left) as u32);
        kernel::apply_local(&mut state.amps, g, dd, stride, exec);
    } else {
        // Wrap pair: left = site 2L-1 (least significant), right = site 0.
        let top = d.pow((n - 1) as u32);
        let src = std::mem::take(&mut state.amps);
        let mut out = vec![C64::new(0.0, 0.0); src.len()];
        par::fill_indexed(exec, &mut out, |idx| {
            let (s0, mid) = (idx / top, idx % top);
            let sl = mid % d;
            let base = mid - sl;
            let row = &g[(sl * d + s0) * dd..(sl * d + s0 + 1) * dd];
            let mut acc = C64::new(0.0, 0.0);
            for a_left in 0..d {
                for a_right in 0..d {
                    acc += row[a_left * d + a_right] * src[a_right * top + base + a_left];
                }
            }
            acc
        });
        state.amps = out;
    }
    Ok(())
}

/// [`apply_two_site_with`] using the default execution policy.
pub fn apply_two_site(state: &PureState, gate: &ComplexTensor, left: usize) -> Result<PureState> {
    let mut s = state.clone();
    apply_two_site_with(&mut s, gate, left, Exec::default())?;
    Ok(s)
}

/// Applies time step `step` (both half-layers) of `gates` in place.
pub fn apply_step(state: &mut PureState, gates: &GateAssignment, step: usize, exec: Exec) -> Result<()> {
    if gates.lattice() != state.lattice {
        return Err(Error::Shape("gate assignment built for another lattice".into()));
    }
    if step >= gates.steps() {
        return Err(Error::InvalidArgument(format!(
            "step {step} beyond the {} assigned steps",
            gates.steps()
        )));
    }
    for half in 0..2 {
        for pair in 0..state.lattice.l {
            let (left, _) = state.lattice.pair_sites(half, pair);
            apply_two_site_with(state, gates.gate(step, half, pair), left, exec)?;
        }
    }
    Ok(())
}

/// Evolves `state` through the first `steps` time steps of `gates`.
pub fn evolve_with(
    state: &PureState,
    gates: &GateAssignment,
    steps: usize,
    exec: Exec,
) -> Result<PureState> {
    let mut s = state.clone();
    for step in 0..steps {
        apply_step(&mut s, gates, step, exec)?;
    }
    Ok(s)
}

pub fn evolve(state: &PureState, gates: &GateAssignment, steps: usize) -> Result<PureState> {
    evolve_with(state, gates, steps, Exec::default())
}
