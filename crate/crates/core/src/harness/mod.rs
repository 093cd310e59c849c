//! Experiment runner: quench a circuit, evaluate the oracle, dual and
//! stabilizer pipelines at every time step and collect one [`ResultRow`]
//! per `(seed, t)`.

mod emit;
mod scan;

pub use emit::{csv_header, write_csv, write_json, write_outputs, write_plot};
pub use scan::{mps_scan, replica_scan, MpsScanReport, MpsScanRow, ReplicaRow};

use crate::circuit::{
    apply_step, build_state, CircuitConfig, GateAssignment, GateFamily, InitSpec, InitialState,
    PureState, MAX_STATE_DIM,
};
use crate::clifford::{block_entropies, clifford_evolve, decomposition_from_spectra, StabilizerTableau};
use crate::dual::{DualReport, FixedPointMethod};
use crate::entanglement::{Partition, TripartiteSpectra};
use crate::par::{self, Exec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Oracle,
    Dual,
    Clifford,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `|E_oracle - E_dual|` and the dual moments.
    pub pipelines: f64,
    /// `|2E - I^(1/2)|` with both sides from the oracle.
    pub relation: f64,
    /// `|2E - I^(1/2)|` with `E` from the dual route.
    pub cross: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pipelines: 1e-8,
            relation: 1e-9,
            cross: 1e-8,
        }
    }
}

fn default_alphas() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}

fn default_pipelines() -> Vec<Pipeline> {
    vec![Pipeline::Oracle, Pipeline::Dual]
}

fn default_sizes() -> Vec<usize> {
    vec![1, 2, 3]
}

/// A circuit plus what to measure on it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub circuit: CircuitConfig,
    pub partition: Partition,
    #[serde(default)]
    pub t_min: usize,
    #[serde(default = "default_alphas")]
    pub alpha_grid: Vec<f64>,
    #[serde(default = "default_pipelines")]
    pub pipelines: Vec<Pipeline>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Seeds to sweep; empty means the circuit's own seed.
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Defaults to matrix powers for product states and leading
    /// eigenvectors for MPS.
    #[serde(default)]
    pub fixed_points: Option<FixedPointMethod>,
    /// Block lengths `L_m` for `mps-scan`.
    #[serde(default = "default_sizes")]
    pub scan_sizes: Vec<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Evaluate the dual formulas outside the early-time regime too.
    #[serde(default)]
    pub force: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = crate::circuit::from_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: String| Error::Config {
            path: path.into(),
            message,
        };
        self.circuit.lattice().map_err(|e| bad("L", e.to_string()))?;
        self.partition
            .check(self.circuit.l)
            .map_err(|e| bad("partition", e.to_string()))?;
        if self.t_min > self.circuit.t_max {
            return Err(bad("t_min", format!("{} exceeds t_max = {}", self.t_min, self.circuit.t_max)));
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(**a > 0.0)) {
            return Err(bad("alpha_grid", format!("{a} is not positive")));
        }
        let t = self.tolerances;
        if !(t.pipelines > 0.0 && t.relation > 0.0 && t.cross > 0.0) {
            return Err(bad("tolerances", "tolerances must be positive".into()));
        }
        if self.scan_sizes.contains(&0) {
            return Err(bad("scan_sizes", "block lengths must be positive".into()));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.circuit.seed]
        } else {
            self.seeds.clone()
        }
    }

    fn has(&self, p: Pipeline) -> bool {
        self.pipelines.contains(&p)
    }
}

/// Why a value is missing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Skip {
    /// The oracle would exceed its memory guard.
    #[serde(rename = "skipped: size")]
    Size,
    /// Dual formulas outside the early-time regime.
    #[serde(rename = "skipped: regime")]
    Regime,
    /// The pipeline was not requested or does not apply.
    #[serde(rename = "skipped: pipeline")]
    Pipeline,
}

/// A measured number or the reason it is missing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Skipped(Skip),
}

impl Value {
    pub fn get(self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(x),
            Value::Skipped(_) => None,
        }
    }

    fn from_result(r: Result<f64>) -> Result<Self> {
        match r {
            Ok(x) => Ok(Value::Number(x)),
            Err(Error::SizeGuard { .. }) => Ok(Value::Skipped(Skip::Size)),
            Err(e) => Err(e),
        }
    }

    fn map2(a: Value, b: Value, f: impl Fn(f64, f64) -> f64) -> Value {
        match (a, b) {
            (Value::Number(x), Value::Number(y)) => Value::Number(f(x, y)),
            (Value::Skipped(s), _) | (_, Value::Skipped(s)) => Value::Skipped(s),
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x}"),
            Value::Skipped(s) => f.write_str(match s {
                Skip::Size => "skipped: size",
                Skip::Regime => "skipped: regime",
                Skip::Pipeline => "skipped: pipeline",
            }),
        }
    }
}

const SKIP_PIPELINE: Value = Value::Skipped(Skip::Pipeline);

/// Secondary measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extras {
    pub s_half_a_dual: Value,
    pub s_half_b_dual: Value,
    /// `max_alpha |R_alpha - (1 - alpha/2) I^(alpha/2)|` from the oracle.
    pub ratio_residual: Value,
    /// Largest anti-Hermitian part dropped from `M_r^{1/2} M_l^dagger M_r^{1/2}`.
    pub anti_hermitian: Value,
    /// Stabilizer block entropies in units of `ln 2`.
    pub s_a_stab: Value,
    pub s_b_stab: Value,
    pub s_c_stab: Value,
    pub e_ab: Value,
    pub g_abc: Value,
}

/// Everything measured at one `(seed, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    pub t: usize,
    pub in_regime: bool,
    pub e_oracle: Value,
    pub e_dual: Value,
    pub i_half_oracle: Value,
    pub i_half_dual: Value,
    pub s_half_a: Value,
    pub s_half_b: Value,
    pub e2_oracle: Value,
    pub e2_dual: Value,
    pub e4_oracle: Value,
    pub e4_dual: Value,
    /// `R_alpha` from the oracle, one per entry of the alpha grid.
    pub r_alpha: Vec<Value>,
    /// `|2E - I^(1/2)|`, from the oracle when it has `E`, otherwise with the
    /// dual `E`.
    pub residual_relation: Value,
    pub residual_pipelines: Value,
    pub extras: Extras,
    pub runtime_oracle_ms: f64,
    pub runtime_dual_ms: f64,
}

/// Pass/fail bookkeeping of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: usize,
    pub checks: usize,
    pub failures: Vec<String>,
    /// Which closed form of the dual moments matched the oracle:
    /// `"both"`, `"closed_form"`, `"element_product"` or `"neither"`.
    pub moment_reading: Option<String>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub alpha_grid: Vec<f64>,
    pub rows: Vec<ResultRow>,
    pub summary: Summary,
}

/// Largest state evolved for several seeds at once.
const PARALLEL_SEED_DIM: usize = 1 << 20;

fn method_for(cfg: &ExperimentConfig, init: &InitialState) -> FixedPointMethod {
    cfg.fixed_points.unwrap_or(if init.is_product() {
        FixedPointMethod::MatrixPower
    } else {
        FixedPointMethod::Power
    })
}

fn basis_bits(cfg: &ExperimentConfig) -> Option<Vec<bool>> {
    match cfg.circuit.init {
        InitSpec::Basis { state } if cfg.circuit.d == 2 => Some(vec![state == 1; 2 * cfg.circuit.l]),
        _ => None,
    }
}

struct MomentFlags {
    closed_form: bool,
    element_product: bool,
}

struct SeedRun {
    rows: Vec<ResultRow>,
    moments: Vec<MomentFlags>,
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, exec: Exec) -> Result<SeedRun> {
    let lat = cfg.circuit.lattice()?;
    let init = cfg.circuit.initial_state()?;
    let gates = cfg.circuit.gates_for_seed(seed)?;
    let method = method_for(cfg, &init);
    let fits = lat.hilbert_dim().is_some_and(|d| d <= MAX_STATE_DIM);
    let mut state = if cfg.has(Pipeline::Oracle) && fits {
        Some(build_state(lat, &init)?)
    } else {
        None
    };
    let tableau = match (cfg.has(Pipeline::Clifford), basis_bits(cfg)) {
        (true, Some(bits)) if gates.is_clifford() => Some(StabilizerTableau::basis(&bits)),
        _ => None,
    };
    let mut out = SeedRun {
        rows: Vec::new(),
        moments: Vec::new(),
    };
    for t in 0..=cfg.circuit.t_max {
        if t > 0 {
            if let Some(s) = state.as_mut() {
                apply_step(s, &gates, t - 1, exec)?;
            }
        }
        if t < cfg.t_min {
            continue;
        }
        let (row, flags) = measure(cfg, seed, t, &gates, &init, state.as_ref(), tableau.as_ref(), method, fits, exec)?;
        out.rows.push(row);
        out.moments.extend(flags);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn measure(
    cfg: &ExperimentConfig,
    seed: u64,
    t: usize,
    gates: &GateAssignment,
    init: &InitialState,
    state: Option<&PureState>,
    tableau: Option<&StabilizerTableau>,
    method: FixedPointMethod,
    fits: bool,
    exec: Exec,
) -> Result<(ResultRow, Option<MomentFlags>)> {
    let part = &cfg.partition;
    let in_regime = part.in_regime(t);
    let oracle_skip = if cfg.has(Pipeline::Oracle) && !fits {
        Value::Skipped(Skip::Size)
    } else {
        SKIP_PIPELINE
    };

    let clock = Instant::now();
    let spectra = state.map(|s| TripartiteSpectra::compute(s, part, exec)).transpose()?;
    let oracle = |f: &dyn Fn(&TripartiteSpectra) -> Result<f64>| -> Result<Value> {
        match &spectra {
            Some(s) => Value::from_result(f(s)),
            None => Ok(oracle_skip),
        }
    };
    let e_oracle = oracle(&|s| s.log_negativity())?;
    let i_half_oracle = oracle(&|s| s.mutual_information(0.5))?;
    let s_half_a = oracle(&|s| s.s_a(0.5))?;
    let s_half_b = oracle(&|s| s.s_b(0.5))?;
    let e2_oracle = oracle(&|s| s.moment(1))?;
    let e4_oracle = oracle(&|s| s.moment(2))?;
    let r_alpha = cfg
        .alpha_grid
        .iter()
        .map(|&a| oracle(&|s| s.ratio_r(a)))
        .collect::<Result<Vec<_>>>()?;
    let ratio_residual = oracle(&|s| {
        let mut worst = 0.0f64;
        for &a in &cfg.alpha_grid {
            let i = s.mutual_information(a / 2.0)?;
            worst = worst.max((s.ratio_r(a)? - (1.0 - a / 2.0) * i).abs());
        }
        Ok(worst)
    })?;
    let runtime_oracle_ms = clock.elapsed().as_secs_f64() * 1e3;

    let clock = Instant::now();
    let run_dual = cfg.has(Pipeline::Dual) && (in_regime || cfg.force);
    let dual = if run_dual {
        Some(DualReport::compute(gates, init, t, part, method, 1e-9)?)
    } else {
        None
    };
    let dual_skip = if cfg.has(Pipeline::Dual) {
        Value::Skipped(Skip::Regime)
    } else {
        SKIP_PIPELINE
    };
    let dual_value = |f: &dyn Fn(&DualReport) -> Result<f64>| -> Result<Value> {
        match &dual {
            Some(d) => Ok(Value::Number(f(d)?)),
            None => Ok(dual_skip),
        }
    };
    let e_dual = dual_value(&|d| d.log_negativity())?;
    let i_half_dual = dual_value(&|d| d.mutual_information(0.5))?;
    let s_half_a_dual = dual_value(&|d| d.s_a(0.5))?;
    let s_half_b_dual = dual_value(&|d| d.s_b(0.5))?;
    let e2_dual = dual_value(&|d| Ok(d.moment(1)?.closed_form))?;
    let e4_dual = dual_value(&|d| Ok(d.moment(2)?.closed_form))?;
    let anti_hermitian = dual_value(&|d| Ok(d.anti_hermitian()))?;
    let runtime_dual_ms = clock.elapsed().as_secs_f64() * 1e3;

    let flags = match (&dual, &spectra) {
        (Some(d), Some(s)) if s.has_pt() => {
            let mut closed_form = true;
            let mut element_product = true;
            for n in [1, 2] {
                let want = s.moment(n)?;
                let m = d.moment(n)?;
                closed_form &= (m.closed_form - want).abs() <= cfg.tolerances.pipelines;
                element_product &= (m.element_product - want).abs() <= cfg.tolerances.pipelines;
            }
            Some(MomentFlags {
                closed_form,
                element_product,
            })
        }
        _ => None,
    };

    let two_e_minus_i = |e: Value| Value::map2(e, i_half_oracle, |e, i| (2.0 * e - i).abs());
    let residual_relation = if e_oracle.get().is_none() && e_dual.get().is_some() {
        two_e_minus_i(e_dual)
    } else {
        two_e_minus_i(e_oracle)
    };
    let residual_pipelines = Value::map2(e_oracle, e_dual, |a, b| (a - b).abs());

    let (s_a_stab, s_b_stab, s_c_stab, e_ab, g_abc) = match tableau {
        Some(tab) => {
            let evolved = clifford_evolve(tab, gates, t)?;
            let [a, b, c] = block_entropies(&evolved, part);
            let (e_ab, g) = match &spectra {
                Some(s) if s.has_pt() => {
                    let dec = decomposition_from_spectra(s)?;
                    (Value::Number(dec.e_ab as f64), Value::Number(dec.g_abc as f64))
                }
                _ => (oracle_skip, oracle_skip),
            };
            let n = |x: usize| Value::Number(x as f64);
            (n(a), n(b), n(c), e_ab, g)
        }
        None => (SKIP_PIPELINE, SKIP_PIPELINE, SKIP_PIPELINE, SKIP_PIPELINE, SKIP_PIPELINE),
    };

    let row = ResultRow {
        seed,
        t,
        in_regime,
        e_oracle,
        e_dual,
        i_half_oracle,
        i_half_dual,
        s_half_a,
        s_half_b,
        e2_oracle,
        e2_dual,
        e4_oracle,
        e4_dual,
        r_alpha,
        residual_relation,
        residual_pipelines,
        extras: Extras {
            s_half_a_dual,
            s_half_b_dual,
            ratio_residual,
            anti_hermitian,
            s_a_stab,
            s_b_stab,
            s_c_stab,
            e_ab,
            g_abc,
        },
        runtime_oracle_ms,
        runtime_dual_ms,
    };
    Ok((row, flags))
}

fn summarise(cfg: &ExperimentConfig, init: &InitialState, rows: &[ResultRow], moments: &[MomentFlags]) -> Summary {
    let tol = cfg.tolerances;
    let mut s = Summary {
        rows: rows.len(),
        ..Summary::default()
    };
    // The relation is exact only for product initial states.
    let exact = init.is_product();
    for r in rows.iter().filter(|r| r.in_regime) {
        let at = |what: &str| format!("seed {} t {}: {what}", r.seed, r.t);
        if exact {
            if let Some(x) = r.residual_relation.get() {
                let limit = if r.e_oracle.get().is_some() { tol.relation } else { tol.cross };
                s.check(x <= limit, || at(&format!("|2E - I(1/2)| = {x:.3e} > {limit:.0e}")));
            }
            if let Some(x) = r.residual_pipelines.get() {
                s.check(x <= tol.pipelines, || at(&format!("|E_oracle - E_dual| = {x:.3e}")));
            }
            for (o, d, n) in [(r.e2_oracle, r.e2_dual, 2), (r.e4_oracle, r.e4_dual, 4)] {
                if let Some(x) = Value::map2(o, d, |a, b| (a - b).abs()).get() {
                    s.check(x <= tol.pipelines, || at(&format!("|E_{n} oracle - dual| = {x:.3e}")));
                }
            }
            if let Some(x) = r.extras.ratio_residual.get() {
                s.check(x <= tol.relation, || at(&format!("ratio relation residual {x:.3e}")));
            }
        }
        if let Some(g) = r.extras.g_abc.get() {
            s.check(g == 0.0, || at(&format!("g_ABC = {g} in the early-time regime")));
        }
    }
    for r in rows {
        let at = |what: &str| format!("seed {} t {}: {what}", r.seed, r.t);
        // Stabilizer and dense entropies agree everywhere.
        if let (Some(stab), Some(dense)) = (r.extras.s_a_stab.get(), r.s_half_a.get()) {
            s.check((stab * LN_2 - dense).abs() < 1e-8, || at(&format!("stabilizer S_A {stab} vs dense {dense}")));
        }
        if let (Some(stab), Some(dense)) = (r.extras.s_b_stab.get(), r.s_half_b.get()) {
            s.check((stab * LN_2 - dense).abs() < 1e-8, || at(&format!("stabilizer S_B {stab} vs dense {dense}")));
        }
    }
    if !moments.is_empty() {
        let cf = moments.iter().all(|m| m.closed_form);
        let ep = moments.iter().all(|m| m.element_product);
        s.moment_reading = Some(
            match (cf, ep) {
                (true, true) => "both",
                (true, false) => "closed_form",
                (false, true) => "element_product",
                (false, false) => "neither",
            }
            .into(),
        );
    }
    s
}

/// Runs every seed and time step of `cfg`. Rows come out in seed order,
/// then time order.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let init = cfg.circuit.initial_state()?;
    if cfg.circuit.gate_family == GateFamily::Clifford && cfg.circuit.d != 2 {
        return Err(Error::Config {
            path: "gate_family".into(),
            message: "the Clifford family requires d = 2".into(),
        });
    }
    let small = cfg
        .circuit
        .lattice()?
        .hilbert_dim()
        .is_some_and(|d| d <= PARALLEL_SEED_DIM);
    let seeds = cfg.seeds();
    let runs = if small {
        par::map_vec(Exec::default(), seeds, |s| run_seed(cfg, s, Exec::Sequential))
    } else {
        seeds.into_iter().map(|s| run_seed(cfg, s, Exec::default())).collect()
    };
    let mut rows = Vec::new();
    let mut moments = Vec::new();
    for r in runs {
        let r = r?;
        rows.extend(r.rows);
        moments.extend(r.moments);
    }
    let summary = summarise(cfg, &init, &rows, &moments);
    Ok(RunReport {
        alpha_grid: cfg.alpha_grid.clone(),
        rows,
        summary,
    })
}
