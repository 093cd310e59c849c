use super::ExperimentConfig;
use crate::circuit::{build_state, evolve, InitialState, LatticeSpec};
use crate::dual::{
    fixed_points, mps_transfer, replica_identity_check, FixedPointMethod, ReplicaResiduals, TransferMatrix,
};
use crate::entanglement::{MpsRing, Partition, TripartiteSpectra};
use crate::par::Exec;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MpsScanRow {
    /// Common length of the three blocks.
    pub block: usize,
    pub negativity: f64,
    pub i_half: f64,
    /// `|2E - I^(1/2)|`.
    pub residual: f64,
}

/// How the relation's residual decays with the block length for an
/// injective MPS.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MpsScanReport {
    pub t: usize,
    pub chi: usize,
    /// Second transfer eigenvalue magnitude over the first.
    pub gap: f64,
    pub rows: Vec<MpsScanRow>,
    pub monotone: bool,
    /// Least-squares slope of `ln residual` against the block length; absent
    /// when a residual sits at the rounding floor.
    pub slope: Option<f64>,
    /// `|slope - ln gap| <= 0.3 |ln gap|`.
    pub slope_matches: Option<bool>,
}

/// Residuals below this are rounding noise.
const NOISE_FLOOR: f64 = 1e-13;

fn spectra_at(lat: LatticeSpec, init: &InitialState, t: usize, part: &Partition, cfg: &ExperimentConfig) -> Result<TripartiteSpectra> {
    if t == 0 {
        return MpsRing::new(lat, init)?.spectra(part);
    }
    let mut circuit = cfg.circuit.clone();
    circuit.l = lat.l;
    let gates = circuit.gates()?;
    let psi = evolve(&build_state(lat, init)?, &gates, t)?;
    TripartiteSpectra::compute(&psi, part, Exec::default())
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Measures `|2E - I^(1/2)|` on rings of three equal blocks of each length
/// in `cfg.scan_sizes`, after `cfg.t_min` steps. At `t = 0` the spectra come
/// from the MPS directly, so large blocks stay cheap.
pub fn mps_scan(cfg: &ExperimentConfig) -> Result<MpsScanReport> {
    let d = cfg.circuit.d;
    let probe = LatticeSpec::new(d, 3)?;
    let init = cfg.circuit.init.resolve(probe)?;
    let InitialState::Mps { chi, w } = &init else {
        return Err(Error::Config {
            path: "init".into(),
            message: "mps-scan needs an MPS initial state".into(),
        });
    };
    if w.len() != 1 {
        return Err(Error::Config {
            path: "init.w".into(),
            message: "mps-scan needs a translation-invariant MPS".into(),
        });
    }
    let tau = mps_transfer(&w[0])?;
    if !tau.injective {
        let s = MpsRing::new(probe, &init)?.spectra(&Partition::new(1, 1, 1)?)?;
        return Err(Error::NonInjective {
            ratio: tau.gap,
            negativity: s.log_negativity()?,
            mutual_info: s.mutual_information(0.5)?,
        });
    }
    let t = cfg.t_min;
    let mut sizes = cfg.scan_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let rows = sizes
        .iter()
        .map(|&block| {
            let lat = LatticeSpec::new(d, 3 * block)?;
            let part = Partition::new(block, block, block)?;
            let s = spectra_at(lat, &init, t, &part, cfg)?;
            let negativity = s.log_negativity()?;
            let i_half = s.mutual_information(0.5)?;
            Ok(MpsScanRow {
                block,
                negativity,
                i_half,
                residual: (2.0 * negativity - i_half).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows.windows(2).all(|w| w[1].residual < w[0].residual);
    let usable = rows.len() >= 2 && rows.iter().all(|r| r.residual > NOISE_FLOOR);
    let slope = usable.then(|| {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.block as f64, r.residual.ln())).collect();
        least_squares_slope(&pts)
    });
    let slope_matches = slope.filter(|_| tau.gap > 0.0).map(|s| {
        let target = tau.gap.ln();
        (s - target).abs() <= 0.3 * target.abs()
    });
    Ok(MpsScanReport {
        t,
        chi: *chi,
        gap: tau.gap,
        rows,
        monotone,
        slope,
        slope_matches,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplicaRow {
    pub seed: u64,
    pub n: u32,
    pub t: usize,
    pub residuals: ReplicaResiduals,
}

/// Replica identities of orders `ns` at `t = max(t_min, 1)` for every seed.
pub fn replica_scan(cfg: &ExperimentConfig, ns: &[u32]) -> Result<Vec<ReplicaRow>> {
    let t = cfg.t_min.max(1);
    let init = cfg.circuit.initial_state()?;
    let mut out = Vec::new();
    for seed in cfg.seeds() {
        let gates = cfg.circuit.gates_for_seed(seed)?;
        let cell = TransferMatrix::column(&gates, &init, t, 0)?;
        let pair = fixed_points(&cell, FixedPointMethod::MatrixPower, 1e-9)?;
        for &n in ns {
            out.push(ReplicaRow {
                seed,
                n,
                t,
                residuals: replica_identity_check(&pair, n)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(init: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"d":2,"L":3,"t_max":0,"gate_family":"identity","partition":{{"l_a":1,"l_b":1,"l_c":1}},"init":{init},"scan_sizes":[1,2,3]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn product_scan_is_exact() {
        let rep = mps_scan(&cfg(r#"{"kind":"mps","chi":1,"w":[[[1,0],[0,0],[0,0],[0,0]]]}"#)).unwrap();
        assert!(rep.rows.iter().all(|r| r.residual < 1e-12));
        assert_eq!(rep.slope, None);
    }

    #[test]
    fn ghz_is_refused() {
        match mps_scan(&cfg(r#"{"kind":"ghz"}"#)) {
            Err(Error::NonInjective { negativity, mutual_info, .. }) => {
                assert!(negativity.abs() < 1e-12);
                assert!((mutual_info - std::f64::consts::LN_2).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn least_squares_on_a_line() {
        let s = least_squares_slope(&[(1.0, 2.0), (2.0, 0.5), (3.0, -1.0)]);
        assert!((s + 1.5).abs() < 1e-14);
    }
}
