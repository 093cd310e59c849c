//! Stabilizer tableaux against the dense oracle on Clifford brick-work circuits.

use negativity_core::circuit::{build_state, evolve, CircuitConfig};
use negativity_core::clifford::{clifford_evolve, decomposition_from_spectra, stabilizer_entropy, StabilizerTableau};
use negativity_core::entanglement::{reduce, renyi_entropy, Partition, TripartiteSpectra};
use negativity_core::par::Exec;
use proptest::prelude::*;
use std::f64::consts::LN_2;

fn clifford(seed: u64, t: usize) -> CircuitConfig {
    negativity_core::circuit::from_json(&format!(
        r#"{{"d":2,"L":6,"t_max":{t},"gate_family":"clifford","seed":{seed}}}"#
    ))
    .unwrap()
}

#[test]
fn projector_with_degenerate_spectrum_decomposes() {
    // Seed 71 leaves rho_AB a rank-one projector on which the plain
    // Hermitian solve used to return NaN.
    let c = clifford(71, 1);
    let psi = evolve(&build_state(c.lattice().unwrap(), &c.initial_state().unwrap()).unwrap(), &c.gates().unwrap(), 1).unwrap();
    let s = TripartiteSpectra::compute(&psi, &Partition::new(2, 2, 2).unwrap(), Exec::default()).unwrap();
    let dec = decomposition_from_spectra(&s).unwrap();
    assert_eq!(dec.g_abc, 0);
    assert!(s.log_negativity().unwrap().is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tableau_entropies_match_dense_states(seed in 0u64..10_000, t in 0usize..4, start in 0usize..12, len in 1usize..7) {
        let c = clifford(seed, t);
        let gates = c.gates().unwrap();
        let psi = evolve(&build_state(c.lattice().unwrap(), &c.initial_state().unwrap()).unwrap(), &gates, t).unwrap();
        let tab = clifford_evolve(&StabilizerTableau::zeros(12), &gates, t).unwrap();
        let region: Vec<usize> = (start..start + len).map(|s| s % 12).collect();
        let dense = renyi_entropy(&reduce(&psi, &region).unwrap(), 2.0).unwrap();
        prop_assert!((stabilizer_entropy(&tab, &region) as f64 * LN_2 - dense).abs() < 1e-9);
    }
}
