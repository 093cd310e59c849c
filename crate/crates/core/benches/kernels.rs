//! Sequential against rayon execution of the hot kernels. Without the
//! `parallel` feature both variants run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use negativity_core::circuit::{apply_step, build_state, evolve, CircuitConfig, PureState};
use negativity_core::dual::TransferMatrix;
use negativity_core::entanglement::{reduce_with, schmidt_weights, Partition};
use negativity_core::par::Exec;
use negativity_core::tensor::LinearOperator;
use negativity_core::C64;
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn circuit(l: usize, t: usize) -> CircuitConfig {
    negativity_core::circuit::from_json(&format!(r#"{{"d":2,"L":{l},"t_max":{t},"gate_family":"haar","seed":1}}"#))
        .unwrap()
}

fn state(l: usize, t: usize) -> PureState {
    let c = circuit(l, t);
    evolve(&build_state(c.lattice().unwrap(), &c.initial_state().unwrap()).unwrap(), &c.gates().unwrap(), t).unwrap()
}

fn gate_layers(c: &mut Criterion) {
    let mut g = c.benchmark_group("brickwork_step");
    for l in [8, 10] {
        let cfg = circuit(l, 1);
        let gates = cfg.gates().unwrap();
        let psi0 = build_state(cfg.lattice().unwrap(), &cfg.initial_state().unwrap()).unwrap();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, 2 * l), &exec, |b, &exec| {
                b.iter(|| {
                    let mut psi = psi0.clone();
                    apply_step(&mut psi, &gates, 0, exec).unwrap();
                    black_box(psi)
                })
            });
        }
    }
    g.finish();
}

fn partial_traces(c: &mut Criterion) {
    let mut g = c.benchmark_group("reduced_spectra");
    g.sample_size(20);
    let psi = state(8, 2);
    let part = Partition::new(2, 2, 4).unwrap();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("rho_ab", name), |b| {
            b.iter(|| black_box(reduce_with(&psi, &part.sites_ab(), exec).unwrap()))
        });
        g.bench_function(BenchmarkId::new("schmidt_c", name), |b| {
            b.iter(|| black_box(schmidt_weights(&psi, &part.sites_c(), exec).unwrap()))
        });
    }
    g.finish();
}

fn transfer_matrix(c: &mut Criterion) {
    let mut g = c.benchmark_group("transfer_apply");
    for t in [1, 2] {
        let cfg = circuit(6, t);
        let cell = TransferMatrix::column(&cfg.gates().unwrap(), &cfg.initial_state().unwrap(), t, 0).unwrap();
        let v: Vec<C64> = (0..cell.dim()).map(|k| C64::new((k as f64).sin(), (k as f64).cos())).collect();
        for (name, exec) in MODES {
            let op = cell.clone().with_exec(exec);
            g.bench_with_input(BenchmarkId::new(name, t), &op, |b, op| b.iter(|| black_box(op.apply(&v))));
        }
    }
    g.finish();
}

criterion_group!(kernels, gate_layers, partial_traces, transfer_matrix);
criterion_main!(kernels);
