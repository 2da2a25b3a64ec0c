use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mcb_core::coupling::{run_small_set_coupling, CouplingConfig, FiniteCoupling};
use mcb_core::finite_chain::{build_grid_walk, minorization_pseudo, ProbVector};
use mcb_core::interval::Interval;
use mcb_core::kernels::{verify_univariate_drift, RwmLaplace, VerifyOptions};
use mcb_core::presets;
use mcb_core::Execution;

fn executions() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    if cfg!(feature = "parallel") {
        v.push(("parallel", Execution::Parallel { workers: None }));
    }
    v
}

fn grid_coupling(c: &mut Criterion) {
    let p = build_grid_walk(3, 3).unwrap();
    let cert = minorization_pseudo(&p, 2).unwrap();
    let model = FiniteCoupling::new(&p, &ProbVector::point_mass(9, 4), &cert).unwrap();
    let mut group = c.benchmark_group("grid_coupling_20k");
    group.sample_size(10);
    for (name, execution) in executions() {
        let mut cfg = CouplingConfig::new(60, 20_000, 42);
        cfg.execution = execution;
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run_small_set_coupling(&model, cfg).unwrap())
        });
    }
    group.finish();
}

fn drift_probe_grid(c: &mut Criterion) {
    let kernel = RwmLaplace::new();
    let grid = Interval::new(-10.0, 10.0).grid(0.05);
    let mut group = c.benchmark_group("laplace_drift_grid");
    group.sample_size(10);
    for (name, execution) in executions() {
        let opts = VerifyOptions { execution, ..VerifyOptions::default() };
        group.bench_function(name, |b| {
            b.iter(|| {
                verify_univariate_drift(
                    &kernel,
                    &presets::laplace_v,
                    presets::LAPLACE_SMALL_SET,
                    presets::LAPLACE_LAMBDA,
                    presets::LAPLACE_B,
                    &grid,
                    &opts,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, grid_coupling, drift_probe_grid);
criterion_main!(benches);
