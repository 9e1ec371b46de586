use criterion::{black_box, criterion_group, criterion_main, Criterion};

use dpds_core::graph::{build_graph, spectral, TopologySpec};
use dpds_core::lyapunov::{eval_v, LyapunovContext};
use dpds_core::objective::{uniform_stacked, Objective};
use dpds_core::rates::{alpha_threshold, rate_constants, ProblemConstants};
use dpds_core::{dt_step, run_dt, FlowParams, NetworkState};

fn bench_spectral(c: &mut Criterion) {
    let g = build_graph(&TopologySpec::ring(50)).unwrap();
    c.bench_function("spectral ring n=50", |b| b.iter(|| spectral(black_box(&g)).unwrap()));
}

fn bench_dt_step(c: &mut Criterion) {
    let g = build_graph(&TopologySpec::ring(10)).unwrap();
    let obj = Objective::make_secvi(10, 42).unwrap();
    let params = FlowParams::new(10.0, 10.0).unwrap();
    let s = NetworkState::with_zero_dual(uniform_stacked(10, 1, -3.0, 3.0, 5));
    c.bench_function("dt_step secvi ring n=10", |b| {
        b.iter(|| dt_step(black_box(&s), &params, 0.02, &g, &obj))
    });
}

fn bench_reference_run(c: &mut Criterion) {
    let g = build_graph(&TopologySpec::ring(10)).unwrap();
    let obj = Objective::make_secvi(10, 42).unwrap();
    let params = FlowParams::new(10.0, 10.0).unwrap();
    let s0 = NetworkState::with_zero_dual(uniform_stacked(10, 1, -3.0, 3.0, 5));
    c.bench_function("run_dt 1000 iterations ring n=10", |b| {
        b.iter(|| run_dt(black_box(&s0), &params, 0.02, &g, &obj, 1000, 100).unwrap())
    });
}

fn bench_eval_v(c: &mut Criterion) {
    let n = 10;
    let g = build_graph(&TopologySpec::ring(n)).unwrap();
    let sp = spectral(&g).unwrap();
    let centers: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64) / 4.0 - 1.0]).collect();
    let obj = Objective::quadratic(centers).unwrap();
    let pc0 = ProblemConstants::new(n, 1.0, n as f64, sp.rho2, sp.rho, 1.0, 1.0).unwrap();
    let params = FlowParams::new(1.1 * alpha_threshold(&pc0), 1.0).unwrap();
    let pc = ProblemConstants::from_parts(&obj, &sp, &params).unwrap();
    let rc = rate_constants(&pc).unwrap();
    let ctx = LyapunovContext::new(&sp, &obj, params, rc.eps1);
    let s = NetworkState::with_zero_dual(uniform_stacked(n, 1, -3.0, 3.0, 7));
    c.bench_function("eval_v quadratic ring n=10", |b| {
        b.iter(|| eval_v(black_box(&ctx), &s, 0.0).unwrap())
    });
}

criterion_group!(benches, bench_spectral, bench_dt_step, bench_reference_run, bench_eval_v);
criterion_main!(benches);
