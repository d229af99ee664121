use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use haarqmc::cubature::exactness_report;
use haarqmc::fractional::{frac_discrepancy, DiscrepancyMethod};
use haarqmc::haar::{Exponent, SpaceParams};
use haarqmc::nets::{faure_net, verify_net};
use haarqmc::wce::wce_upper_dual;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().expect("thread pool");
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("thread pool");
    vec![("parallel", default), ("sequential", single)]
}

fn kernels(c: &mut Criterion) {
    let two = Exponent::Finite(2.0);
    let net_2d = faure_net(2, 9, 2).unwrap();
    let big_net = faure_net(2, 14, 2).unwrap();
    let sp = SpaceParams::new(2, 2, 0.75, two, two).unwrap();
    let small = faure_net(2, 4, 2).unwrap();

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (mode, pool) in pools() {
        group.bench_function(BenchmarkId::new("warnock_n512_s2", mode), |b| {
            b.iter(|| pool.install(|| frac_discrepancy(&net_2d, 0.75, two, two, DiscrepancyMethod::Warnock, 0.0).unwrap()))
        });
        group.bench_function(BenchmarkId::new("tensor_quad_n16_s2", mode), |b| {
            b.iter(|| pool.install(|| frac_discrepancy(&small, 0.75, two, two, DiscrepancyMethod::TensorQuad, 1e-4).unwrap()))
        });
        group.bench_function(BenchmarkId::new("wce_upper_n512_s2", mode), |b| {
            b.iter(|| pool.install(|| wce_upper_dual(&net_2d, &sp, None).unwrap()))
        });
        group.bench_function(BenchmarkId::new("verify_net_n16384_s2", mode), |b| {
            b.iter(|| pool.install(|| verify_net(&big_net, 0).unwrap()))
        });
        group.bench_function(BenchmarkId::new("exactness_n512_s2", mode), |b| {
            b.iter(|| pool.install(|| exactness_report(&net_2d, 0).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
