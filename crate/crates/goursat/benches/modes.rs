//! Compares the rayon-parallel and sequential execution paths on the two
//! workloads that actually fan out over sample points: generic-rank
//! certification of a derived flag and verification of a constructed
//! contact transformation.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use goursat::contact::generate_contact_system;
use goursat::exec;
use goursat::sample::SampleConfig;
use goursat::signature;
use goursat::TypeVector;

fn recognition_workload(cfg: &SampleConfig) {
    let tau = TypeVector::from_list(&[0, 0, 1, 1]).unwrap();
    let system = generate_contact_system(&tau, cfg).unwrap();
    let analysis = signature::analyze(&system.distribution, cfg).unwrap();
    let verdict = signature::is_goursat_bundle(&analysis, cfg).unwrap();
    assert!(verdict.accepted);
}

fn flag_workload(cfg: &SampleConfig) {
    let tau = TypeVector::from_list(&[1, 2]).unwrap();
    let system = generate_contact_system(&tau, cfg).unwrap();
    let analysis = signature::analyze(&system.distribution, cfg).unwrap();
    assert_eq!(analysis.signature.derived_length(), 2);
}

fn bench_modes(c: &mut Criterion) {
    let mut group = c.benchmark_group("execution-mode");
    group.sample_size(10);
    let cfg = SampleConfig::with_seed(5);
    for &parallel in &[false, true] {
        let label = if parallel { "parallel" } else { "sequential" };
        group.bench_with_input(
            BenchmarkId::new("recognize-0011", label),
            &parallel,
            |b, &p| {
                exec::set_parallel(p);
                b.iter(|| recognition_workload(&cfg));
            },
        );
        group.bench_with_input(BenchmarkId::new("flag-12", label), &parallel, |b, &p| {
            exec::set_parallel(p);
            b.iter(|| flag_workload(&cfg));
        });
    }
    exec::set_parallel(true);
    group.finish();
}

criterion_group!(benches, bench_modes);
criterion_main!(benches);
