use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use stinespring::{
    construct_minimal_pair, is_completely_positive, minimal_stinespring, minimal_stinespring_gram,
    schur_example, unitary_equivalence, verify_phi_map, verify_representation, TolerancePolicy,
};
use stinespring_bench::{cp_map, phi_map};

fn stinespring_routes(c: &mut Criterion) {
    let tol = TolerancePolicy::default();
    let mut group = c.benchmark_group("minimal_stinespring");
    for (n, h1) in [(2, 2), (3, 4), (4, 4)] {
        let phi = cp_map(n, h1, 11);
        let label = format!("n{n}_h{h1}");
        group.bench_with_input(BenchmarkId::new("kraus", &label), &phi, |b, phi| {
            b.iter(|| minimal_stinespring(black_box(phi), &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gram", &label), &phi, |b, phi| {
            b.iter(|| minimal_stinespring_gram(black_box(phi), &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("cp_test", &label), &phi, |b, phi| {
            b.iter(|| is_completely_positive(black_box(phi), &tol))
        });
    }
    group.finish();
}

fn module_pipeline(c: &mut Criterion) {
    let tol = TolerancePolicy::default();
    let mut group = c.benchmark_group("module");
    for (n, h1, k, r) in [(2, 2, 2, 2), (3, 2, 2, 3), (3, 4, 2, 4)] {
        let big_phi = phi_map(n, h1, k, r, 5);
        let label = format!("n{n}_k{k}_r{r}_h2_{}", big_phi.h2_dim());
        group.bench_with_input(
            BenchmarkId::new("verify_phi_map", &label),
            &big_phi,
            |b, x| b.iter(|| verify_phi_map(black_box(x), &tol)),
        );
        group.bench_with_input(
            BenchmarkId::new("construct_pair", &label),
            &big_phi,
            |b, x| b.iter(|| construct_minimal_pair(black_box(x), &tol).unwrap()),
        );
        let pair = construct_minimal_pair(&big_phi, &tol).unwrap();
        group.bench_with_input(BenchmarkId::new("verify", &label), &pair, |b, p| {
            b.iter(|| verify_representation(big_phi.phi(), &big_phi, black_box(p), &tol))
        });
        group.bench_with_input(BenchmarkId::new("equivalence", &label), &pair, |b, p| {
            b.iter(|| unitary_equivalence(black_box(p), p, &tol).unwrap())
        });
    }
    group.finish();
}

fn schur_example_end_to_end(c: &mut Criterion) {
    let tol = TolerancePolicy::default();
    let big_phi = schur_example::big_phi();
    let explicit = schur_example::explicit_pair();
    c.bench_function("schur_example", |b| {
        b.iter(|| {
            let pair = construct_minimal_pair(black_box(&big_phi), &tol).unwrap();
            unitary_equivalence(&explicit, &pair, &tol).unwrap()
        })
    });
}

criterion_group!(
    benches,
    stinespring_routes,
    module_pipeline,
    schur_example_end_to_end
);
criterion_main!(benches);
