//! Kernel benchmarks: scalar arithmetic, operator composition, bracket
//! evaluation, and one catalog comparison. These are the pieces the
//! factorial-size identity sums grind on.

use criterion::{criterion_group, criterion_main, Criterion};
use rpq_bench::w_fixture;
use rpq_core::backend::DeformationSpec;
use rpq_core::brackets::{check_gsji, n_bracket, BracketInput, OpArena};
use rpq_core::catalog::{compare, Family, RelationInstance, RepairFlags};
use rpq_core::halfint::HalfInt;
use std::hint::black_box;

fn scalar_ops(c: &mut Criterion) {
    let spec = DeformationSpec::pq_case();
    let a = spec.falling_factorial(HalfInt::from_int(6), 4);
    let b = spec.deformed_binomial(6, 3).unwrap();
    c.bench_function("scalar_mul_reduced", |bench| {
        bench.iter(|| black_box(&a) * black_box(&b))
    });
    c.bench_function("scalar_add_common_den", |bench| {
        bench.iter(|| black_box(&a) + black_box(&a))
    });
}

fn operator_products(c: &mut Criterion) {
    let spec = DeformationSpec::pq_case();
    let (ops, _) = w_fixture(&spec);
    c.bench_function("w_compose_pair", |bench| {
        bench.iter(|| black_box(&ops[0]).compose(black_box(&ops[1])))
    });
    c.bench_function("w_compose_chain7", |bench| {
        bench.iter(|| {
            let mut acc = ops[0].clone();
            for o in &ops[1..] {
                acc = acc.compose(o);
            }
            black_box(acc)
        })
    });
}

fn brackets(c: &mut Criterion) {
    let spec = DeformationSpec::q_case();
    let (ops, ws) = w_fixture(&spec);
    c.bench_function("bracket_n3", |bench| {
        bench.iter(|| {
            let arena = OpArena::new();
            let input = BracketInput::new(ops[..3].to_vec());
            black_box(n_bracket(&arena, &spec, &input).unwrap())
        })
    });
    c.bench_function("bracket_n4_memoized", |bench| {
        bench.iter(|| {
            let arena = OpArena::new();
            let input = BracketInput::with_weights(ops[..4].to_vec(), ws[..4].to_vec());
            black_box(n_bracket(&arena, &spec, &input).unwrap())
        })
    });
    c.bench_function("gsji_n2_triple", |bench| {
        bench.iter(|| {
            let arena = OpArena::new();
            black_box(check_gsji(&arena, &spec, 2, &ops[..3], &ws[..3]).unwrap())
        })
    });
}

fn catalog_compare(c: &mut Criterion) {
    let spec = DeformationSpec::pq_case();
    let repairs = RepairFlags::default();
    let inst = RelationInstance::new(
        Family::Shov1,
        &[("s", 2), ("r", 1), ("m", -1), ("n", 2)],
    );
    c.bench_function("compare_shov1", |bench| {
        bench.iter(|| {
            let arena = OpArena::new();
            black_box(compare(&arena, &inst, &spec, &repairs))
        })
    });
}

criterion_group!(benches, scalar_ops, operator_products, brackets, catalog_compare);
criterion_main!(benches);
