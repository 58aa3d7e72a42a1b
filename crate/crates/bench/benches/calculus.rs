use std::hint::black_box;

use afc_bench::{cube, dense, square};
use afc_core::bicomplex::check_theorem;
use afc_core::bicomplex::seeded::{random_row_sdr, Shape};
use afc_core::calculus::{self as calc, DeltaRoute, NablaDefinition, Settings};
use afc_core::Field;
use criterion::{criterion_group, criterion_main, Criterion};

fn linalg(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank");
    for (name, field) in [("f2", Field::F2), ("q", Field::Rational)] {
        let m = dense(field, 48, 1);
        group.bench_function(name, |b| b.iter(|| black_box(&m).rank()));
    }
    group.finish();
}

fn derivatives(c: &mut Criterion) {
    let s = Settings::new(5);
    let sq = square(Field::F2, 5);
    c.bench_function("nabla_kernel_square", |b| b.iter(|| calc::nabla(black_box(&sq), NablaDefinition::ViaKernel, s).unwrap()));
    c.bench_function("faa_di_bruno_rhs_square_n3", |b| b.iter(|| calc::faa_di_bruno_rhs(black_box(&sq), 3, s).unwrap()));
    let cb = cube(Field::F2, 5);
    c.bench_function("delta2_cube_homology", |b| {
        b.iter(|| {
            let d = calc::delta_n(black_box(&cb), 2, DeltaRoute::Recursive, s).unwrap();
            calc::HomologyTable::new(&d).unwrap().at(&[1, 1, 1], None).unwrap()
        })
    });
}

fn row_sdr(c: &mut Criterion) {
    let r = random_row_sdr(3, Field::F2, Shape { rows: 4, row_len: 5, max_dim: 3 });
    c.bench_function("row_sdr_theorem_audit", |b| b.iter(|| check_theorem(black_box(&r))));
}

criterion_group!(benches, linalg, derivatives, row_sdr);
criterion_main!(benches);
