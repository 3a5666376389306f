use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use mcg_bench::{presentations, SURFACES};
use mcg_core::catalog::full_presentation;
use mcg_core::delta::{check_derivations, epsilon_table};
use mcg_core::extension::extend;
use mcg_core::homology::verify_presentation;
use mcg_core::serial::{self, Format};
use mcg_core::subgroup::basis_report;

fn catalog(c: &mut Criterion) {
    let mut group = c.benchmark_group("present");
    for (g, n) in SURFACES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{g},{n}")), &(g, n), |b, &(g, n)| {
            b.iter(|| full_presentation(black_box(g), black_box(n)).unwrap())
        });
    }
    group.finish();
}

fn verify(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    for (g, n) in SURFACES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{g},{n}")), &(g, n), |b, &(g, n)| {
            b.iter(|| verify_presentation(g, n).unwrap())
        });
    }
    group.finish();
}

fn abelianize(c: &mut Criterion) {
    let mut group = c.benchmark_group("abelianize");
    for ((g, n), p) in presentations() {
        group.bench_function(format!("{g},{n}"), |b| b.iter(|| p.abelianization().unwrap()));
    }
    group.finish();
}

fn serialize(c: &mut Criterion) {
    let mut group = c.benchmark_group("serialize");
    for ((g, n), p) in presentations() {
        let text = serial::to_structured(&p);
        group.bench_function(format!("render {g},{n}"), |b| b.iter(|| serial::to_structured(black_box(&p))));
        group.bench_function(format!("parse {g},{n}"), |b| {
            b.iter(|| serial::parse(black_box(&text), Format::Structured).unwrap())
        });
    }
    group.finish();
}

fn extension(c: &mut Criterion) {
    let table = epsilon_table(4, 4).unwrap();
    c.bench_function("extend 4,4", |b| b.iter(|| extend(4, 4, &table.values).unwrap()));
    c.bench_function("subgroup basis 6,5", |b| b.iter(|| basis_report(6, 5).unwrap()));
    c.bench_function("derivations 6,4", |b| b.iter(|| check_derivations(6, 4).unwrap()));
}

criterion_group!(benches, catalog, verify, abelianize, serialize, extension);
criterion_main!(benches);
