use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use eschubert_core::classes::{bs_table, rmatrix_table};
use eschubert_core::elliptic::{delta_series, delta_series_product, sample_point, ComplexBackend, ExactBackend, DEFAULT_Q};
use eschubert_core::verify::point_rng;
use eschubert_core::{RootSystem, WeylGroup};
use num_complex::Complex64;
use num_rational::BigRational;

fn group(label: &str) -> WeylGroup {
    WeylGroup::new(&RootSystem::from_label_str(label).unwrap()).unwrap()
}

fn tables(c: &mut Criterion) {
    let complex = ComplexBackend::new(Complex64::new(DEFAULT_Q, 0.0)).unwrap();
    for label in ["B2", "G2", "A3", "F4"] {
        let w = group(label);
        let word = w.reduced_word(w.longest());
        let p = sample_point(&complex, w.rank(), &mut point_rng(1, 0));
        c.bench_function(&format!("bs_table complex {label} longest"), |b| {
            b.iter(|| bs_table(&complex, &w, black_box(&word), &p).unwrap())
        });
    }
    for label in ["B2", "G2", "A3"] {
        let w = group(label);
        let word = w.reduced_word(w.longest());
        let p = sample_point(&complex, w.rank(), &mut point_rng(1, 0));
        c.bench_function(&format!("rmatrix_table complex {label} longest"), |b| {
            b.iter(|| rmatrix_table(&complex, &w, black_box(&word), &p).unwrap())
        });
    }
    // fresh backend per run so the delta cache does not hide the work
    let w = group("B2");
    let word = w.reduced_word(w.longest());
    let p = sample_point(&ExactBackend::new(8).unwrap(), 2, &mut point_rng(1, 0));
    c.bench_function("bs_table exact q^8 B2 longest", |b| {
        b.iter(|| bs_table(&ExactBackend::new(8).unwrap(), &w, black_box(&word), &p).unwrap())
    });
}

fn delta(c: &mut Criterion) {
    let a = BigRational::new(37.into(), 91.into());
    let b = BigRational::new(64.into(), 13.into());
    for order in [4, 8, 16] {
        c.bench_function(&format!("delta_series order {order}"), |bench| {
            bench.iter(|| delta_series(black_box(&a), black_box(&b), order).unwrap())
        });
        c.bench_function(&format!("delta_series_product order {order}"), |bench| {
            bench.iter(|| delta_series_product(black_box(&a), black_box(&b), order).unwrap())
        });
    }
}

criterion_group!(benches, tables, delta);
criterion_main!(benches);
