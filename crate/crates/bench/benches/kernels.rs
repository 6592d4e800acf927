use carnot_core::extensions::heisenberg_extension;
use carnot_core::field_forms::coframe_form;
use carnot_core::fixtures::winding_map;
use carnot_core::group::bch;
use carnot_core::path_lift::{construct_lift_on_grid, loop_holonomy, FnCurve, GridOptions};
use carnot_core::rational::qf;
use carnot_core::{Func, StratifiedAlgebra};
use criterion::{criterion_group, criterion_main, Criterion};
use std::f64::consts::PI;
use std::hint::black_box;

fn group_law(c: &mut Criterion) {
    let f = StratifiedAlgebra::filiform(6);
    let x: Vec<f64> = (0..7).map(|i| 0.3 * i as f64 - 0.7).collect();
    let y: Vec<f64> = (0..7).map(|i| 0.5 - 0.2 * i as f64).collect();
    c.bench_function("bch f64 filiform-6", |b| b.iter(|| bch(&f, black_box(&x), black_box(&y)).unwrap()));
    let xq: Vec<_> = (0..7).map(|i| qf(3 * i - 7, 10)).collect();
    let yq: Vec<_> = (0..7).map(|i| qf(5 - 2 * i, 10)).collect();
    c.bench_function("bch exact filiform-6", |b| b.iter(|| bch(&f, black_box(&xq), black_box(&yq)).unwrap()));
}

fn rumin_tables(c: &mut Criterion) {
    // fresh algebra each time so the cached complex is rebuilt
    c.bench_function("rumin complex heisenberg-2", |b| {
        b.iter(|| {
            let h = StratifiedAlgebra::heisenberg(2);
            black_box(h.rumin().degree(2).d0_pinv.rows())
        })
    });
}

fn rumin_differential(c: &mut Criterion) {
    let h = StratifiedAlgebra::filiform(4);
    let (x, y) = (Func::var(0), Func::var(1));
    let w = coframe_form(&h, 0).mul_func(&x.mul(&y)).add(&coframe_form(&h, 1).mul_func(&Func::var(2)));
    c.bench_function("d_c on a polynomial 1-form, filiform-4", |b| b.iter(|| black_box(&w).d_c()));
}

fn holonomy(c: &mut Criterion) {
    let ext = heisenberg_extension();
    let lobe = FnCurve {
        point: |t: f64| {
            let th = 2.0 * PI * t;
            vec![th.cos() + 0.3 * (2.0 * th).cos(), 0.7 * th.sin()]
        },
        velocity: |t: f64| {
            let th = 2.0 * PI * t;
            vec![2.0 * PI * (-th.sin() - 0.6 * (2.0 * th).sin()), 2.0 * PI * 0.7 * th.cos()]
        },
    };
    c.bench_function("loop holonomy 1e-12", |b| b.iter(|| loop_holonomy(&ext, &lobe, 1e-12).unwrap()));
    let f = winding_map(2);
    let opts = GridOptions { step: 0.1, radius: 3, ..GridOptions::default() };
    c.bench_function("grid lift winding-2 radius 3", |b| {
        b.iter(|| construct_lift_on_grid(&ext, &ext, &f, &[1.2, 0.0, 0.0], &[1.2, 0.0, 0.0], &opts).unwrap().report.nodes)
    });
}

criterion_group!(benches, group_law, rumin_tables, rumin_differential, holonomy);
criterion_main!(benches);
