use std::hint::black_box;

use conifold::analysis::{co_metric_field, mc_integral, sample_region};
use conifold::curvature::{chern_curvature_at, hym_residual_fields};
use conifold::gluing::{fly_glued_form, glued_hym_metric, FlyModel, GlueConfig, SyntheticTail};
use conifold::linalg::c;
use conifold::make_cyl_chart;
use conifold::potentials::{co_resolution_profile, fly_cutoff};
use conifold_bench::{fixture_samples, W0};
use criterion::{criterion_group, criterion_main, Criterion};

fn metric_and_curvature(cr: &mut Criterion) {
    let s = &fixture_samples(1)[0];
    let chart = make_cyl_chart(&s.point).unwrap();
    cr.bench_function("co_metric_order2", |b| b.iter(|| co_metric_field(black_box(&chart), W0, 2).unwrap()));
    let g = co_metric_field(&chart, W0, 2).unwrap();
    cr.bench_function("chern_curvature", |b| b.iter(|| chern_curvature_at(black_box(&g)).unwrap()));
}

fn glued_hym(cr: &mut Criterion) {
    let cfg = GlueConfig::new(100.0, c(1e-3, 0.0), 1.0 / 3.0).unwrap();
    let tail = SyntheticTail::new(1.0 / 3.0, 1.0);
    let s = &fixture_samples(1)[0];
    let chart = make_cyl_chart(&s.point).unwrap();
    cr.bench_function("glued_hym_residual", |b| {
        b.iter(|| {
            hym_residual_fields(
                |w| chart.co_metric(w),
                |w, o| glued_hym_metric(&cfg, &tail, &chart, w, o),
                black_box(W0),
            )
            .unwrap()
        })
    });
}

fn fly(cr: &mut Criterion) {
    let chi = fly_cutoff(100.0).unwrap();
    let cfg = GlueConfig::new(100.0, c(0.0, 0.0), 1.0 / 3.0).unwrap();
    let model = FlyModel::default();
    let p = conifold::gluing::sample_resolution(2.0, 5.0, 1, 3).unwrap().remove(0);
    cr.bench_function("fly_glued_form", |b| b.iter(|| fly_glued_form(&cfg, &model, &chi, black_box(&p)).unwrap()));
    cr.bench_function("resolution_profile", |b| b.iter(|| co_resolution_profile(1.0, black_box(3.7), 4).unwrap()));
}

fn sampling(cr: &mut Criterion) {
    cr.bench_function("sample_region_1000", |b| b.iter(|| sample_region(c(1e-3, 0.0), 0.2, 1.0, black_box(1000), 5).unwrap()));
    let samples = fixture_samples(1000);
    let v: Vec<f64> = samples.iter().map(|s| s.r0).collect();
    cr.bench_function("mc_integral_1000", |b| b.iter(|| mc_integral(black_box(&v), &samples).unwrap()));
}

criterion_group!(benches, metric_and_curvature, glued_hym, fly, sampling);
criterion_main!(benches);
