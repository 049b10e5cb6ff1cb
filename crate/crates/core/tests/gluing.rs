use conifold::gluing::*;
use conifold::linalg::c;
use rayon::prelude::*;

fn hym_ts() -> Vec<f64> {
    (0..6).map(|i| 10f64.powf(-2.0 - 0.2 * i as f64)).collect()
}

#[test]
fn fly_form_is_positive_and_closed_in_every_region() {
    let base = GlueConfig::new(100.0, c(0.0, 0.0), 1.0 / 3.0).unwrap();
    let model = FlyModel::default();
    let (cfg, chi, measured) = calibrate_fly(&base, &model, 200, 3).unwrap();
    eprintln!("C = {measured:.5}, C0 = {:.5}", cfg.c0);
    assert!(measured > 0.0);
    for (k, region) in FlyRegion::ALL.into_iter().enumerate() {
        let (r1, r2) = region.range(cfg.r_glue);
        let pts = sample_resolution(r1, r2, 200, 40 + k as u64).unwrap();
        let min_margin = pts
            .par_iter()
            .map(|p| fly_glued_form(&cfg, &model, &chi, p).unwrap().margin)
            .reduce(|| f64::INFINITY, f64::min);
        let max_d = pts[..50]
            .par_iter()
            .map(|p| fly_d_residual(&cfg, &model, &chi, p).unwrap())
            .reduce(|| 0.0, f64::max);
        eprintln!("{}: min margin {min_margin:.4e}, max d-residual {max_d:.2e}", region.name());
        assert!(min_margin > 0.0, "{}", region.name());
        assert!(max_d <= 1e-6, "{}", region.name());
    }
}

#[test]
fn transition_constant_is_stable_in_r() {
    let model = FlyModel::default();
    let cs: Vec<f64> = [50.0, 200.0]
        .iter()
        .map(|&r| measure_transition_constant(&GlueConfig::new(r, c(0.0, 0.0), 1.0 / 3.0).unwrap(), &model, 100, 5).unwrap())
        .collect();
    assert!((cs[0] - cs[1]).abs() < 0.05 * cs[1], "{cs:?}");
}

#[test]
fn hym_inner_residual_vanishes() {
    for lambda in [1.0 / 3.0, 0.5] {
        let tail = SyntheticTail::new(lambda, DEFAULT_TAIL_AMPLITUDE);
        for t in hym_ts() {
            let cfg = GlueConfig::new(100.0, c(t, 0.0), lambda).unwrap();
            let s = hym_region_sup(&cfg, &tail, HymRegion::Inner, 1000, 21).unwrap();
            assert!(s.raw <= 1e-10, "t = {t:e}: {:e}", s.raw);
        }
    }
}

#[test]
fn hym_transition_exponent_matches_lambda_alpha_over_three() {
    for lambda in [1.0 / 3.0, 0.5] {
        let scan = hym_exponent_scan(100.0, lambda, DEFAULT_TAIL_AMPLITUDE, HymRegion::Transition, &hym_ts(), 4000, 21).unwrap();
        let target = lambda * scan.alpha / 3.0;
        eprintln!("λ = {lambda:.4}: slope {:.4} target {target:.4}", scan.fit.slope);
        assert!((scan.fit.slope - target).abs() <= 0.2 * target);
    }
}

// The zero-tail residual in the outer region is second order in |t| at fixed r.
#[test]
fn hym_outer_zero_tail_is_second_order_at_fixed_radius() {
    let tail = SyntheticTail::zero();
    let pts: Vec<(f64, f64)> = hym_ts()
        .into_iter()
        .map(|t| {
            let cfg = GlueConfig::new(100.0, c(t, 0.0), 1.0 / 3.0).unwrap();
            let samples = conifold::analysis::sample_region(cfg.t, 0.5, 0.55, 20, 21).unwrap();
            let sup = samples
                .iter()
                .map(|s| {
                    let ch = conifold::make_cyl_chart(&s.point).unwrap();
                    let w = [c(0.0, 0.0); 3];
                    conifold::curvature::hym_residual_fields(|w| ch.co_metric(w), |w, o| glued_hym_metric(&cfg, &tail, &ch, w, o), w).unwrap().1
                })
                .fold(0.0, f64::max);
            (t, sup)
        })
        .collect();
    let fit = conifold::analysis::fit_decay_span(&pts, HYM_SCAN_MIN_DECADES).unwrap();
    assert!((fit.slope - 2.0).abs() < 0.1, "{}", fit.slope);
}

#[test]
fn glued_metric_rejects_foreign_chart() {
    let cfg = GlueConfig::new(100.0, c(1e-2, 0.0), 0.5).unwrap();
    let other = conifold::analysis::sample_region(c(2e-2, 0.0), 0.5, 0.6, 1, 1).unwrap();
    let ch = conifold::make_cyl_chart(&other[0].point).unwrap();
    assert!(glued_hym_metric(&cfg, &SyntheticTail::zero(), &ch, [c(0.0, 0.0); 3], 2).is_err());
}

// |t|^{1−α} is still about 0.6 near |t| = 10⁻², so the same scan deeper
// in |t| shows where the exponent settles.
#[test]
fn hym_transition_exponent_settles_at_small_t() {
    let ts: Vec<f64> = (0..6).map(|i| 10f64.powf(-10.0 - 0.4 * i as f64)).collect();
    for lambda in [1.0 / 3.0, 0.5] {
        let scan = hym_exponent_scan(100.0, lambda, DEFAULT_TAIL_AMPLITUDE, HymRegion::Transition, &ts, 1000, 21).unwrap();
        let target = lambda * scan.alpha / 3.0;
        assert!((scan.fit.slope - target).abs() <= 0.1 * target, "λ = {lambda}: {}", scan.fit.slope);
    }
}
