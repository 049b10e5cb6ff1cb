use conifold::analysis::{co_metric_field, fit_decay, sample_region};
use conifold::curvature::{anomaly_residual, h_hermitian_residual};
use conifold::gluing::*;
use conifold::jet::Jet;
use conifold::linalg::{c, fro, identity_like, values};
use conifold::make_cyl_chart;

const W: [conifold::linalg::C; 3] = [conifold::linalg::C { re: 0.0, im: 0.0 }; 3];

fn hym_cfg() -> (GlueConfig, SyntheticTail) {
    (GlueConfig::new(100.0, c(1e-2, 0.0), 1.0 / 3.0).unwrap(), SyntheticTail::new(1.0 / 3.0, DEFAULT_TAIL_AMPLITUDE))
}

#[test]
fn linearized_operator_kills_identity_and_preserves_self_adjointness() {
    let (cfg, tail) = hym_cfg();
    let samples = sample_region(cfg.t, 0.2, 1.0, 60, 8).unwrap();
    let field = BumpField::random(0.02, 0.6, 3);
    let mut worst_id: f64 = 0.0;
    let mut worst_herm: f64 = 0.0;
    for s in &samples {
        let ch = make_cyl_chart(&s.point).unwrap();
        let hm = glued_hym_metric(&cfg, &tail, &ch, W, 2).unwrap();
        let g = values(&co_metric_field(&ch, W, 0).unwrap());
        let id = identity_like::<Jet, 3>(&Jet::zero(2));
        worst_id = worst_id.max(fro(&linearized_operator(&g, &hm, &id).unwrap()));
        let h = field.jets(&ch, W, &hm).unwrap();
        let lh = linearized_operator(&g, &hm, &h).unwrap();
        let scale = fro(&lh).max(1.0);
        worst_herm = worst_herm.max(h_hermitian_residual(&values(&hm), &lh) / scale);
    }
    assert!(worst_id <= 1e-10, "{worst_id:e}");
    assert!(worst_herm <= 1e-8, "{worst_herm:e}");
}

#[test]
fn trace_of_linearized_operator_integrates_to_zero() {
    let (cfg, tail) = hym_cfg();
    let samples = sample_region(cfg.t, 0.25, 0.9, 4000, 17).unwrap();
    for k in 0..5 {
        let field = BumpField::random(0.02, 0.6, 100 + k);
        let est = linearized_trace_integral(&cfg, &tail, &field, &samples).unwrap();
        eprintln!("field {k}: {:.3e} ± {:.3e}", est.value, est.stderr);
        assert!(est.value.abs() <= 3.0 * est.stderr, "field {k}: {est:?}");
        assert!(est.stderr > 0.0);
    }
}

#[test]
fn anomaly_residual_vanishes_for_the_co_pair() {
    let t = c(1e-2, 0.0);
    for s in sample_region(t, 0.3, 2.0, 50, 4).unwrap() {
        let ch = make_cyl_chart(&s.point).unwrap();
        let g = co_metric_field(&ch, W, 2).unwrap();
        assert!(anomaly_residual(&g, &g, 1.0).unwrap() <= 1e-6);
    }
}

fn anomaly_profile(t: f64, eps: f64, lambda: f64) -> Vec<(f64, f64)> {
    let r1 = 5.0 * t.cbrt();
    (0..10)
        .map(|i| r1 * (1.0 / r1).powf(i as f64 / 9.0))
        .map(|r| (r, anomaly_shell_sup(c(t, 0.0), r, eps, lambda, 12, 9).unwrap()))
        .collect()
}

#[test]
fn anomaly_residual_of_tailed_pair_decays_faster_than_r_minus_three_and_a_half() {
    let lambda = 1.0 / 3.0;
    let t: f64 = 1e-8;
    let fit = fit_decay(&anomaly_profile(t, t.powf(lambda), lambda)).unwrap();
    eprintln!("anomaly r-exponent {:.3} ± {:.3}", fit.slope, fit.half_width);
    assert!(fit.slope <= -3.5, "{}", fit.slope);
}

#[test]
fn anomaly_residual_scales_like_t_to_the_lambda() {
    let lambda = 1.0 / 3.0;
    let t: f64 = 1e-8;
    let a = anomaly_shell_sup(c(t, 0.0), 0.1, t.powf(lambda), lambda, 12, 9).unwrap();
    let b = anomaly_shell_sup(c(t / 2.0, 0.0), 0.1, (t / 2.0).powf(lambda), lambda, 12, 9).unwrap();
    let want = 2f64.powf(-lambda);
    assert!(((b / a) / want - 1.0).abs() <= 0.25, "{} vs {want}", b / a);
}

#[test]
fn theta_perturbed_metric_stays_close() {
    use conifold::forms::square_p;
    use conifold::linalg::{cholesky, herm_eig, inv3, mat_add, mat_mul, mat_sub, adjoint};
    let tn: f64 = 1e-4;
    let t = c(tn, 0.0);
    let mut worst: f64 = 0.0;
    for s in sample_region(t, 0.1, 1.0, 40, 6).unwrap() {
        let ch = make_cyl_chart(&s.point).unwrap();
        let omega = co_metric_field(&ch, W, 2).unwrap();
        let theta = synthetic_theta(&ch, W, 2, 1.0).unwrap();
        let g = theta_perturbed_metric(&omega, &theta).unwrap();
        let (ov, gv) = (values(&omega), values(&g));
        // eigenvalues of g_FLY relative to g_t
        let l = cholesky(&ov).unwrap();
        let li = inv3(&l).unwrap();
        let (ev, _) = herm_eig(&mat_mul(&mat_mul(&li, &mat_sub(&gv, &ov)), &adjoint(&li)));
        let dev = ev.iter().map(|e| e * e).sum::<f64>().sqrt();
        assert!(ev.iter().all(|e| (-0.5..=1.0).contains(e)), "{ev:?}");
        worst = worst.max(dev);
        let back = values(&square_p(&g));
        let want = mat_add(&values(&square_p(&omega)), &values(&theta));
        assert!(fro(&mat_sub(&back, &want)) <= 1e-10 * fro(&want));
    }
    eprintln!("C = {:.3}", worst / tn.powf(2.0 / 3.0));
    assert!(worst <= 10.0 * tn.powf(2.0 / 3.0), "{worst:e}");
}

#[test]
fn theta_above_the_smallness_limit_is_rejected() {
    let t = c(1e-2, 0.0);
    let s = &sample_region(t, 0.3, 0.4, 1, 2).unwrap()[0];
    let ch = make_cyl_chart(&s.point).unwrap();
    let omega = co_metric_field(&ch, W, 2).unwrap();
    let theta = synthetic_theta(&ch, W, 2, 10.0).unwrap();
    assert!(theta_perturbed_metric(&omega, &theta).is_err());
}
