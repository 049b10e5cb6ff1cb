use conifold::analysis::*;
use conifold::curvature::{torsion, torsion_norm};
use conifold::forms::{d_residual, sqrt_22_generic, Form};
use conifold::gluing::*;
use conifold::linalg::{c, values, C};
use conifold::make_cyl_chart;

const W0: [C; 3] = [C { re: 0.0, im: 0.0 }; 3];

#[test]
fn mc_volume_matches_quadrature_oracle() {
    let t = c(1e-2, 0.0);
    let samples = sample_region(t, 0.3, 1.0, 10_000, 1).unwrap();
    let est = mc_integral(&vec![1.0; samples.len()], &samples).unwrap();
    let oracle = annulus_volume_oracle(t, 0.3, 1.0, 64).unwrap();
    eprintln!("MC {:.6} ± {:.6}, oracle {oracle:.6}", est.value, est.stderr);
    assert!((est.value - oracle).abs() <= 3.0 * est.stderr);
}

#[test]
fn stderr_halves_when_samples_quadruple() {
    let t = c(1e-2, 0.0);
    let f = |s: &Sample| s.point.z[0].re * s.point.z[1].im + s.r0;
    let err = |n: usize| {
        let samples = sample_region(t, 0.3, 1.0, n, 2).unwrap();
        let v: Vec<f64> = samples.iter().map(f).collect();
        mc_integral(&v, &samples).unwrap().stderr
    };
    let ratio = err(8000) / err(2000);
    assert!((ratio - 0.5).abs() <= 0.15, "{ratio}");
}

#[test]
fn odd_function_integrates_to_zero() {
    let t = c(1e-2, 0.0);
    let samples = sample_region(t, 0.3, 1.0, 10_000, 3).unwrap();
    let v: Vec<f64> = samples.iter().map(|s| s.point.z[2].re).collect();
    let est = mc_integral(&v, &samples).unwrap();
    assert!(est.value.abs() <= 3.0 * est.stderr, "{est:?}");
}

fn spec(t: f64, beta: f64, r1: f64, r2: f64) -> WeightedNormSpec {
    WeightedNormSpec { order: 0, holder: None, beta, r1, r2, t: c(t, 0.0), samples: 200, seed: 5 }
}

fn co_metric(ch: &conifold::Chart, w: [C; 3], o: usize) -> conifold::error::Result<conifold::linalg::JM3> {
    co_metric_field(ch, w, o)
}

#[test]
fn weighted_norm_of_scaled_identity_is_one() {
    let beta = -0.5;
    let h = unit_weighted_identity(beta);
    let n = weighted_norm(&h, &spec(1e-3, beta, 0.2, 1.0), &co_metric, &co_metric).unwrap();
    assert!((n.value - 1.0).abs() <= 0.05, "{}", n.value);
}

#[test]
fn weighted_norm_is_monotone_in_the_annulus() {
    let h = unit_weighted_identity(-1.0);
    let small = weighted_norm(&h, &spec(1e-3, -0.5, 0.3, 0.6), &co_metric, &co_metric).unwrap().value;
    let big = weighted_norm(&h, &spec(1e-3, -0.5, 0.2, 0.9), &co_metric, &co_metric).unwrap().value;
    assert!(big >= small);
}

#[test]
fn annulus_norm_matches_rescaled_expression() {
    let beta = -0.5;
    let h = unit_weighted_identity(-1.0);
    for rhat in [0.2, 0.4] {
        let direct = weighted_norm(&h, &spec(1e-3, beta, 0.5 * rhat, 2.0 * rhat), &co_metric, &co_metric).unwrap().value;
        let rescaled = annulus_norm_rescaled(&h, &co_metric, c(1e-3, 0.0), rhat, beta, 200, 5).unwrap();
        let q = direct / rescaled;
        assert!((0.25..=4.0).contains(&q), "r̂ = {rhat}: {q}");
    }
}

#[test]
fn local_bounds_control_the_global_norm_uniformly_in_t() {
    let beta = -0.5;
    let h = unit_weighted_identity(-1.0);
    let mut cs = vec![];
    for t in [1e-2, 1e-3] {
        let r1 = 2.0 * f64::cbrt(t);
        let global = weighted_norm(&h, &spec(t, beta, r1, 1.0), &co_metric, &co_metric).unwrap().value;
        // annuli U_r̂ = [r̂/2, 2r̂] covering [r1, 1]
        let mut rhats = vec![];
        let mut rhat = r1;
        while rhat < 0.5 {
            rhats.push(rhat);
            rhat *= 2.0;
        }
        rhats.push(0.5);
        let local = rhats
            .iter()
            .map(|&rh| annulus_norm_rescaled(&h, &co_metric, c(t, 0.0), rh, beta, 100, 6).unwrap())
            .fold(0.0, f64::max);
        cs.push(global / local);
    }
    eprintln!("global/local: {cs:?}");
    assert!(cs.iter().all(|&q| q <= 4.0));
    assert!((cs[0] - cs[1]).abs() <= 0.5 * cs[0].max(cs[1]));
}

#[test]
fn d_residual_detects_a_non_closed_form() {
    let t = c(1e-2, 0.0);
    let s = &sample_region(t, 0.5, 0.6, 1, 4).unwrap()[0];
    let ch = make_cyl_chart(&s.point).unwrap();
    let field = |w: [C; 3], o: usize| {
        let r = radius_jet(&ch, w, o + 2)?;
        let r2 = Form::scalar(&r * &r);
        let om = r2.i_ddbar();
        let sq = om.wedge(&om);
        let size = sq.values().max_abs();
        Ok(sq.scale_by(&r.truncate(o)).scale(c(1.0 / size, 0.0)))
    };
    assert!(d_residual(field, W0).unwrap() > 1e-2);
}

#[test]
fn glued_fly_metric_is_balanced_but_not_kahler() {
    let base = GlueConfig::new(100.0, c(0.0, 0.0), 1.0 / 3.0).unwrap();
    let model = FlyModel::default();
    let (cfg, chi, _) = calibrate_fly(&base, &model, 50, 3).unwrap();
    let (r1, r2) = FlyRegion::Transition.range(cfg.r_glue);
    for p in sample_resolution(r1, r2, 10, 9).unwrap() {
        let rc = p.res.unwrap();
        let w = [rc.x, rc.u, rc.v];
        let form = fly_glued_form_jets(&cfg, &model, &chi, w, 1).unwrap();
        let g = sqrt_22_generic(&form.to_p22().unwrap()).unwrap();
        let tn = torsion_norm(&values(&g), &torsion(&g).unwrap()).unwrap();
        assert!(tn > 1e-3, "torsion {tn:e}");
        assert!(fly_d_residual(&cfg, &model, &chi, &p).unwrap() <= 1e-10);
    }
}
