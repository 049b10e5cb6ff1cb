use conifold::potentials::{f1_asymptotics, f1_remainder, fly_cutoff};

// Frozen from a 40-digit solve of the 4×4 knot system.
const CUTOFF_R100: [f64; 4] = [-250.00037491918287806, 75.000112475759550457, 7.4992601210369049074e-15, -1.4996771064960768381e-6];
const CUTOFF_R10: [f64; 4] = [-253.71011903847055501, 76.113505923605203842, 7.5233930245974168187e-7, -0.014878093119005228258];

// Closed form of the limit of the remainder.
fn c0_oracle() -> f64 {
    3.0 * 6f64.ln() - 3.0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn cutoff_coefficients_match_leading_order() {
    let r = 100.0;
    let p = fly_cutoff(r).unwrap();
    let tol = 10.0 / (r * r);
    assert!(rel(p.a, -250.0) <= tol, "a = {}", p.a);
    assert!(rel(p.b, 75.0) <= tol, "b = {}", p.b);
    assert!(rel(p.c, 75.0 * r.powi(-8)) <= tol, "c = {:e}", p.c);
    assert!(rel(p.d, -150.0 * r.powi(-4)) <= tol, "d = {:e}", p.d);
    assert!(p.min_v >= -1e-12, "min v = {:e}", p.min_v);
    assert!(p.min_weighted >= -350.0 / r.powi(4), "min weighted = {:e}", p.min_weighted);
}

#[test]
fn cutoff_coefficients_match_frozen_solve() {
    for (r, want) in [(100.0, CUTOFF_R100), (10.0, CUTOFF_R10)] {
        let p = fly_cutoff(r).unwrap();
        for (got, w) in [p.a, p.b, p.c, p.d].into_iter().zip(want) {
            assert!(rel(got, w) < 1e-9, "R = {r}: {got:e} vs {w:e}");
        }
    }
}

#[test]
fn cutoff_rejects_small_r() {
    assert!(fly_cutoff(5.0).is_err());
}

#[test]
fn cutoff_slope_is_one_inside_and_zero_outside() {
    let p = fly_cutoff(50.0).unwrap();
    assert!((p.chi_deriv(1.0, 0) - 1.0).abs() < 1e-12);
    assert!((p.chi_deriv(1.0, 1) - 1.0).abs() < 1e-12);
    assert!(p.chi_deriv(2600.0, 1).abs() < 1e-12);
    assert!(p.chi_deriv(2600.0, 2).abs() < 1e-12);
}

fn f1_grid() -> Vec<f64> {
    (0..=40).map(|i| 10f64.powf(3.0 + 0.1 * i as f64)).collect()
}

#[test]
fn f1_remainder_converges_to_the_constant() {
    let fit = f1_asymptotics(&f1_grid()).unwrap();
    eprintln!("c0 = {:.15}, exponent = {:.4}", fit.c0, fit.exponent);
    assert!((fit.c0 - c0_oracle()).abs() < 1e-6, "c0 = {}", fit.c0);
    assert!((-0.8..=-0.55).contains(&fit.exponent), "exponent = {}", fit.exponent);
    // Cauchy: grid differences shrink monotonically.
    let diffs: Vec<f64> = fit.remainder.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    assert!(diffs.windows(2).all(|d| d[1] < d[0]));
}

#[test]
fn f1_remainder_frozen_value() {
    // Terms of size 3e4 cancel, so only ~11 digits survive in double precision.
    assert!(rel(f1_remainder(1e7), 2.3751491434593986) < 1e-10);
}

#[test]
fn f1_grid_validation() {
    assert!(f1_asymptotics(&[1e3, 2e3, 3e3, 4e3, 5e3, 6e3]).is_err());
    assert!(f1_asymptotics(&[1e2, 1e3, 1e4, 1e5, 1e6, 1e7]).is_err());
}
