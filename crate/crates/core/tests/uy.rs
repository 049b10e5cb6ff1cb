use conifold::curvature::uy_inequality_margin;
use conifold::linalg::{adjoint, c, mat_mul, zeros3, M3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_matrix<R: Rng>(rng: &mut R, scale: f64) -> M3 {
    std::array::from_fn(|_| std::array::from_fn(|_| c(rng.sample::<f64, _>(StandardNormal) * scale, rng.sample::<f64, _>(StandardNormal) * scale)))
}

fn random_positive<R: Rng>(rng: &mut R) -> M3 {
    let a = random_matrix(rng, 1.0);
    let mut p = mat_mul(&a, &adjoint(&a));
    for i in 0..3 {
        p[i][i] += c(0.05, 0.0);
    }
    p
}

fn draw(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hh = random_positive(&mut rng);
    let h = random_positive(&mut rng);
    let g = random_positive(&mut rng);
    let sigma = rng.random_range(0.01..=1.0);
    let dh: [M3; 3] = std::array::from_fn(|_| random_matrix(&mut rng, 1.0));
    uy_inequality_margin(&hh, &h, &g, sigma, &dh, None).unwrap().margin
}

#[test]
fn margin_is_nonnegative_on_random_draws() {
    let worst = (0..1000u64).map(|s| draw(1000 + s)).fold(f64::INFINITY, f64::min);
    assert!(worst >= -1e-8, "{worst:e}");
}

#[test]
fn equal_metrics_give_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = random_positive(&mut rng);
    let g = random_positive(&mut rng);
    let m = uy_inequality_margin(&h, &h, &g, 0.5, &[zeros3(); 3], None).unwrap();
    assert!(m.lhs.abs() < 1e-14 && m.rhs.abs() < 1e-14);
}

#[test]
fn sigma_one_commuting_case_is_an_equality() {
    let mut hh = zeros3();
    let mut h = zeros3();
    let mut g = zeros3();
    for i in 0..3 {
        hh[i][i] = c(1.0, 0.0);
        h[i][i] = c(0.5 + i as f64, 0.0);
        g[i][i] = c(1.0 + 0.3 * i as f64, 0.0);
    }
    let dh: [M3; 3] = std::array::from_fn(|j| {
        let mut d = zeros3();
        for i in 0..3 {
            d[i][i] = c(0.2 * (i + j) as f64 - 0.3, 0.0);
        }
        d
    });
    let m = uy_inequality_margin(&hh, &h, &g, 1.0, &dh, None).unwrap();
    assert!(m.margin.abs() < 1e-8 * m.rhs.abs().max(1.0), "{m:?}");
}

proptest! {
    #[test]
    fn margin_nonnegative_prop(seed in any::<u64>()) {
        prop_assert!(draw(seed) >= -1e-8);
    }
}
