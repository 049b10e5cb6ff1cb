use conifold::forms::{components_22, sqrt_22, sqrt_22_variation, square_p, Comp4, Form};
use conifold::linalg::{adjoint, c, fro, mat_add, mat_mul, mat_scale, mat_sub, M3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_matrix<R: Rng>(rng: &mut R) -> M3 {
    std::array::from_fn(|_| std::array::from_fn(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))))
}

fn random_positive<R: Rng>(rng: &mut R) -> M3 {
    let a = random_matrix(rng);
    let mut p = mat_mul(&a, &adjoint(&a));
    for i in 0..3 {
        p[i][i] += c(0.1, 0.0);
    }
    p
}

fn random_hermitian<R: Rng>(rng: &mut R) -> M3 {
    let a = random_matrix(rng);
    mat_scale(&mat_add(&a, &adjoint(&a)), c(0.5, 0.0))
}

#[test]
fn square_root_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_positive(&mut rng);
        let g = sqrt_22(&p).unwrap();
        worst = worst.max(fro(&mat_sub(&square_p(&g), &p)) / fro(&p));
    }
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn variation_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let zero: Comp4 = [[[[c(0.0, 0.0); 3]; 3]; 3]; 3];
    for _ in 0..20 {
        let p = random_positive(&mut rng);
        let dp = random_hermitian(&mut rng);
        let eta = sqrt_22(&p).unwrap();
        let comps = components_22(&Form::from_p22(&dp));
        let an = sqrt_22_variation(&eta, &comps, &zero).unwrap();
        let fd = |h: f64| {
            let a = sqrt_22(&mat_add(&p, &mat_scale(&dp, c(h, 0.0)))).unwrap();
            let b = sqrt_22(&mat_sub(&p, &mat_scale(&dp, c(h, 0.0)))).unwrap();
            mat_scale(&mat_sub(&a, &b), c(0.5 / h, 0.0))
        };
        let h = 1e-3;
        let rich = mat_sub(&mat_scale(&fd(h / 2.0), c(4.0 / 3.0, 0.0)), &mat_scale(&fd(h), c(1.0 / 3.0, 0.0)));
        let err = fro(&mat_sub(&an, &rich)) / fro(&rich);
        assert!(err < 1e-6, "relative error {err:e}");
    }
}

proptest! {
    #[test]
    fn square_root_is_positive_and_inverts_squaring(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g0 = random_positive(&mut rng);
        let g = sqrt_22(&square_p(&g0)).unwrap();
        prop_assert!(fro(&mat_sub(&g, &g0)) <= 1e-9 * fro(&g0));
    }
}
