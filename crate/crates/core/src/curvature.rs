//! Chern connection and curvature of Hermitian metrics given as matrix jets,
//! with the residuals and pointwise inequalities built from them.
//!
//! A metric `H` is stored as `M[r][q] = H_{r̄q}`. The connection is
//! `A_j = M⁻¹ ∂_j M` and the curvature `F_{jk̄} = −∂_{k̄} A_j`, kept as
//! `f[j][k]`. Endomorphisms act on column vectors in the coordinate frame.

use crate::error::{GeomError, Result};
use crate::forms::{dz, dzb, Form};
use crate::linalg::{
    self, adjoint, c, cholesky, commutator, herm_eig, inv3, mat_mul, mat_scale, mat_sub, trace, values, zeros3, JM3, M3,
    C,
};

/// Connection matrices (values) and curvature at one point.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub conn: [M3; 3],
    /// `f[j][k] = F_{jk̄}`.
    pub f: [[M3; 3]; 3],
}

/// `T^r_{ij}` stored as `t[r][i][j]`.
#[derive(Clone, Debug)]
pub struct TorsionData {
    pub t: [[[C; 3]; 3]; 3],
}

fn need_order(m: &JM3, need: usize) -> Result<()> {
    let have = m[0][0].order();
    if have < need {
        return Err(GeomError::Order { have, need });
    }
    Ok(())
}

/// `A_j = H⁻¹ ∂_j H` as jets (one order lower than `h`).
pub fn connection_jets(h: &JM3) -> Result<[JM3; 3]> {
    need_order(h, 1)?;
    let inv = inv3(h)?;
    let mut out = Vec::with_capacity(3);
    for j in 0..3 {
        let dh = linalg::map(h, |x| x.dz(j));
        let inv_t = linalg::map(&inv, |x| x.truncate(dh[0][0].order()));
        out.push(mat_mul(&inv_t, &dh));
    }
    Ok(out.try_into().unwrap())
}

/// `F_{jk̄} = −∂_{k̄}(H⁻¹ ∂_j H)` as jets (two orders lower than `h`).
pub fn curvature_jets(h: &JM3) -> Result<[[JM3; 3]; 3]> {
    need_order(h, 2)?;
    let a = connection_jets(h)?;
    Ok(std::array::from_fn(|j| std::array::from_fn(|k| linalg::map(&a[j], |x| x.dzb(k).scale_re(-1.0)))))
}

/// Curvature data from a metric jet of order ≥ 2.
pub fn chern_curvature_at(h: &JM3) -> Result<CurvatureData> {
    let a = connection_jets(h)?;
    let f = curvature_jets(h)?;
    Ok(CurvatureData {
        conn: std::array::from_fn(|j| values(&a[j])),
        f: std::array::from_fn(|j| std::array::from_fn(|k| values(&f[j][k]))),
    })
}

/// Chern curvature of a metric field at chart point `w` through second-order jets.
pub fn chern_curvature<F>(field: F, w: [C; 3]) -> Result<CurvatureData>
where
    F: Fn([C; 3], usize) -> Result<JM3>,
{
    chern_curvature_at(&field(w, 2)?)
}

/// Finite-difference fallback: central differences in the six real
/// directions with one Richardson step.
pub fn chern_curvature_fd<F>(field: F, w: [C; 3], step: f64) -> Result<CurvatureData>
where
    F: Fn([C; 3]) -> Result<M3>,
{
    let m0 = field(w)?;
    let at = |offs: &[(usize, f64)]| -> Result<M3> {
        let mut p = w;
        for &(dir, amount) in offs {
            let unit = if dir < 3 { c(1.0, 0.0) } else { c(0.0, 1.0) };
            p[dir % 3] += unit * amount;
        }
        field(p)
    };
    let first = |dir: usize, h: f64| -> Result<M3> {
        let p = at(&[(dir, h)])?;
        let m = at(&[(dir, -h)])?;
        Ok(mat_scale(&mat_sub(&p, &m), c(0.5 / h, 0.0)))
    };
    let second = |a: usize, b: usize, h: f64| -> Result<M3> {
        if a == b {
            let p = at(&[(a, h)])?;
            let m = at(&[(a, -h)])?;
            let s = linalg::mat_add(&p, &m);
            Ok(mat_scale(&mat_sub(&s, &mat_scale(&m0, c(2.0, 0.0))), c(1.0 / (h * h), 0.0)))
        } else {
            let pp = at(&[(a, h), (b, h)])?;
            let pm = at(&[(a, h), (b, -h)])?;
            let mp = at(&[(a, -h), (b, h)])?;
            let mm = at(&[(a, -h), (b, -h)])?;
            let s = mat_sub(&linalg::mat_add(&pp, &mm), &linalg::mat_add(&pm, &mp));
            Ok(mat_scale(&s, c(0.25 / (h * h), 0.0)))
        }
    };
    let rich = |x: M3, y: M3| mat_sub(&mat_scale(&y, c(4.0 / 3.0, 0.0)), &mat_scale(&x, c(1.0 / 3.0, 0.0)));
    let mut d1 = Vec::new();
    for dir in 0..6 {
        d1.push(rich(first(dir, step)?, first(dir, step / 2.0)?));
    }
    let mut d2 = vec![vec![zeros3(); 6]; 6];
    for a in 0..6 {
        for b in a..6 {
            let v = rich(second(a, b, step)?, second(a, b, step / 2.0)?);
            d2[a][b] = v;
            d2[b][a] = v;
        }
    }
    let i = c(0.0, 1.0);
    // ∂_j = ½(∂x_j − i∂y_j), ∂_{k̄} = ½(∂x_k + i∂y_k)
    let dj: Vec<M3> = (0..3).map(|j| mat_scale(&mat_sub(&d1[j], &mat_scale(&d1[3 + j], i)), c(0.5, 0.0))).collect();
    let dkb: Vec<M3> =
        (0..3).map(|k| mat_scale(&linalg::mat_add(&d1[k], &mat_scale(&d1[3 + k], i)), c(0.5, 0.0))).collect();
    let inv = inv3(&m0)?;
    let conn: [M3; 3] = std::array::from_fn(|j| mat_mul(&inv, &dj[j]));
    let mut f = [[zeros3(); 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let mixed: M3 = std::array::from_fn(|p| {
                std::array::from_fn(|q| {
                    0.25 * (d2[j][k][p][q] + i * d2[j][3 + k][p][q] - i * d2[3 + j][k][p][q] + d2[3 + j][3 + k][p][q])
                })
            });
            // ∂_{k̄}(M⁻¹ ∂_j M) = −M⁻¹ ∂_{k̄}M M⁻¹ ∂_j M + M⁻¹ ∂_j∂_{k̄} M
            let t1 = mat_mul(&mat_mul(&inv, &dkb[k]), &conn[j]);
            let t2 = mat_mul(&inv, &mixed);
            f[j][k] = mat_sub(&t1, &t2);
        }
    }
    Ok(CurvatureData { conn, f })
}

/// Largest violation of `(M F_{jk̄})† = M F_{kj̄}`.
pub fn hermitian_symmetry_residual(h: &M3, cd: &CurvatureData) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        for k in 0..3 {
            let a = adjoint(&mat_mul(h, &cd.f[j][k]));
            let b = mat_mul(h, &cd.f[k][j]);
            worst = worst.max(linalg::fro(&mat_sub(&a, &b)));
        }
    }
    worst
}

/// Ricci form as a Hermitian matrix `Ric[k][j] = Tr F_{jk̄}`.
pub fn ricci_from_curvature(cd: &CurvatureData) -> M3 {
    std::array::from_fn(|k| std::array::from_fn(|j| trace(&cd.f[j][k])))
}

/// Ricci form through `−∂_j ∂_{k̄} log det g` (independent of the curvature path).
pub fn ricci_form(g: &JM3) -> Result<M3> {
    need_order(g, 2)?;
    let ld = linalg::det3(g).ln();
    Ok(std::array::from_fn(|k| std::array::from_fn(|j| -ld.dz(j).dzb(k).value())))
}

/// `|a|_g` of a real `(1,1)`-form with matrix `a` (frame-independent).
pub fn form11_norm(g: &M3, a: &M3) -> Result<f64> {
    let l = cholesky(g)?;
    let li = inv3(&l)?;
    Ok(linalg::fro(&mat_mul(&mat_mul(&li, a), &adjoint(&li))))
}

/// Endomorphism norm `|E|_H² = Tr(E E^{†_H})`, `E^{†_H} = H⁻¹ E† H`.
pub fn endo_norm(h: &M3, e: &M3) -> Result<f64> {
    let inv = inv3(h)?;
    let adj_h = mat_mul(&mat_mul(&inv, &adjoint(e)), h);
    Ok(trace(&mat_mul(e, &adj_h)).re.max(0.0).sqrt())
}

/// `H`-adjoint of an endomorphism.
pub fn h_adjoint(h: &M3, e: &M3) -> Result<M3> {
    Ok(mat_mul(&mat_mul(&inv3(h)?, &adjoint(e)), h))
}

/// Deviation of `E` from being `H`-self-adjoint: `|M E − (M E)†|`.
pub fn h_hermitian_residual(h: &M3, e: &M3) -> f64 {
    let me = mat_mul(h, e);
    linalg::fro(&mat_sub(&me, &adjoint(&me)))
}

/// `|F|_{H,g}` for an endomorphism-valued `(1,1)`-form.
pub fn curvature_norm(g: &M3, h: &M3, f: &[[M3; 3]; 3]) -> Result<f64> {
    let lg = cholesky(g)?;
    let a = inv3(&adjoint(&lg))?;
    let lh = cholesky(h)?;
    let lh_adj = adjoint(&lh);
    let lh_adj_inv = inv3(&lh_adj)?;
    let mut total = 0.0;
    for aa in 0..3 {
        for bb in 0..3 {
            let mut e = zeros3();
            for j in 0..3 {
                for k in 0..3 {
                    let w = a[j][aa] * a[k][bb].conj();
                    e = linalg::mat_add(&e, &mat_scale(&f[j][k], w));
                }
            }
            let ew = mat_mul(&mat_mul(&lh_adj, &e), &lh_adj_inv);
            total += linalg::fro(&ew).powi(2);
        }
    }
    Ok(total.sqrt())
}

/// `iΛ_ω F_H` and its norm `|·|_H`.
pub fn hym_residual(g: &M3, h: &M3, cd: &CurvatureData) -> Result<(M3, f64)> {
    let l = crate::forms::contract_checked(g, &cd.f)?;
    let n = endo_norm(h, &l)?;
    Ok((l, n))
}

/// HYM residual for metric fields `g` (values) and `H` (order-2 jets) at `w`.
pub fn hym_residual_fields<G, H>(g: G, h: H, w: [C; 3]) -> Result<(M3, f64)>
where
    G: Fn([C; 3]) -> Result<M3>,
    H: Fn([C; 3], usize) -> Result<JM3>,
{
    let hj = h(w, 2)?;
    let cd = chern_curvature_at(&hj)?;
    hym_residual(&g(w)?, &values(&hj), &cd)
}

/// `T^r_{ij} = (A_i)^r_j − (A_j)^r_i`; needs `g` with 1-jets.
pub fn torsion(g: &JM3) -> Result<TorsionData> {
    let a = connection_jets(g)?;
    let av: [M3; 3] = std::array::from_fn(|i| values(&a[i]));
    Ok(TorsionData { t: std::array::from_fn(|r| std::array::from_fn(|i| std::array::from_fn(|j| av[i][r][j] - av[j][r][i]))) })
}

/// `|T|_g` summed over ordered index pairs, halved.
pub fn torsion_norm(g: &M3, td: &TorsionData) -> Result<f64> {
    let l = cholesky(g)?;
    let la = adjoint(&l);
    let a = inv3(&la)?;
    let mut total = 0.0;
    for aa in 0..3 {
        for b in 0..3 {
            for cc in 0..3 {
                let mut acc = c(0.0, 0.0);
                for r in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            acc += la[aa][r] * td.t[r][i][j] * a[i][b] * a[j][cc];
                        }
                    }
                }
                total += acc.norm_sqr();
            }
        }
    }
    Ok((0.5 * total).sqrt())
}

/// `F_H − F_Ĥ + ∂̄(h⁻¹ ∇^Ĥ h)` with `h = Ĥ⁻¹H`; vanishes identically.
pub fn curvature_difference_residual(h: &JM3, hhat: &JM3) -> Result<f64> {
    need_order(h, 2)?;
    need_order(hhat, 2)?;
    let fh = curvature_jets(h)?;
    let fhat = curvature_jets(hhat)?;
    let endo = mat_mul(&inv3(hhat)?, h);
    let endo_inv = inv3(&endo)?;
    let ahat = connection_jets(hhat)?;
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        let dendo = linalg::map(&endo, |x| x.dz(j));
        let ah = ahat[j].clone();
        let endo1 = linalg::map(&endo, |x| x.truncate(1));
        let nabla = linalg::mat_add(&dendo, &commutator(&ah, &endo1));
        let inv1 = linalg::map(&endo_inv, |x| x.truncate(1));
        let q = mat_mul(&inv1, &nabla);
        for k in 0..3 {
            let dq = values(&linalg::map(&q, |x| x.dzb(k)));
            let diff = mat_sub(&values(&fh[j][k]), &values(&fhat[j][k]));
            worst = worst.max(linalg::fro(&linalg::mat_add(&diff, &dq)));
        }
    }
    Ok(worst)
}

/// Both sides of the Uhlenbeck–Yau inequality
/// `|h^{−σ/2} ∇̂h^σ|² ≤ g^{jk̄} ⟨h⁻¹ ∇̂_j h, ∇̂_k h^σ⟩_Ĥ`.
#[derive(Clone, Copy, Debug)]
pub struct UyMargin {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// `dh[j] = ∇̂_j h` in the coordinate frame. When `dh_sigma` is `None`,
/// `∇̂h^σ` is obtained from `dh` through the divided-difference formula in
/// the eigenbasis of `h`.
pub fn uy_inequality_margin(
    hhat: &M3,
    hmet: &M3,
    g: &M3,
    sigma: f64,
    dh: &[M3; 3],
    dh_sigma: Option<&[M3; 3]>,
) -> Result<UyMargin> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(GeomError::Shape(format!("sigma = {sigma} outside (0, 1]")));
    }
    for m in [hhat, hmet, g] {
        let (vals, _) = herm_eig(m);
        if !(vals[0] > 0.0) {
            return Err(GeomError::SingularMetric { min_eig: vals[0] });
        }
    }
    // whiten by Ĥ = L L†: endomorphisms E ↦ L† E L^{-†}
    let l = cholesky(hhat)?;
    let la = adjoint(&l);
    let la_inv = inv3(&la)?;
    let whiten = |e: &M3| mat_mul(&mat_mul(&la, e), &la_inv);
    let li = inv3(&l)?;
    let ht = linalg::hermitian_part(&mat_mul(&mat_mul(&li, hmet), &la_inv));
    let (lam, u) = herm_eig(&ht);
    if !(lam[0] > 0.0) {
        return Err(GeomError::SingularMetric { min_eig: lam[0] });
    }
    let ua = adjoint(&u);
    let to_eig = |e: &M3| mat_mul(&mat_mul(&ua, &whiten(e)), &u);
    let x: Vec<M3> = dh.iter().map(to_eig).collect();
    let y: Vec<M3> = match dh_sigma {
        Some(ds) => ds.iter().map(to_eig).collect(),
        None => x
            .iter()
            .map(|xj| {
                std::array::from_fn(|a| {
                    std::array::from_fn(|b| {
                        let (la_, lb) = (lam[a], lam[b]);
                        let dd = if ((la_ - lb) / la_.max(lb)).abs() < 1e-8 {
                            sigma * (0.5 * (la_ + lb)).powf(sigma - 1.0)
                        } else {
                            (la_.powf(sigma) - lb.powf(sigma)) / (la_ - lb)
                        };
                        xj[a][b] * dd
                    })
                })
            })
            .collect(),
    };
    let ginv = inv3(g)?;
    let diag = |p: f64| -> M3 {
        let mut d = zeros3();
        for i in 0..3 {
            d[i][i] = c(lam[i].powf(p), 0.0);
        }
        d
    };
    let hinv = diag(-1.0);
    let hms = diag(-sigma / 2.0);
    let mut rhs = c(0.0, 0.0);
    let mut lhs = c(0.0, 0.0);
    for j in 0..3 {
        for k in 0..3 {
            rhs += ginv[j][k] * trace(&mat_mul(&mat_mul(&hinv, &x[j]), &adjoint(&y[k])));
            let a = mat_mul(&hms, &y[j]);
            let b = mat_mul(&hms, &y[k]);
            lhs += ginv[j][k] * trace(&mat_mul(&a, &adjoint(&b)));
        }
    }
    Ok(UyMargin { lhs: lhs.re, rhs: rhs.re, margin: rhs.re - lhs.re })
}

/// `Tr(F ∧ F)` for an endomorphism-valued `(1,1)`-form.
pub fn tr_wedge_square(f: &[[M3; 3]; 3]) -> Form<C> {
    let mut out = Form::<C>::zero();
    for j in 0..3 {
        for k in 0..3 {
            let a = Form::single(dz(j), c(1.0, 0.0)).wedge(&Form::single(dzb(k), c(1.0, 0.0)));
            for l in 0..3 {
                for m in 0..3 {
                    let b = Form::single(dz(l), c(1.0, 0.0)).wedge(&Form::single(dzb(m), c(1.0, 0.0)));
                    let coef = trace(&mat_mul(&f[j][k], &f[l][m]));
                    out = out.add(&a.wedge(&b).scale(coef));
                }
            }
        }
    }
    out
}

/// `|i∂∂̄ω − (α′/4)(Tr Rm∧Rm − Tr F_H∧F_H)|_g` with Chern curvatures,
/// for `g` and `H` given as jets of order ≥ 2.
pub fn anomaly_residual(g: &JM3, h: &JM3, alpha: f64) -> Result<f64> {
    need_order(g, 2)?;
    let omega = Form::from_hermitian(g);
    let ddw = omega.i_ddbar().values();
    let rm = chern_curvature_at(g)?;
    let fh = chern_curvature_at(h)?;
    let diff = tr_wedge_square(&rm.f).sub(&tr_wedge_square(&fh.f));
    let total = ddw.sub(&diff.scale(c(alpha / 4.0, 0.0)));
    total.norm_g(&values(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::i_ddbar;
    use crate::jet::Jet;
    use crate::linalg::{eye3, fro};

    fn var(k: usize, w: C, order: usize) -> Jet {
        Jet::variable(k, w, order)
    }

    /// Kähler potential `|w|² + ¼|w|⁴ + Re(w1² w̄2)·0.1`.
    fn kahler(w: [C; 3], order: usize) -> Result<JM3> {
        let z: Vec<Jet> = (0..3).map(|k| var(k, w[k], order + 2)).collect();
        let zb: Vec<Jet> = z.iter().map(|x| x.conj_swap()).collect();
        let s = crate::potentials::norm2_jet(&z, &zb);
        let x = &(&z[0] * &z[0]) * &zb[1];
        let re = (&x + &x.conj_swap()).scale_re(0.05);
        let phi = &(&s + &(&s * &s).scale_re(0.25)) + &re;
        i_ddbar(&phi)
    }

    /// A non-Kähler Hermitian metric.
    fn hermitian(w: [C; 3], order: usize) -> Result<JM3> {
        let z: Vec<Jet> = (0..3).map(|k| var(k, w[k], order)).collect();
        let zb: Vec<Jet> = z.iter().map(|x| x.conj_swap()).collect();
        let s = crate::potentials::norm2_jet(&z, &zb);
        let mut m: JM3 = std::array::from_fn(|r| {
            std::array::from_fn(|q| if r == q { s.scale_re(0.3).add_const(c(1.0 + r as f64, 0.0)) } else { Jet::zero(order) })
        });
        let off = (&z[0] * &zb[2]).scale(c(0.2, 0.1));
        m[0][2] = &m[0][2] + &off.conj_swap();
        m[2][0] = &m[2][0] + &off;
        Ok(m)
    }

    const W: [C; 3] = [C::new(0.3, 0.1), C::new(-0.2, 0.4), C::new(0.1, -0.3)];

    #[test]
    fn constant_metric_is_flat() {
        let m: JM3 = linalg::map(&eye3(), |x| Jet::constant(*x * 2.0, 2));
        let cd = chern_curvature_at(&m).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert!(fro(&cd.f[j][k]) < 1e-15);
            }
        }
    }

    #[test]
    fn scale_invariance_and_symmetry() {
        let m = hermitian(W, 2).unwrap();
        let cd = chern_curvature_at(&m).unwrap();
        let m2 = linalg::map(&m, |x| x.scale_re(3.7));
        let cd2 = chern_curvature_at(&m2).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert!(fro(&mat_sub(&cd.f[j][k], &cd2.f[j][k])) < 1e-13);
            }
        }
        assert!(hermitian_symmetry_residual(&values(&m), &cd) < 1e-12);
    }

    #[test]
    fn ricci_two_paths_agree() {
        let g = kahler(W, 2).unwrap();
        let a = ricci_form(&g).unwrap();
        let b = ricci_from_curvature(&chern_curvature_at(&g).unwrap());
        assert!(fro(&mat_sub(&a, &b)) < 1e-12);
    }

    #[test]
    fn kahler_has_no_torsion_hermitian_does() {
        let g = kahler(W, 1).unwrap();
        let t = torsion(&g).unwrap();
        assert!(torsion_norm(&values(&g), &t).unwrap() < 1e-12);
        for r in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(t.t[r][i][j], -t.t[r][j][i]);
                }
            }
        }
        let h = hermitian(W, 1).unwrap();
        assert!(torsion_norm(&values(&h), &torsion(&h).unwrap()).unwrap() > 1e-3);
    }

    #[test]
    fn difference_formula() {
        let h = hermitian(W, 2).unwrap();
        let g = kahler(W, 2).unwrap();
        assert!(curvature_difference_residual(&h, &g).unwrap() < 1e-10);
    }

    #[test]
    fn finite_differences_match_jets() {
        let jet = chern_curvature_at(&hermitian(W, 2).unwrap()).unwrap();
        let fd = chern_curvature_fd(|w| Ok(values(&hermitian(w, 0)?)), W, 1e-3).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert!(fro(&mat_sub(&jet.f[j][k], &fd.f[j][k])) < 1e-5, "{j}{k}");
            }
        }
    }

    #[test]
    fn uy_equal_metrics_and_sigma_one() {
        let g = values(&kahler(W, 0).unwrap());
        let h = values(&hermitian(W, 0).unwrap());
        let zero = [zeros3(); 3];
        let m = uy_inequality_margin(&h, &h, &g, 0.5, &zero, None).unwrap();
        assert!(m.lhs.abs() < 1e-14 && m.rhs.abs() < 1e-14);
        let hh = mat_mul(&h, &linalg::herm_fn(&eye3(), |x| x));
        let dh = [mat_scale(&eye3(), c(0.3, 0.2)), zeros3(), mat_scale(&eye3(), c(-0.1, 0.0))];
        let m = uy_inequality_margin(&h, &hh, &g, 1.0, &dh, None).unwrap();
        assert!(m.margin.abs() < 1e-12);
    }
}
