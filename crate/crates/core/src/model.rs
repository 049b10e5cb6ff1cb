//! Points of the smoothings `V_t = {Σ z_i² = t}` and of the small resolution,
//! holomorphic cylindrical charts, and the maps between the models.

use crate::error::{GeomError, Result};
use crate::jet::Jet;
use crate::linalg::{c, herm_eig, zeros3, M3, C};
use crate::potentials::radial_profile;

/// Points with cone radius below this are rejected.
pub const TIP_RADIUS: f64 = 1e-8;
/// Default chart radius.
pub const CHART_RADIUS: f64 = 0.125;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variety {
    Smoothing,
    Resolution,
}

/// Base coordinate `x` and fiber coordinates `(u, v)` on `O(-1) ⊕ O(-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResCoords {
    pub x: C,
    pub u: C,
    pub v: C,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelPoint {
    pub z: [C; 4],
    pub t: C,
    pub variety: Variety,
    pub res: Option<ResCoords>,
}

pub fn norm2(z: &[C; 4]) -> f64 {
    z.iter().map(|x| x.norm_sqr()).sum()
}

pub fn quadric(z: &[C; 4]) -> C {
    z.iter().map(|x| x * x).sum()
}

impl ModelPoint {
    /// A point of `V_t`; fails if the defining equation is violated.
    pub fn smoothing(z: [C; 4], t: C) -> Result<Self> {
        let p = ModelPoint { z, t, variety: Variety::Smoothing, res: None };
        let resid = p.defining_residual();
        if resid > 1e-10 * norm2(&z).max(1.0) {
            return Err(GeomError::OutsideDomain(format!("defining-equation residual {resid:e}")));
        }
        Ok(p)
    }

    /// A point of the resolved conifold in the chart `(x, u, v)`.
    pub fn resolution(x: C, u: C, v: C) -> Self {
        let s2 = std::f64::consts::SQRT_2;
        let a = u * s2;
        let cc = v * s2;
        let b = x * v * s2;
        let d = -x * u * s2;
        let i = c(0.0, 1.0);
        let z = [(a + b) / 2.0, (a - b) / (2.0 * i), (cc + d) / 2.0, (cc - d) / (2.0 * i)];
        ModelPoint { z, t: c(0.0, 0.0), variety: Variety::Resolution, res: Some(ResCoords { x, u, v }) }
    }

    pub fn norm2(&self) -> f64 {
        match self.res {
            Some(rc) => (1.0 + rc.x.norm_sqr()) * (rc.u.norm_sqr() + rc.v.norm_sqr()),
            None => norm2(&self.z),
        }
    }

    /// Cone radius `r = |z|^{2/3}`; on the resolution `r³ = (1+|x|²)(|u|²+|v|²)`.
    pub fn r(&self) -> f64 {
        self.norm2().powf(1.0 / 3.0)
    }

    pub fn defining_residual(&self) -> f64 {
        (quadric(&self.z) - self.t).norm()
    }
}

/// Holomorphic cylindrical chart `w ↦ z(w)` centred at a point of `V_t`.
#[derive(Clone, Debug)]
pub struct Chart {
    pub center: ModelPoint,
    pub rho: f64,
    pub eliminated_index: usize,
    /// `r̂ = r(center)`.
    pub scale: f64,
    /// `|ẑ|`.
    pub znorm: f64,
    /// Metric equivalence constant for `r̂⁻² g_{co,t}` against the chart metric.
    pub c0: f64,
    kept: [usize; 3],
}

/// Build the chart at `p`, eliminating the largest-modulus coordinate.
pub fn make_cyl_chart(p: &ModelPoint) -> Result<Chart> {
    make_cyl_chart_with(p, CHART_RADIUS, true)
}

pub(crate) fn make_cyl_chart_with(p: &ModelPoint, rho: f64, measure_c0: bool) -> Result<Chart> {
    if p.variety != Variety::Smoothing {
        return Err(GeomError::Shape("cylindrical charts are built on smoothing points".into()));
    }
    let r = p.r();
    if !(r >= TIP_RADIUS) {
        return Err(GeomError::DegeneratePoint { r });
    }
    let znorm = norm2(&p.z).sqrt();
    let mut elim = 0;
    for i in 1..4 {
        if p.z[i].norm() > p.z[elim].norm() {
            elim = i;
        }
    }
    if p.z[elim].norm() < 1e-8 * znorm {
        return Err(GeomError::IllConditionedChart { z_elim: p.z[elim].norm(), norm: znorm });
    }
    let mut kept = [0usize; 3];
    let mut k = 0;
    for i in 0..4 {
        if i != elim {
            kept[k] = i;
            k += 1;
        }
    }
    let mut chart = Chart { center: *p, rho, eliminated_index: elim, scale: r, znorm, c0: 1.0, kept };
    if measure_c0 {
        chart.c0 = chart.measure_c0()?;
    }
    Ok(chart)
}

impl Chart {
    pub fn kept(&self) -> [usize; 3] {
        self.kept
    }

    /// `z(w)` on `V_t`.
    pub fn embed(&self, w: [C; 3]) -> [C; 4] {
        let mut z = [c(0.0, 0.0); 4];
        let mut q = self.center.t;
        for (k, &i) in self.kept.iter().enumerate() {
            z[i] = self.center.z[i] + w[k] * self.znorm;
            q -= z[i] * z[i];
        }
        let ze = self.center.z[self.eliminated_index];
        z[self.eliminated_index] = ze * (q / (ze * ze)).sqrt();
        z
    }

    pub fn point(&self, w: [C; 3]) -> ModelPoint {
        ModelPoint { z: self.embed(w), t: self.center.t, variety: Variety::Smoothing, res: None }
    }

    /// Chart coordinates of a point in the chart image.
    pub fn coords(&self, z: &[C; 4]) -> [C; 3] {
        std::array::from_fn(|k| (z[self.kept[k]] - self.center.z[self.kept[k]]) / self.znorm)
    }

    /// Jets of `z(w)` and `z̄(w̄)` at chart point `w`.
    pub fn embedding_jets(&self, w: [C; 3], order: usize) -> Result<([Jet; 4], [Jet; 4])> {
        let wj: Vec<Jet> = (0..3).map(|k| Jet::variable(k, w[k], order)).collect();
        let mut z: Vec<Jet> = vec![Jet::zero(order); 4];
        let mut q = Jet::constant(self.center.t, order);
        for (k, &i) in self.kept.iter().enumerate() {
            z[i] = wj[k].scale_re(self.znorm).add_const(self.center.z[i]);
            q = &q - &(&z[i] * &z[i]);
        }
        let ze = self.center.z[self.eliminated_index];
        let ratio = q.scale(1.0 / (ze * ze));
        if (ratio.value() - 1.0).norm() > 0.9 {
            return Err(GeomError::IllConditionedChart { z_elim: (ratio.value().sqrt() * ze).norm(), norm: self.znorm });
        }
        z[self.eliminated_index] = ratio.sqrt().scale(ze);
        let zb: Vec<Jet> = z.iter().map(|j| j.conj_swap()).collect();
        let z: [Jet; 4] = z.try_into().unwrap();
        let zb: [Jet; 4] = zb.try_into().unwrap();
        Ok((z, zb))
    }

    /// Frame columns `∂z/∂w_i` (4×3) at chart point `w`.
    pub fn frame(&self, w: [C; 3]) -> Result<[[C; 3]; 4]> {
        let (z, _) = self.embedding_jets(w, 1)?;
        Ok(std::array::from_fn(|a| std::array::from_fn(|i| z[a].d(i).value())))
    }

    /// Hermitian matrix `G[k][j]` of `g_{co,t}` in chart coordinates at `w`,
    /// from the closed-form ambient Hessian of the radial potential.
    pub fn co_metric(&self, w: [C; 3]) -> Result<M3> {
        let z = self.embed(w);
        let f = self.frame(w)?;
        let s = norm2(&z);
        let prof = radial_profile(self.center.t, s, 2)?;
        let (f1, f2) = (prof.derivative(1), prof.derivative(2));
        ambient_pullback(&z, f1, f2, &f)
    }

    fn measure_c0(&self) -> Result<f64> {
        let mut c0: f64 = 1.0;
        let mut pts = vec![[c(0.0, 0.0); 3]];
        for k in 0..3 {
            for &sgn in &[1.0, -1.0] {
                let mut w = [c(0.0, 0.0); 3];
                w[k] = c(sgn * self.rho * 0.999, 0.0);
                pts.push(w);
                w[k] = c(0.0, sgn * self.rho * 0.999);
                pts.push(w);
            }
        }
        for w in pts {
            let g = self.co_metric(w)?;
            let scaled: M3 = std::array::from_fn(|i| std::array::from_fn(|j| g[i][j] / (self.scale * self.scale)));
            let (vals, _) = herm_eig(&scaled);
            if !(vals[0] > 0.0) {
                return Err(GeomError::SingularMetric { min_eig: vals[0] });
            }
            c0 = c0.max(vals[2]).max(1.0 / vals[0]);
        }
        Ok(c0)
    }
}

/// Pullback `G[k][j] = Σ h_{mn̄} F[m][j] conj(F[n][k])` of the ambient
/// Hessian `h_{mn̄} = f' δ_{mn} + f'' z̄_m z_n` through the frame `F`.
pub fn ambient_pullback(z: &[C; 4], f1: f64, f2: f64, frame: &[[C; 3]; 4]) -> Result<M3> {
    let mut g = zeros3();
    let zdot: [C; 3] = std::array::from_fn(|j| (0..4).map(|m| z[m].conj() * frame[m][j]).sum());
    for k in 0..3 {
        for j in 0..3 {
            let mut acc = c(0.0, 0.0);
            for m in 0..4 {
                acc += frame[m][j] * frame[m][k].conj();
            }
            g[k][j] = acc * f1 + zdot[j] * zdot[k].conj() * f2;
        }
    }
    Ok(g)
}

/// `Φ_t(z) = z + t z̄ / (2|z|²)`, mapping `V_0` to `V_t`.
pub fn phi_map(t: C, p: &ModelPoint) -> Result<ModelPoint> {
    if p.t.norm() != 0.0 || p.variety != Variety::Smoothing {
        return Err(GeomError::Shape("phi_map expects a point of V_0".into()));
    }
    let s = norm2(&p.z);
    if !(s > t.norm() / 2.0) {
        return Err(GeomError::OutsideDomain(format!("|z|² = {s:e} must exceed |t|/2 = {:e}", t.norm() / 2.0)));
    }
    let z = std::array::from_fn(|i| p.z[i] + t * p.z[i].conj() / (2.0 * s));
    Ok(ModelPoint { z, t, variety: Variety::Smoothing, res: None })
}

/// Inverse of `Φ_t` on `{|y|² > |t|}`.
pub fn phi_inverse(p: &ModelPoint) -> Result<ModelPoint> {
    let t = p.t;
    let n = norm2(&p.z);
    let disc = n * n - t.norm_sqr();
    if disc < -1e-14 * n * n {
        return Err(GeomError::OutsideDomain("point lies inside the vanishing cycle".into()));
    }
    let s = 0.5 * (n + disc.max(0.0).sqrt());
    let den = 1.0 - t.norm_sqr() / (4.0 * s * s);
    let z = std::array::from_fn(|i| (p.z[i] - t * p.z[i].conj() / (2.0 * s)) / den);
    Ok(ModelPoint { z, t: c(0.0, 0.0), variety: Variety::Smoothing, res: None })
}

/// Jets of `Φ_t⁻¹(y)` and its conjugate given coordinate jets of `y ∈ V_t`.
pub fn phi_inverse_jets(t: C, y: &[Jet; 4], yb: &[Jet; 4]) -> ([Jet; 4], [Jet; 4]) {
    let n = crate::potentials::norm2_jet(y, yb);
    let disc = &(&n * &n) - &Jet::real(t.norm_sqr(), n.order());
    let s = (&n + &disc.sqrt()).scale_re(0.5);
    let inv2s = s.recip().scale_re(0.5);
    let den = (&inv2s * &inv2s).scale_re(-t.norm_sqr()).add_const(c(1.0, 0.0)).recip();
    let z: [Jet; 4] = std::array::from_fn(|i| &(&y[i] - &(&yb[i] * &inv2s).scale(t)) * &den);
    let zb: [Jet; 4] = std::array::from_fn(|i| &(&yb[i] - &(&y[i] * &inv2s).scale(t.conj())) * &den);
    (z, zb)
}

/// Principal square root used for every fractional power of `λ`.
pub fn principal_sqrt(l: C) -> C {
    l.sqrt()
}

/// `S_λ`: `(z, t) ↦ (λ^{3/2} z, λ³ t)`, with `λ^{3/2} = (√λ)³` on the principal branch;
/// on the resolution `(x, u, v) ↦ (x, λ^{3/2} u, λ^{3/2} v)`.
pub fn scale_action(l: C, p: &ModelPoint) -> Result<ModelPoint> {
    if l.norm() == 0.0 {
        return Err(GeomError::InvalidScale);
    }
    let h = principal_sqrt(l);
    let l32 = h * h * h;
    match p.res {
        Some(rc) => Ok(ModelPoint::resolution(rc.x, rc.u * l32, rc.v * l32)),
        None => Ok(ModelPoint {
            z: std::array::from_fn(|i| p.z[i] * l32),
            t: p.t * l * l * l,
            variety: p.variety,
            res: None,
        }),
    }
}

/// Principal cube root.
pub fn cbrt_c(t: C) -> C {
    t.powf(1.0 / 3.0)
}

/// Real symmetric 6×6 tensor in the basis `(∂x1, ∂y1, ∂x2, ∂y2, ∂x3, ∂y3)`.
pub type Real6 = [[f64; 6]; 6];

/// Standard complex structure on that basis.
pub fn standard_j() -> Real6 {
    let mut j = [[0.0; 6]; 6];
    for k in 0..3 {
        j[2 * k + 1][2 * k] = 1.0;
        j[2 * k][2 * k + 1] = -1.0;
    }
    j
}

/// `(1,1)` projection `½(A + Jᵀ A J)`, returned as the Hermitian matrix
/// `G[k][j] = A^{1,1}(∂_j, ∂_{k̄})`.
pub fn project_11(a: &Real6, j: &Real6) -> Result<M3> {
    for p in 0..6 {
        for q in 0..6 {
            if (a[p][q] - a[q][p]).abs() > 1e-12 * (1.0 + a[p][q].abs()) {
                return Err(GeomError::Shape("project_11 expects a symmetric tensor".into()));
            }
        }
    }
    let mut p11 = [[0.0; 6]; 6];
    for al in 0..6 {
        for be in 0..6 {
            let mut s = 0.0;
            for mu in 0..6 {
                for nu in 0..6 {
                    s += j[mu][al] * a[mu][nu] * j[nu][be];
                }
            }
            p11[al][be] = 0.5 * (a[al][be] + s);
        }
    }
    Ok(real_to_hermitian(&p11))
}

/// Complex-bilinear `A(∂_j, ∂_{k̄})` of a real tensor, as `G[k][j]`.
pub fn real_to_hermitian(a: &Real6) -> M3 {
    let mut g = zeros3();
    for k in 0..3 {
        for jj in 0..3 {
            let (xj, yj, xk, yk) = (2 * jj, 2 * jj + 1, 2 * k, 2 * k + 1);
            g[k][jj] = c(a[xj][xk] + a[yj][yk], a[xj][yk] - a[yj][xk]) * 0.25;
        }
    }
    g
}

/// Real tensor `2 Re(G[k][j] dz^j dz̄^k)` of a Hermitian matrix.
pub fn hermitian_to_real(g: &M3) -> Real6 {
    let mut a = [[0.0; 6]; 6];
    for k in 0..3 {
        for jj in 0..3 {
            let v = g[k][jj];
            a[2 * jj][2 * k] = 2.0 * v.re;
            a[2 * jj + 1][2 * k + 1] = 2.0 * v.re;
            a[2 * jj][2 * k + 1] = 2.0 * v.im;
            a[2 * jj + 1][2 * k] = -2.0 * v.im;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro, mat_sub};

    fn unit_example() -> ModelPoint {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ModelPoint::smoothing([c(s, 0.0), c(0.0, s), c(0.0, 0.0), c(0.0, 0.0)], c(0.0, 0.0)).unwrap()
    }

    #[test]
    fn chart_at_axis_point() {
        let p = ModelPoint::smoothing([c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], c(1.0, 0.0)).unwrap();
        let ch = make_cyl_chart(&p).unwrap();
        assert_eq!(ch.eliminated_index, 3);
        assert_eq!(ch.embed([c(0.0, 0.0); 3])[3], c(1.0, 0.0));
        let f = ch.frame([c(0.0, 0.0); 3]).unwrap();
        for a in 0..3 {
            for i in 0..3 {
                let e = if a == i { 1.0 } else { 0.0 };
                assert!((f[a][i] - c(e, 0.0)).norm() < 1e-15);
            }
            assert!(f[3][a].norm() < 1e-15);
        }
    }

    #[test]
    fn phi_map_on_explicit_point() {
        let p = unit_example();
        let t = 0.3;
        let q = phi_map(c(t, 0.0), &p).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((q.z[0] - c(s * (1.0 + t / 2.0), 0.0)).norm() < 1e-15);
        assert!((q.z[1] - c(0.0, s * (1.0 - t / 2.0))).norm() < 1e-15);
        assert!(q.defining_residual() < 1e-15);
    }

    #[test]
    fn phi_inverse_roundtrip() {
        let p = unit_example();
        let t = c(0.2, -0.1);
        let q = phi_map(t, &p).unwrap();
        let back = phi_inverse(&q).unwrap();
        for i in 0..4 {
            assert!((back.z[i] - p.z[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn resolution_radius() {
        let p = ModelPoint::resolution(c(0.5, 0.2), c(0.3, -0.1), c(0.0, 0.4));
        let r3 = (1.0 + 0.29) * (0.1 + 0.16);
        assert!((p.r().powi(3) - r3).abs() < 1e-15);
        assert!((norm2(&p.z) - r3).abs() < 1e-15);
        assert!(quadric(&p.z).norm() < 1e-15);
    }

    #[test]
    fn projection_of_hermitian_is_identity() {
        let g: M3 = [
            [c(2.0, 0.0), c(0.3, 0.4), c(0.0, -0.2)],
            [c(0.3, -0.4), c(1.0, 0.0), c(0.1, 0.0)],
            [c(0.0, 0.2), c(0.1, 0.0), c(3.0, 0.0)],
        ];
        let a = hermitian_to_real(&g);
        let back = project_11(&a, &standard_j()).unwrap();
        assert!(fro(&mat_sub(&back, &g)) < 1e-14);
    }
}
