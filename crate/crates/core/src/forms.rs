//! Pointwise exterior algebra of `(p,q)`-forms on a 3-dimensional chart.
//!
//! Generators are `dz1, dz2, dz3` (bits 0..2) and `dz̄1, dz̄2, dz̄3`
//! (bits 3..5). Coefficients are numbers or jets; with jet coefficients
//! `∂`, `∂̄` and `d` act by differentiating the coefficients.
//!
//! A real `(1,1)`-form `i G[k][j] dz^j ∧ dz̄^k` is stored as the Hermitian
//! matrix `G`. A `(2,2)`-form is summarised by the Hermitian matrix
//! `P[j][k] = ½ ((i dz^j ∧ dz̄^k) ∧ Ψ) / vol`, for which `ω² ↦ det(G) G⁻¹`.

use crate::error::{GeomError, Result};
use crate::jet::Jet;
use crate::linalg::{self, c, det3, herm_eig, inv3, mat_scale_by, Mat, Scalar, C, M3};
use std::collections::BTreeMap;

pub type Blade = u8;

pub fn dz(j: usize) -> Blade {
    1 << j
}

pub fn dzb(k: usize) -> Blade {
    1 << (3 + k)
}

/// Sign of `a ∧ b` relative to the sorted blade `a | b` (0 if they overlap).
pub fn wedge_sign(a: Blade, b: Blade) -> i32 {
    if a & b != 0 {
        return 0;
    }
    let mut swaps = 0;
    for bit in 0..6 {
        if b & (1 << bit) != 0 {
            swaps += (a >> (bit + 1)).count_ones();
        }
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn bidegree(b: Blade) -> (usize, usize) {
    ((b & 0b000111).count_ones() as usize, (b & 0b111000).count_ones() as usize)
}

#[derive(Clone, Debug)]
pub struct Form<T> {
    pub terms: BTreeMap<Blade, T>,
}

impl<T: Scalar> Form<T> {
    pub fn zero() -> Self {
        Form { terms: BTreeMap::new() }
    }

    pub fn single(blade: Blade, coef: T) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(blade, coef);
        Form { terms }
    }

    pub fn get(&self, b: Blade) -> Option<&T> {
        self.terms.get(&b)
    }

    pub fn add_term(&mut self, b: Blade, coef: T) {
        match self.terms.get_mut(&b) {
            Some(x) => *x = x.add(&coef),
            None => {
                self.terms.insert(b, coef);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (b, v) in &o.terms {
            out.add_term(*b, v.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(c(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C) -> Self {
        Form { terms: self.terms.iter().map(|(b, v)| (*b, v.scale(s))).collect() }
    }

    pub fn scale_by(&self, s: &T) -> Self {
        Form { terms: self.terms.iter().map(|(b, v)| (*b, v.mul(s))).collect() }
    }

    /// Graded product.
    pub fn wedge(&self, o: &Self) -> Self {
        let mut out = Form::zero();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                let s = wedge_sign(*a, *b);
                if s == 0 {
                    continue;
                }
                out.add_term(a | b, x.mul(y).scale(c(s as f64, 0.0)));
            }
        }
        out
    }

    /// Checked wedge: total degree must stay within the 6 real generators.
    pub fn try_wedge(&self, o: &Self) -> Result<Self> {
        let (p1, q1) = self.bidegree();
        let (p2, q2) = o.bidegree();
        if p1 + p2 > 3 || q1 + q2 > 3 {
            return Err(GeomError::Degree { p: p1 + p2, q: q1 + q2 });
        }
        Ok(self.wedge(o))
    }

    /// Bidegree of the first term (forms here are always pure).
    pub fn bidegree(&self) -> (usize, usize) {
        self.terms.keys().next().map(|b| bidegree(*b)).unwrap_or((0, 0))
    }

    /// Real `(1,1)`-form `i Σ G[k][j] dz^j ∧ dz̄^k`.
    pub fn from_hermitian(g: &Mat<T, 3>) -> Self {
        let mut f = Form::zero();
        for k in 0..3 {
            for j in 0..3 {
                f.add_term(dz(j) | dzb(k), g[k][j].scale(c(0.0, 1.0)));
            }
        }
        f
    }

    /// Inverse of [`Form::from_hermitian`].
    pub fn to_hermitian(&self) -> Option<Mat<T, 3>> {
        let like = self.terms.values().next()?.clone();
        Some(std::array::from_fn(|k| {
            std::array::from_fn(|j| match self.terms.get(&(dz(j) | dzb(k))) {
                Some(v) => v.scale(c(0.0, -1.0)),
                None => like.from_c(c(0.0, 0.0)),
            })
        }))
    }

    /// `(2,2)`-form with matrix `P`: `Ψ = 2 Σ P[j][k] Θ_{jk̄}` with `Θ` dual to `i dz^j ∧ dz̄^k`.
    pub fn from_p22(p: &Mat<T, 3>) -> Self {
        let mut f = Form::zero();
        for j in 0..3 {
            for k in 0..3 {
                let (blade, sign) = theta_blade(j, k);
                f.add_term(blade, p[j][k].scale(c(2.0 * sign, 0.0)));
            }
        }
        f
    }

    /// `P[j][k] = ½ ((i dz^j ∧ dz̄^k) ∧ Ψ)/vol` for a `(2,2)`-form.
    pub fn to_p22(&self) -> Option<Mat<T, 3>> {
        let like = self.terms.values().next()?.clone();
        Some(std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                let (blade, sign) = theta_blade(j, k);
                match self.terms.get(&blade) {
                    Some(v) => v.scale(c(0.5 * sign, 0.0)),
                    None => like.from_c(c(0.0, 0.0)),
                }
            })
        }))
    }
}

/// Blade carrying `Θ_{jk̄}` and the sign with which `(i dz^j∧dz̄^k) ∧ blade = sign·vol`.
fn theta_blade(j: usize, k: usize) -> (Blade, f64) {
    let full: Blade = 0b111111;
    let blade = full & !(dz(j) | dzb(k));
    // (i dz^j ∧ dz̄^k) ∧ blade, compared with vol = Π (i dz^l ∧ dz̄^l)
    let s1 = wedge_sign(dz(j), dzb(k));
    let s2 = wedge_sign(dz(j) | dzb(k), blade);
    // vol = i^3 · sign(dz1 dz̄1 dz2 dz̄2 dz3 dz̄3 → sorted)
    let vs = vol_sign();
    // the pairing carries one factor of i against i^3 in vol
    let s = -((s1 * s2) as f64) * vs;
    (blade, s)
}

fn vol_sign() -> f64 {
    let mut acc: Blade = 0;
    let mut sign = 1;
    for l in 0..3 {
        sign *= wedge_sign(acc, dz(l));
        acc |= dz(l);
        sign *= wedge_sign(acc, dzb(l));
        acc |= dzb(l);
    }
    sign as f64
}

impl Form<Jet> {
    pub fn values(&self) -> Form<C> {
        Form { terms: self.terms.iter().map(|(b, v)| (*b, v.value())).collect() }
    }

    /// `∂F = Σ_j dz^j ∧ ∂_j F`.
    pub fn del(&self) -> Form<Jet> {
        self.deriv_part(0)
    }

    /// `∂̄F = Σ_k dz̄^k ∧ ∂_{k̄} F`.
    pub fn delbar(&self) -> Form<Jet> {
        self.deriv_part(3)
    }

    fn deriv_part(&self, off: usize) -> Form<Jet> {
        let mut out = Form::zero();
        for (b, v) in &self.terms {
            for j in 0..3 {
                let g: Blade = 1 << (off + j);
                let s = wedge_sign(g, *b);
                if s == 0 {
                    continue;
                }
                out.add_term(g | b, v.d(off + j).scale_re(s as f64));
            }
        }
        out
    }

    pub fn d(&self) -> Form<Jet> {
        self.del().add(&self.delbar())
    }

    /// `i∂∂̄F`.
    pub fn i_ddbar(&self) -> Form<Jet> {
        self.delbar().del().scale(c(0.0, 1.0))
    }

    pub fn scalar(f: Jet) -> Form<Jet> {
        Form::single(0, f)
    }
}

impl Form<C> {
    /// Pull back under the complex-linear substitution `dz^j = Σ_a A[j][a] dζ^a`.
    pub fn pull_linear(&self, a: &M3) -> Form<C> {
        let mut out = Form::zero();
        for (b, v) in &self.terms {
            let mut acc = Form::single(0, *v);
            for bit in 0..6 {
                if b & (1 << bit) == 0 {
                    continue;
                }
                let mut lin = Form::zero();
                for col in 0..3 {
                    if bit < 3 {
                        lin.add_term(dz(col), a[bit][col]);
                    } else {
                        lin.add_term(dzb(col), a[bit - 3][col].conj());
                    }
                }
                acc = acc.wedge(&lin);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Pointwise norm in a `g`-unitary frame (coefficient 2-norm over blades).
    pub fn norm_g(&self, g: &M3) -> Result<f64> {
        let l = linalg::cholesky(g)?;
        let lh = linalg::adjoint(&l);
        let a = inv3(&lh)?;
        Ok(self.pull_linear(&a).coef_norm())
    }

    pub fn coef_norm(&self) -> f64 {
        self.terms.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Hermitian `(1,1)`-form of a jet potential, `G[k][j] = ∂_j ∂_{k̄} φ`.
pub fn i_ddbar(jet: &Jet) -> Result<Mat<Jet, 3>> {
    if jet.order() < 2 {
        return Err(GeomError::Order { have: jet.order(), need: 2 });
    }
    let dj: Vec<Jet> = (0..3).map(|j| jet.dz(j)).collect();
    Ok(std::array::from_fn(|k| std::array::from_fn(|j| dj[j].dzb(k))))
}

/// `P`-matrix of `ω²` for `ω` with matrix `G`: `det(G) G⁻¹` (generic in the scalar).
pub fn square_p<T: Scalar>(g: &Mat<T, 3>) -> Mat<T, 3> {
    linalg::adj3(g)
}

/// Matrix of the wedge square, computed through the exterior algebra.
pub fn square_via_wedge(g: &M3) -> M3 {
    let w = Form::from_hermitian(g);
    w.wedge(&w).to_p22().unwrap()
}

/// Positivity tolerance: eigenvalues must exceed this fraction of the trace.
pub const POSITIVITY_TOL: f64 = 1e-10;

pub fn is_positive_22(p: &M3) -> bool {
    let (vals, _) = herm_eig(p);
    let tr: f64 = vals.iter().sum();
    vals[0] > POSITIVITY_TOL * tr.abs()
}

/// The positive `(1,1)`-form `ω` with `ω² = Ψ`: `G = (det P)^{1/2} P⁻¹`.
pub fn sqrt_22(p: &M3) -> Result<M3> {
    let (vals, _) = herm_eig(p);
    let tr: f64 = vals.iter().sum();
    if !(vals[0] > POSITIVITY_TOL * tr.abs()) {
        return Err(GeomError::NotASquare { eigenvalue: vals[0] });
    }
    sqrt_22_generic(p)
}

/// Square root on jet or numeric matrices (no positivity check).
pub fn sqrt_22_generic<T: Scalar>(p: &Mat<T, 3>) -> Result<Mat<T, 3>> {
    let d = det3(p);
    let inv = inv3(p)?;
    Ok(mat_scale_by(&inv, &d.powc(0.5)))
}

/// Four-index components `Θ_{s r̄ j k̄}` with `Θ = ¼ Σ Θ_{s r̄ j k̄} dz^s∧dz̄^r∧dz^j∧dz̄^k`,
/// stored as `[s][r][j][k]`.
pub type Comp4 = [[[[C; 3]; 3]; 3]; 3];

pub fn components_22(f: &Form<C>) -> Comp4 {
    let mut out = [[[[c(0.0, 0.0); 3]; 3]; 3]; 3];
    for s in 0..3 {
        for r in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if s == j || r == k {
                        continue;
                    }
                    let mono = Form::single(dz(s), c(1.0, 0.0))
                        .wedge(&Form::single(dzb(r), c(1.0, 0.0)))
                        .wedge(&Form::single(dz(j), c(1.0, 0.0)))
                        .wedge(&Form::single(dzb(k), c(1.0, 0.0)));
                    let (blade, sign) = mono.terms.iter().next().map(|(b, v)| (*b, v.re)).unwrap();
                    out[s][r][j][k] = f.get(blade).copied().unwrap_or(c(0.0, 0.0)) * sign;
                }
            }
        }
    }
    out
}

/// Components of the square of `ω = i η dz∧dz̄`:
/// `−2 η_{r̄s} η_{k̄j} + 2 η_{r̄j} η_{k̄s}`.
pub fn square_components(eta: &M3) -> Comp4 {
    let mut out = [[[[c(0.0, 0.0); 3]; 3]; 3]; 3];
    for s in 0..3 {
        for r in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[s][r][j][k] = -2.0 * eta[r][s] * eta[k][j] + 2.0 * eta[r][j] * eta[k][s];
                }
            }
        }
    }
    out
}

/// Derivative of the square root along one direction:
/// `∇η_{k̄j} = −½ η^{s r̄} ∇Θ_{s r̄ j k̄} + ⅛ [η^{p q̄} η^{s r̄} ∇Θ_{s r̄ p q̄}] η_{k̄j}`
/// with `∇Θ = ∇θ + ∇θ̄`.
pub fn sqrt_22_variation(eta: &M3, dtheta: &Comp4, dtheta_bar: &Comp4) -> Result<M3> {
    let inv = inv3(eta)?;
    let mut dth = [[[[c(0.0, 0.0); 3]; 3]; 3]; 3];
    for s in 0..3 {
        for r in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    dth[s][r][j][k] = dtheta[s][r][j][k] + dtheta_bar[s][r][j][k];
                }
            }
        }
    }
    let mut contracted = linalg::zeros3();
    for j in 0..3 {
        for k in 0..3 {
            let mut acc = c(0.0, 0.0);
            for s in 0..3 {
                for r in 0..3 {
                    acc += inv[s][r] * dth[s][r][j][k];
                }
            }
            contracted[k][j] = acc;
        }
    }
    let mut full = c(0.0, 0.0);
    for p in 0..3 {
        for q in 0..3 {
            full += inv[p][q] * contracted[q][p];
        }
    }
    Ok(std::array::from_fn(|k| std::array::from_fn(|j| -0.5 * contracted[k][j] + full * eta[k][j] / 8.0)))
}

/// Both sides of the contracted identity `−4 η^{s r̄} ∇η_{r̄ s} = ½ η^{j k̄} η^{s r̄} ∇Θ_{s r̄ j k̄}`.
pub fn variation_trace_identity(eta: &M3, deta: &M3, dth: &Comp4) -> Result<(C, C)> {
    let inv = inv3(eta)?;
    let mut lhs = c(0.0, 0.0);
    for s in 0..3 {
        for r in 0..3 {
            lhs += inv[s][r] * deta[r][s];
        }
    }
    let mut rhs = c(0.0, 0.0);
    for j in 0..3 {
        for k in 0..3 {
            for s in 0..3 {
                for r in 0..3 {
                    rhs += inv[j][k] * inv[s][r] * dth[s][r][j][k];
                }
            }
        }
    }
    Ok((-4.0 * lhs, 0.5 * rhs))
}

/// `Λ_ω F = Σ g^{jk̄} F_{jk̄}` with `g^{jk̄} = G⁻¹[j][k]`; `f[j][k]` is the
/// endomorphism coefficient of `dz^j ∧ dz̄^k`.
pub fn contract<T: Scalar>(g: &Mat<T, 3>, f: &[[Mat<T, 3>; 3]; 3]) -> Result<Mat<T, 3>> {
    let inv = inv3(g)?;
    let mut acc = linalg::mat_scale_by(&f[0][0], &inv[0][0]);
    for j in 0..3 {
        for k in 0..3 {
            if j == 0 && k == 0 {
                continue;
            }
            acc = linalg::mat_add(&acc, &linalg::mat_scale_by(&f[j][k], &inv[j][k]));
        }
    }
    Ok(acc)
}

/// Numeric contraction with a positivity check on `ω`.
pub fn contract_checked(g: &M3, f: &[[M3; 3]; 3]) -> Result<M3> {
    let (vals, _) = herm_eig(g);
    if !(vals[0] > 0.0) {
        return Err(GeomError::SingularMetric { min_eig: vals[0] });
    }
    contract(g, f)
}

/// Sup of the 5-form components of `dΨ` for a jet-valued `(2,2)`-form.
pub fn d_residual_jet(form: &Form<Jet>) -> Result<f64> {
    if form.terms.values().any(|v| v.order() < 1) {
        return Err(GeomError::Order { have: 0, need: 1 });
    }
    Ok(form.d().values().max_abs())
}

/// `d`-residual of a field evaluated through jets at chart point `w`.
pub fn d_residual<F>(field: F, w: [C; 3]) -> Result<f64>
where
    F: Fn([C; 3], usize) -> Result<Form<Jet>>,
{
    d_residual_jet(&field(w, 1)?)
}

/// Finite-difference fallback: fourth-order central differences with one
/// Richardson step, step `h` in chart units.
pub fn d_residual_fd<F>(field: F, w: [C; 3], h: f64) -> Result<f64>
where
    F: Fn([C; 3]) -> Result<Form<C>>,
{
    let deriv = |var: usize, h: f64| -> Result<Form<C>> {
        let shift = |k: f64| {
            let mut p = w;
            let dir = if var < 3 { c(1.0, 0.0) } else { c(0.0, 1.0) };
            p[var % 3] += dir * (k * h);
            p
        };
        let f1 = field(shift(1.0))?;
        let fm1 = field(shift(-1.0))?;
        let f2 = field(shift(2.0))?;
        let fm2 = field(shift(-2.0))?;
        Ok(f1.sub(&fm1).scale(c(8.0 / (12.0 * h), 0.0)).sub(&f2.sub(&fm2).scale(c(1.0 / (12.0 * h), 0.0))))
    };
    let rich = |var: usize| -> Result<Form<C>> {
        let a = deriv(var, h)?;
        let b = deriv(var, h / 2.0)?;
        Ok(b.scale(c(16.0 / 15.0, 0.0)).sub(&a.scale(c(1.0 / 15.0, 0.0))))
    };
    let mut out = Form::<C>::zero();
    for j in 0..3 {
        let dx = rich(j)?;
        let dy = rich(3 + j)?;
        // ∂_j = ½(∂_x − i∂_y), ∂_{j̄} = ½(∂_x + i∂_y)
        let dj = dx.sub(&dy.scale(c(0.0, 1.0))).scale(c(0.5, 0.0));
        let djb = dx.add(&dy.scale(c(0.0, 1.0))).scale(c(0.5, 0.0));
        out = out.add(&Form::single(dz(j), c(1.0, 0.0)).wedge(&dj));
        out = out.add(&Form::single(dzb(j), c(1.0, 0.0)).wedge(&djb));
    }
    Ok(out.max_abs())
}
