//! Scalar Kähler potentials and cutoff profiles.
//!
//! Radial profiles are produced as univariate [`Series`] in the variable
//! `s = |z|^2` (or `x = r^3` on the resolution) and then composed into
//! chart jets.

use crate::error::{GeomError, Result};
use crate::jet::Jet;
use crate::model::Chart;
use crate::quad;
use crate::series::Series;
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Highest derivative order supported for profiles composed into jets.
pub const PROFILE_ORDER: usize = 6;

/// Cone profile `(3/2) s^{2/3}` as a series in `s` around `s0 > 0`.
pub fn cone_profile(s0: f64, order: usize) -> Series {
    Series::var(s0, order).powf(2.0 / 3.0).scale(1.5)
}

/// Jet of `r^2 = |z|^{4/3}` through a chart embedding at chart point `w`.
pub fn cone_potential_jet(chart: &Chart, w: [Complex64; 3], order: usize) -> Result<Jet> {
    let (z, zb) = chart.embedding_jets(w, order)?;
    let s = norm2_jet(&z, &zb);
    Ok(s.powc(2.0 / 3.0))
}

/// `Σ z_i z̄_i` from holomorphic and antiholomorphic coordinate jets.
pub fn norm2_jet(z: &[Jet], zb: &[Jet]) -> Jet {
    let mut s = &z[0] * &zb[0];
    for i in 1..z.len() {
        s = &s + &(&z[i] * &zb[i]);
    }
    s
}

/// `sinh(2τ) − 2τ` without cancellation for small `τ`.
fn sinh2_minus(tau: f64) -> f64 {
    let x = 2.0 * tau;
    if x.abs() < 0.5 {
        let mut term = x * x * x / 6.0;
        let mut sum = term;
        let mut k = 1;
        while term.abs() > 1e-18 * sum.abs() {
            term *= x * x / ((2 * k + 2) as f64 * (2 * k + 3) as f64);
            sum += term;
            k += 1;
        }
        sum
    } else {
        x.sinh() - x
    }
}

fn binom_half(k: usize) -> f64 {
    // binomial(-1/2, k)
    let mut b = 1.0;
    for j in 0..k {
        b *= (-0.5 - j as f64) / (j as f64 + 1.0);
    }
    b
}

/// `K(μ) = (sinh 2τ − 2τ)/sinh³τ` with `μ = sinh²τ`, as a series in `μ`.
fn k_series(mu0: f64, order: usize) -> Series {
    if mu0 < 0.5 {
        // K(μ) = 4 Σ binom(-1/2, k) μ^k / (2k+3)
        let nterms = 90;
        let coef: Vec<f64> = (0..nterms).map(|k| 4.0 * binom_half(k) / (2 * k + 3) as f64).collect();
        let mut out = vec![0.0; order + 1];
        for (m, o) in out.iter_mut().enumerate() {
            // m-th Taylor coefficient at mu0: Σ_k coef_k C(k, m) mu0^{k-m}
            let mut acc = 0.0;
            for (k, ck) in coef.iter().enumerate().skip(m) {
                let mut binom = 1.0;
                for j in 0..m {
                    binom *= (k - j) as f64 / (j + 1) as f64;
                }
                acc += ck * binom * mu0.powi((k - m) as i32);
            }
            *o = acc;
        }
        Series(out)
    } else {
        let mu = Series::var(mu0, order + 1);
        let m = mu.sqrt();
        let one_plus = mu.add_const(1.0).sqrt();
        // asinh(√μ) via its μ-derivative 1/(2√μ√(1+μ))
        let da = (&m * &one_plus).recip().scale(0.5);
        let a = da.integrate(m.value().asinh());
        let a = Series(a.0[..=order].to_vec());
        let mu = Series::var(mu0, order);
        let m = mu.sqrt();
        let one_plus = mu.add_const(1.0).sqrt();
        let num = &(&m * &one_plus) - &a;
        (&num * &mu.powf(-1.5)).scale(2.0)
    }
}

fn check_t_s(t_abs: f64, s: f64) -> Result<f64> {
    if t_abs == 0.0 {
        return Err(GeomError::UseConePotential);
    }
    if s < t_abs * (1.0 - 1e-12) {
        return Err(GeomError::OutsideDomain(format!("s = {s:e} below |t| = {t_abs:e}")));
    }
    Ok(s.max(t_abs))
}

/// `f_t(s)` by adaptive Gauss–Legendre quadrature in `τ`.
pub fn co_smoothing_value(t_abs: f64, s: f64) -> Result<f64> {
    let s = check_t_s(t_abs, s)?;
    let upper = (s / t_abs).acosh();
    let integrand = |tau: f64| sinh2_minus(tau).max(0.0).cbrt();
    let i = quad::integrate_adaptive(&integrand, 0.0, upper, 1e-13);
    Ok(2f64.powf(-1.0 / 3.0) * t_abs.powf(2.0 / 3.0) * i)
}

/// Series in `s` of the smoothing potential `f_t` to the given order.
/// Derivatives come from the closed form of `f_t'`, never from the quadrature.
pub fn co_smoothing_potential(t: Complex64, s: f64, order: usize) -> Result<Series> {
    let t_abs = t.norm();
    let s = check_t_s(t_abs, s)?;
    let value = co_smoothing_value(t_abs, s)?;
    if order == 0 {
        return Ok(Series(vec![value]));
    }
    Ok(co_smoothing_derivative(t_abs, s, order - 1)?.integrate(value))
}

/// Series of `f_t'(s) = 2^{-1/3}|t|^{-1/3} K(μ)^{1/3}`, `μ = s²/|t|² − 1`.
pub fn co_smoothing_derivative(t_abs: f64, s: f64, order: usize) -> Result<Series> {
    let s = check_t_s(t_abs, s)?;
    let u = Series::var(s / t_abs, order);
    let mu = (&u * &u).add_const(-1.0);
    let mu0 = mu.value().max(0.0);
    let mut mu = mu;
    mu.0[0] = mu0;
    let k = mu.compose(k_series(mu0, order).coeffs());
    let scale = 2f64.powf(-1.0 / 3.0) * t_abs.powf(-1.0 / 3.0);
    // d/ds = (1/|t|) d/du
    let raw = k.powf(1.0 / 3.0).scale(scale);
    Ok(Series(raw.0.iter().enumerate().map(|(j, a)| a / t_abs.powi(j as i32)).collect()))
}

/// Radial profile of the cone (`t = 0`) or smoothing metric.
pub fn radial_profile(t: Complex64, s: f64, order: usize) -> Result<Series> {
    if t.norm() == 0.0 {
        if s <= 0.0 {
            return Err(GeomError::DegeneratePoint { r: 0.0 });
        }
        Ok(cone_profile(s, order))
    } else {
        co_smoothing_potential(t, s, order)
    }
}

/// Jet of `f_t(|z|^2)` (or the cone potential when `t = 0`) in a chart.
pub fn co_potential_jet(chart: &Chart, w: [Complex64; 3], order: usize) -> Result<Jet> {
    let (z, zb) = chart.embedding_jets(w, order)?;
    let s = norm2_jet(&z, &zb);
    let prof = radial_profile(chart.center.t, s.value().re, order)?;
    Ok(s.compose_re(prof.coeffs()))
}

/// Resolution profile data at one point.
#[derive(Clone, Debug)]
pub struct ResolutionProfile {
    pub a: f64,
    pub x: f64,
    /// Series of `f_a` in `x`.
    pub f: Series,
    /// Series of `y = x f_a'(x)` in `x`.
    pub y: Series,
}

/// Nonnegative root of `y³ + 6a²y² = x²`.
pub fn resolution_root(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let a2 = a * a;
    let mut y = x.powf(2.0 / 3.0).min(x / (6f64.sqrt() * a));
    for _ in 0..200 {
        let p = y * y * (y + 6.0 * a2) - x * x;
        let dp = y * (3.0 * y + 12.0 * a2);
        let step = p / dp;
        y -= step;
        if step.abs() <= 1e-16 * y.abs() {
            break;
        }
    }
    y
}

/// `f_a(x)` and `y = x f_a'` as series in `x`; closed form
/// `f_a = (3/2) y − 3a² log(1 + y/(6a²))` along the root.
pub fn co_resolution_profile(a: f64, x: f64, order: usize) -> Result<ResolutionProfile> {
    if !(a > 0.0) {
        return Err(GeomError::OutsideDomain(format!("resolution parameter a = {a} must be positive")));
    }
    if x < 0.0 {
        return Err(GeomError::OutsideDomain(format!("x = {x} is negative")));
    }
    let a2 = a * a;
    let y0 = resolution_root(a, x);
    // Invert X(y) = y sqrt(y + 6a²) as a series.
    let xp = |y: &Series| {
        let r = y.add_const(6.0 * a2).sqrt();
        &r + &(y * &r.recip()).scale(0.5)
    };
    let xmap = |y: &Series| y * &y.add_const(6.0 * a2).sqrt();
    let target = Series::var(x, order);
    let mut y = Series::var(y0, order);
    let d0 = xp(&Series::constant(y0, 0)).value();
    y.0[1..].iter_mut().for_each(|c| *c = 0.0);
    if order >= 1 {
        y.0[1] = 1.0 / d0;
    }
    for _ in 0..6 {
        let resid = &xmap(&y) - &target;
        let mut resid = resid;
        resid.0[0] = 0.0;
        y = &y - &(&resid * &xp(&y).recip());
        y.0[0] = y0;
    }
    let f0 = 1.5 * y0 - 3.0 * a2 * (y0 / (6.0 * a2)).ln_1p();
    let mut f = &y.scale(1.5) - &y.scale(1.0 / (6.0 * a2)).add_const(1.0).ln().scale(3.0 * a2);
    f.0[0] = f0;
    Ok(ResolutionProfile { a, x, f, y })
}

/// Fitted large-`x` behaviour of `f_1`.
#[derive(Clone, Debug)]
pub struct F1Asymptotics {
    pub c0: f64,
    pub exponent: f64,
    /// `(x, f_1(x) − (3/2)x^{2/3} + 2 log x)` on the grid.
    pub remainder: Vec<(f64, f64)>,
}

/// Remainder `f_1(x) − (3/2) x^{2/3} + 2 log x`.
pub fn f1_remainder(x: f64) -> f64 {
    let y = resolution_root(1.0, x);
    let f = 1.5 * y - 3.0 * (y / 6.0).ln_1p();
    f - 1.5 * x.powf(2.0 / 3.0) + 2.0 * x.ln()
}

pub fn f1_asymptotics(x_grid: &[f64]) -> Result<F1Asymptotics> {
    let mut xs: Vec<f64> = x_grid.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if xs.len() < 6 || xs[0] < 1e3 * (1.0 - 1e-12) || xs[xs.len() - 1] > 1e7 * (1.0 + 1e-12) {
        return Err(GeomError::FitFailure("grid must hold at least 6 points in [1e3, 1e7]".into()));
    }
    let x_hi = xs[xs.len() - 1];
    let q = x_hi / xs[xs.len() - 2];
    if !(q > 1.0) || (x_hi / xs[0]).log10() < 1.5 {
        return Err(GeomError::FitFailure("grid spans less than 1.5 decades".into()));
    }
    // Aitken extrapolation on a geometric triple ending at the top of the grid.
    let r0 = f1_remainder(x_hi / (q * q));
    let r1 = f1_remainder(x_hi / q);
    let r2 = f1_remainder(x_hi);
    let den = r0 + r2 - 2.0 * r1;
    if den.abs() < 1e-300 {
        return Err(GeomError::FitFailure("degenerate extrapolation".into()));
    }
    let c0 = (r0 * r2 - r1 * r1) / den;
    let remainder: Vec<(f64, f64)> = xs.iter().map(|&x| (x, f1_remainder(x))).collect();
    let pairs: Vec<(f64, f64)> = remainder.iter().map(|&(x, r)| (x, (r - c0).abs())).collect();
    let fit = crate::analysis::fit_decay(&pairs)?;
    Ok(F1Asymptotics { c0, exponent: fit.slope, remainder })
}

/// Cubic smoothstep complement on `[0,1]`: `1 − (3u² − 2u³)`, slope at most 3/2.
fn eta(u: f64, order: usize) -> Series {
    let v = Series::var(u, order);
    let v2 = &v * &v;
    let v3 = &v2 * &v;
    (&v3.scale(2.0) - &v2.scale(3.0)).add_const(1.0)
}

/// Cutoff equal to 1 on `[0, lo]`, 0 on `[hi, ∞)`, squared cubic smoothstep
/// in between, so that `|ζ'|² ≤ 9ζ / (hi − lo)²`.
pub fn smooth_step_down(x: f64, lo: f64, hi: f64, order: usize) -> Series {
    if x <= lo {
        return Series::constant(1.0, order);
    }
    if x >= hi {
        return Series::constant(0.0, order);
    }
    let w = hi - lo;
    let e = eta((x - lo) / w, order);
    let z = &e * &e;
    // rescale derivatives from u to x
    Series(z.0.iter().enumerate().map(|(j, c)| c / w.powi(j as i32)).collect())
}

/// HYM gluing cutoff `ζ`: 1 on `[0,1]`, 0 on `[2,∞)`.
pub fn zeta(x: f64, order: usize) -> Series {
    smooth_step_down(x, 1.0, 2.0, order)
}

/// Balanced-gluing cutoff `σ`: 1 on `[0,1]`, 0 on `[8,∞)`.
pub fn sigma(x: f64, order: usize) -> Series {
    smooth_step_down(x, 1.0, 8.0, order)
}

/// Half-width of the mollifier applied to the cutoff derivative.
pub const MOLLIFIER_HALF_WIDTH: f64 = 0.05;
const MOLLIFIER_NODES: usize = 64;

#[derive(Clone, Debug)]
pub struct CutoffProfile {
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub knot_lo: f64,
    pub knot_hi: f64,
    pub mollifier_width: f64,
    /// Minimum of `v` over `[4, R²]`.
    pub min_v: f64,
    /// Minimum of `(1/s²) d/ds (s² v)` over `[4, R²]`.
    pub min_weighted: f64,
}

fn bump_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static B: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    B.get_or_init(|| quad::gauss_legendre(MOLLIFIER_NODES))
}

fn bump(y: f64, h: f64) -> f64 {
    let u = y / h;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

fn bump_mass(h: f64) -> f64 {
    let (x, w) = bump_nodes();
    x.iter().zip(w).map(|(xi, wi)| wi * bump(h * xi, h)).sum::<f64>() * h
}

impl CutoffProfile {
    /// Unmollified `v = χ'` and its derivatives, `k`-th derivative.
    pub fn v_deriv(&self, s: f64, k: usize) -> f64 {
        if s <= self.knot_lo {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        if s >= self.knot_hi {
            return 0.0;
        }
        let ff = |p: f64, k: usize| -> f64 {
            let mut c = 1.0;
            for j in 0..k {
                c *= p - j as f64;
            }
            c * s.powf(p - k as f64)
        };
        let dk = if k == 0 { self.d } else { 0.0 };
        self.a * ff(-3.0, k) + self.b * ff(-2.0, k) + self.c * ff(2.0, k) + dk
    }

    pub fn v(&self, s: f64) -> f64 {
        self.v_deriv(s, 0)
    }

    /// Antiderivative of `v` with `V(s) = s` on `[0, 5]`.
    fn big_v(&self, s: f64) -> f64 {
        let prim = |s: f64| -self.a / (2.0 * s * s) - self.b / s + self.c * s.powi(3) / 3.0 + self.d * s;
        if s <= self.knot_lo {
            s
        } else if s <= self.knot_hi {
            self.knot_lo + prim(s) - prim(self.knot_lo)
        } else {
            self.knot_lo + prim(self.knot_hi) - prim(self.knot_lo)
        }
    }

    /// `k`-th derivative of the unmollified `χ`.
    fn chi_raw(&self, s: f64, k: usize) -> f64 {
        if k == 0 {
            self.big_v(s)
        } else {
            self.v_deriv(s, k - 1)
        }
    }

    /// `k`-th derivative of the mollified `χ` at `s`, splitting the
    /// convolution at the knots so each piece is smooth.
    pub fn chi_deriv(&self, s: f64, k: usize) -> f64 {
        let h = self.mollifier_width / 2.0;
        let mut cuts = vec![-h];
        for knot in [self.knot_lo, self.knot_hi] {
            let y = s - knot;
            if y > -h && y < h {
                cuts.push(y);
            }
        }
        cuts.push(h);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (x, w) = bump_nodes();
        let mut acc = 0.0;
        for win in cuts.windows(2) {
            let (lo, hi) = (win[0], win[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (xi, wi) in x.iter().zip(w) {
                let y = mid + half * xi;
                acc += wi * half * bump(y, h) * self.chi_raw(s - y, k);
            }
        }
        acc / bump_mass(h)
    }

    /// Series of the mollified `χ` around `s` to the given order.
    pub fn chi_series(&self, s: f64, order: usize) -> Series {
        let h = self.mollifier_width / 2.0;
        if s <= self.knot_lo - h {
            return Series::var(s, order);
        }
        if s >= self.knot_hi + h {
            return Series::constant(self.chi_deriv(self.knot_hi + h, 0), order);
        }
        Series((0..=order).map(|k| self.chi_deriv(s, k) / crate::jet::factorial(k)).collect())
    }
}

/// Solve for the cutoff coefficients and scan the bounds on `[4, R²]`.
pub fn fly_cutoff(r: f64) -> Result<CutoffProfile> {
    if !(r >= 10.0) {
        return Err(GeomError::OutsideDomain(format!("R = {r} must be at least 10")));
    }
    let lo: f64 = 5.0;
    let hi = r * r - 1.0;
    // Columns scaled to unit size at the far knot for conditioning.
    let scale = Vector4::new(1.0, 1.0, hi.powi(-2), 1.0);
    let row = |s: f64| [s.powi(-3), s.powi(-2), s * s, 1.0];
    let drow = |s: f64| [-3.0 * s.powi(-4), -2.0 * s.powi(-3), 2.0 * s, 0.0];
    let rows = [row(lo), drow(lo), row(hi), drow(hi)];
    let m = Matrix4::from_fn(|i, j| rows[i][j] * scale[j]);
    let rhs = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let sol = m.lu().solve(&rhs).ok_or_else(|| GeomError::Solve("cutoff system is singular".into()))?;
    let coef = sol.component_mul(&scale);
    let mut prof = CutoffProfile {
        r,
        a: coef[0],
        b: coef[1],
        c: coef[2],
        d: coef[3],
        knot_lo: lo,
        knot_hi: hi,
        mollifier_width: 2.0 * MOLLIFIER_HALF_WIDTH,
        min_v: f64::INFINITY,
        min_weighted: f64::INFINITY,
    };
    let n = 200_000;
    let (s0, s1) = (4.0f64, r * r);
    for i in 0..=n {
        // log-spaced scan resolves both ends
        let s = s0 * (s1 / s0).powf(i as f64 / n as f64);
        let v = prof.v(s);
        let w = 2.0 * v / s + prof.v_deriv(s, 1);
        prof.min_v = prof.min_v.min(v);
        prof.min_weighted = prof.min_weighted.min(w);
    }
    Ok(prof)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing_potential_vanishes_on_the_cycle() {
        let v = co_smoothing_value(0.3, 0.3).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn k_series_branches_agree() {
        let near = k_series(0.4999999, 3);
        let far = k_series(0.5, 3);
        for j in 0..=3 {
            assert!((near.0[j] - far.0[j]).abs() < 1e-5 * far.0[j].abs().max(1.0), "j={j}");
        }
        assert!((k_series(0.0, 2).value() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_quadrature_difference() {
        let t = 0.7;
        for &s in &[0.75, 1.3, 8.0] {
            let h = 1e-5;
            let fd = (co_smoothing_value(t, s + h).unwrap() - co_smoothing_value(t, s - h).unwrap()) / (2.0 * h);
            let an = co_smoothing_derivative(t, s, 0).unwrap().value();
            assert!((fd - an).abs() < 1e-8 * an.abs(), "s={s}: {fd} vs {an}");
        }
    }

    #[test]
    fn resolution_root_satisfies_cubic() {
        for &x in &[1e-6, 0.3, 7.0, 1e6] {
            let y = resolution_root(1.3, x);
            let res = y * y * y + 6.0 * 1.69 * y * y - x * x;
            assert!(res.abs() <= 1e-12 * (x * x));
        }
    }

    #[test]
    fn resolution_series_matches_implicit_derivative() {
        let a = 0.8;
        let x = 2.0;
        let p = co_resolution_profile(a, x, 3).unwrap();
        let y = p.y.value();
        let dy = 2.0 * x / (3.0 * y * y + 12.0 * a * a * y);
        assert!((p.y.derivative(1) - dy).abs() < 1e-13);
        assert!((p.f.derivative(1) - y / x).abs() < 1e-13);
    }

    #[test]
    fn zeta_derivative_bound() {
        for i in 1..1000 {
            let x = 1.0 + i as f64 / 1000.0;
            let z = zeta(x, 1);
            assert!(z.0[1] * z.0[1] <= 9.0 * z.0[0] + 1e-15);
        }
    }
}
