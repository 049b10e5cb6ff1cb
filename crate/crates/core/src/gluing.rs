//! The two gluing constructions.
//!
//! On the resolved conifold a balanced `(2,2)`-form is assembled from a
//! Calabi–Yau model `ω_CY`, the cutoff correction `Γ_R` and the rescaled
//! cone form `Ω_R`. On the smoothing `V_t` the approximate HYM metric
//! `H_t = χ c g_{co,t} + (1 − χ) K_t` interpolates between the smoothing
//! metric near the vanishing cycle and the pulled-back model `H₀`.
//!
//! The global steps of the perturbation argument (the inverse of `L_t`, the
//! quadratic remainder `𝓠` and the fixed-point map `𝓝`) need a solve on the
//! compact threefold and are not implemented. What is provided are the
//! pointwise pieces those steps consume: `L_t`, `𝓕` and the residual of
//! `H_t`, which together determine the size of the first contraction step.

use crate::analysis::{co_metric_field, fit_decay_span, mc_integral, sample_region, DecayFit, McEstimate, Sample};
use crate::curvature::{anomaly_residual, chern_curvature_at, connection_jets, curvature_jets, hym_residual_fields};
use crate::error::{GeomError, Result};
use crate::forms::{contract, sqrt_22_generic, square_p, Form};
use crate::jet::Jet;
use crate::linalg::{self, c, cholesky, commutator, herm_eig, inv3, mat_exp, mat_mul, values, JM3, M3, C};
use crate::model::{make_cyl_chart, phi_inverse_jets, Chart, ModelPoint, TIP_RADIUS};
use crate::potentials::{fly_cutoff, norm2_jet, sigma, zeta, CutoffProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Parameters shared by both gluing constructions.
#[derive(Clone, Debug)]
pub struct GlueConfig {
    /// FLY gluing scale `R`.
    pub r_glue: f64,
    /// Positivity constant `C₀`.
    pub c0: f64,
    pub t: C,
    pub alpha: f64,
    /// Tail rate `λ`.
    pub lambda: f64,
    /// Multiple `c` of the cone metric in `H₀`.
    pub c: f64,
    /// `ζ` runs from 1 to 0 for `‖z‖²|t|^{-α}` in `[hym_lo, hym_hi]`.
    pub hym_lo: f64,
    pub hym_hi: f64,
}

impl GlueConfig {
    /// Default coupling `α = (1 + λ/3)⁻¹`.
    pub fn new(r_glue: f64, t: C, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(GeomError::OutsideDomain(format!("lambda = {lambda} must lie in (0,1)")));
        }
        Ok(GlueConfig {
            r_glue,
            c0: 1.0,
            t,
            alpha: 1.0 / (1.0 + lambda / 3.0),
            lambda,
            c: 1.0,
            hym_lo: 1.0,
            hym_hi: 2.0,
        })
    }

    /// `C_R² = R⁻³`.
    pub fn c_r2(&self) -> f64 {
        self.r_glue.powi(-3)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(GeomError::OutsideDomain(format!("alpha = {} must lie in (0,1)", self.alpha)));
        }
        if !(self.r_glue >= 10.0) {
            return Err(GeomError::OutsideDomain(format!("R = {} must be at least 10", self.r_glue)));
        }
        if !(self.c > 0.0 && self.c0 > 0.0) {
            return Err(GeomError::OutsideDomain("c and C0 must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// FLY balanced form on the resolution

/// Synthetic Calabi–Yau data near the zero section:
/// `φ = h₁ + r³(1 + ε Re(u v̄)/(|u|²+|v|²))`, `h₁ = δ·2Re(|x|²u + x̄v)`.
#[derive(Clone, Copy, Debug)]
pub struct FlyModel {
    /// `δ`, size of the fiber-linear part `h₁`.
    pub h1_amp: f64,
    /// `ε`, size of the angular correction in `φ − h₁`.
    pub shape_amp: f64,
}

impl Default for FlyModel {
    fn default() -> Self {
        FlyModel { h1_amp: 0.1, shape_amp: 0.3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlyRegion {
    /// `r < R⁻¹`
    Inner,
    /// `R⁻¹ ≤ r < 2R⁻¹`
    Transition,
    /// `2R⁻¹ ≤ r < 1`
    Middle,
    /// `r ≥ 1`
    Outer,
}

impl FlyRegion {
    pub const ALL: [FlyRegion; 4] = [FlyRegion::Inner, FlyRegion::Transition, FlyRegion::Middle, FlyRegion::Outer];

    pub fn of(r: f64, r_glue: f64) -> Self {
        if r < 1.0 / r_glue {
            FlyRegion::Inner
        } else if r < 2.0 / r_glue {
            FlyRegion::Transition
        } else if r < 1.0 {
            FlyRegion::Middle
        } else {
            FlyRegion::Outer
        }
    }

    /// Radial range sampled for this region (the outer one is cut at `r = 2`).
    pub fn range(self, r_glue: f64) -> (f64, f64) {
        match self {
            FlyRegion::Inner => (0.1 / r_glue, 1.0 / r_glue),
            FlyRegion::Transition => (1.0 / r_glue, 2.0 / r_glue),
            FlyRegion::Middle => (2.0 / r_glue, 1.0),
            FlyRegion::Outer => (1.0, 2.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FlyRegion::Inner => "inner",
            FlyRegion::Transition => "transition",
            FlyRegion::Middle => "middle",
            FlyRegion::Outer => "outer",
        }
    }
}

/// Glued form at one point.
#[derive(Clone, Debug)]
pub struct FlyEval {
    pub r: f64,
    pub region: FlyRegion,
    /// `P`-matrix of the glued form.
    pub p: M3,
    /// `P`-matrix of `ω_{co,0}²`.
    pub p_co: M3,
    /// Smallest eigenvalue of the glued form relative to `ω_{co,0}²`.
    pub margin: f64,
}

/// Everything the glued form needs, as jets in `(x, u, v)`.
struct FlyJets {
    r3: Jet,
    log_fs: Jet,
    phi: Jet,
    h1: Jet,
}

fn res_coords(p: &ModelPoint) -> Result<[C; 3]> {
    let rc = p.res.ok_or_else(|| GeomError::Shape("expected a point of the resolution".into()))?;
    if !(p.r() >= TIP_RADIUS) {
        return Err(GeomError::DegeneratePoint { r: p.r() });
    }
    Ok([rc.x, rc.u, rc.v])
}

fn fly_jets(model: &FlyModel, w: [C; 3], order: usize) -> FlyJets {
    let h: Vec<Jet> = (0..3).map(|k| Jet::variable(k, w[k], order)).collect();
    let a: Vec<Jet> = h.iter().map(|j| j.conj_swap()).collect();
    let (x, u, v) = (&h[0], &h[1], &h[2]);
    let (xb, ub, vb) = (&a[0], &a[1], &a[2]);
    let one = c(1.0, 0.0);
    let base = (x * xb).add_const(one);
    let fib = &(u * ub) + &(v * vb);
    let r3 = &base * &fib;
    let log_fs = base.ln();
    // 2Re(|x|²u + x̄v)
    let lin = &(&(x * xb) * u) + &(xb * v);
    let h1 = (&lin + &lin.conj_swap()).scale_re(model.h1_amp);
    // (1+|x|²)·Re(u v̄)
    let uv = u * vb;
    let shape = (&base * &(&uv + &uv.conj_swap())).scale_re(0.5 * model.shape_amp);
    let phi = &(&r3 + &shape) + &h1;
    FlyJets { r3, log_fs, phi, h1 }
}

fn scalar_ddbar(f: &Jet) -> Form<Jet> {
    Form::scalar(f.clone()).i_ddbar()
}

/// `ω_{co,0} = (3/2) i∂∂̄r²` as a form in `(x, u, v)`.
fn cone_form(r3: &Jet) -> Form<Jet> {
    scalar_ddbar(&r3.powc(2.0 / 3.0)).scale(c(1.5, 0.0))
}

/// `Ψ_R = ω_CY² − i∂∂̄(σ(R³r³)·G)` with
/// `G = (φ − h₁)(2p^*ω + i∂∂̄(φ + h₁)) + h₁ i∂∂̄h₁`.
fn psi_form(cfg: &GlueConfig, jets: &FlyJets) -> Form<Jet> {
    let w = scalar_ddbar(&jets.log_fs);
    let ddphi = scalar_ddbar(&jets.phi);
    let omega_cy = w.add(&ddphi);
    let cy2 = omega_cy.wedge(&omega_cy);
    let sval = jets.r3.value().re * cfg.r_glue.powi(3);
    if sval >= 8.0 {
        return cy2;
    }
    let ddh1 = scalar_ddbar(&jets.h1);
    let diff = &jets.phi - &jets.h1;
    let sum = &jets.phi + &jets.h1;
    let inner = w.scale(c(2.0, 0.0)).add(&scalar_ddbar(&sum));
    let g = inner.scale_by(&diff).add(&ddh1.scale_by(&jets.h1));
    let arg = jets.r3.scale_re(cfg.r_glue.powi(3));
    let sig = arg.compose_re(sigma(sval, arg.order()).coeffs());
    cy2.sub(&g.scale_by(&sig).i_ddbar())
}

/// `C_R² i∂∂̄(χ(R²r²) R² i∂∂̄r²)`.
fn omega_r_form(cfg: &GlueConfig, chi: &CutoffProfile, jets: &FlyJets) -> Form<Jet> {
    let r2 = jets.r3.powc(2.0 / 3.0);
    let s = r2.scale_re(cfg.r_glue * cfg.r_glue);
    let sval = s.value().re;
    let ch = s.compose_re(chi.chi_series(sval, s.order()).coeffs());
    let ddr2 = scalar_ddbar(&r2).scale(c(cfg.r_glue * cfg.r_glue, 0.0));
    ddr2.scale_by(&ch).i_ddbar().scale(c(cfg.c_r2(), 0.0))
}

/// Jets of the glued form `Ψ_R + C₀ Ω_R` at resolution coordinates `w`.
/// A jet of order `k` needs scalar jets of order `k + 4`.
pub fn fly_glued_form_jets(cfg: &GlueConfig, model: &FlyModel, chi: &CutoffProfile, w: [C; 3], order: usize) -> Result<Form<Jet>> {
    let jets = fly_jets(model, w, order + 4);
    let psi = psi_form(cfg, &jets);
    Ok(psi.add(&omega_r_form(cfg, chi, &jets).scale(c(cfg.c0, 0.0))))
}

fn whitened_min_eig(p: &M3, p_co: &M3) -> Result<f64> {
    let l = cholesky(p_co)?;
    let li = inv3(&l)?;
    let m = mat_mul(&mat_mul(&li, p), &linalg::adjoint(&li));
    let (vals, _) = herm_eig(&linalg::hermitian_part(&m));
    Ok(vals[0])
}

fn p_matrix(f: &Form<Jet>) -> Result<M3> {
    f.values().to_p22().ok_or_else(|| GeomError::Shape("empty (2,2)-form".into()))
}

fn cone_p(jets: &FlyJets) -> Result<M3> {
    let co = cone_form(&jets.r3);
    p_matrix(&co.wedge(&co))
}

/// Glued balanced form at a resolution point, with its region and
/// positivity margin relative to `ω_{co,0}²`.
pub fn fly_glued_form(cfg: &GlueConfig, model: &FlyModel, chi: &CutoffProfile, p: &ModelPoint) -> Result<FlyEval> {
    let w = res_coords(p)?;
    let r = p.r();
    let jets = fly_jets(model, w, 4);
    let form = psi_form(cfg, &jets).add(&omega_r_form(cfg, chi, &jets).scale(c(cfg.c0, 0.0)));
    let pm = p_matrix(&form)?;
    let p_co = cone_p(&jets)?;
    let margin = whitened_min_eig(&pm, &p_co)?;
    Ok(FlyEval { r, region: FlyRegion::of(r, cfg.r_glue), p: pm, p_co, margin })
}

/// Smallest eigenvalue of `Ψ_R` alone relative to `ω_{co,0}²`.
pub fn psi_margin(cfg: &GlueConfig, model: &FlyModel, p: &ModelPoint) -> Result<f64> {
    let w = res_coords(p)?;
    let jets = fly_jets(model, w, 4);
    whitened_min_eig(&p_matrix(&psi_form(cfg, &jets))?, &cone_p(&jets)?)
}

/// Relative `d`-residual `|dΨ| / |Ψ|` of the glued form at `p`.
pub fn fly_d_residual(cfg: &GlueConfig, model: &FlyModel, chi: &CutoffProfile, p: &ModelPoint) -> Result<f64> {
    let w = res_coords(p)?;
    let f = fly_glued_form_jets(cfg, model, chi, w, 1)?;
    let size = f.values().max_abs();
    Ok(f.d().values().max_abs() / size)
}

/// `n` resolution points with `r` log-uniform in `[r1, r2]`, `x` uniform in
/// the unit disc and `(u, v)` uniform on the sphere.
pub fn sample_resolution(r1: f64, r2: f64, n: usize, seed: u64) -> Result<Vec<ModelPoint>> {
    if !(r1 >= TIP_RADIUS && r2 > r1) {
        return Err(GeomError::OutsideDomain(format!("bad radial range [{r1:e}, {r2:e}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let rr = r1 * (r2 / r1).powf(rng.random::<f64>());
        let rad = rng.random::<f64>().sqrt();
        let ang = rng.random::<f64>() * std::f64::consts::TAU;
        let x = C::from_polar(rad, ang);
        let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n2: f64 = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        let fib2 = rr.powi(3) / (1.0 + x.norm_sqr());
        let sc = fib2.sqrt() / n2;
        out.push(ModelPoint::resolution(x, c(g[0], g[1]) * sc, c(g[2], g[3]) * sc));
    }
    Ok(out)
}

/// Sampled transition constant `C = max(−margin(Ψ_R))/R` over the transition region.
pub fn measure_transition_constant(cfg: &GlueConfig, model: &FlyModel, n: usize, seed: u64) -> Result<f64> {
    let (r1, r2) = FlyRegion::Transition.range(cfg.r_glue);
    let pts = sample_resolution(r1, r2, n, seed)?;
    let worst = pts
        .par_iter()
        .map(|p| psi_margin(cfg, model, p))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok((-worst).max(0.0) / cfg.r_glue)
}

/// Smallest `C` used when setting `C₀ = 3C`.
pub const TRANSITION_CONSTANT_FLOOR: f64 = 0.01;

/// Calibrated configuration: `C₀ = 3·max(C, floor)` and the cutoff for `R`.
pub fn calibrate_fly(cfg: &GlueConfig, model: &FlyModel, n: usize, seed: u64) -> Result<(GlueConfig, CutoffProfile, f64)> {
    let measured = measure_transition_constant(cfg, model, n, seed)?;
    let mut out = cfg.clone();
    out.c0 = 3.0 * measured.max(TRANSITION_CONSTANT_FLOOR);
    Ok((out, fly_cutoff(cfg.r_glue)?, measured))
}

// ---------------------------------------------------------------------------
// Approximate HYM metric on the smoothing

/// Model tail `E₀ = amplitude · |z|^{2(λ−1)/3} · M` with `M` a constant
/// trace-free Hermitian `4×4` matrix, so `|E₀|_{g_{co,0}} ~ r^λ`.
#[derive(Clone, Debug)]
pub struct SyntheticTail {
    pub lambda: f64,
    pub amplitude: f64,
    pub shape: [[C; 4]; 4],
}

impl SyntheticTail {
    pub fn new(lambda: f64, amplitude: f64) -> Self {
        let i = c(0.0, 1.0);
        let mut m = [[c(0.0, 0.0); 4]; 4];
        let d = [0.6, -0.2, 0.3, -0.7];
        for k in 0..4 {
            m[k][k] = c(d[k], 0.0);
        }
        m[0][2] = 0.3 * i;
        m[2][0] = -0.3 * i;
        m[1][3] = c(0.25, 0.1);
        m[3][1] = c(0.25, -0.1);
        m[0][1] = c(-0.15, 0.0);
        m[1][0] = c(-0.15, 0.0);
        SyntheticTail { lambda, amplitude, shape: m }
    }

    pub fn zero() -> Self {
        SyntheticTail { amplitude: 0.0, ..SyntheticTail::new(0.5, 0.0) }
    }
}

/// Ambient `H₀ = c·(f'δ + f'' z̄ z) + E₀` at the cone point `z`, `f = (3/2)s^{2/3}`.
fn ambient_h0(cfg: &GlueConfig, tail: &SyntheticTail, z: &[Jet; 4], zb: &[Jet; 4]) -> [[Jet; 4]; 4] {
    let s = norm2_jet(z, zb);
    let f1 = s.powc(-1.0 / 3.0).scale_re(cfg.c);
    let f2 = s.powc(-4.0 / 3.0).scale_re(-cfg.c / 3.0);
    let tail_w = if tail.amplitude != 0.0 { Some(s.powc((tail.lambda - 1.0) / 3.0).scale_re(tail.amplitude)) } else { None };
    std::array::from_fn(|m| {
        std::array::from_fn(|n| {
            let mut h = &f2 * &(&zb[m] * &z[n]);
            if m == n {
                h = &h + &f1;
            }
            if let Some(tw) = &tail_w {
                let e = tail.shape[m][n];
                if e != c(0.0, 0.0) {
                    h = &h + &tw.scale(e);
                }
            }
            h
        })
    })
}

/// `(1,1)`-part of the pullback of an ambient Hermitian form under a
/// non-holomorphic map with jets `z(w, w̄)`:
/// `K[k][j] = Σ h_{mn̄}(∂_j z_m ∂_{k̄} z̄_n + ∂_{k̄} z_m ∂_j z̄_n)`.
pub fn pullback_11(h: &[[Jet; 4]; 4], z: &[Jet; 4], zb: &[Jet; 4]) -> JM3 {
    let dz: Vec<Vec<Jet>> = (0..3).map(|j| z.iter().map(|x| x.dz(j)).collect()).collect();
    let dzb: Vec<Vec<Jet>> = (0..3).map(|k| z.iter().map(|x| x.dzb(k)).collect()).collect();
    let bdz: Vec<Vec<Jet>> = (0..3).map(|j| zb.iter().map(|x| x.dz(j)).collect()).collect();
    let bdzb: Vec<Vec<Jet>> = (0..3).map(|k| zb.iter().map(|x| x.dzb(k)).collect()).collect();
    std::array::from_fn(|k| {
        std::array::from_fn(|j| {
            let mut acc = Jet::zero(dz[0][0].order());
            for m in 0..4 {
                for n in 0..4 {
                    let t1 = &dz[j][m] * &bdzb[k][n];
                    let t2 = &dzb[k][m] * &bdz[j][n];
                    acc = &acc + &(&h[m][n] * &(&t1 + &t2));
                }
            }
            acc
        })
    })
}

/// `K_t = [(Φ_t⁻¹)^* H₀]^{1,1}` in the chart, jets of the given order.
pub fn pulled_back_model(cfg: &GlueConfig, tail: &SyntheticTail, chart: &Chart, w: [C; 3], order: usize) -> Result<JM3> {
    let (y, yb) = chart.embedding_jets(w, order + 1)?;
    let (z, zb) = phi_inverse_jets(chart.center.t, &y, &yb);
    let h = ambient_h0(cfg, tail, &z, &zb);
    Ok(pullback_11(&h, &z, &zb))
}

/// Which piece of `H_t` is active at ambient `‖z‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HymRegion {
    /// `‖z‖² < |t|^α`
    Inner,
    /// `|t|^α ≤ ‖z‖² < 2|t|^α`
    Transition,
    Outer,
}

impl HymRegion {
    pub fn of(cfg: &GlueConfig, norm2: f64) -> Self {
        let x = norm2 * cfg.t.norm().powf(-cfg.alpha);
        if x < cfg.hym_lo {
            HymRegion::Inner
        } else if x < cfg.hym_hi {
            HymRegion::Transition
        } else {
            HymRegion::Outer
        }
    }
}

/// `H_t = χ c g_{co,t} + (1 − χ) K_t` with `χ = ζ(‖z‖²|t|^{−α})`, jets of the given order.
pub fn glued_hym_metric(cfg: &GlueConfig, tail: &SyntheticTail, chart: &Chart, w: [C; 3], order: usize) -> Result<JM3> {
    let t = chart.center.t;
    if t != cfg.t {
        return Err(GeomError::Shape("chart lies on a different smoothing".into()));
    }
    let (y, yb) = chart.embedding_jets(w, order)?;
    let n2 = norm2_jet(&y, &yb);
    if n2.value().re < t.norm() * (1.0 - 1e-12) {
        return Err(GeomError::OutsideDomain("‖z‖² below |t|".into()));
    }
    let x = n2.scale_re(t.norm().powf(-cfg.alpha));
    let xv = x.value().re;
    if xv <= cfg.hym_lo {
        return Ok(linalg::map(&co_metric_field(chart, w, order)?, |e| e.scale_re(cfg.c)));
    }
    let k = pulled_back_model(cfg, tail, chart, w, order)?;
    if xv >= cfg.hym_hi {
        return Ok(k);
    }
    let g = co_metric_field(chart, w, order)?;
    let prof = crate::potentials::smooth_step_down(xv, cfg.hym_lo, cfg.hym_hi, order);
    let chi = x.compose_re(prof.coeffs());
    let one_minus = chi.scale_re(-1.0).add_const(c(1.0, 0.0));
    let cg = chi.scale_re(cfg.c);
    Ok(std::array::from_fn(|a| std::array::from_fn(|b| &(&g[a][b] * &cg) + &(&k[a][b] * &one_minus))))
}

/// Radial range `r = ‖z‖^{2/3}` of an HYM region, the outer one cut at `r = 1`.
pub fn hym_region_range(cfg: &GlueConfig, region: HymRegion) -> (f64, f64) {
    let ta = cfg.t.norm().powf(cfg.alpha);
    match region {
        HymRegion::Inner => ((cfg.t.norm() * (1.0 + 1e-6)).cbrt(), (cfg.hym_lo * ta).cbrt()),
        HymRegion::Transition => ((cfg.hym_lo * ta).cbrt(), (cfg.hym_hi * ta).cbrt()),
        HymRegion::Outer => ((cfg.hym_hi * ta).cbrt(), 1.0),
    }
}

/// Largest HYM residual over the samples of one region.
#[derive(Clone, Copy, Debug)]
pub struct RegionSup {
    /// `sup |Λ F|`
    pub raw: f64,
    /// `sup r²|Λ F|`
    pub weighted: f64,
    pub count: usize,
}

/// Residual `|iΛ_{g_{co,t}} F_{H_t}|_{H_t}` sampled over a region of `V_t`.
pub fn hym_region_sup(cfg: &GlueConfig, tail: &SyntheticTail, region: HymRegion, n: usize, seed: u64) -> Result<RegionSup> {
    let (r1, r2) = hym_region_range(cfg, region);
    let samples = sample_region(cfg.t, r1, r2, n, seed)?;
    let w = [c(0.0, 0.0); 3];
    let vals = samples
        .par_iter()
        .filter(|s| HymRegion::of(cfg, s.point.norm2()) == region)
        .map(|s| {
            let ch = make_cyl_chart(&s.point)?;
            let (_, res) = hym_residual_fields(|w| ch.co_metric(w), |w, o| glued_hym_metric(cfg, tail, &ch, w, o), w)?;
            let r = s.point.r();
            Ok((res, r * r * res))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    if vals.is_empty() {
        return Err(GeomError::EmptySamples);
    }
    let raw = vals.iter().map(|v| v.0).fold(0.0, f64::max);
    let weighted = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(RegionSup { raw, weighted, count: vals.len() })
}

/// Weighted region sup as a function of `|t|` with its fitted exponent.
#[derive(Clone, Debug)]
pub struct HymScan {
    pub region: HymRegion,
    pub lambda: f64,
    pub alpha: f64,
    pub amplitude: f64,
    /// `(|t|, sup r²|ΛF|)`
    pub points: Vec<(f64, f64)>,
    pub fit: DecayFit,
}

/// Run `hym_region_sup` for each `|t|` and fit the exponent in `|t|`. The
/// fit accepts a single decade since the transition only separates from
/// the cycle for `|t| ≲ 10⁻²`.
pub fn hym_exponent_scan(r_glue: f64, lambda: f64, amplitude: f64, region: HymRegion, ts: &[f64], n: usize, seed: u64) -> Result<HymScan> {
    let tail = SyntheticTail::new(lambda, amplitude);
    let mut points = Vec::with_capacity(ts.len());
    let mut alpha = f64::NAN;
    for &t in ts {
        let cfg = GlueConfig::new(r_glue, c(t, 0.0), lambda)?;
        alpha = cfg.alpha;
        points.push((t, hym_region_sup(&cfg, &tail, region, n, seed)?.weighted));
    }
    let fit = fit_decay_span(&points, HYM_SCAN_MIN_DECADES)?;
    Ok(HymScan { region, lambda, alpha, amplitude, points, fit })
}

pub const HYM_SCAN_MIN_DECADES: f64 = 0.9;

/// Tail amplitude used by the default checks.
pub const DEFAULT_TAIL_AMPLITUDE: f64 = 1.0;

/// `ζ` of the HYM gluing, exposed for plots and checks.
pub fn hym_cutoff(x: f64) -> f64 {
    zeta(x, 0).value()
}

// ---------------------------------------------------------------------------
// Linearized operator, HYM functional, θ-perturbed metric

/// `L_t h = g^{jk̄} ∂_{k̄}(∂_j h + [A_j, h]) + ½[iΛ_ω F_H, h]` for an
/// endomorphism field `h` and metric `H`, both with 2-jets.
pub fn linearized_operator(g: &M3, hm: &JM3, h: &JM3) -> Result<M3> {
    let a = connection_jets(hm)?;
    let ginv = inv3(g)?;
    let mut acc = linalg::zeros3();
    for j in 0..3 {
        let dh = linalg::map(h, |e| e.dz(j));
        let hv = linalg::map(h, |e| e.truncate(a[j][0][0].order()));
        let x = linalg::mat_add(&dh, &commutator(&a[j], &hv));
        for k in 0..3 {
            let dx = values(&linalg::map(&x, |e| e.dzb(k)));
            acc = linalg::mat_add(&acc, &linalg::mat_scale(&dx, ginv[j][k]));
        }
    }
    let cd = chern_curvature_at(hm)?;
    let lf = contract(g, &cd.f)?;
    let half = linalg::mat_scale(&commutator(&lf, &values(h)), c(0.5, 0.0));
    Ok(linalg::mat_add(&acc, &half))
}

/// `𝓕(u) = e^{u/2} (iΛ_ω F_{H e^u}) e^{−u/2}` for an `H`-self-adjoint
/// endomorphism field `u` with 2-jets.
pub fn hym_functional(u: &JM3, hm: &JM3, g: &M3) -> Result<M3> {
    let hu = mat_mul(hm, &mat_exp(u));
    let f = curvature_jets(&hu)?;
    let fv: [[M3; 3]; 3] = std::array::from_fn(|j| std::array::from_fn(|k| values(&f[j][k])));
    let lf = contract(g, &fv)?;
    let uv = values(u);
    let e_plus = mat_exp(&linalg::mat_scale(&uv, c(0.5, 0.0)));
    let e_minus = mat_exp(&linalg::mat_scale(&uv, c(-0.5, 0.0)));
    Ok(mat_mul(&mat_mul(&e_plus, &lf), &e_minus))
}

/// Bound on `|θ + θ̄|_g` under which the square root is taken.
pub const THETA_LIMIT: f64 = 0.01;

/// `g_FLY` with `ω_FLY² = ω² + θ + θ̄`; `theta` is the `P`-matrix of `θ + θ̄`.
pub fn theta_perturbed_metric(omega: &JM3, theta: &JM3) -> Result<JM3> {
    let gv = values(omega);
    let size = Form::from_p22(&values(theta)).norm_g(&gv)?;
    if size > THETA_LIMIT {
        return Err(GeomError::PerturbationTooLarge { size, limit: THETA_LIMIT });
    }
    let sq = square_p(omega);
    let total: JM3 = std::array::from_fn(|a| std::array::from_fn(|b| &sq[a][b] + &theta[a][b]));
    sqrt_22_generic(&total)
}

/// Synthetic `θ + θ̄ = amplitude·|t|^{2/3} ω∧β` with `β = |z|^{-2/3}` times
/// the pullback of a fixed ambient Hermitian form; returned as a `P`-matrix.
pub fn synthetic_theta(chart: &Chart, w: [C; 3], order: usize, amplitude: f64) -> Result<JM3> {
    let omega = co_metric_field(chart, w, order)?;
    let (z, zb) = chart.embedding_jets(w, order + 1)?;
    let s = norm2_jet(&z, &zb);
    let b = theta_shape();
    let sw = s.powc(-1.0 / 3.0);
    let h: [[Jet; 4]; 4] = std::array::from_fn(|m| std::array::from_fn(|n| sw.scale(b[m][n])));
    let beta = pullback_11(&h, &z, &zb);
    let form = Form::from_hermitian(&omega).wedge(&Form::from_hermitian(&beta));
    let p = form.to_p22().ok_or_else(|| GeomError::Shape("empty (2,2)-form".into()))?;
    let scale = amplitude * chart.center.t.norm().powf(2.0 / 3.0);
    Ok(linalg::map(&p, |e| e.scale_re(scale)))
}

/// Self-adjoint test field `h = b(‖z‖²) H⁻¹ B̃` with `b` a smooth bump
/// supported in `(s_lo, s_hi)` and `B̃` the pullback of a constant Hermitian `B`.
#[derive(Clone, Debug)]
pub struct BumpField {
    pub s_lo: f64,
    pub s_hi: f64,
    pub b: [[C; 4]; 4],
}

impl BumpField {
    pub fn random(s_lo: f64, s_hi: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = [[c(0.0, 0.0); 4]; 4];
        for m in 0..4 {
            b[m][m] = c(rng.sample(StandardNormal), 0.0);
            for n in m + 1..4 {
                let z = c(rng.sample(StandardNormal), rng.sample(StandardNormal));
                b[m][n] = z;
                b[n][m] = z.conj();
            }
        }
        BumpField { s_lo, s_hi, b }
    }

    fn bump(&self, s: &Jet) -> Option<Jet> {
        let u = s.scale_re(2.0 / (self.s_hi - self.s_lo)).add_const(c(-(self.s_hi + self.s_lo) / (self.s_hi - self.s_lo), 0.0));
        let uv = u.value().re;
        if uv.abs() >= 1.0 {
            return None;
        }
        let gap = (&u * &u).scale_re(-1.0).add_const(c(1.0, 0.0));
        Some(gap.recip().scale_re(-1.0).exp())
    }

    /// Jets of `h` in the chart for the metric jets `hm` of the same order.
    pub fn jets(&self, chart: &Chart, w: [C; 3], hm: &JM3) -> Result<JM3> {
        let order = hm[0][0].order();
        let (z, zb) = chart.embedding_jets(w, order + 1)?;
        let s = norm2_jet(&z, &zb).truncate(order);
        let Some(bump) = self.bump(&s) else {
            return Ok(linalg::map(hm, |e| Jet::zero(e.order())));
        };
        let h: [[Jet; 4]; 4] = std::array::from_fn(|m| std::array::from_fn(|n| bump.scale(self.b[m][n])));
        let bt = pullback_11(&h, &z, &zb);
        Ok(mat_mul(&inv3(hm)?, &bt))
    }
}

/// `∫ Tr(L_t h) dvol` over the samples with `H = H_t` and `g = g_{co,t}`.
pub fn linearized_trace_integral(cfg: &GlueConfig, tail: &SyntheticTail, field: &BumpField, samples: &[Sample]) -> Result<McEstimate> {
    let w = [c(0.0, 0.0); 3];
    let vals = samples
        .par_iter()
        .map(|s| {
            let ch = make_cyl_chart(&s.point)?;
            let hm = glued_hym_metric(cfg, tail, &ch, w, 2)?;
            let h = field.jets(&ch, w, &hm)?;
            let g = values(&co_metric_field(&ch, w, 0)?);
            Ok(linalg::trace(&linearized_operator(&g, &hm, &h)?).re)
        })
        .collect::<Result<Vec<f64>>>()?;
    mc_integral(&vals, samples)
}

/// `H = g·exp(ε g⁻¹β)` with `g = g_{co,t}` and `β = ‖z‖^{2(λ−1)/3}` times the
/// pullback of a fixed Hermitian shape, so `|H − g|_g ~ ε r^λ`.
pub fn tailed_co_metric(chart: &Chart, w: [C; 3], order: usize, eps: f64, lambda: f64) -> Result<JM3> {
    let g = co_metric_field(chart, w, order)?;
    if eps == 0.0 {
        return Ok(g);
    }
    let (z, zb) = chart.embedding_jets(w, order + 1)?;
    let sw = norm2_jet(&z, &zb).powc((lambda - 1.0) / 3.0);
    let shape = SyntheticTail::new(lambda, 1.0).shape;
    let h: [[Jet; 4]; 4] = std::array::from_fn(|m| std::array::from_fn(|n| sw.scale(shape[m][n])));
    let beta = pullback_11(&h, &z, &zb);
    let x = linalg::map(&mat_mul(&inv3(&g)?, &beta), |e| e.scale_re(eps));
    Ok(mat_mul(&g, &mat_exp(&x)))
}

/// Sup over `n` directions of the anomaly residual of `(g_{co,t}, H)` at
/// radius `r`, with `H` from `tailed_co_metric` and `α′ = 1`.
pub fn anomaly_shell_sup(t: C, r: f64, eps: f64, lambda: f64, n: usize, seed: u64) -> Result<f64> {
    let samples = sample_region(t, r, r * (1.0 + 1e-9), n, seed)?;
    let w = [c(0.0, 0.0); 3];
    let vals = samples
        .par_iter()
        .map(|s| {
            let ch = make_cyl_chart(&s.point)?;
            let g = co_metric_field(&ch, w, 2)?;
            let h = tailed_co_metric(&ch, w, 2, eps, lambda)?;
            anomaly_residual(&g, &h, 1.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

fn theta_shape() -> [[C; 4]; 4] {
    let mut b = [[c(0.0, 0.0); 4]; 4];
    let d = [0.5, -0.3, 0.2, 0.1];
    for k in 0..4 {
        b[k][k] = c(d[k], 0.0);
    }
    b[0][3] = c(0.2, 0.2);
    b[3][0] = c(0.2, -0.2);
    b[1][2] = c(0.0, -0.25);
    b[2][1] = c(0.0, 0.25);
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::sample_region;
    use crate::curvature::{h_hermitian_residual, hym_residual};
    use crate::linalg::fro;
    use crate::make_cyl_chart;

    fn cfg() -> GlueConfig {
        GlueConfig::new(100.0, c(1e-2, 0.0), 0.5).unwrap()
    }

    #[test]
    fn default_coupling() {
        let g = cfg();
        assert!((g.alpha * g.lambda / 3.0 - (1.0 - g.alpha)).abs() < 1e-15);
        assert_eq!(g.c_r2(), 1e-6);
    }

    #[test]
    fn scalar_i_ddbar_matches_hessian() {
        let w = [c(0.3, 0.1), c(-0.2, 0.4), c(0.1, -0.3)];
        let j = fly_jets(&FlyModel::default(), w, 3);
        let a = scalar_ddbar(&j.phi).values();
        let b = Form::from_hermitian(&crate::forms::i_ddbar(&j.phi).unwrap()).values();
        assert!(a.sub(&b).max_abs() < 1e-14);
    }

    #[test]
    fn psi_vanishes_inside() {
        let g = cfg();
        let pts = sample_resolution(0.2 / g.r_glue, 0.9 / g.r_glue, 5, 3).unwrap();
        for p in &pts {
            let w = res_coords(p).unwrap();
            let jets = fly_jets(&FlyModel::default(), w, 4);
            let psi = p_matrix(&psi_form(&g, &jets)).unwrap();
            let co = cone_p(&jets).unwrap();
            assert!(fro(&psi) < 1e-9 * fro(&co) * g.r_glue, "{:e}", fro(&psi));
        }
    }

    #[test]
    fn resolution_samples_have_requested_radius() {
        let pts = sample_resolution(0.01, 0.02, 20, 1).unwrap();
        assert!(pts.iter().all(|p| p.r() >= 0.01 * (1.0 - 1e-12) && p.r() <= 0.02 * (1.0 + 1e-12)));
    }

    #[test]
    fn glued_metric_is_cone_metric_inside() {
        let g = cfg();
        let r_in = (0.5 * g.t.norm().powf(g.alpha)).cbrt();
        let s = sample_region(g.t, r_in * 0.99, r_in, 3, 5).unwrap();
        for smp in &s {
            let ch = make_cyl_chart(&smp.point).unwrap();
            let h = glued_hym_metric(&g, &SyntheticTail::new(0.5, 0.2), &ch, [c(0.0, 0.0); 3], 2).unwrap();
            let co = co_metric_field(&ch, [c(0.0, 0.0); 3], 2).unwrap();
            assert_eq!(values(&h), values(&co));
        }
    }

    #[test]
    fn linearized_operator_kills_identity_and_keeps_hermitian() {
        let g = cfg();
        let s = sample_region(g.t, 0.5, 0.6, 2, 8).unwrap();
        let ch = make_cyl_chart(&s[0].point).unwrap();
        let w = [c(0.0, 0.0); 3];
        let hm = glued_hym_metric(&g, &SyntheticTail::new(0.5, 0.2), &ch, w, 2).unwrap();
        let gv = ch.co_metric(w).unwrap();
        let id: JM3 = std::array::from_fn(|a| {
            std::array::from_fn(|b| Jet::real(if a == b { 1.0 } else { 0.0 }, 2))
        });
        assert!(fro(&linearized_operator(&gv, &hm, &id).unwrap()) < 1e-10);
        // h = M⁻¹P with P a Hermitian polynomial field
        let vars: Vec<Jet> = (0..6).map(|k| Jet::variable(k, if k < 3 { w[k] } else { w[k - 3].conj() }, 2)).collect();
        let p: JM3 = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let base = &vars[a] * &vars[3 + b];
                let lin = vars[(a + b) % 3].scale(c(0.2, 0.1 * a as f64));
                let herm = &lin + &vars[3 + (a + b) % 3].scale(c(0.2, -0.1 * b as f64));
                let v = &base + &herm;
                if a == b { v.add_const(c(1.0 + a as f64, 0.0)) } else { v }
            })
        });
        let h = mat_mul(&inv3(&hm).unwrap(), &p);
        let l = linearized_operator(&gv, &hm, &h).unwrap();
        assert!(h_hermitian_residual(&values(&hm), &l) < 1e-8 * fro(&l).max(1.0));
    }

    #[test]
    fn functional_at_zero_is_residual() {
        let g = cfg();
        let s = sample_region(g.t, 0.3, 0.4, 1, 9).unwrap();
        let ch = make_cyl_chart(&s[0].point).unwrap();
        let w = [c(0.0, 0.0); 3];
        let hm = glued_hym_metric(&g, &SyntheticTail::new(0.5, 0.2), &ch, w, 2).unwrap();
        let gv = ch.co_metric(w).unwrap();
        let zero: JM3 = std::array::from_fn(|_| std::array::from_fn(|_| Jet::zero(2)));
        let f0 = hym_functional(&zero, &hm, &gv).unwrap();
        let (l, _) = hym_residual(&gv, &values(&hm), &chern_curvature_at(&hm).unwrap()).unwrap();
        assert!(fro(&linalg::mat_sub(&f0, &l)) < 1e-12 * fro(&l).max(1.0));
        let shift: JM3 = std::array::from_fn(|a| std::array::from_fn(|b| Jet::real(if a == b { 0.7 } else { 0.0 }, 2)));
        let fc = hym_functional(&shift, &hm, &gv).unwrap();
        assert!(fro(&linalg::mat_sub(&fc, &l)) < 1e-10 * fro(&l).max(1.0));
    }

    #[test]
    fn theta_zero_returns_omega() {
        let s = sample_region(c(1e-3, 0.0), 0.5, 0.6, 1, 4).unwrap();
        let ch = make_cyl_chart(&s[0].point).unwrap();
        let w = [c(0.0, 0.0); 3];
        let om = co_metric_field(&ch, w, 1).unwrap();
        let zero: JM3 = std::array::from_fn(|_| std::array::from_fn(|_| Jet::zero(1)));
        let out = theta_perturbed_metric(&om, &zero).unwrap();
        assert!(fro(&linalg::mat_sub(&values(&out), &values(&om))) < 1e-12 * fro(&values(&om)));
    }
}
