//! Measurement harness: decay-exponent regression, link sampling of annuli
//! with Riemannian volume weights, Monte-Carlo integration and weighted norms.

use crate::curvature::{connection_jets, endo_norm};
use crate::error::{GeomError, Result};
use crate::jet::Jet;
use crate::linalg::{self, adjoint, c, cholesky, commutator, inv3, mat_add, mat_scale, mat_sub, values, JM3, M3, C};
use crate::model::{make_cyl_chart, norm2, phi_map, Chart, ModelPoint};
use crate::potentials::radial_profile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Least-squares power law `value ≈ e^{intercept} x^{slope}`.
#[derive(Clone, Debug)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// 95% half-width of the slope.
    pub half_width: f64,
    /// Set when `r2 < 0.9`.
    pub flagged: bool,
    /// `(log x, log value)`.
    pub samples: Vec<(f64, f64)>,
}

pub const MIN_FIT_SAMPLES: usize = 6;
pub const MIN_FIT_DECADES: f64 = 1.5;

/// Power-law fit over at least 6 samples spanning 1.5 decades.
pub fn fit_decay(pairs: &[(f64, f64)]) -> Result<DecayFit> {
    fit_decay_span(pairs, MIN_FIT_DECADES)
}

/// Power-law fit with a caller-chosen minimum span in decades.
pub fn fit_decay_span(pairs: &[(f64, f64)], min_decades: f64) -> Result<DecayFit> {
    if pairs.len() < MIN_FIT_SAMPLES {
        return Err(GeomError::FitFailure(format!("{} samples, need {MIN_FIT_SAMPLES}", pairs.len())));
    }
    let bad: Vec<usize> =
        pairs.iter().enumerate().filter(|(_, (x, v))| !(x.is_finite() && v.is_finite() && *x > 0.0 && *v > 0.0)).map(|(i, _)| i).collect();
    if !bad.is_empty() {
        return Err(GeomError::FitFailure(format!("non-positive or non-finite samples at {bad:?}")));
    }
    let samples: Vec<(f64, f64)> = pairs.iter().map(|(x, v)| (x.ln(), v.ln())).collect();
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo) / std::f64::consts::LN_10;
    if span < min_decades - 1e-9 {
        return Err(GeomError::FitFailure(format!("samples span {span:.3} decades, need {min_decades}")));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let syy: f64 = samples.iter().map(|s| (s.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = samples.iter().map(|s| (s.1 - intercept - slope * s.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let dof = n - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let tq = StudentsT::new(0.0, 1.0, dof).map(|d| d.inverse_cdf(0.975)).unwrap_or(2.0);
    Ok(DecayFit { slope, intercept, r2, half_width: tq * se, flagged: r2 < 0.9, samples })
}

/// One sampled point of an annulus in `V_t`.
#[derive(Clone, Debug)]
pub struct Sample {
    /// The point on `V_t`.
    pub point: ModelPoint,
    /// Its preimage on `V_0`.
    pub z0: [C; 4],
    /// Cone radius of the preimage (the sampled radius).
    pub r0: f64,
    /// Riemannian volume density of `g_{co,t}` over the sampling density.
    pub weight: f64,
}

/// Total measure of the link parameter space `{(a, b)}`: `|S³|·|S²| = 8π³`.
pub const LINK_MEASURE: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI;

fn unit_vec4<R: Rng>(rng: &mut R) -> [f64; 4] {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.map(|x| x / n);
        }
    }
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthonormalize(v: [f64; 4], basis: &[[f64; 4]]) -> Option<[f64; 4]> {
    let mut w = v;
    for b in basis {
        let p = dot(&w, b);
        for i in 0..4 {
            w[i] -= p * b[i];
        }
    }
    let n = dot(&w, &w).sqrt();
    if n < 1e-6 {
        None
    } else {
        Some(w.map(|x| x / n))
    }
}

/// Orthonormal `(f1, f2)` completing `(a, b)`.
fn complete_frame(a: &[f64; 4], b: &[f64; 4]) -> ([f64; 4], [f64; 4]) {
    let mut out = Vec::new();
    for e in 0..4 {
        let mut v = [0.0; 4];
        v[e] = 1.0;
        let mut basis = vec![*a, *b];
        basis.extend(out.iter().copied());
        if let Some(f) = orthonormalize(v, &basis) {
            out.push(f);
            if out.len() == 2 {
                break;
            }
        }
    }
    (out[0], out[1])
}

/// `dΦ_t(X) = X + tX̄/(2s) − t z̄ Re(z̄·X)/s²` at `z ∈ V_0`.
pub fn phi_differential(t: C, z: &[C; 4], x: &[C; 4]) -> [C; 4] {
    let s = norm2(z);
    let zx: C = (0..4).map(|m| z[m].conj() * x[m]).sum();
    std::array::from_fn(|m| x[m] + t * x[m].conj() / (2.0 * s) - t * z[m].conj() * zx.re / (s * s))
}

/// `g_R(U, V) = 2 Re Σ h_{mn̄} U^m conj(V^n)` for the ambient Hessian of the
/// radial potential at `y`.
pub fn ambient_real_metric(y: &[C; 4], f1: f64, f2: f64, u: &[C; 4], v: &[C; 4]) -> f64 {
    let uv: C = (0..4).map(|m| u[m] * v[m].conj()).sum();
    let yu: C = (0..4).map(|m| y[m].conj() * u[m]).sum();
    let yv: C = (0..4).map(|m| y[m].conj() * v[m]).sum();
    2.0 * (f1 * uv + f2 * yu * yv.conj()).re
}

/// `|Φ_t^*g_{co,t} − g_{co,0}|_{g_{co,0}}` at `z0 ∈ V_0`, as real symmetric
/// tensors on the tangent space (frame-independent relative Frobenius norm).
pub fn phi_pullback_deviation(t: C, z0: &[C; 4]) -> Result<f64> {
    let p0 = ModelPoint::smoothing(*z0, c(0.0, 0.0))?;
    let chart = make_cyl_chart(&p0)?;
    let f = chart.frame([c(0.0, 0.0); 3])?;
    let mut tang: Vec<[C; 4]> = Vec::with_capacity(6);
    for i in 0..3 {
        let col: [C; 4] = std::array::from_fn(|m| f[m][i]);
        tang.push(col);
        tang.push(col.map(|x| x * c(0.0, 1.0)));
    }
    let s0 = norm2(z0);
    let p0f = radial_profile(c(0.0, 0.0), s0, 2)?;
    let y = phi_map(t, &p0)?.z;
    let pt = radial_profile(t, norm2(&y), 2)?;
    let pushed: Vec<[C; 4]> = tang.iter().map(|x| phi_differential(t, z0, x)).collect();
    let b = nalgebra::DMatrix::from_fn(6, 6, |i, j| ambient_real_metric(z0, p0f.derivative(1), p0f.derivative(2), &tang[i], &tang[j]));
    let a = nalgebra::DMatrix::from_fn(6, 6, |i, j| ambient_real_metric(&y, pt.derivative(1), pt.derivative(2), &pushed[i], &pushed[j]));
    let l = b.clone().cholesky().ok_or(GeomError::SingularMetric { min_eig: 0.0 })?;
    let li = l.l().try_inverse().ok_or_else(|| GeomError::Solve("frame Gram matrix".into()))?;
    let rel = &li * (a - b) * li.transpose();
    Ok(rel.norm())
}

fn link_point(rho: f64, a: &[f64; 4], b: &[f64; 4]) -> [C; 4] {
    let k = rho.powf(1.5) / std::f64::consts::SQRT_2;
    std::array::from_fn(|m| c(a[m], b[m]) * k)
}

/// Volume density of `g_{co,t}` at `Φ_t(z(ρ, a, b))` in the parameter measure
/// `dρ · dσ(a) · dσ_a(b)`.
pub fn link_jacobian(t: C, rho: f64, a: &[f64; 4], b: &[f64; 4]) -> Result<f64> {
    let z = link_point(rho, a, b);
    let (f1, f2) = (a.to_owned(), b.to_owned());
    let (e1, e2) = complete_frame(&f1, &f2);
    let k = rho.powf(1.5) / std::f64::consts::SQRT_2;
    let mut tang: Vec<[C; 4]> = Vec::with_capacity(6);
    tang.push(std::array::from_fn(|m| c(a[m], b[m]) * (1.5 * rho.sqrt() / std::f64::consts::SQRT_2)));
    for v in [b, &e1, &e2] {
        let bv = dot(b, v);
        tang.push(std::array::from_fn(|m| c(v[m], -bv * a[m]) * k));
    }
    for f in [&e1, &e2] {
        tang.push(std::array::from_fn(|m| c(0.0, f[m]) * k));
    }
    let y: [C; 4] = if t.norm() == 0.0 {
        z
    } else {
        let s = norm2(&z);
        std::array::from_fn(|m| z[m] + t * z[m].conj() / (2.0 * s))
    };
    let pushed: Vec<[C; 4]> = tang.iter().map(|x| if t.norm() == 0.0 { *x } else { phi_differential(t, &z, x) }).collect();
    let prof = radial_profile(t, norm2(&y), 2)?;
    let (d1, d2) = (prof.derivative(1), prof.derivative(2));
    let gram = nalgebra::DMatrix::from_fn(6, 6, |i, j| ambient_real_metric(&y, d1, d2, &pushed[i], &pushed[j]));
    let det = gram.determinant();
    if !(det > 0.0) {
        return Err(GeomError::SingularMetric { min_eig: det });
    }
    Ok(det.sqrt())
}

/// Sample `n` points of `Φ_t({r_1 ≤ r ≤ r_2} ⊂ V_0)`: `a ∈ S³`, `b ∈ S² ∩ a^⊥`
/// uniform, radius log-uniform.
pub fn sample_region(t: C, r1: f64, r2: f64, n: usize, seed: u64) -> Result<Vec<Sample>> {
    if !(r1 > 0.0 && r2 >= r1) {
        return Err(GeomError::OutsideDomain(format!("invalid radii [{r1}, {r2}]")));
    }
    if r1.powi(3) <= t.norm() / 2.0 {
        return Err(GeomError::OutsideDomain(format!("r1³ = {:e} must exceed |t|/2 = {:e}", r1.powi(3), t.norm() / 2.0)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_span = (r2 / r1).ln();
    let params: Vec<(f64, [f64; 4], [f64; 4])> = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let rho = r1 * (u * log_span).exp();
            let a = unit_vec4(&mut rng);
            let b = loop {
                let v = unit_vec4(&mut rng);
                if let Some(b) = orthonormalize(v, &[a]) {
                    break b;
                }
            };
            (rho, a, b)
        })
        .collect();
    params
        .into_par_iter()
        .map(|(rho, a, b)| {
            let z0 = link_point(rho, &a, &b);
            let p0 = ModelPoint { z: z0, t: c(0.0, 0.0), variety: crate::model::Variety::Smoothing, res: None };
            let point = if t.norm() == 0.0 { p0 } else { phi_map(t, &p0)? };
            let jac = link_jacobian(t, rho, &a, &b)?;
            let density = if log_span > 0.0 { 1.0 / (rho * log_span) } else { 1.0 } / LINK_MEASURE;
            Ok(Sample { point, z0, r0: rho, weight: jac / density })
        })
        .collect()
}

/// Deterministic oracle for the volume of the sampled annulus: Gauss–Legendre
/// in the radius, the link integral being exact by `SO(4)` symmetry.
pub fn annulus_volume_oracle(t: C, r1: f64, r2: f64, nodes: usize) -> Result<f64> {
    let a = [1.0, 0.0, 0.0, 0.0];
    let b = [0.0, 1.0, 0.0, 0.0];
    let (x, w) = crate::quad::gauss_legendre(nodes);
    let (lo, hi) = (r1.ln(), r2.ln());
    let mut acc = 0.0;
    for i in 0..x.len() {
        let l = 0.5 * (hi - lo) * x[i] + 0.5 * (hi + lo);
        let rho = l.exp();
        acc += w[i] * 0.5 * (hi - lo) * rho * link_jacobian(t, rho, &a, &b)?;
    }
    Ok(acc * LINK_MEASURE)
}

/// Monte-Carlo estimate with its jackknife standard error.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// Importance-weighted mean `(1/N) Σ f_i w_i` with jackknife standard error.
pub fn mc_integral(values: &[f64], samples: &[Sample]) -> Result<McEstimate> {
    if values.is_empty() || samples.is_empty() {
        return Err(GeomError::EmptySamples);
    }
    if values.len() != samples.len() {
        return Err(GeomError::Shape(format!("{} values for {} samples", values.len(), samples.len())));
    }
    let terms: Vec<f64> = values.iter().zip(samples).map(|(v, s)| v * s.weight).collect();
    let bad: Vec<usize> = terms.iter().enumerate().filter(|(_, x)| !x.is_finite()).map(|(i, _)| i).collect();
    if !bad.is_empty() {
        return Err(GeomError::NonFinite(bad));
    }
    jackknife_mean(&terms)
}

/// Mean and jackknife standard error of a list of terms.
pub fn jackknife_mean(terms: &[f64]) -> Result<McEstimate> {
    let n = terms.len();
    if n < 2 {
        return Err(GeomError::EmptySamples);
    }
    let nf = n as f64;
    let total: f64 = terms.iter().sum();
    let mean = total / nf;
    let loo: Vec<f64> = terms.iter().map(|x| (total - x) / (nf - 1.0)).collect();
    let loo_mean = loo.iter().sum::<f64>() / nf;
    let var = (nf - 1.0) / nf * loo.iter().map(|x| (x - loo_mean).powi(2)).sum::<f64>();
    Ok(McEstimate { value: mean, stderr: var.sqrt() })
}

/// Matrix-valued field on charts: `(chart, w, jet order) ↦ matrix of jets`.
pub type ChartField<'a> = dyn Fn(&Chart, [C; 3], usize) -> Result<JM3> + Sync + 'a;

/// Weighted norm specification on an annulus of `V_t`.
#[derive(Clone, Debug)]
pub struct WeightedNormSpec {
    /// Derivative order `k ∈ {0, 1, 2}`.
    pub order: usize,
    /// Optional Hölder exponent in `(0, 1)`.
    pub holder: Option<f64>,
    /// Weight `β ≤ 0`.
    pub beta: f64,
    pub r1: f64,
    pub r2: f64,
    pub t: C,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct WeightedNorm {
    pub value: f64,
    /// `sup r^{−β+i} |∇^i h|` for each `i ≤ k`.
    pub per_order: Vec<f64>,
    pub holder: f64,
}

/// `|∇^i h|_{g,H}` for `i = 0..=order` at chart point `w`.
pub fn covariant_norms(h: &JM3, hm: &JM3, g: &JM3, order: usize) -> Result<Vec<f64>> {
    let hv = values(hm);
    let gv = values(g);
    let mut out = vec![endo_norm(&hv, &values(h))?];
    if order == 0 {
        return Ok(out);
    }
    let lg = cholesky(&gv)?;
    let a = inv3(&adjoint(&lg))?;
    let conn = connection_jets(hm)?;
    let hh = linalg::map(h, |x| x.truncate(x.order() - 1));
    // (1,0) and (0,1) parts of ∇h, one order lower
    let t: Vec<JM3> = (0..3).map(|j| mat_add(&linalg::map(h, |x| x.dz(j)), &commutator(&conn[j], &hh))).collect();
    let s: Vec<JM3> = (0..3).map(|k| linalg::map(h, |x| x.dzb(k))).collect();
    let frame_norm = |hol: &[M3], anti: &[M3]| -> Result<f64> {
        let mut tot = 0.0;
        for b in 0..3 {
            let mut e1 = linalg::zeros3();
            let mut e2 = linalg::zeros3();
            for j in 0..3 {
                e1 = mat_add(&e1, &mat_scale(&hol[j], a[j][b]));
                e2 = mat_add(&e2, &mat_scale(&anti[j], a[j][b].conj()));
            }
            tot += endo_norm(&hv, &e1)?.powi(2) + endo_norm(&hv, &e2)?.powi(2);
        }
        Ok(tot.sqrt())
    };
    let tv: Vec<M3> = t.iter().map(values).collect();
    let sv: Vec<M3> = s.iter().map(values).collect();
    out.push(frame_norm(&tv, &sv)?);
    if order == 1 {
        return Ok(out);
    }
    let gamma: Vec<M3> = connection_jets(g)?.iter().map(values).collect();
    let conn_v: Vec<M3> = conn.iter().map(values).collect();
    // blocks ∇_l T_j, ∇_{l̄} T_j, ∇_l S_k, ∇_{l̄} S_k
    let mut tot = 0.0;
    let comp = |blk: &dyn Fn(usize, usize) -> M3, conj_first: bool, conj_second: bool| -> Result<f64> {
        let mut acc = 0.0;
        for p in 0..3 {
            for q in 0..3 {
                let mut e = linalg::zeros3();
                for l in 0..3 {
                    for j in 0..3 {
                        let wl = if conj_first { a[l][p].conj() } else { a[l][p] };
                        let wj = if conj_second { a[j][q].conj() } else { a[j][q] };
                        e = mat_add(&e, &mat_scale(&blk(l, j), wl * wj));
                    }
                }
                acc += endo_norm(&hv, &e)?.powi(2);
            }
        }
        Ok(acc)
    };
    let dd = |x: &JM3, var: usize| values(&linalg::map(x, |y| y.d(var)));
    let b1 = |l: usize, j: usize| {
        let mut e = mat_add(&dd(&t[j], l), &commutator(&conn_v[l], &tv[j]));
        for m in 0..3 {
            e = mat_sub(&e, &mat_scale(&tv[m], gamma[l][m][j]));
        }
        e
    };
    let b2 = |l: usize, j: usize| dd(&t[j], 3 + l);
    let b3 = |l: usize, k: usize| mat_add(&dd(&s[k], l), &commutator(&conn_v[l], &sv[k]));
    let b4 = |l: usize, k: usize| {
        let mut e = dd(&s[k], 3 + l);
        for m in 0..3 {
            e = mat_sub(&e, &mat_scale(&sv[m], gamma[l][m][k].conj()));
        }
        e
    };
    tot += comp(&b1, false, false)?;
    tot += comp(&b2, true, false)?;
    tot += comp(&b3, false, true)?;
    tot += comp(&b4, true, true)?;
    out.push(tot.sqrt());
    Ok(out)
}

/// `‖h‖_{C^{k,a}_β}` over the annulus: `Σ_i sup r^{−β+i}|∇^i h|` plus, when
/// requested, the Hölder seminorm of `∇^k h` over same-chart point pairs
/// joined by straight chart segments.
pub fn weighted_norm(h: &ChartField, spec: &WeightedNormSpec, g: &ChartField, hm: &ChartField) -> Result<WeightedNorm> {
    if spec.order > 2 {
        return Err(GeomError::Shape("derivative order must be 0, 1 or 2".into()));
    }
    if spec.beta > 0.0 {
        return Err(GeomError::Shape("weight β must be ≤ 0".into()));
    }
    let samples = sample_region(spec.t, spec.r1, spec.r2, spec.samples, spec.seed)?;
    if samples.is_empty() {
        return Err(GeomError::EmptySamples);
    }
    let k = spec.order;
    let jet_order = k + 1;
    let per_point: Vec<(Vec<f64>, f64)> = samples
        .par_iter()
        .map(|s| -> Result<(Vec<f64>, f64)> {
            let chart = make_cyl_chart(&s.point)?;
            let w0 = [c(0.0, 0.0); 3];
            let hj = h(&chart, w0, jet_order)?;
            let mj = hm(&chart, w0, jet_order.max(2))?;
            let gj = g(&chart, w0, jet_order.max(2))?;
            let norms = covariant_norms(&hj, &mj, &gj, k)?;
            let r = s.point.r();
            let weighted: Vec<f64> = norms.iter().enumerate().map(|(i, n)| r.powf(-spec.beta + i as f64) * n).collect();
            let hol = match spec.holder {
                Some(a) if k == 0 => holder_quotient(h, &chart, &values(&mj), &values(&gj), a, r, spec.beta)?,
                Some(_) => return Err(GeomError::Shape("Hölder seminorm implemented for k = 0".into())),
                None => 0.0,
            };
            Ok((weighted, hol))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut per_order = vec![0.0f64; k + 1];
    let mut holder: f64 = 0.0;
    for (w, hq) in &per_point {
        for i in 0..=k {
            per_order[i] = per_order[i].max(w[i]);
        }
        holder = holder.max(*hq);
    }
    Ok(WeightedNorm { value: per_order.iter().sum::<f64>() + holder, per_order, holder })
}

/// Hölder quotients `r^{−β+a} |h(p) − h(q)| / d(p,q)^a` for chart pairs with
/// separations in `[0.1, 0.5]·ρ`, distance measured along the straight chart
/// segment in the metric at the chart centre.
fn holder_quotient(h: &ChartField, chart: &Chart, hm: &M3, g: &M3, a: f64, r: f64, beta: f64) -> Result<f64> {
    let dirs = [
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        [c(0.5, 0.5), c(-0.5, 0.0), c(0.0, 0.5)],
    ];
    let h0 = values(&h(chart, [c(0.0, 0.0); 3], 0)?);
    let mut best: f64 = 0.0;
    for d in dirs {
        let n = d.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for frac in [0.1, 0.3, 0.5] {
            let step = frac * chart.rho / n;
            let w: [C; 3] = std::array::from_fn(|i| d[i] * step);
            let hw = values(&h(chart, w, 0)?);
            // |v|²_g = 2 Σ G[k][j] v^j conj(v^k)
            let mut len2 = c(0.0, 0.0);
            for kk in 0..3 {
                for j in 0..3 {
                    len2 += g[kk][j] * w[j] * w[kk].conj();
                }
            }
            let dist = (2.0 * len2.re).sqrt();
            let diff = endo_norm(hm, &mat_sub(&hw, &h0))?;
            best = best.max(r.powf(-beta + a) * diff / dist.powf(a));
        }
    }
    Ok(best)
}

/// Norm over `U_r̂ = {r̂/2 ≤ r ≤ 2r̂}` in the rescaled form
/// `r̂^{−β} sup |h|` (endomorphism norms are unchanged by rescaling `g`).
pub fn annulus_norm_rescaled(h: &ChartField, hm: &ChartField, t: C, rhat: f64, beta: f64, n: usize, seed: u64) -> Result<f64> {
    let samples = sample_region(t, 0.5 * rhat, 2.0 * rhat, n, seed)?;
    let vals = samples
        .par_iter()
        .map(|s| -> Result<f64> {
            let chart = make_cyl_chart(&s.point)?;
            let w0 = [c(0.0, 0.0); 3];
            endo_norm(&values(&hm(&chart, w0, 0)?), &values(&h(&chart, w0, 0)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rhat.powf(-beta) * vals.into_iter().fold(0.0, f64::max))
}

/// `g_{co,t}` in a chart as a matrix of jets.
pub fn co_metric_field(chart: &Chart, w: [C; 3], order: usize) -> Result<JM3> {
    let phi = crate::potentials::co_potential_jet(chart, w, order + 2)?;
    crate::forms::i_ddbar(&phi)
}

/// Scalar jet of the cone radius `r` through a chart.
pub fn radius_jet(chart: &Chart, w: [C; 3], order: usize) -> Result<Jet> {
    let (z, zb) = chart.embedding_jets(w, order)?;
    Ok(crate::potentials::norm2_jet(&z, &zb).powc(1.0 / 3.0))
}

/// `r^β · Id / √3`, unit weighted norm at every point.
pub fn unit_weighted_identity(beta: f64) -> impl Fn(&Chart, [C; 3], usize) -> Result<JM3> + Sync {
    move |chart: &Chart, w: [C; 3], order: usize| {
        let r = radius_jet(chart, w, order)?;
        let f = r.powc(beta).scale_re(1.0 / 3f64.sqrt());
        Ok(std::array::from_fn(|i| std::array::from_fn(|j| if i == j { f.clone() } else { Jet::zero(order) })))
    }
}
