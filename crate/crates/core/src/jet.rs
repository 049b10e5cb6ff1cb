//! Truncated multivariate Taylor series in the six chart variables
//! `w1, w2, w3, w̄1, w̄2, w̄3`, treated as independent.
//!
//! A [`Jet`] stores Taylor coefficients (not raw partials) in a graded
//! monomial order, so a jet of lower order is always a prefix of a jet of
//! higher order.

use num_complex::Complex64;
use std::collections::HashMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

/// Number of independent variables: three holomorphic, three antiholomorphic.
pub const NVARS: usize = 6;
/// Highest supported truncation order.
pub const MAX_ORDER: usize = 6;

type Exp = [u8; NVARS];

struct Table {
    exps: Vec<Exp>,
    index: HashMap<Exp, usize>,
    mul: Vec<(u32, u32, u32)>,
    deriv: Vec<Vec<(u32, u32, f64)>>,
}

fn monomials_of_degree(d: usize) -> Vec<Exp> {
    let mut out = Vec::new();
    let mut cur = [0u8; NVARS];
    fn rec(pos: usize, left: usize, cur: &mut Exp, out: &mut Vec<Exp>) {
        if pos == NVARS - 1 {
            cur[pos] = left as u8;
            out.push(*cur);
            return;
        }
        for k in (0..=left).rev() {
            cur[pos] = k as u8;
            rec(pos + 1, left - k, cur, out);
        }
    }
    rec(0, d, &mut cur, &mut out);
    out
}

fn build(order: usize) -> Table {
    let mut exps = Vec::new();
    for d in 0..=order {
        exps.extend(monomials_of_degree(d));
    }
    let index: HashMap<Exp, usize> = exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let deg = |e: &Exp| e.iter().map(|&x| x as usize).sum::<usize>();
    let mut mul = Vec::new();
    for (i, a) in exps.iter().enumerate() {
        let da = deg(a);
        for (j, b) in exps.iter().enumerate() {
            if da + deg(b) > order {
                continue;
            }
            let mut s = [0u8; NVARS];
            for v in 0..NVARS {
                s[v] = a[v] + b[v];
            }
            mul.push((i as u32, j as u32, index[&s] as u32));
        }
    }
    let mut deriv = vec![Vec::new(); NVARS];
    if order > 0 {
        for (k, e) in exps.iter().enumerate() {
            for (v, dv) in deriv.iter_mut().enumerate() {
                if e[v] == 0 {
                    continue;
                }
                let mut lower = *e;
                lower[v] -= 1;
                if deg(&lower) <= order - 1 {
                    dv.push((k as u32, index[&lower] as u32, e[v] as f64));
                }
            }
        }
    }
    Table { exps, index, mul, deriv }
}

fn table(order: usize) -> &'static Table {
    static TABLES: OnceLock<Vec<Table>> = OnceLock::new();
    &TABLES.get_or_init(|| (0..=MAX_ORDER).map(build).collect())[order]
}

/// Number of monomials of total degree at most `order`.
pub fn len_for(order: usize) -> usize {
    table(order).exps.len()
}

/// Truncated Taylor series in `(w, w̄)` around a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    order: u8,
    c: Vec<Complex64>,
}

impl Jet {
    pub fn constant(value: Complex64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = vec![Complex64::new(0.0, 0.0); len_for(order)];
        c[0] = value;
        Jet { order: order as u8, c }
    }

    pub fn real(value: f64, order: usize) -> Self {
        Self::constant(Complex64::new(value, 0.0), order)
    }

    pub fn zero(order: usize) -> Self {
        Self::real(0.0, order)
    }

    /// The coordinate function `var` with base value `value`.
    pub fn variable(var: usize, value: Complex64, order: usize) -> Self {
        let mut j = Self::constant(value, order);
        if order > 0 {
            let mut e = [0u8; NVARS];
            e[var] = 1;
            let idx = table(order).index[&e];
            j.c[idx] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    /// Taylor coefficient of the monomial `w^a w̄^b`.
    pub fn coeff(&self, a: [u8; 3], b: [u8; 3]) -> Complex64 {
        let e = [a[0], a[1], a[2], b[0], b[1], b[2]];
        match table(self.order()).index.get(&e) {
            Some(&i) => self.c[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Partial derivative `∂^a_w ∂^b_{w̄}` at the base point.
    pub fn partial(&self, a: [u8; 3], b: [u8; 3]) -> Complex64 {
        let fact: f64 = a.iter().chain(b.iter()).map(|&k| factorial(k as usize)).product();
        self.coeff(a, b) * fact
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        Jet { order: order as u8, c: self.c[..len_for(order)].to_vec() }
    }

    /// Derivative in one variable; the order drops by one.
    pub fn d(&self, var: usize) -> Self {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let lo = self.order() - 1;
        let mut out = Jet::zero(lo);
        for &(src, dst, f) in &table(self.order()).deriv[var] {
            out.c[dst as usize] += self.c[src as usize] * f;
        }
        out
    }

    /// Holomorphic derivative `∂/∂w_j`.
    pub fn dz(&self, j: usize) -> Self {
        self.d(j)
    }

    /// Antiholomorphic derivative `∂/∂w̄_k`.
    pub fn dzb(&self, k: usize) -> Self {
        self.d(3 + k)
    }

    /// The conjugate function `(w, w̄) ↦ conj f(conj w̄, conj w)`.
    pub fn conj_swap(&self) -> Self {
        let t = table(self.order());
        let mut out = Jet::zero(self.order());
        for (i, e) in t.exps.iter().enumerate() {
            let s = [e[3], e[4], e[5], e[0], e[1], e[2]];
            out.c[t.index[&s]] = self.c[i].conj();
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Jet { order: self.order, c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Jet { order: self.order, c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn add_const(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    /// Compose with a univariate function given its Taylor coefficients
    /// `f(x0 + δ) = Σ coeffs[k] δ^k` at `x0 = self.value()`.
    pub fn compose(&self, coeffs: &[Complex64]) -> Self {
        let order = self.order();
        let mut delta = self.clone();
        delta.c[0] = Complex64::new(0.0, 0.0);
        let top = order.min(coeffs.len().saturating_sub(1));
        let mut acc = Jet::constant(coeffs[top], order);
        for k in (0..top).rev() {
            acc = &acc * &delta;
            acc.c[0] += coeffs[k];
        }
        acc
    }

    /// Compose with a real univariate function given real Taylor coefficients.
    pub fn compose_re(&self, coeffs: &[f64]) -> Self {
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.compose(&c)
    }

    pub fn recip(&self) -> Self {
        let x0 = self.value();
        assert!(x0.norm() > 0.0, "reciprocal of a jet with zero value");
        let r = 1.0 / x0;
        let mut coeffs = Vec::with_capacity(self.order() + 1);
        let mut p = r;
        for k in 0..=self.order() {
            coeffs.push(if k % 2 == 0 { p } else { -p });
            p *= r;
        }
        self.compose(&coeffs)
    }

    /// Principal power `x^p` for complex base value (branch cut on the negative axis).
    pub fn powc(&self, p: f64) -> Self {
        let x0 = self.value();
        let mut coeffs = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        for k in 0..=self.order() {
            coeffs.push(binom * x0.powf(p - k as f64));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&coeffs)
    }

    pub fn sqrt(&self) -> Self {
        self.powc(0.5)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let coeffs: Vec<Complex64> = (0..=self.order()).map(|k| e / factorial(k)).collect();
        self.compose(&coeffs)
    }

    pub fn ln(&self) -> Self {
        let x0 = self.value();
        let mut coeffs = vec![x0.ln()];
        let r = 1.0 / x0;
        let mut p = r;
        for k in 1..=self.order() {
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            coeffs.push(p * (s / k as f64));
            p *= r;
        }
        self.compose(&coeffs)
    }

    /// Sup norm of the coefficients.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        let order = self.order.min(o.order);
        let n = len_for(order as usize);
        Jet { order, c: (0..n).map(|i| self.c[i] + o.c[i]).collect() }
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        let order = self.order.min(o.order);
        let n = len_for(order as usize);
        Jet { order, c: (0..n).map(|i| self.c[i] - o.c[i]).collect() }
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let order = self.order.min(o.order) as usize;
        let mut out = Jet::zero(order);
        for &(i, j, k) in &table(order).mul {
            out.c[k as usize] += self.c[i as usize] * o.c[j as usize];
        }
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { order: self.order, c: self.c.iter().map(|x| -x).collect() }
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, o: &Jet) {
        if o.order < self.order {
            *self = self.truncate(o.order());
        }
        let n = self.c.len();
        for i in 0..n {
            self.c[i] += o.c[i];
        }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $f:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $f(self, o: Jet) -> Jet {
                (&self).$f(&o)
            }
        }
        impl<'a> $tr<&'a Jet> for Jet {
            type Output = Jet;
            fn $f(self, o: &Jet) -> Jet {
                (&self).$f(o)
            }
        }
        impl<'a> $tr<Jet> for &'a Jet {
            type Output = Jet;
            fn $f(self, o: Jet) -> Jet {
                self.$f(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}
