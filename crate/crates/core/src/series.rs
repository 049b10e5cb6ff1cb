//! Univariate truncated real power series `Σ a_k δ^k`, used to produce the
//! Taylor coefficients of scalar profiles before they are composed into jets.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Series(pub Vec<f64>);

impl Series {
    pub fn constant(x: f64, order: usize) -> Self {
        let mut v = vec![0.0; order + 1];
        v[0] = x;
        Series(v)
    }

    /// The identity map around `x0`: `x0 + δ`.
    pub fn var(x0: f64, order: usize) -> Self {
        let mut v = vec![0.0; order + 1];
        v[0] = x0;
        if order > 0 {
            v[1] = 1.0;
        }
        Series(v)
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    /// k-th derivative at the base point.
    pub fn derivative(&self, k: usize) -> f64 {
        self.0.get(k).copied().unwrap_or(0.0) * crate::jet::factorial(k)
    }

    pub fn scale(&self, s: f64) -> Self {
        Series(self.0.iter().map(|x| x * s).collect())
    }

    pub fn add_const(&self, s: f64) -> Self {
        let mut v = self.0.clone();
        v[0] += s;
        Series(v)
    }

    /// Compose an outer function with Taylor coefficients `outer` (at `self.value()`).
    pub fn compose(&self, outer: &[f64]) -> Self {
        let n = self.order();
        let mut delta = self.clone();
        delta.0[0] = 0.0;
        let top = n.min(outer.len().saturating_sub(1));
        let mut acc = Series::constant(outer[top], n);
        for k in (0..top).rev() {
            acc = &acc * &delta;
            acc.0[0] += outer[k];
        }
        acc
    }

    pub fn recip(&self) -> Self {
        let x0 = self.value();
        let n = self.order();
        let outer: Vec<f64> = (0..=n).map(|k| (-1f64).powi(k as i32) / x0.powi(k as i32 + 1)).collect();
        self.compose(&outer)
    }

    /// `x^p` for positive base value.
    pub fn powf(&self, p: f64) -> Self {
        let x0 = self.value();
        let n = self.order();
        let mut outer = Vec::with_capacity(n + 1);
        let mut binom = 1.0;
        for k in 0..=n {
            outer.push(binom * x0.powf(p - k as f64));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&outer)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn ln(&self) -> Self {
        let x0 = self.value();
        let n = self.order();
        let mut outer = vec![x0.ln()];
        for k in 1..=n {
            outer.push((-1f64).powi(k as i32 + 1) / (k as f64 * x0.powi(k as i32)));
        }
        self.compose(&outer)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let outer: Vec<f64> = (0..=self.order()).map(|k| e / crate::jet::factorial(k)).collect();
        self.compose(&outer)
    }

    /// Antiderivative with the given constant term; the order rises by one.
    pub fn integrate(&self, c0: f64) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(c0);
        for (k, a) in self.0.iter().enumerate() {
            v.push(a / (k as f64 + 1.0));
        }
        Series(v)
    }

    /// Derivative series; the order drops by one.
    pub fn deriv(&self) -> Self {
        if self.0.len() == 1 {
            return Series(vec![0.0]);
        }
        Series(self.0.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect())
    }
}

impl<'a> Add<&'a Series> for &'a Series {
    type Output = Series;
    fn add(self, o: &Series) -> Series {
        let n = self.0.len().min(o.0.len());
        Series((0..n).map(|i| self.0[i] + o.0[i]).collect())
    }
}

impl<'a> Sub<&'a Series> for &'a Series {
    type Output = Series;
    fn sub(self, o: &Series) -> Series {
        let n = self.0.len().min(o.0.len());
        Series((0..n).map(|i| self.0[i] - o.0[i]).collect())
    }
}

impl<'a> Mul<&'a Series> for &'a Series {
    type Output = Series;
    fn mul(self, o: &Series) -> Series {
        let n = self.0.len().min(o.0.len());
        let mut v = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                v[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(v)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powf_matches_derivatives() {
        let s = Series::var(2.0, 4).powf(1.0 / 3.0);
        let x: f64 = 2.0;
        assert!((s.derivative(1) - x.powf(-2.0 / 3.0) / 3.0).abs() < 1e-14);
        assert!((s.derivative(2) + 2.0 / 9.0 * x.powf(-5.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn integrate_inverts_deriv() {
        let s = Series::var(0.7, 5).exp();
        let back = s.deriv().integrate(s.value());
        for (a, b) in back.coeffs().iter().zip(s.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
