//! Small dense matrices over complex numbers or jets.

use crate::error::{GeomError, Result};
use crate::jet::Jet;
use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use num_complex::Complex64;

pub type C = Complex64;
pub type Mat<T, const N: usize> = [[T; N]; N];
pub type M3 = Mat<C, 3>;
pub type JM3 = Mat<Jet, 3>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Commutative scalar with the operations needed by matrix routines.
pub trait Scalar: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, s: C) -> Self;
    fn from_c(&self, v: C) -> Self;
    fn recip(&self) -> Self;
    fn powc(&self, p: f64) -> Self;
    fn val(&self) -> C;
    /// Conjugate function (plain complex conjugation for numbers).
    fn conj_fn(&self) -> Self;
}

impl Scalar for C {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, s: C) -> Self {
        self * s
    }
    fn from_c(&self, v: C) -> Self {
        v
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn powc(&self, p: f64) -> Self {
        self.powf(p)
    }
    fn val(&self) -> C {
        *self
    }
    fn conj_fn(&self) -> Self {
        self.conj()
    }
}

impl Scalar for Jet {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, s: C) -> Self {
        Jet::scale(self, s)
    }
    fn from_c(&self, v: C) -> Self {
        Jet::constant(v, self.order())
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
    fn powc(&self, p: f64) -> Self {
        Jet::powc(self, p)
    }
    fn val(&self) -> C {
        self.value()
    }
    fn conj_fn(&self) -> Self {
        self.conj_swap()
    }
}

pub fn map<T, U, const N: usize>(a: &Mat<T, N>, f: impl Fn(&T) -> U) -> Mat<U, N> {
    std::array::from_fn(|i| std::array::from_fn(|j| f(&a[i][j])))
}

pub fn mat_mul<T: Scalar, const N: usize>(a: &Mat<T, N>, b: &Mat<T, N>) -> Mat<T, N> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = a[i][0].mul(&b[0][j]);
            for k in 1..N {
                s = s.add(&a[i][k].mul(&b[k][j]));
            }
            s
        })
    })
}

pub fn mat_add<T: Scalar, const N: usize>(a: &Mat<T, N>, b: &Mat<T, N>) -> Mat<T, N> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j].add(&b[i][j])))
}

pub fn mat_sub<T: Scalar, const N: usize>(a: &Mat<T, N>, b: &Mat<T, N>) -> Mat<T, N> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j].sub(&b[i][j])))
}

pub fn mat_scale<T: Scalar, const N: usize>(a: &Mat<T, N>, s: C) -> Mat<T, N> {
    map(a, |x| x.scale(s))
}

pub fn mat_scale_by<T: Scalar, const N: usize>(a: &Mat<T, N>, s: &T) -> Mat<T, N> {
    map(a, |x| x.mul(s))
}

pub fn transpose<T: Clone, const N: usize>(a: &Mat<T, N>) -> Mat<T, N> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].clone()))
}

/// Conjugate transpose (for jets: transpose of the conjugate functions).
pub fn adjoint<T: Scalar, const N: usize>(a: &Mat<T, N>) -> Mat<T, N> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].conj_fn()))
}

pub fn trace<T: Scalar, const N: usize>(a: &Mat<T, N>) -> T {
    let mut s = a[0][0].clone();
    for i in 1..N {
        s = s.add(&a[i][i]);
    }
    s
}

pub fn identity_like<T: Scalar, const N: usize>(like: &T) -> Mat<T, N> {
    std::array::from_fn(|i| std::array::from_fn(|j| like.from_c(if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })))
}

pub fn commutator<T: Scalar, const N: usize>(a: &Mat<T, N>, b: &Mat<T, N>) -> Mat<T, N> {
    mat_sub(&mat_mul(a, b), &mat_mul(b, a))
}

pub fn det3<T: Scalar>(a: &Mat<T, 3>) -> T {
    let m = |i: usize, j: usize, k: usize, l: usize| a[i][k].mul(&a[j][l]).sub(&a[i][l].mul(&a[j][k]));
    a[0][0]
        .mul(&m(1, 2, 1, 2))
        .sub(&a[0][1].mul(&m(1, 2, 0, 2)))
        .add(&a[0][2].mul(&m(1, 2, 0, 1)))
}

/// Adjugate: `adj(A) A = det(A) I`.
pub fn adj3<T: Scalar>(a: &Mat<T, 3>) -> Mat<T, 3> {
    let cof = |i: usize, j: usize| {
        let r: Vec<usize> = (0..3).filter(|&x| x != i).collect();
        let s: Vec<usize> = (0..3).filter(|&x| x != j).collect();
        let m = a[r[0]][s[0]].mul(&a[r[1]][s[1]]).sub(&a[r[0]][s[1]].mul(&a[r[1]][s[0]]));
        if (i + j) % 2 == 0 {
            m
        } else {
            m.neg()
        }
    };
    std::array::from_fn(|i| std::array::from_fn(|j| cof(j, i)))
}

pub fn inv3<T: Scalar>(a: &Mat<T, 3>) -> Result<Mat<T, 3>> {
    let d = det3(a);
    if !(d.val().norm() > 1e-300) || !d.val().is_finite() {
        return Err(GeomError::SingularMetric { min_eig: d.val().norm() });
    }
    Ok(mat_scale_by(&adj3(a), &d.recip()))
}

/// Gauss–Jordan inverse for any size (pivots on the base value).
pub fn inv_n<T: Scalar, const N: usize>(a: &Mat<T, N>) -> Result<Mat<T, N>> {
    let mut m = a.clone();
    let mut inv: Mat<T, N> = identity_like(&a[0][0]);
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&x, &y| m[x][col].val().norm().partial_cmp(&m[y][col].val().norm()).unwrap())
            .unwrap();
        if m[piv][col].val().norm() < 1e-300 {
            return Err(GeomError::Solve("singular matrix".into()));
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let r = m[col][col].recip();
        for j in 0..N {
            m[col][j] = m[col][j].mul(&r);
            inv[col][j] = inv[col][j].mul(&r);
        }
        for i in 0..N {
            if i == col {
                continue;
            }
            let f = m[i][col].clone();
            for j in 0..N {
                m[i][j] = m[i][j].sub(&f.mul(&m[col][j]));
                inv[i][j] = inv[i][j].sub(&f.mul(&inv[col][j]));
            }
        }
    }
    Ok(inv)
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn mat_exp<T: Scalar, const N: usize>(a: &Mat<T, N>) -> Mat<T, N> {
    let norm: f64 = a.iter().flatten().map(|x| x.val().norm()).sum::<f64>().max(1e-300);
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let scaled = mat_scale(a, c(0.5f64.powi(squarings), 0.0));
    let one = &a[0][0];
    let mut sum: Mat<T, N> = identity_like(one);
    let mut term: Mat<T, N> = identity_like(one);
    for k in 1..=18 {
        term = mat_scale(&mat_mul(&term, &scaled), c(1.0 / k as f64, 0.0));
        sum = mat_add(&sum, &term);
    }
    for _ in 0..squarings {
        sum = mat_mul(&sum, &sum);
    }
    sum
}

pub fn values<const N: usize>(a: &Mat<Jet, N>) -> Mat<C, N> {
    map(a, |x| x.value())
}

pub fn zeros3() -> M3 {
    [[c(0.0, 0.0); 3]; 3]
}

pub fn eye3() -> M3 {
    let mut m = zeros3();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn to_na(a: &M3) -> Matrix3<C> {
    Matrix3::from_fn(|i, j| a[i][j])
}

pub fn from_na(a: &Matrix3<C>) -> M3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[(i, j)]))
}

/// Frobenius norm.
pub fn fro<const N: usize>(a: &Mat<C, N>) -> f64 {
    a.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermitian_part(a: &M3) -> M3 {
    std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (a[i][j] + a[j][i].conj())))
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn herm_eig(a: &M3) -> ([f64; 3], M3) {
    let e = SymmetricEigen::new(to_na(&hermitian_part(a)));
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&x, &y| e.eigenvalues[x].partial_cmp(&e.eigenvalues[y]).unwrap());
    let vals = [e.eigenvalues[idx[0]], e.eigenvalues[idx[1]], e.eigenvalues[idx[2]]];
    let vecs = std::array::from_fn(|i| std::array::from_fn(|j| e.eigenvectors[(i, idx[j])]));
    (vals, vecs)
}

pub fn min_eig(a: &M3) -> f64 {
    herm_eig(a).0[0]
}

/// Eigenvalues of a general-size Hermitian matrix, ascending.
pub fn herm_eigvals_dyn(a: &DMatrix<C>) -> Vec<f64> {
    let h = (a + a.adjoint()) * c(0.5, 0.0);
    let mut v: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v
}

/// `f(A)` for Hermitian `A` through its eigendecomposition.
pub fn herm_fn(a: &M3, f: impl Fn(f64) -> f64) -> M3 {
    let (vals, u) = herm_eig(a);
    let mut d = zeros3();
    for i in 0..3 {
        d[i][i] = c(f(vals[i]), 0.0);
    }
    mat_mul(&mat_mul(&u, &d), &adjoint(&u))
}

/// Lower-triangular Cholesky factor `L` with `A = L L†`.
pub fn cholesky(a: &M3) -> Result<M3> {
    let mut l = zeros3();
    for j in 0..3 {
        let mut d = a[j][j].re;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(GeomError::SingularMetric { min_eig: d });
        }
        l[j][j] = c(d.sqrt(), 0.0);
        for i in j + 1..3 {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / l[j][j];
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> M3 {
        [
            [c(3.0, 0.0), c(0.5, 0.2), c(0.1, -0.3)],
            [c(0.5, -0.2), c(2.0, 0.0), c(-0.4, 0.1)],
            [c(0.1, 0.3), c(-0.4, -0.1), c(1.5, 0.0)],
        ]
    }

    #[test]
    fn inverse_via_adjugate() {
        let a = sample();
        let i = mat_mul(&a, &inv3(&a).unwrap());
        assert!(fro(&mat_sub(&i, &eye3())) < 1e-14);
        let g = mat_mul(&a, &inv_n(&a).unwrap());
        assert!(fro(&mat_sub(&g, &eye3())) < 1e-14);
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = sample();
        let l = cholesky(&a).unwrap();
        assert!(fro(&mat_sub(&mat_mul(&l, &adjoint(&l)), &a)) < 1e-14);
    }

    #[test]
    fn herm_fn_square_root() {
        let a = sample();
        let s = herm_fn(&a, f64::sqrt);
        assert!(fro(&mat_sub(&mat_mul(&s, &s), &a)) < 1e-13);
    }
}
