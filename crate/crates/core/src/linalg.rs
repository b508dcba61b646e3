//! Fixed-capacity dense vectors in the ambient space and their complexification.

use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::jet::Real;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

/// A vector in ℝⁿ (n ≤ [`MAX_DIM`]) over any [`Real`] scalar.
///
/// Entries past `dim` are always zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector<T = f64> {
    dim: usize,
    c: [T; MAX_DIM],
}

impl<T: Real> Vector<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "ambient dimension {dim} exceeds {MAX_DIM}");
        Vector { dim, c: [T::zero(); MAX_DIM] }
    }

    pub fn from_slice(s: &[T]) -> Self {
        let mut v = Self::zeros(s.len());
        v.c[..s.len()].copy_from_slice(s);
        v
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize) -> T) -> Self {
        let mut v = Self::zeros(dim);
        for k in 0..dim {
            v.c[k] = f(k);
        }
        v
    }

    /// The k-th canonical basis vector.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.c[k] = T::one();
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.c[..self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.c[..self.dim].iter()
    }

    pub fn map<U: Real>(&self, mut f: impl FnMut(T) -> U) -> Vector<U> {
        Vector::from_fn(self.dim, |k| f(self.c[k]))
    }

    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = T::zero();
        for k in 0..self.dim {
            acc = acc + self.c[k] * other.c[k];
        }
        acc
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        Vector::from_fn(self.dim, |k| self.c[k] + s * other.c[k])
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }
}

impl Vector<f64> {
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;
    #[inline]
    fn index(&self, k: usize) -> &T {
        &self.c[k]
    }
}

impl<T> IndexMut<usize> for Vector<T> {
    #[inline]
    fn index_mut(&mut self, k: usize) -> &mut T {
        &mut self.c[k]
    }
}

impl<T: Real> Add for Vector<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Vector::from_fn(self.dim, |k| self.c[k] + rhs.c[k])
    }
}

impl<T: Real> Sub for Vector<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Vector::from_fn(self.dim, |k| self.c[k] - rhs.c[k])
    }
}

impl<T: Real> Neg for Vector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

impl<T: Real> Mul<T> for Vector<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// A vector of ℂⁿ stored as real and imaginary parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexVec {
    pub re: Vector<f64>,
    pub im: Vector<f64>,
}

impl ComplexVec {
    pub fn zeros(dim: usize) -> Self {
        ComplexVec { re: Vector::zeros(dim), im: Vector::zeros(dim) }
    }

    pub fn new(re: Vector<f64>, im: Vector<f64>) -> Self {
        debug_assert_eq!(re.dim(), im.dim());
        ComplexVec { re, im }
    }

    pub fn from_real(re: Vector<f64>) -> Self {
        let dim = re.dim();
        ComplexVec { re, im: Vector::zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    pub fn get(&self, k: usize) -> Complex64 {
        Complex64::new(self.re[k], self.im[k])
    }

    /// Hermitian norm `sqrt(Σ |v_k|²)`.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.re.norm_sq() + self.im.norm_sq())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexVec {
            re: self.re.scale(s.re) - self.im.scale(s.im),
            im: self.re.scale(s.im) + self.im.scale(s.re),
        }
    }

    pub fn conj(&self) -> Self {
        ComplexVec { re: self.re, im: -self.im }
    }

    /// Hermitian inner product `Σ conj(self_k) other_k`.
    pub fn hdot(&self, other: &Self) -> Complex64 {
        Complex64::new(
            self.re.dot(&other.re) + self.im.dot(&other.im),
            self.re.dot(&other.im) - self.im.dot(&other.re),
        )
    }

    /// Complex-linear combination `¼(a − b − 2i c)`, the pattern produced by
    /// evaluating a symmetric bilinear form on `½(e_x − i e_y)` twice.
    pub fn quarter_combination(a: &Vector<f64>, b: &Vector<f64>, c: &Vector<f64>) -> Self {
        ComplexVec {
            re: (*a - *b).scale(0.25),
            im: c.scale(-0.5),
        }
    }
}

impl Add for ComplexVec {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ComplexVec { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for ComplexVec {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        ComplexVec { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Neg for ComplexVec {
    type Output = Self;
    fn neg(self) -> Self {
        ComplexVec { re: -self.re, im: -self.im }
    }
}

/// Symmetric 2×2 matrix inverse. Returns `None` when the determinant vanishes.
pub(crate) fn inv2<T: Real>(m: [[T; 2]; 2]) -> Option<[[T; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.value() == 0.0 {
        return None;
    }
    let r = T::one() / det;
    Some([[m[1][1] * r, -(m[0][1] * r)], [-(m[1][0] * r), m[0][0] * r]])
}

/// Dense n×n matrix in row-major order, n ≤ [`MAX_DIM`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM);
        Matrix { dim, a: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.a[k][k] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
    }

    pub fn column(&self, j: usize) -> Vector<f64> {
        Vector::from_fn(self.dim, |i| self.a[i][j])
    }

    pub fn set_column(&mut self, j: usize, v: &Vector<f64>) {
        for i in 0..self.dim {
            self.a[i][j] = v[i];
        }
    }

    pub fn apply(&self, v: &Vector<f64>) -> Vector<f64> {
        Vector::from_fn(self.dim, |i| (0..self.dim).map(|j| self.a[i][j] * v[j]).sum())
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] *= s;
            }
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] -= other.a[i][j];
            }
        }
        m
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.a[i][j] * self.a[i][j];
            }
        }
        libm::sqrt(s)
    }
}
