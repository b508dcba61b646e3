//! Forward-mode second-order jets in two chart variables.
//!
//! A [`Jet2`] carries a value together with its gradient and packed Hessian
//! with respect to the chart variables `(x, y)`. The scalar type is generic so
//! jets can be nested: evaluating a map on `Jet2<Jet2<f64>>` yields third
//! partial derivatives in the inner slots of the outer Hessian.

use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{ComplexVec, Vector};

/// Scalars the surface and field formulas are written over.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    /// The primal (undifferentiated) value.
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;

    #[inline]
    fn zero() -> Self {
        Self::cst(0.0)
    }

    #[inline]
    fn one() -> Self {
        Self::cst(1.0)
    }

    #[inline]
    fn scale(self, s: f64) -> Self {
        self * Self::cst(s)
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sin(self) -> Self {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        libm::cos(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        libm::sinh(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        libm::cosh(self)
    }
    #[inline]
    fn exp(self) -> Self {
        libm::exp(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// Value, gradient `(∂x, ∂y)` and packed symmetric Hessian `(∂xx, ∂xy, ∂yy)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2<T = f64> {
    pub val: T,
    pub d: [T; 2],
    pub d2: [T; 3],
}

/// Jet with plain `f64` entries.
pub type Jet2Scalar = Jet2<f64>;

/// An ambient point carried together with its chart derivatives.
pub type Jet2Vector = Vector<Jet2<f64>>;

/// Index of `∂i∂j` in the packed Hessian.
#[inline]
pub const fn hess_index(i: usize, j: usize) -> usize {
    i + j
}

impl<T: Real> Jet2<T> {
    pub fn constant(val: T) -> Self {
        Jet2 { val, d: [T::zero(); 2], d2: [T::zero(); 3] }
    }

    /// The coordinate jet of chart variable `axis` (0 = x, 1 = y) at `val`.
    pub fn variable(val: T, axis: usize) -> Self {
        let mut j = Self::constant(val);
        j.d[axis] = T::one();
        j
    }

    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> T {
        self.d2[hess_index(i, j)]
    }

    /// Applies a scalar function given its value and first two derivatives at `self.val`.
    #[inline]
    fn chain(&self, g0: T, g1: T, g2: T) -> Self {
        let [ux, uy] = self.d;
        Jet2 {
            val: g0,
            d: [g1 * ux, g1 * uy],
            d2: [
                g1 * self.d2[0] + g2 * ux * ux,
                g1 * self.d2[1] + g2 * ux * uy,
                g1 * self.d2[2] + g2 * uy * uy,
            ],
        }
    }

    pub fn recip(&self) -> Self {
        let r = T::one() / self.val;
        let r2 = r * r;
        self.chain(r, -r2, (r2 * r).scale(2.0))
    }

    /// Division that rejects a vanishing denominator.
    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.val.value() == 0.0 {
            return Err(Error::Domain("division by a jet with zero value"));
        }
        Ok(*self * rhs.recip())
    }

    /// Square root that rejects non-positive arguments.
    pub fn try_sqrt(&self) -> Result<Self> {
        if !(self.val.value() > 0.0) {
            return Err(Error::Domain("square root of a non-positive jet"));
        }
        Ok(Real::sqrt(*self))
    }
}

impl Jet2<f64> {
    pub fn is_finite(&self) -> bool {
        self.val.is_finite()
            && self.d.iter().all(|x| x.is_finite())
            && self.d2.iter().all(|x| x.is_finite())
    }
}

/// The two coordinate jets at `(x, y)`.
pub fn lift_chart<T: Real>(x: T, y: T) -> (Jet2<T>, Jet2<T>) {
    (Jet2::variable(x, 0), Jet2::variable(y, 1))
}

impl<T: Real> Add for Jet2<T> {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        Jet2 {
            val: self.val + b.val,
            d: [self.d[0] + b.d[0], self.d[1] + b.d[1]],
            d2: [self.d2[0] + b.d2[0], self.d2[1] + b.d2[1], self.d2[2] + b.d2[2]],
        }
    }
}

impl<T: Real> Sub for Jet2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        Jet2 {
            val: self.val - b.val,
            d: [self.d[0] - b.d[0], self.d[1] - b.d[1]],
            d2: [self.d2[0] - b.d2[0], self.d2[1] - b.d2[1], self.d2[2] - b.d2[2]],
        }
    }
}

impl<T: Real> Neg for Jet2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Jet2 {
            val: -self.val,
            d: [-self.d[0], -self.d[1]],
            d2: [-self.d2[0], -self.d2[1], -self.d2[2]],
        }
    }
}

impl<T: Real> Mul for Jet2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (a, ad, ah) = (self.val, self.d, self.d2);
        Jet2 {
            val: a * b.val,
            d: [ad[0] * b.val + a * b.d[0], ad[1] * b.val + a * b.d[1]],
            d2: [
                ah[0] * b.val + a * b.d2[0] + (ad[0] * b.d[0]).scale(2.0),
                ah[1] * b.val + a * b.d2[1] + ad[0] * b.d[1] + ad[1] * b.d[0],
                ah[2] * b.val + a * b.d2[2] + (ad[1] * b.d[1]).scale(2.0),
            ],
        }
    }
}

/// IEEE semantics: a zero denominator yields non-finite entries. Use
/// [`Jet2::try_div`] where the error must be reported.
impl<T: Real> Div for Jet2<T> {
    type Output = Self;
    #[inline]
    fn div(self, b: Self) -> Self {
        self * b.recip()
    }
}

impl<T: Real> Real for Jet2<T> {
    fn cst(v: f64) -> Self {
        Jet2::constant(T::cst(v))
    }

    fn value(&self) -> f64 {
        self.val.value()
    }

    fn sin(self) -> Self {
        let (s, c) = (self.val.sin(), self.val.cos());
        self.chain(s, c, -s)
    }

    fn cos(self) -> Self {
        let (s, c) = (self.val.sin(), self.val.cos());
        self.chain(c, -s, -c)
    }

    fn sinh(self) -> Self {
        let (s, c) = (self.val.sinh(), self.val.cosh());
        self.chain(s, c, s)
    }

    fn cosh(self) -> Self {
        let (s, c) = (self.val.sinh(), self.val.cosh());
        self.chain(c, s, c)
    }

    fn exp(self) -> Self {
        let e = self.val.exp();
        self.chain(e, e, e)
    }

    fn sqrt(self) -> Self {
        let r = self.val.sqrt();
        let g1 = (T::one() / r).scale(0.5);
        let g2 = -(g1 / self.val).scale(0.5);
        self.chain(r, g1, g2)
    }

    fn scale(self, s: f64) -> Self {
        Jet2 {
            val: self.val.scale(s),
            d: [self.d[0].scale(s), self.d[1].scale(s)],
            d2: [self.d2[0].scale(s), self.d2[1].scale(s), self.d2[2].scale(s)],
        }
    }
}

/// Values `f`, first partials `[f_x, f_y]` and second partials `[f_xx, f_xy, f_yy]`
/// of a jet-valued vector.
pub fn split(j: &Jet2Vector) -> (Vector, [Vector; 2], [Vector; 3]) {
    let n = j.dim();
    (
        Vector::from_fn(n, |k| j[k].val),
        [0, 1].map(|i| Vector::from_fn(n, |k| j[k].d[i])),
        [0, 1, 2].map(|i| Vector::from_fn(n, |k| j[k].d2[i])),
    )
}

/// `f_z = ½(f_x − i f_y)` and `f_zz = ¼(f_xx − 2i f_xy − f_yy)`.
pub fn complex_z_derivatives(j: &Jet2Vector) -> (ComplexVec, ComplexVec) {
    let (_, [fx, fy], [fxx, fxy, fyy]) = split(j);
    let fz = ComplexVec::new(fx.scale(0.5), fy.scale(-0.5));
    let fzz = ComplexVec::quarter_combination(&fxx, &fyy, &fxy);
    (fz, fzz)
}
