//! Holomorphic self-maps of the chart plane used to recentre, rotate and dilate patches.

use num_complex::Complex64;

use crate::jet::Real;

/// A complex number over a generic real scalar.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Cx<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> Cx<T> {
    pub fn new(re: T, im: T) -> Self {
        Cx { re, im }
    }

    pub fn cst(c: Complex64) -> Self {
        Cx { re: T::cst(c.re), im: T::cst(c.im) }
    }

    pub fn add(self, o: Self) -> Self {
        Cx::new(self.re + o.re, self.im + o.im)
    }

    pub fn mul(self, o: Self) -> Self {
        Cx::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }

    pub fn div(self, o: Self) -> Self {
        let den = o.re * o.re + o.im * o.im;
        Cx::new(
            (self.re * o.re + self.im * o.im) / den,
            (self.im * o.re - self.re * o.im) / den,
        )
    }
}

/// One chart precomposition `z ↦ m(z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartMap {
    /// `z ↦ s z` (dilation and rotation).
    Scale(Complex64),
    /// `z ↦ z + t`.
    Translate(Complex64),
    /// Disc automorphism `z ↦ (z + a) / (1 + ā z)`, `|a| < 1`; sends 0 to `a`.
    Mobius(Complex64),
}

impl ChartMap {
    pub fn rotation(theta: f64) -> Self {
        ChartMap::Scale(Complex64::from_polar(1.0, theta))
    }

    pub fn dilation(r: f64) -> Self {
        ChartMap::Scale(Complex64::new(r, 0.0))
    }

    pub fn apply<T: Real>(&self, x: T, y: T) -> (T, T) {
        let z = Cx::new(x, y);
        let w = match *self {
            ChartMap::Scale(s) => Cx::cst(s).mul(z),
            ChartMap::Translate(t) => z.add(Cx::cst(t)),
            ChartMap::Mobius(a) => {
                let num = z.add(Cx::cst(a));
                let den = Cx::cst(Complex64::new(1.0, 0.0)).add(Cx::cst(a.conj()).mul(z));
                num.div(den)
            }
        };
        (w.re, w.im)
    }

    /// Whether the map sends the unit disc into itself.
    pub fn preserves_disc(&self) -> bool {
        match *self {
            ChartMap::Scale(s) => s.norm() <= 1.0,
            ChartMap::Translate(t) => t.norm() == 0.0,
            ChartMap::Mobius(a) => a.norm() < 1.0,
        }
    }
}

/// Applies a precomposition chain. The last map in the slice acts first.
pub fn apply_chain<T: Real>(chain: &[ChartMap], x: T, y: T) -> (T, T) {
    chain.iter().rev().fold((x, y), |(u, v), m| m.apply(u, v))
}
