//! Truncated complex power series at 0.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::chart::ChartMap;
use crate::error::{Error, Result};

/// `Σ_{k ≤ order} c_k z^k`, all arithmetic truncated at `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub coeffs: Vec<Complex64>,
}

impl Series {
    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = c;
        Series { coeffs }
    }

    /// The series of `z`.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::constant(Complex64::new(0.0, 0.0), order);
        if order >= 1 {
            s.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn add(&self, o: &Self) -> Self {
        Series { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn add_constant(&self, c: Complex64) -> Self {
        let mut s = self.clone();
        s.coeffs[0] += c;
        s
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Series { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        Series { coeffs: out }
    }

    /// `1 / self`; needs a non-zero constant term.
    pub fn recip(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0.norm() == 0.0 {
            return Err(Error::Domain("reciprocal of a series with zero constant term"));
        }
        let n = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        out[0] = c0.inv();
        for k in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.coeffs[j] * out[k - j];
            }
            out[k] = -acc / c0;
        }
        Ok(Series { coeffs: out })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.recip()?))
    }

    /// Applies a chart map to the series, `m ∘ self`.
    pub fn apply_map(&self, m: &ChartMap) -> Result<Self> {
        Ok(match *m {
            ChartMap::Scale(s) => self.scale(s),
            ChartMap::Translate(t) => self.add_constant(t),
            ChartMap::Mobius(a) => {
                let num = self.add_constant(a);
                let den = self.scale(a.conj()).add_constant(Complex64::new(1.0, 0.0));
                num.div(&den)?
            }
        })
    }
}
