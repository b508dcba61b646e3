//! Induced metric, projectors, second fundamental form, Christoffel symbols and
//! the covariant derivative and Hessian of chart vector fields.
//!
//! All chart vectors are given in the coordinate basis `(∂x, ∂y)`; results are
//! returned as ambient vectors in ℝⁿ. The covariant Hessian follows the
//! convention `(∇²X)(v, w) = (∇_w ∇X)(v)`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{lift_chart, split, Jet2, Real};
use crate::linalg::{inv2, ComplexVec, Vector};
use crate::surface::SurfacePatch;

/// Smallest singular value of `[f_x f_y]` below this multiple of `‖f_x‖` is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// A tangent vector field on a patch, written in chart coordinates and
/// evaluable over any [`Real`] scalar.
pub trait ChartVectorField {
    fn chart_field<T: Real>(&self, x: T, y: T) -> [T; 2];
}

/// `Γ[k][i][j] = Γᵏᵢⱼ`.
pub type Christoffel<T = f64> = [[[T; 2]; 2]; 2];

/// Tangent and orthonormal normal frame at a chart point.
#[derive(Clone, Debug)]
pub struct FrameAtPoint {
    pub point: Vector,
    /// `f_x`, `f_y`.
    pub tangent: [Vector; 2],
    /// Orthonormal basis of the normal space, `n − 2` rows.
    pub normal: Vec<Vector>,
    /// Orthonormal basis of the tangent plane (Gram–Schmidt of `f_x`, `f_y`).
    pub tangent_on: [Vector; 2],
}

impl FrameAtPoint {
    pub fn project_tangent(&self, v: &Vector) -> Vector {
        let [e1, e2] = &self.tangent_on;
        e1.scale(e1.dot(v)) + e2.scale(e2.dot(v))
    }

    pub fn project_normal(&self, v: &Vector) -> Vector {
        *v - self.project_tangent(v)
    }

    /// Coordinates of a vector in the normal frame.
    pub fn normal_coords(&self, v: &Vector) -> Vec<f64> {
        self.normal.iter().map(|xi| xi.dot(v)).collect()
    }

    /// Chart components of (the tangential part of) an ambient vector.
    pub fn chart_components(&self, v: &Vector) -> [f64; 2] {
        let g = metric(&self.tangent);
        let ginv = inv2(g).expect("frame built from a non-degenerate immersion");
        let b = [self.tangent[0].dot(v), self.tangent[1].dot(v)];
        [
            ginv[0][0] * b[0] + ginv[0][1] * b[1],
            ginv[1][0] * b[0] + ginv[1][1] * b[1],
        ]
    }

    /// `df(v) = v₀ f_x + v₁ f_y`.
    pub fn push(&self, v: [f64; 2]) -> Vector {
        self.tangent[0].scale(v[0]) + self.tangent[1].scale(v[1])
    }
}

/// Operator-norm distance between the normal frames at two points, used to
/// detect pivot flips along an evaluation path.
pub fn frame_distance(a: &FrameAtPoint, b: &FrameAtPoint) -> f64 {
    // Largest singular value of the (n−2)×n difference matrix via power iteration
    // on DᵀD; the matrices are tiny so a fixed number of sweeps is plenty.
    let n = a.point.dim();
    let rows: Vec<Vector> = a.normal.iter().zip(&b.normal).map(|(x, y)| *x - *y).collect();
    if rows.is_empty() {
        return 0.0;
    }
    let mut v = Vector::from_fn(n, |k| 1.0 + k as f64 * 0.1);
    let mut sigma = 0.0;
    for _ in 0..200 {
        let dv: Vec<f64> = rows.iter().map(|r| r.dot(&v)).collect();
        let mut w = Vector::zeros(n);
        for (r, c) in rows.iter().zip(&dv) {
            w = w.axpy(*c, r);
        }
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        sigma = libm::sqrt(nw);
        v = w.scale(1.0 / nw);
    }
    sigma
}

fn metric<T: Real>(t: &[Vector<T>; 2]) -> [[T; 2]; 2] {
    let g01 = t[0].dot(&t[1]);
    [[t[0].dot(&t[0]), g01], [g01, t[1].dot(&t[1])]]
}

fn smallest_singular(g: [[f64; 2]; 2]) -> f64 {
    let tr = g[0][0] + g[1][1];
    let disc = libm::hypot(g[0][0] - g[1][1], 2.0 * g[0][1]);
    let lmax = 0.5 * (tr + disc);
    if lmax <= 0.0 {
        return 0.0;
    }
    let det = g[0][0] * g[1][1] - g[0][1] * g[0][1];
    libm::sqrt((det / lmax).max(0.0))
}

fn check_immersion(t: &[Vector; 2], x: f64, y: f64) -> Result<()> {
    let s = smallest_singular(metric(t));
    let scale = t[0].norm();
    if !(s > DEGENERACY_TOL * scale) {
        return Err(Error::DegenerateImmersion { x, y, sigma_min: s });
    }
    Ok(())
}

/// Orthonormalizes `v` against `basis` (two Gram–Schmidt passes).
fn residual(v: &Vector, basis: &[Vector]) -> Vector {
    let mut r = *v;
    for _ in 0..2 {
        for b in basis {
            r = r.axpy(-b.dot(&r), b);
        }
    }
    r
}

/// Tangent vectors, orthonormal tangent basis and pivoted orthonormal normal frame.
pub fn frame_at(s: &SurfacePatch, x: f64, y: f64) -> Result<FrameAtPoint> {
    let j = s.jet(x, y)?;
    let (point, tangent, _) = split(&j);
    frame_from(point, tangent, x, y)
}

fn frame_from(point: Vector, tangent: [Vector; 2], x: f64, y: f64) -> Result<FrameAtPoint> {
    check_immersion(&tangent, x, y)?;
    let n = point.dim();
    let e1 = tangent[0].scale(1.0 / tangent[0].norm());
    let r2 = residual(&tangent[1], &[e1]);
    let e2 = r2.scale(1.0 / r2.norm());

    let mut basis: Vec<Vector> = alloc::vec![e1, e2];
    let mut used = [false; crate::linalg::MAX_DIM];
    let mut normal = Vec::with_capacity(n.saturating_sub(2));
    for _ in 2..n {
        let mut best: Option<(usize, Vector, f64)> = None;
        for k in 0..n {
            if used[k] {
                continue;
            }
            let r = residual(&Vector::basis(n, k), &basis);
            let nr = r.norm();
            if best.as_ref().map_or(true, |b| nr > b.2) {
                best = Some((k, r, nr));
            }
        }
        let (k, r, nr) = best.expect("ambient basis spans ℝⁿ");
        used[k] = true;
        let xi = r.scale(1.0 / nr);
        normal.push(xi);
        basis.push(xi);
    }
    Ok(FrameAtPoint { point, tangent, normal, tangent_on: [e1, e2] })
}

/// `σ(df v, df w)`: normal part of `Σ vᵢ wⱼ ∂ᵢ∂ⱼ f`.
pub fn second_fundamental(
    s: &SurfacePatch,
    at: (f64, f64),
    v: [f64; 2],
    w: [f64; 2],
) -> Result<Vector> {
    let table = second_fundamental_table(s, at)?;
    Ok(contract_real(&table, v, w))
}

/// `σ(∂ᵢ, ∂ⱼ)` packed as `[xx, xy, yy]`.
pub fn second_fundamental_table(s: &SurfacePatch, at: (f64, f64)) -> Result<[Vector; 3]> {
    let j = s.jet(at.0, at.1)?;
    let (p, t, hess) = split(&j);
    let frame = frame_from(p, t, at.0, at.1)?;
    Ok(hess.map(|h| frame.project_normal(&h)))
}

fn contract_real(table: &[Vector; 3], v: [f64; 2], w: [f64; 2]) -> Vector {
    table[0].scale(v[0] * w[0])
        + table[1].scale(v[0] * w[1] + v[1] * w[0])
        + table[2].scale(v[1] * w[1])
}

/// `½(∂x − i∂y)`.
pub fn dz() -> [Complex64; 2] {
    [Complex64::new(0.5, 0.0), Complex64::new(0.0, -0.5)]
}

fn contract_complex(table: &[Vector; 4], vz: [Complex64; 2]) -> ComplexVec {
    // table = [T(∂x,∂x), T(∂x,∂y), T(∂y,∂x), T(∂y,∂y)]
    let mut out = ComplexVec::zeros(table[0].dim());
    for i in 0..2 {
        for j in 0..2 {
            out = out + ComplexVec::from_real(table[2 * i + j]).scale(vz[i] * vz[j]);
        }
    }
    out
}

/// Complex-bilinear extension `σ(vz, vz)`; with `vz = ∂z` this is `σ(f_z, f_z)`.
pub fn second_fundamental_complex(
    s: &SurfacePatch,
    at: (f64, f64),
    vz: [Complex64; 2],
) -> Result<ComplexVec> {
    let [xx, xy, yy] = second_fundamental_table(s, at)?;
    Ok(contract_complex(&[xx, xy, xy, yy], vz))
}

/// Levi-Civita symbols from first and second partials of the immersion:
/// `Γᵏᵢⱼ = ½ gᵏˡ (∂ᵢ gⱼₗ + ∂ⱼ gᵢₗ − ∂ₗ gᵢⱼ)`, `∂ₘ gᵢⱼ = ⟨fᵢₘ, fⱼ⟩ + ⟨fᵢ, fⱼₘ⟩`.
pub fn christoffels_from<T: Real>(f1: &[Vector<T>; 2], f2: &[Vector<T>; 3]) -> Option<Christoffel<T>> {
    let second = |i: usize, j: usize| &f2[i + j];
    let g = metric(f1);
    let ginv = inv2(g)?;
    // dg[m][i][j] = ∂ₘ gᵢⱼ
    let mut dg = [[[T::zero(); 2]; 2]; 2];
    for m in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                dg[m][i][j] = second(i, m).dot(&f1[j]) + f1[i].dot(second(j, m));
            }
        }
    }
    let mut gamma = [[[T::zero(); 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = T::zero();
                for l in 0..2 {
                    acc = acc + ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                }
                gamma[k][i][j] = acc.scale(0.5);
            }
        }
    }
    Some(gamma)
}

pub fn christoffels(s: &SurfacePatch, at: (f64, f64)) -> Result<Christoffel> {
    let j = s.jet(at.0, at.1)?;
    let (_, t, h) = split(&j);
    check_immersion(&t, at.0, at.1)?;
    christoffels_from(&t, &h).ok_or(Error::DegenerateImmersion { x: at.0, y: at.1, sigma_min: 0.0 })
}

/// The ambient vector `X(f(x, y)) = Σ Yᵏ ∂ₖ f` of a chart field, over any scalar.
pub fn ambient_field<T: Real, F: ChartVectorField + ?Sized>(
    s: &SurfacePatch,
    field: &F,
    x: T,
    y: T,
) -> Vector<T> {
    let (jx, jy) = lift_chart(x, y);
    let f = s.eval(jx, jy);
    let [y0, y1] = field.chart_field(x, y);
    Vector::from_fn(s.dim(), |k| y0 * f[k].d[0] + y1 * f[k].d[1])
}

/// `∇_v X`: tangential projection of the ambient directional derivative of `X`
/// along the chart vector `v`.
pub fn covariant_derivative<F: ChartVectorField + ?Sized>(
    s: &SurfacePatch,
    field: &F,
    at: (f64, f64),
    v: [f64; 2],
) -> Result<Vector> {
    let frame = frame_at(s, at.0, at.1)?;
    let (jx, jy) = lift_chart(at.0, at.1);
    let xa = ambient_field(s, field, jx, jy);
    let d = Vector::from_fn(s.dim(), |k| v[0] * xa[k].d[0] + v[1] * xa[k].d[1]);
    if !d.is_finite() {
        return Err(Error::Domain("field derivative is not finite"));
    }
    Ok(frame.project_tangent(&d))
}

/// Chart components `Hᵏᵢⱼ` of `(∇²X)(∂ᵢ, ∂ⱼ)` together with the tangent vectors.
///
/// With `Aᵏᵢ = ∂ᵢYᵏ + Γᵏᵢₗ Yˡ` (the chart matrix of `∇X`),
/// `Hᵏᵢⱼ = ∂ⱼAᵏᵢ + Γᵏⱼₗ Aˡᵢ − Aᵏₗ Γˡⱼᵢ`. The derivatives of Γ and of `∂Y` come
/// from evaluating on nested jets.
pub fn covariant_hessian_table<F: ChartVectorField + ?Sized>(
    s: &SurfacePatch,
    field: &F,
    at: (f64, f64),
) -> Result<([[[f64; 2]; 2]; 2], [Vector; 2])> {
    let (x, y) = at;
    let nested = s.jet_nested(x, y);
    let n = s.dim();
    let f1: [Vector<Jet2<f64>>; 2] = [0, 1].map(|i| Vector::from_fn(n, |k| nested[k].d[i]));
    let f2: [Vector<Jet2<f64>>; 3] = [0, 1, 2].map(|i| Vector::from_fn(n, |k| nested[k].d2[i]));
    let tangent = [0, 1].map(|i| f1[i].map(|c| c.val));
    check_immersion(&tangent, x, y)?;
    let gamma = christoffels_from(&f1, &f2)
        .ok_or(Error::DegenerateImmersion { x, y, sigma_min: 0.0 })?;

    let (ix, iy) = lift_chart(x, y);
    let (ox, oy) = lift_chart(ix, iy);
    let yf = field.chart_field(ox, oy);

    // a[k][i] = Aᵏᵢ as an inner jet (value and chart derivatives)
    let mut a = [[Jet2::<f64>::zero(); 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            let mut acc = yf[k].d[i];
            for l in 0..2 {
                acc = acc + gamma[k][i][l] * yf[l].val;
            }
            a[k][i] = acc;
        }
    }
    let mut h = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = a[k][i].d[j];
                for l in 0..2 {
                    acc += gamma[k][j][l].val * a[l][i].val - a[k][l].val * gamma[l][j][i].val;
                }
                h[k][i][j] = acc;
            }
        }
    }
    if !h.iter().flatten().flatten().all(|v| v.is_finite()) {
        return Err(Error::Domain("covariant Hessian is not finite"));
    }
    Ok((h, tangent))
}

fn hessian_ambient(h: &[[[f64; 2]; 2]; 2], t: &[Vector; 2], i: usize, j: usize) -> Vector {
    t[0].scale(h[0][i][j]) + t[1].scale(h[1][i][j])
}

/// `(∇²X)(df v, df w)` as an ambient tangent vector.
pub fn covariant_hessian<F: ChartVectorField + ?Sized>(
    s: &SurfacePatch,
    field: &F,
    at: (f64, f64),
    v: [f64; 2],
    w: [f64; 2],
) -> Result<Vector> {
    let (h, t) = covariant_hessian_table(s, field, at)?;
    let mut out = Vector::zeros(s.dim());
    for i in 0..2 {
        for j in 0..2 {
            out = out.axpy(v[i] * w[j], &hessian_ambient(&h, &t, i, j));
        }
    }
    Ok(out)
}

/// Complex-bilinear extension `(∇²X)(vz, vz)`.
pub fn covariant_hessian_complex_along<F: ChartVectorField + ?Sized>(
    s: &SurfacePatch,
    field: &F,
    at: (f64, f64),
    vz: [Complex64; 2],
) -> Result<ComplexVec> {
    let (h, t) = covariant_hessian_table(s, field, at)?;
    let table = [(0, 0), (0, 1), (1, 0), (1, 1)].map(|(i, j)| hessian_ambient(&h, &t, i, j));
    Ok(contract_complex(&table, vz))
}

/// `(∇²X)(f_z, f_z) = ¼(H(f_x,f_x) − H(f_y,f_y) − 2i H(f_x,f_y))` at the chart origin.
pub fn covariant_hessian_complex<F: ChartVectorField + ?Sized>(
    s: &SurfacePatch,
    field: &F,
) -> Result<ComplexVec> {
    covariant_hessian_complex_along(s, field, (0.0, 0.0), dz())
}
