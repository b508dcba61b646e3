//! Normalized attractors on a patch and their extension to a tubular neighbourhood.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{
    ambient_field, covariant_derivative, frame_at, second_fundamental_table, ChartVectorField,
};
use crate::jet::{lift_chart, split, Jet2, Real};
use crate::linalg::{inv2, Vector};
use crate::surface::SurfacePatch;

/// Residual allowed in `‖∇_v X + v‖ ≤ tol ‖v‖`.
pub const NORMALIZATION_TOL: f64 = 1e-8;
/// Relative Cauchy–Riemann residual allowed for a conformal chart field.
pub const FIELD_CONFORMAL_TOL: f64 = 1e-8;
/// Tube radius as a fraction of the sampled reach.
pub const TUBE_FRACTION: f64 = 0.05;
/// Foot-point Newton iteration limits.
pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttractorKind {
    /// Push-forward of the chart field `−z` through a conformal chart.
    ConformalPushforward,
    /// `X(q) = −Proj_{T_qS}(q − p)`; on a planar patch this is `−(w − p)`.
    TangentialProjection,
}

impl AttractorKind {
    pub fn tag(&self) -> &'static str {
        match self {
            AttractorKind::ConformalPushforward => "conformal_pushforward",
            AttractorKind::TangentialProjection => "tangential_projection",
        }
    }
}

/// A tangent field on `host` with `X(p) = 0` and `(∇X)ₚ = −I` at `p = f(0)`.
#[derive(Clone, Debug)]
pub struct TangentAttractor {
    pub host: SurfacePatch,
    pub kind: AttractorKind,
    basepoint: Vector,
}

impl ChartVectorField for TangentAttractor {
    fn chart_field<T: Real>(&self, x: T, y: T) -> [T; 2] {
        match self.kind {
            AttractorKind::ConformalPushforward => [-x, -y],
            AttractorKind::TangentialProjection => {
                let (jx, jy) = lift_chart(x, y);
                let f: Vector<Jet2<T>> = self.host.eval(jx, jy);
                let n = self.host.dim();
                let fx = Vector::from_fn(n, |k| f[k].d[0]);
                let fy = Vector::from_fn(n, |k| f[k].d[1]);
                let off = Vector::from_fn(n, |k| f[k].val - T::cst(self.basepoint[k]));
                let g01 = fx.dot(&fy);
                let Some(ginv) = inv2([[fx.dot(&fx), g01], [g01, fy.dot(&fy)]]) else {
                    let nan = T::cst(f64::NAN);
                    return [nan, nan];
                };
                let b = [fx.dot(&off), fy.dot(&off)];
                [
                    -(ginv[0][0] * b[0] + ginv[0][1] * b[1]),
                    -(ginv[1][0] * b[0] + ginv[1][1] * b[1]),
                ]
            }
        }
    }
}

impl TangentAttractor {
    pub fn basepoint(&self) -> &Vector {
        &self.basepoint
    }

    /// `max_v ‖∇_v X + v‖ / ‖v‖` over `v ∈ {f_x(0), f_y(0)}`.
    pub fn normalization_residual(&self) -> Result<f64> {
        let frame = frame_at(&self.host, 0.0, 0.0)?;
        let mut worst = 0.0f64;
        for (i, t) in frame.tangent.iter().enumerate() {
            let mut v = [0.0; 2];
            v[i] = 1.0;
            let d = covariant_derivative(&self.host, self, (0.0, 0.0), v)?;
            worst = worst.max((d + *t).norm() / t.norm());
        }
        Ok(worst)
    }

    /// Largest relative Cauchy–Riemann residual of the chart field on the
    /// sample grid. On a conformal chart, a holomorphic chart field generates
    /// conformal maps.
    pub fn cauchy_riemann_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (x, y) in self.host.sample_grid(7) {
            let (jx, jy) = lift_chart(x, y);
            let [u, v] = self.chart_field(jx, jy);
            let scale = 1.0 + u.d[0].abs() + u.d[1].abs() + v.d[0].abs() + v.d[1].abs();
            let r = (u.d[0] - v.d[1]).abs().max((u.d[1] + v.d[0]).abs()) / scale;
            worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
        }
        worst
    }

    /// Certifies membership in the normalized conformal family: the host chart
    /// is conformal, the chart field is holomorphic, `X(p) = 0`, `(∇X)ₚ = −I`.
    pub fn certify_conformal(&self) -> Result<()> {
        self.host.certify_conformal()?;
        let cr = self.cauchy_riemann_residual();
        if cr > FIELD_CONFORMAL_TOL {
            return Err(Error::NotConformal { residual: cr });
        }
        let norm = self.normalization_residual()?;
        if norm > NORMALIZATION_TOL {
            return Err(Error::NotConformal { residual: norm });
        }
        Ok(())
    }
}

/// The push-forward of `−z` through the (conformal) chart of `s`.
pub fn conformal_attractor(s: &SurfacePatch) -> Result<TangentAttractor> {
    s.certify_conformal()?;
    frame_at(s, 0.0, 0.0)?;
    Ok(TangentAttractor {
        host: s.clone(),
        kind: AttractorKind::ConformalPushforward,
        basepoint: s.basepoint(),
    })
}

/// `X(q) = −Proj_{T_qS}(q − p)` in chart coordinates; no conformality needed.
pub fn tangential_attractor(s: &SurfacePatch) -> Result<TangentAttractor> {
    frame_at(s, 0.0, 0.0)?;
    Ok(TangentAttractor {
        host: s.clone(),
        kind: AttractorKind::TangentialProjection,
        basepoint: s.basepoint(),
    })
}

/// Foot point and normal offset of an ambient query point.
#[derive(Clone, Debug)]
pub struct Resolved {
    /// Chart coordinates of the foot point `q`.
    pub chart: (f64, f64),
    pub foot: Vector,
    /// `sᵢ` in the pointwise normal frame at `q`.
    pub offset: Vec<f64>,
    pub iterations: usize,
}

/// Extension `X̃(q + Σ sᵢ ξᵢ(q)) = X(q) − Σ sᵢ ξᵢ(q)` on a tube around the patch.
///
/// Because `Σ sᵢ ξᵢ(q) = P − q` for any orthonormal normal frame, the value
/// does not depend on the frame choice, only on the foot point `q`.
#[derive(Clone, Debug)]
pub struct AmbientExtension {
    pub base: TangentAttractor,
    /// Sampled reach estimate, `1 / max ‖σ(u, u)‖` over unit tangent `u`.
    pub reach: f64,
    /// Tube radius: `|sᵢ| < tube_radius`.
    pub tube_radius: f64,
}

/// Normal-frame extension of a tangent attractor.
pub fn extend_normal(x: &TangentAttractor) -> Result<AmbientExtension> {
    let host = &x.host;
    let mut kappa = 0.0f64;
    for (cx, cy) in host.sample_grid(7) {
        let table = second_fundamental_table(host, (cx, cy))?;
        let frame = frame_at(host, cx, cy)?;
        for k in 0..8 {
            let t = core::f64::consts::PI * k as f64 / 8.0;
            let u = frame.tangent_on[0].scale(libm::cos(t)) + frame.tangent_on[1].scale(libm::sin(t));
            let c = frame.chart_components(&u);
            let s = table[0].scale(c[0] * c[0])
                + table[1].scale(2.0 * c[0] * c[1])
                + table[2].scale(c[1] * c[1]);
            kappa = kappa.max(s.norm());
        }
    }
    let reach = if kappa > 0.0 { 1.0 / kappa } else { f64::INFINITY };
    Ok(AmbientExtension { base: x.clone(), reach, tube_radius: TUBE_FRACTION * reach })
}

impl AmbientExtension {
    pub fn dim(&self) -> usize {
        self.base.host.dim()
    }

    pub fn basepoint(&self) -> &Vector {
        self.base.basepoint()
    }

    /// Length scale for finite-difference stencils.
    pub fn length_scale(&self) -> f64 {
        self.reach.min(1.0)
    }

    fn newton(&self, p: &Vector, start: (f64, f64)) -> Option<(f64, f64, usize)> {
        let host = &self.base.host;
        let (mut x, mut y) = start;
        let max_step = 0.25 * host.radius;
        for it in 0..NEWTON_MAX_ITER {
            let j = host.jet(x, y).ok()?;
            let (f, t, h) = split(&j);
            let r = *p - f;
            let grad = [-t[0].dot(&r), -t[1].dot(&r)];
            let g = [[t[0].dot(&t[0]), t[0].dot(&t[1])], [t[0].dot(&t[1]), t[1].dot(&t[1])]];
            let full = [
                [g[0][0] - h[0].dot(&r), g[0][1] - h[1].dot(&r)],
                [g[1][0] - h[1].dot(&r), g[1][1] - h[2].dot(&r)],
            ];
            let pd = full[0][0] > 0.0 && full[0][0] * full[1][1] - full[0][1] * full[1][0] > 0.0;
            let m = inv2(if pd { full } else { g })?;
            let mut dx = -(m[0][0] * grad[0] + m[0][1] * grad[1]);
            let mut dy = -(m[1][0] * grad[0] + m[1][1] * grad[1]);
            let len = libm::hypot(dx, dy);
            if !len.is_finite() {
                return None;
            }
            if len > max_step {
                dx *= max_step / len;
                dy *= max_step / len;
            }
            x += dx;
            y += dy;
            if libm::hypot(x, y) >= host.radius {
                return None;
            }
            if len <= NEWTON_TOL * (1.0 + libm::hypot(x, y)) && pd {
                return Some((x, y, it + 1));
            }
        }
        None
    }

    fn accept(&self, p: &Vector, start: (f64, f64)) -> core::result::Result<Resolved, f64> {
        let host = &self.base.host;
        let Some((x, y, iterations)) = self.newton(p, start) else {
            return Err(f64::INFINITY);
        };
        let frame = frame_at(host, x, y).map_err(|_| f64::INFINITY)?;
        let d = *p - frame.point;
        let offset = frame.normal_coords(&d);
        let dist = d.norm();
        if offset.iter().any(|s| s.abs() >= self.tube_radius) {
            return Err(dist);
        }
        Ok(Resolved { chart: (x, y), foot: frame.point, offset, iterations })
    }

    /// Resolves `P = q + Σ sᵢ ξᵢ(q)` by projected Newton from the chart origin,
    /// falling back to the nearest sample of a chart grid.
    pub fn resolve(&self, p: &Vector) -> Result<Resolved> {
        let mut best = f64::INFINITY;
        match self.accept(p, (0.0, 0.0)) {
            Ok(r) => return Ok(r),
            Err(d) => best = best.min(d),
        }
        let host = &self.base.host;
        let rho = 0.95 * host.radius;
        let mut seed = None;
        let mut seed_dist = f64::INFINITY;
        let m = 15;
        for i in 0..m {
            for k in 0..m {
                let x = -rho + 2.0 * rho * i as f64 / (m - 1) as f64;
                let y = -rho + 2.0 * rho * k as f64 / (m - 1) as f64;
                if libm::hypot(x, y) >= rho {
                    continue;
                }
                if let Ok(q) = host.point(x, y) {
                    let d = (*p - q).norm();
                    if d < seed_dist {
                        seed_dist = d;
                        seed = Some((x, y));
                    }
                }
            }
        }
        if let Some(s) = seed {
            match self.accept(p, s) {
                Ok(r) => return Ok(r),
                Err(d) => best = best.min(d),
            }
        }
        Err(Error::OutsideTube { distance: best.min(seed_dist) })
    }

    /// `X̃(P) = X(q) − (P − q)`.
    pub fn eval(&self, p: &Vector) -> Result<Vector> {
        let r = self.resolve(p)?;
        let xq = ambient_field(&self.base.host, &self.base, r.chart.0, r.chart.1);
        Ok(xq - (*p - r.foot))
    }

    /// Central difference `(dX̃)_x u`.
    pub fn jvp_fd(&self, x: &Vector, u: &Vector, step: f64) -> Result<Vector> {
        let nu = u.norm();
        if nu == 0.0 {
            return Ok(Vector::zeros(x.dim()));
        }
        let d = u.scale(step / nu);
        let a = self.eval(&(*x + d))?;
        let b = self.eval(&(*x - d))?;
        Ok((a - b).scale(nu / (2.0 * step)))
    }

    /// Four-point mixed central difference `(d²X̃)_x(u, v)`; symmetric in `(u, v)`
    /// bit for bit.
    pub fn hvp_fd(&self, x: &Vector, u: &Vector, v: &Vector, step: f64) -> Result<Vector> {
        let (nu, nv) = (u.norm(), v.norm());
        if nu == 0.0 || nv == 0.0 {
            return Ok(Vector::zeros(x.dim()));
        }
        let (uh, vh) = (u.scale(1.0 / nu), v.scale(1.0 / nv));
        let sum = (uh + vh).scale(step);
        let diff = (uh - vh).scale(step);
        let a = self.eval(&(*x + sum))?;
        let d = self.eval(&(*x - sum))?;
        let b = self.eval(&(*x + diff))?;
        let c = self.eval(&(*x - diff))?;
        let num = (a + d) - (b + c);
        Ok(num.scale(nu * nv / (4.0 * step * step)))
    }

    /// Default step of the second-difference stencil.
    pub fn second_step(&self) -> f64 {
        1e-3 * self.length_scale()
    }

    /// Default step of the first-difference stencil.
    pub fn first_step(&self) -> f64 {
        1e-5 * self.length_scale()
    }
}

/// `(d²X̃)ₚ(v, w)` by central second differences at the basepoint, with one
/// Richardson step `(4 D(h) − D(2h)) / 3` removing the `O(h²)` term.
pub fn ambient_second_derivative(e: &AmbientExtension, v: &Vector, w: &Vector) -> Result<Vector> {
    let h = e.second_step();
    let fine = e.hvp_fd(e.basepoint(), v, w, h)?;
    let coarse = e.hvp_fd(e.basepoint(), v, w, 2.0 * h)?;
    Ok((fine.scale(4.0) - coarse).scale(1.0 / 3.0))
}
