//! The second-order estimate
//! `‖f_zz − σ(f_z,f_z) + (∇²X)(f_z,f_z)‖ ≤ 4‖f_z‖` at the chart origin, its
//! supporting identities, and the classical coefficient bound.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::attractor::{
    ambient_second_derivative, conformal_attractor, extend_normal, tangential_attractor,
    AmbientExtension, AttractorKind, TangentAttractor,
};
use crate::chart::ChartMap;
use crate::error::{Error, Result};
use crate::geometry::{
    covariant_hessian, covariant_hessian_complex, frame_at, second_fundamental,
    second_fundamental_complex, dz,
};
use crate::jet::complex_z_derivatives;
use crate::linalg::{ComplexVec, Vector};
use crate::series::Series;
use crate::surface::{Shape, SurfacePatch};

/// Slack below which the estimate counts as violated.
pub const SLACK_TOL: f64 = 1e-9;
/// Allowance in `2|a₂/a₁| ≤ 4`.
pub const BIEBERBACH_TOL: f64 = 1e-12;
/// Relative tolerance of the ambient/intrinsic Hessian comparison.
pub const LEMMA24_TOL: f64 = 1e-5;
/// Number of Taylor coefficients kept by the germ constructors.
pub const GERM_ORDER: usize = 8;
/// Points on the unit circle for the ζ search.
pub const ZETA_GRID: usize = 3600;

/// All terms of the estimate at `p = f(0)`.
#[derive(Clone, Debug)]
pub struct EstimateReport {
    pub fz0: ComplexVec,
    pub fzz0: ComplexVec,
    pub sigma_zz: ComplexVec,
    pub hess_zz: ComplexVec,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub attractor_kind: AttractorKind,
}

impl EstimateReport {
    pub fn holds(&self) -> bool {
        self.slack >= -SLACK_TOL
    }
}

/// The attractor used by [`evaluate_theorem`].
///
/// On planar patches this is `−(w − p)` restricted to the plane, whose chart
/// field `−(k(z) − k(0)) / k′(z)` is holomorphic. Elsewhere it is the
/// push-forward of `−z`.
pub fn default_attractor(s: &SurfacePatch) -> Result<TangentAttractor> {
    if s.is_planar() {
        let x = tangential_attractor(s)?;
        x.certify_conformal()?;
        Ok(x)
    } else {
        conformal_attractor(s)
    }
}

pub fn evaluate_theorem(s: &SurfacePatch) -> Result<EstimateReport> {
    s.certify_conformal()?;
    evaluate_theorem_with(&default_attractor(s)?)
}

/// Evaluates the estimate on `x.host` with the given attractor, which must be
/// a certified normalized conformal attractor.
pub fn evaluate_theorem_with(x: &TangentAttractor) -> Result<EstimateReport> {
    x.certify_conformal()?;
    let s = &x.host;
    frame_at(s, 0.0, 0.0)?;
    let (fz0, fzz0) = complex_z_derivatives(&s.jet(0.0, 0.0)?);
    let sigma_zz = second_fundamental_complex(s, (0.0, 0.0), dz())?;
    let hess_zz = covariant_hessian_complex(s, x)?;
    let lhs = (fzz0 - sigma_zz + hess_zz).norm();
    let rhs = 4.0 * fz0.norm();
    Ok(EstimateReport {
        fz0,
        fzz0,
        sigma_zz,
        hess_zz,
        lhs,
        rhs,
        slack: rhs - lhs,
        attractor_kind: x.kind,
    })
}

/// Both sides of `(d²X̃)ₚ(df v, df w) = (∇²X)ₚ(v,w) − σ(v,w)`.
#[derive(Clone, Debug)]
pub struct Lemma24Check {
    /// Finite differences of the ambient extension.
    pub ambient: Vector,
    /// Jet pipeline: covariant Hessian minus second fundamental form.
    pub intrinsic: Vector,
    pub residual: f64,
    pub tolerance: f64,
}

impl Lemma24Check {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Compares the two pipelines for chart directions `v`, `w` at the origin.
pub fn lemma24_check(ext: &AmbientExtension, v: [f64; 2], w: [f64; 2]) -> Result<Lemma24Check> {
    let s = &ext.base.host;
    let frame = frame_at(s, 0.0, 0.0)?;
    let ambient = ambient_second_derivative(ext, &frame.push(v), &frame.push(w))?;
    let hess = covariant_hessian(s, &ext.base, (0.0, 0.0), v, w)?;
    let sigma = second_fundamental(s, (0.0, 0.0), v, w)?;
    let intrinsic = hess - sigma;
    Ok(Lemma24Check {
        residual: (ambient - intrinsic).norm(),
        tolerance: LEMMA24_TOL * (1.0 + intrinsic.norm()),
        ambient,
        intrinsic,
    })
}

/// `‖(d²X̃)ₚ(df v, df w) − (∇²X)ₚ(v,w) + σ(v,w)‖`; `x` must live on `s`.
pub fn lemma24_residual(
    s: &SurfacePatch,
    x: &TangentAttractor,
    v: [f64; 2],
    w: [f64; 2],
) -> Result<f64> {
    if x.host != *s {
        return Err(Error::InvalidInput("attractor is defined on a different patch"));
    }
    Ok(lemma24_check(&extend_normal(x)?, v, w)?.residual)
}

/// The ambient form `‖(d²X̃)ₚ(f_z,f_z) + f_zz‖ ≤ 4‖f_z‖`, together with the
/// same left side assembled intrinsically.
#[derive(Clone, Debug)]
pub struct Lemma23Report {
    pub ambient_zz: ComplexVec,
    pub lhs: f64,
    pub intrinsic_lhs: f64,
    pub rhs: f64,
}

impl Lemma23Report {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn pipeline_gap(&self) -> f64 {
        (self.lhs - self.intrinsic_lhs).abs()
    }
}

pub fn lemma23_check(ext: &AmbientExtension) -> Result<Lemma23Report> {
    let s = &ext.base.host;
    let frame = frame_at(s, 0.0, 0.0)?;
    let [fx, fy] = frame.tangent;
    let a = ambient_second_derivative(ext, &fx, &fx)?;
    let b = ambient_second_derivative(ext, &fy, &fy)?;
    let c = ambient_second_derivative(ext, &fx, &fy)?;
    let ambient_zz = ComplexVec::quarter_combination(&a, &b, &c);
    let (fz0, fzz0) = complex_z_derivatives(&s.jet(0.0, 0.0)?);
    let sigma_zz = second_fundamental_complex(s, (0.0, 0.0), dz())?;
    let hess_zz = covariant_hessian_complex(s, &ext.base)?;
    Ok(Lemma23Report {
        ambient_zz,
        lhs: (ambient_zz + fzz0).norm(),
        intrinsic_lhs: (hess_zz - sigma_zz + fzz0).norm(),
        rhs: 4.0 * fz0.norm(),
    })
}

/// A holomorphic germ fixing 0, `h(z) = a₁z + a₂z² + …`.
#[derive(Clone, Debug, PartialEq)]
pub struct HolomorphicGerm {
    /// `[a₁, a₂, …]`.
    pub taylor: Vec<Complex64>,
    pub radius: f64,
}

impl HolomorphicGerm {
    pub fn new(taylor: Vec<Complex64>, radius: f64) -> Result<Self> {
        if taylor.len() < 2 {
            return Err(Error::InvalidInput("germ needs at least a₁ and a₂"));
        }
        if !(radius > 0.0) || taylor.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidInput("germ coefficients and radius must be finite"));
        }
        Ok(HolomorphicGerm { taylor, radius })
    }

    pub fn identity() -> Self {
        Self::linear(Complex64::new(1.0, 0.0))
    }

    /// `z ↦ s z`.
    pub fn linear(s: Complex64) -> Self {
        let mut taylor = alloc::vec![Complex64::new(0.0, 0.0); GERM_ORDER];
        taylor[0] = s;
        HolomorphicGerm { taylor, radius: f64::INFINITY }
    }

    /// `z / (1 − c z)² = Σ n cⁿ⁻¹ zⁿ`.
    pub fn koebe(c: Complex64) -> Self {
        let mut taylor = Vec::with_capacity(GERM_ORDER);
        let mut pow = Complex64::new(1.0, 0.0);
        for n in 1..=GERM_ORDER {
            taylor.push(pow * n as f64);
            pow *= c;
        }
        let radius = if c.norm() == 0.0 { f64::INFINITY } else { 1.0 / c.norm() };
        HolomorphicGerm { taylor, radius }
    }

    /// Germ of a composition of chart maps (the last map acts first), which
    /// must fix the origin.
    pub fn from_chart_maps(maps: &[ChartMap]) -> Result<Self> {
        let mut s = Series::identity(GERM_ORDER);
        let mut radius = f64::INFINITY;
        for m in maps.iter().rev() {
            s = s.apply_map(m)?;
            if let ChartMap::Mobius(_) = m {
                radius = radius.min(1.0);
            }
        }
        if s.coeffs[0].norm() > 1e-14 {
            return Err(Error::InvalidInput("germ must fix the origin"));
        }
        Self::new(s.coeffs[1..].to_vec(), radius)
    }

    pub fn a(&self, k: usize) -> Complex64 {
        self.taylor.get(k.wrapping_sub(1)).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// `h′(0)`.
    pub fn d1(&self) -> Complex64 {
        self.a(1)
    }

    /// `h″(0) = 2a₂`.
    pub fn d2(&self) -> Complex64 {
        self.a(2) * 2.0
    }
}

/// `(|h″(0)| / |h′(0)|, whether it is ≤ 4)`.
pub fn classical_bieberbach(h: &HolomorphicGerm) -> Result<(f64, bool)> {
    let a1 = h.a(1);
    if a1.norm() == 0.0 {
        return Err(Error::ZeroDerivative);
    }
    let ratio = 2.0 * (h.a(2) / a1).norm();
    Ok((ratio, ratio <= 4.0 + BIEBERBACH_TOL))
}

/// Both sides of the composition estimate for `g = f ∘ φ`.
#[derive(Clone, Debug)]
pub struct Lemma22Report {
    pub gz0: ComplexVec,
    pub gzz0: ComplexVec,
    /// `φ′(0)² / |φ′(0)|²`.
    pub zeta: Complex64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub search: ZetaSearch,
}

/// Minimization of `‖A − ζB‖` over the unit circle.
#[derive(Clone, Copy, Debug)]
pub struct ZetaSearch {
    pub grid_zeta: Complex64,
    pub grid_value: f64,
    pub refined_zeta: Complex64,
    pub refined_value: f64,
}

/// Grid search, then the exact minimizer `conj⟨A,B⟩ / |⟨A,B⟩|`.
pub fn zeta_search(a: &ComplexVec, b: &ComplexVec) -> ZetaSearch {
    let value = |z: Complex64| (*a - b.scale(z)).norm();
    let mut grid_zeta = Complex64::new(1.0, 0.0);
    let mut grid_value = f64::INFINITY;
    for k in 0..ZETA_GRID {
        let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / ZETA_GRID as f64);
        let v = value(z);
        if v < grid_value {
            grid_value = v;
            grid_zeta = z;
        }
    }
    let c = a.hdot(b);
    let refined_zeta = if c.norm() > 0.0 { c.conj() / c.norm() } else { grid_zeta };
    ZetaSearch { grid_zeta, grid_value, refined_zeta, refined_value: value(refined_zeta) }
}

pub fn lemma22_check(f: &SurfacePatch, phi: &HolomorphicGerm) -> Result<Lemma22Report> {
    let d1 = phi.d1();
    if d1.norm() == 0.0 {
        return Err(Error::ZeroDerivative);
    }
    frame_at(f, 0.0, 0.0)?;
    let (fz, fzz) = complex_z_derivatives(&f.jet(0.0, 0.0)?);
    let gz0 = fz.scale(d1);
    let gzz0 = fzz.scale(d1 * d1) + fz.scale(phi.d2());
    let zeta = d1 * d1 / d1.norm_sqr();
    let gn = gz0.norm();
    let a = gzz0.scale(Complex64::new(1.0 / (gn * gn), 0.0));
    let fnorm = fz.norm();
    let b = fzz.scale(Complex64::new(1.0 / (fnorm * fnorm), 0.0));
    let lhs = (a - b.scale(zeta)).norm();
    let rhs = 4.0 / gn;
    Ok(Lemma22Report { gz0, gzz0, zeta, lhs, rhs, margin: rhs - lhs, search: zeta_search(&a, &b) })
}

/// One row of the helicoid scaling experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub r: f64,
    /// `‖f_zz(0)‖ / ‖f_z(0)‖`.
    pub naive_ratio: f64,
    /// `‖f_zz(0) − σ(f_z,f_z)‖ / ‖f_z(0)‖`.
    pub geometric_ratio: f64,
    pub slack: f64,
}

/// The helicoid patch `z ↦ g(z₀ + R z)`.
pub fn helicoid_at(r: f64, basepoint: Complex64) -> Result<SurfacePatch> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput("scale must be positive and finite"));
    }
    if !basepoint.re.is_finite() || !basepoint.im.is_finite() {
        return Err(Error::InvalidInput("basepoint must be finite"));
    }
    Ok(SurfacePatch::new("helicoid", Shape::Helicoid, 3, true)?
        .precompose(ChartMap::Translate(basepoint))
        .precompose(ChartMap::dilation(r)))
}

pub fn helicoid_scan(r_values: &[f64], basepoint: Complex64) -> Result<Vec<ScanRow>> {
    r_values
        .iter()
        .map(|&r| {
            let s = helicoid_at(r, basepoint)?;
            let (fz, fzz) = complex_z_derivatives(&s.jet(0.0, 0.0)?);
            let sigma = second_fundamental_complex(&s, (0.0, 0.0), dz())?;
            let n = fz.norm();
            Ok(ScanRow {
                r,
                naive_ratio: fzz.norm() / n,
                geometric_ratio: (fzz - sigma).norm() / n,
                slack: evaluate_theorem(&s)?.slack,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::GraphCoeffs;
    use core::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn plane_recovers_classical_case() {
        let r = evaluate_theorem(&SurfacePatch::plane(3)).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!((r.rhs - 2.0 * SQRT_2).abs() <= 1e-12);
        assert!((r.slack - 2.0 * SQRT_2).abs() <= 1e-12);
    }

    #[test]
    fn koebe_plane_is_the_equality_case() {
        let r = evaluate_theorem(&SurfacePatch::koebe_plane(1.0)).unwrap();
        assert_eq!(r.attractor_kind, AttractorKind::TangentialProjection);
        assert!((r.lhs - 2.0 * SQRT_2).abs() <= 1e-9);
        assert!(r.slack.abs() <= 1e-9);
    }

    #[test]
    fn scaled_helicoid_has_positive_slack() {
        let r = evaluate_theorem(&SurfacePatch::helicoid(0.3)).unwrap();
        assert!(r.slack > 0.0 && r.lhs.is_finite() && r.rhs.is_finite());
        assert_eq!(r.attractor_kind, AttractorKind::ConformalPushforward);
    }

    #[test]
    fn non_conformal_input_is_rejected() {
        let g = SurfacePatch::graph(GraphCoeffs { a: 0.3, b: 0.1, c: 0.0, d: 0.0, e: 0.0 });
        assert!(matches!(evaluate_theorem(&g), Err(Error::NotConformal { .. })));
    }

    #[test]
    fn lemma24_examples() {
        let p = SurfacePatch::plane(3);
        let x = tangential_attractor(&p).unwrap();
        assert!(lemma24_residual(&p, &x, [0.3, -0.7], [1.0, 0.2]).unwrap() <= 1e-12);

        let h = SurfacePatch::helicoid(1.0);
        let x = conformal_attractor(&h).unwrap();
        let ext = extend_normal(&x).unwrap();
        for (v, w) in [([1.0, 0.0], [1.0, 0.0]), ([0.4, -0.9], [0.7, 0.3])] {
            assert!(lemma24_check(&ext, v, w).unwrap().residual <= 1e-5);
        }

        let g = SurfacePatch::graph(GraphCoeffs { a: 0.3, b: 0.1, c: 0.0, d: 0.0, e: 0.0 });
        let x = tangential_attractor(&g).unwrap();
        assert!(lemma24_residual(&g, &x, [1.0, 0.0], [1.0, 0.0]).unwrap() <= 1e-5);
        assert!(lemma24_residual(&h, &x, [1.0, 0.0], [1.0, 0.0]).is_err());
    }

    #[test]
    fn lemma23_pipelines_agree() {
        let x = conformal_attractor(&SurfacePatch::helicoid(0.5)).unwrap();
        let r = lemma23_check(&extend_normal(&x).unwrap()).unwrap();
        assert!(r.pipeline_gap() <= 1e-5);
        assert!(r.margin() >= -1e-9);
    }

    #[test]
    fn classical_bieberbach_examples() {
        let (r, ok) = classical_bieberbach(&HolomorphicGerm::koebe(c(1.0, 0.0))).unwrap();
        assert!((r - 4.0).abs() <= 1e-15 && ok);
        assert_eq!(classical_bieberbach(&HolomorphicGerm::identity()).unwrap(), (0.0, true));
        let (r, ok) = classical_bieberbach(&HolomorphicGerm::koebe(c(0.5, 0.0))).unwrap();
        assert!((r - 2.0).abs() <= 1e-15 && ok);
        let zero = HolomorphicGerm::new(alloc::vec![c(0.0, 0.0), c(1.0, 0.0)], 1.0).unwrap();
        assert_eq!(classical_bieberbach(&zero), Err(Error::ZeroDerivative));
    }

    #[test]
    fn germ_from_maps() {
        // ½ z followed by nothing else
        let g = HolomorphicGerm::from_chart_maps(&[ChartMap::dilation(0.5)]).unwrap();
        assert_eq!(g.d1(), c(0.5, 0.0));
        assert!(HolomorphicGerm::from_chart_maps(&[ChartMap::Mobius(c(0.3, 0.0))]).is_err());
        // M_{-b}(½ M_a(z)) with b = a/2 fixes 0; derivative ½(1 − a²)/(1 − b²)
        let a = 0.3;
        let g = HolomorphicGerm::from_chart_maps(&[
            ChartMap::Mobius(c(-a / 2.0, 0.0)),
            ChartMap::dilation(0.5),
            ChartMap::Mobius(c(a, 0.0)),
        ])
        .unwrap();
        let want = 0.5 * (1.0 - a * a) / (1.0 - a * a / 4.0);
        assert!((g.d1() - want).norm() <= 1e-15);
    }

    #[test]
    fn lemma22_examples() {
        let half = HolomorphicGerm::linear(c(0.5, 0.0));
        let r = lemma22_check(&SurfacePatch::plane(3), &half).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!((r.rhs - 8.0 * SQRT_2).abs() <= 1e-12);

        let r = lemma22_check(&SurfacePatch::koebe_plane(1.0), &half).unwrap();
        assert!(r.margin > 0.0);
        // For linear φ the analytic ζ is the exact minimizer.
        assert!((r.search.refined_zeta - r.zeta).norm() <= 1e-6);
        assert!(r.search.grid_value <= r.lhs + 1e-6);

        let phi = HolomorphicGerm::from_chart_maps(&[
            ChartMap::Mobius(c(-0.15, 0.0)),
            ChartMap::dilation(0.5),
            ChartMap::Mobius(c(0.3, 0.0)),
        ])
        .unwrap();
        let r = lemma22_check(&SurfacePatch::helicoid(1.0), &phi).unwrap();
        assert!(r.margin >= 0.0);

        let zero = HolomorphicGerm::new(alloc::vec![c(0.0, 0.0), c(1.0, 0.0)], 1.0).unwrap();
        assert!(matches!(lemma22_check(&SurfacePatch::plane(3), &zero), Err(Error::ZeroDerivative)));
    }

    #[test]
    fn helicoid_scan_examples() {
        let rows = helicoid_scan(&[1.0, 2.0, 4.0, 8.0], c(0.0, 0.0)).unwrap();
        assert!(rows[0].geometric_ratio <= 1e-10);
        for w in rows.windows(2) {
            assert!((w[1].naive_ratio / w[0].naive_ratio - 2.0).abs() <= 1e-12);
        }
        assert!(rows.iter().all(|r| r.slack >= 0.0));
        let off = helicoid_scan(&[1.0], c(0.5, 0.0)).unwrap();
        assert!(off[0].geometric_ratio > 1e-3);
        assert!(helicoid_scan(&[0.0], c(0.0, 0.0)).is_err());
    }
}
