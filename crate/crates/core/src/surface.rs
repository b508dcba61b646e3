//! Parametrized surface patches `f : D → ℝⁿ` and the built-in registry.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::chart::{apply_chain, ChartMap, Cx};
use crate::error::{Error, Result};
use crate::jet::{lift_chart, Jet2, Jet2Vector, Real};
use crate::linalg::{Vector, MAX_DIM};

/// Relative tolerance of the conformality certificate.
pub const CONFORMAL_TOL: f64 = 1e-9;

/// Coefficients of the height function `h = a x² + b xy + c y² + d x³ + e y³`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct GraphCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

/// The underlying immersion before chart precomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// `(x, y, 0, …)`
    Plane,
    /// `(Re k, Im k, 0, …)` with `k(z) = z / (1 − c z)²`.
    KoebePlane { c: Complex64 },
    /// `(sinh x cos y, sinh x sin y, y, 0, …)`
    Helicoid,
    /// `(cosh x cos y, cosh x sin y, x, 0, …)`
    Catenoid,
    /// `(x, y, h(x, y), 0, …)`
    Graph(GraphCoeffs),
}

impl Shape {
    fn min_dim(&self) -> usize {
        match self {
            Shape::Plane | Shape::KoebePlane { .. } => 2,
            _ => 3,
        }
    }

    fn eval<T: Real>(&self, dim: usize, u: T, v: T) -> Vector<T> {
        let mut out = Vector::zeros(dim);
        match *self {
            Shape::Plane => {
                out[0] = u;
                out[1] = v;
            }
            Shape::KoebePlane { c } => {
                let z = Cx::new(u, v);
                let one = Cx::cst(Complex64::new(1.0, 0.0));
                let w = one.add(Cx::cst(-c).mul(z));
                let k = z.div(w.mul(w));
                out[0] = k.re;
                out[1] = k.im;
            }
            Shape::Helicoid => {
                let s = u.sinh();
                out[0] = s * v.cos();
                out[1] = s * v.sin();
                out[2] = v;
            }
            Shape::Catenoid => {
                let ch = u.cosh();
                out[0] = ch * v.cos();
                out[1] = ch * v.sin();
                out[2] = u;
            }
            Shape::Graph(h) => {
                out[0] = u;
                out[1] = v;
                let quad = u * u * T::cst(h.a) + u * v * T::cst(h.b) + v * v * T::cst(h.c);
                let cubic = u * u * u * T::cst(h.d) + v * v * v * T::cst(h.e);
                out[2] = quad + cubic;
            }
        }
        out
    }
}

/// An immersion of the disc of radius `radius` into ℝⁿ, evaluable at any
/// [`Real`] scalar (and hence to jets of any nesting depth).
#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePatch {
    pub name: String,
    pub shape: Shape,
    dim: usize,
    /// Precompositions applied to the chart variable; the last acts first.
    pub chart: Vec<ChartMap>,
    pub radius: f64,
    /// Asserted by the constructor, checked by [`SurfacePatch::certify_conformal`].
    pub conformal: bool,
}

impl SurfacePatch {
    pub fn new(name: &str, shape: Shape, dim: usize, conformal: bool) -> Result<Self> {
        if dim < shape.min_dim() || dim > MAX_DIM {
            return Err(Error::InvalidInput("ambient dimension out of range for this shape"));
        }
        Ok(SurfacePatch {
            name: name.into(),
            shape,
            dim,
            chart: Vec::new(),
            radius: 1.0,
            conformal,
        })
    }

    pub fn plane(dim: usize) -> Self {
        Self::new("plane", Shape::Plane, dim, true).expect("valid dimension")
    }

    pub fn koebe_plane(c: f64) -> Self {
        Self::new("koebe_plane", Shape::KoebePlane { c: Complex64::new(c, 0.0) }, 3, true)
            .expect("valid dimension")
    }

    /// `z ↦ g(r z)` for the helicoid `g`.
    pub fn helicoid(r: f64) -> Self {
        Self::new("helicoid", Shape::Helicoid, 3, true)
            .expect("valid dimension")
            .precompose(ChartMap::dilation(r))
    }

    /// `z ↦ C(r z)` for the catenoid `C`, centred on its waist.
    pub fn catenoid_patch(r: f64) -> Self {
        Self::new("catenoid_patch", Shape::Catenoid, 3, true)
            .expect("valid dimension")
            .precompose(ChartMap::dilation(r))
    }

    pub fn graph(h: GraphCoeffs) -> Self {
        Self::new("graph", Shape::Graph(h), 3, false).expect("valid dimension")
    }

    /// The patch `z ↦ f(m(z))`.
    pub fn precompose(mut self, m: ChartMap) -> Self {
        self.chart.push(m);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Totally geodesic shapes (σ ≡ 0).
    pub fn is_planar(&self) -> bool {
        matches!(self.shape, Shape::Plane | Shape::KoebePlane { .. })
    }

    pub fn eval<T: Real>(&self, x: T, y: T) -> Vector<T> {
        let (u, v) = apply_chain(&self.chart, x, y);
        self.shape.eval(self.dim, u, v)
    }

    pub fn point(&self, x: f64, y: f64) -> Result<Vector> {
        let p = self.eval(x, y);
        if !p.is_finite() {
            return Err(Error::Domain("surface evaluation is not finite"));
        }
        Ok(p)
    }

    /// The basepoint `p = f(0)`.
    pub fn basepoint(&self) -> Vector {
        self.eval(0.0, 0.0)
    }

    /// Value, first and second chart partials at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64) -> Result<Jet2Vector> {
        let (jx, jy) = lift_chart(x, y);
        let j = self.eval(jx, jy);
        if !j.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain("surface jet is not finite"));
        }
        Ok(j)
    }

    /// Jet over jets: the inner slots of the outer Hessian hold third partials.
    pub fn jet_nested(&self, x: f64, y: f64) -> Vector<Jet2<Jet2<f64>>> {
        let (ix, iy) = lift_chart(x, y);
        let (ox, oy) = lift_chart(ix, iy);
        self.eval(ox, oy)
    }

    /// Chart points of a `size × size` grid on `[−h, h]²`, `h = 0.5 ρ`.
    pub fn sample_grid(&self, size: usize) -> Vec<(f64, f64)> {
        let h = 0.5 * self.radius;
        let mut pts = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let t = |k: usize| {
                    if size == 1 {
                        0.0
                    } else {
                        -h + 2.0 * h * k as f64 / (size - 1) as f64
                    }
                };
                pts.push((t(i), t(j)));
            }
        }
        pts
    }

    /// `max(|⟨f_x, f_y⟩| / (‖f_x‖‖f_y‖), |‖f_x‖ − ‖f_y‖| / ‖f_x‖)` at a chart point.
    pub fn conformality_residual(&self, x: f64, y: f64) -> Result<f64> {
        let j = self.jet(x, y)?;
        let fx = Vector::from_fn(self.dim, |k| j[k].d[0]);
        let fy = Vector::from_fn(self.dim, |k| j[k].d[1]);
        let (nx, ny) = (fx.norm(), fy.norm());
        if nx == 0.0 || ny == 0.0 {
            return Err(Error::DegenerateImmersion { x, y, sigma_min: 0.0 });
        }
        let angle = fx.dot(&fy).abs() / (nx * ny);
        let stretch = (nx - ny).abs() / nx;
        Ok(angle.max(stretch))
    }

    /// Checks the conformality certificate on the 7×7 sample grid.
    pub fn certify_conformal(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (x, y) in self.sample_grid(7) {
            worst = worst.max(self.conformality_residual(x, y)?);
        }
        if !self.conformal || worst > CONFORMAL_TOL {
            return Err(Error::NotConformal { residual: worst });
        }
        Ok(worst)
    }
}

/// Registry keys understood by [`registry`].
pub const REGISTRY_KEYS: [&str; 5] = ["plane", "koebe_plane", "helicoid", "graph", "catenoid_patch"];

/// Builds a named built-in surface from real parameters.
///
/// | key | parameters (defaults) |
/// |---|---|
/// | `plane` | `n` (3) |
/// | `koebe_plane` | `c` (1), `n` (3) |
/// | `helicoid` | `r` (1) |
/// | `graph` | `a` (1), `b` (0), `c` (1), `d` (0), `e` (0) |
/// | `catenoid_patch` | `r` (0.5) |
///
/// Unknown keys, unknown parameter names and out-of-range values are rejected.
pub fn registry(key: &str, params: &[(&str, f64)]) -> Result<SurfacePatch> {
    let allowed: &[&str] = match key {
        "plane" => &["n"],
        "koebe_plane" => &["c", "n"],
        "helicoid" | "catenoid_patch" => &["r"],
        "graph" => &["a", "b", "c", "d", "e"],
        _ => return Err(Error::InvalidInput("unknown surface key")),
    };
    for (name, value) in params {
        if !allowed.contains(name) {
            return Err(Error::InvalidInput("unknown surface parameter"));
        }
        if !value.is_finite() {
            return Err(Error::InvalidInput("non-finite surface parameter"));
        }
    }
    let get = |name: &str, default: f64| {
        params.iter().rev().find(|(k, _)| *k == name).map_or(default, |(_, v)| *v)
    };
    let dim_param = |default: f64| -> Result<usize> {
        let n = get("n", default);
        if libm::trunc(n) != n || !(2.0..=MAX_DIM as f64).contains(&n) {
            return Err(Error::InvalidInput("ambient dimension must be an integer in 2..=8"));
        }
        Ok(n as usize)
    };
    match key {
        "plane" => Ok(SurfacePatch::plane(dim_param(3.0)?)),
        "koebe_plane" => {
            let c = get("c", 1.0);
            if c.abs() > 1.0 {
                return Err(Error::InvalidInput("koebe_plane needs |c| <= 1"));
            }
            let mut s = SurfacePatch::koebe_plane(c);
            s.dim = dim_param(3.0)?;
            Ok(s)
        }
        "helicoid" | "catenoid_patch" => {
            let r = get("r", if key == "helicoid" { 1.0 } else { 0.5 });
            if !(r > 0.0) {
                return Err(Error::InvalidInput("scale r must be positive"));
            }
            Ok(if key == "helicoid" {
                SurfacePatch::helicoid(r)
            } else {
                SurfacePatch::catenoid_patch(r)
            })
        }
        "graph" => Ok(SurfacePatch::graph(GraphCoeffs {
            a: get("a", 1.0),
            b: get("b", 0.0),
            c: get("c", 1.0),
            d: get("d", 0.0),
            e: get("e", 0.0),
        })),
        _ => unreachable!(),
    }
}
