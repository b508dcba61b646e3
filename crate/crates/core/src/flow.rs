//! Ambient flows `η_t` together with their first and second variational equations.
//!
//! The state integrated is `(x, Φ, V₁, …, V_m)` with
//!
//! ```text
//! ẋ  = F(x)
//! Φ̇  = DF(x) Φ                         Φ(0) = I
//! V̇ₚ = D²F(x)(Φ vₚ, Φ wₚ) + DF(x) Vₚ    Vₚ(0) = 0
//! ```
//!
//! so that `Φ(t) = (dη_t)_{x₀}` and `Vₚ(t) = (d²η_t)_{x₀}(vₚ, wₚ)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::attractor::AmbientExtension;
use crate::error::{Error, Result};
use crate::jet::{Jet2, Real};
use crate::linalg::{Matrix, Vector};

/// Bounds on a field at its designated fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_JACOBIAN_TOL: f64 = 1e-8;
/// Default operational infinity for `t → ∞` limits.
pub const T_INFINITY: f64 = 15.0;
pub const MAX_STEPS: usize = 1_000_000;
/// Step-size floor as a fraction of the integration horizon.
pub const STEP_FLOOR: f64 = 1e-13;

/// A twice differentiable vector field on (an open subset of) ℝⁿ with a
/// designated attracting fixed point.
pub trait AmbientField {
    fn dim(&self) -> usize;
    fn fixed_point(&self) -> Vector;
    fn eval(&self, x: &Vector) -> Result<Vector>;
    /// `DF(x) u`
    fn jvp(&self, x: &Vector, u: &Vector) -> Result<Vector>;
    /// `D²F(x)(u, v)`
    fn hvp(&self, x: &Vector, u: &Vector, v: &Vector) -> Result<Vector>;
}

/// A field given by a closed formula; derivatives come from jets along the
/// plane `x + s u + t v`.
pub trait ClosedFormField {
    fn dim(&self) -> usize;
    fn fixed_point(&self) -> Vector;
    fn eval_generic<T: Real>(&self, x: &Vector<T>) -> Vector<T>;
}

fn plane_jet(x: &Vector, u: &Vector, v: &Vector) -> Vector<Jet2<f64>> {
    Vector::from_fn(x.dim(), |k| Jet2 { val: x[k], d: [u[k], v[k]], d2: [0.0; 3] })
}

impl<F: ClosedFormField> AmbientField for F {
    fn dim(&self) -> usize {
        ClosedFormField::dim(self)
    }

    fn fixed_point(&self) -> Vector {
        ClosedFormField::fixed_point(self)
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        let y = self.eval_generic(x);
        if !y.is_finite() {
            return Err(Error::Domain("field value is not finite"));
        }
        Ok(y)
    }

    fn jvp(&self, x: &Vector, u: &Vector) -> Result<Vector> {
        let zero = Vector::zeros(x.dim());
        let j = self.eval_generic(&plane_jet(x, u, &zero));
        Ok(j.map(|c| c.d[0]))
    }

    fn hvp(&self, x: &Vector, u: &Vector, v: &Vector) -> Result<Vector> {
        let j = self.eval_generic(&plane_jet(x, u, v));
        Ok(j.map(|c| c.d2[1]))
    }
}

/// Finite-difference derivatives of the normal-frame extension.
impl AmbientField for AmbientExtension {
    fn dim(&self) -> usize {
        AmbientExtension::dim(self)
    }

    fn fixed_point(&self) -> Vector {
        *self.basepoint()
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        AmbientExtension::eval(self, x)
    }

    fn jvp(&self, x: &Vector, u: &Vector) -> Result<Vector> {
        self.jvp_fd(x, u, self.first_step())
    }

    fn hvp(&self, x: &Vector, u: &Vector, v: &Vector) -> Result<Vector> {
        self.hvp_fd(x, u, v, self.second_step())
    }
}

/// `F(x) = −(x − p)`.
#[derive(Clone, Debug)]
pub struct LinearField {
    pub center: Vector,
}

impl ClosedFormField for LinearField {
    fn dim(&self) -> usize {
        self.center.dim()
    }
    fn fixed_point(&self) -> Vector {
        self.center
    }
    fn eval_generic<T: Real>(&self, x: &Vector<T>) -> Vector<T> {
        Vector::from_fn(x.dim(), |k| T::cst(self.center[k]) - x[k])
    }
}

/// The scalar field `F(x) = −x + a x²` with fixed point 0; its flow is
/// `x(t) = e^{−t} x₀ / (1 − a x₀ (1 − e^{−t}))`.
#[derive(Clone, Copy, Debug)]
pub struct BernoulliField {
    pub a: f64,
}

impl ClosedFormField for BernoulliField {
    fn dim(&self) -> usize {
        1
    }
    fn fixed_point(&self) -> Vector {
        Vector::zeros(1)
    }
    fn eval_generic<T: Real>(&self, x: &Vector<T>) -> Vector<T> {
        Vector::from_fn(1, |_| -x[0] + x[0] * x[0] * T::cst(self.a))
    }
}

/// Which second variations to integrate.
#[derive(Clone, Debug)]
pub enum SecondVariation {
    /// `(d²η_t)(v, w)` for each listed pair.
    Pairs(Vec<(Vector, Vector)>),
    /// All basis pairs `(eᵢ, eⱼ)`, stored in row-major `(i, j)` order.
    FullTensor,
}

#[derive(Clone, Debug)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Output times in `[0, T]`; `None` gives 101 equally spaced times.
    pub outputs: Option<Vec<f64>>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { rtol: 1e-10, atol: 1e-12, outputs: None }
    }
}

impl FlowOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        FlowOptions { rtol: tol, atol: tol * 1e-2, outputs: None }
    }
}

/// Flow state at the requested output times.
#[derive(Clone, Debug)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vector>,
    /// `(dη_t)_{x₀}`
    pub first_var: Vec<Matrix>,
    /// `(d²η_t)_{x₀}(vₚ, wₚ)` per output time, per pair.
    pub second_var: Vec<Vec<Vector>>,
    pub pairs: Vec<(Vector, Vector)>,
    /// Accepted and rejected step counts.
    pub steps: (usize, usize),
}

struct Layout {
    n: usize,
    pairs: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.n + self.n * self.n + self.n * self.pairs
    }
    fn phi(&self, i: usize, j: usize) -> usize {
        self.n + i * self.n + j
    }
    fn var(&self, p: usize) -> usize {
        self.n + self.n * self.n + p * self.n
    }
}

struct System<'a, F: AmbientField + ?Sized> {
    field: &'a F,
    layout: Layout,
    pairs: &'a [(Vector, Vector)],
}

impl<F: AmbientField + ?Sized> System<'_, F> {
    fn unpack(&self, y: &[f64]) -> (Vector, Matrix) {
        let n = self.layout.n;
        let x = Vector::from_slice(&y[..n]);
        let mut phi = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                phi.set(i, j, y[self.layout.phi(i, j)]);
            }
        }
        (x, phi)
    }

    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.layout.n;
        let left = |_| Error::LeftDomain { t };
        let (x, phi) = self.unpack(y);
        let fx = self.field.eval(&x).map_err(left)?;
        out[..n].copy_from_slice(fx.as_slice());
        for j in 0..n {
            let d = self.field.jvp(&x, &phi.column(j)).map_err(left)?;
            for i in 0..n {
                out[self.layout.phi(i, j)] = d[i];
            }
        }
        for (p, (v, w)) in self.pairs.iter().enumerate() {
            let off = self.layout.var(p);
            let vp = Vector::from_slice(&y[off..off + n]);
            let a = phi.apply(v);
            let b = phi.apply(w);
            let d = self.field.hvp(&x, &a, &b).map_err(left)? + self.field.jvp(&x, &vp).map_err(left)?;
            out[off..off + n].copy_from_slice(d.as_slice());
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::LeftDomain { t });
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], opts: &FlowOptions) -> f64 {
    let mut m = 0.0f64;
    for i in 0..y0.len() {
        let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        m = m.max(err[i].abs() / sc);
    }
    m
}

/// Integrates the flow and its variational equations from `x0` over `[0, horizon]`.
pub fn integrate_flow_with<F: AmbientField + ?Sized>(
    field: &F,
    x0: &Vector,
    horizon: f64,
    second: &SecondVariation,
    opts: &FlowOptions,
) -> Result<FlowTrajectory> {
    let n = field.dim();
    if x0.dim() != n {
        return Err(Error::InvalidInput("initial point has the wrong dimension"));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidInput("integration horizon must be positive"));
    }
    let pairs: Vec<(Vector, Vector)> = match second {
        SecondVariation::Pairs(p) => p.clone(),
        SecondVariation::FullTensor => (0..n)
            .flat_map(|i| (0..n).map(move |j| (Vector::basis(n, i), Vector::basis(n, j))))
            .collect(),
    };
    let mut outputs: Vec<f64> = match &opts.outputs {
        Some(o) => o.clone(),
        None => (0..=100).map(|k| horizon * k as f64 / 100.0).collect(),
    };
    if outputs.iter().any(|t| !(0.0..=horizon).contains(t)) {
        return Err(Error::InvalidInput("output times must lie in [0, T]"));
    }
    outputs.sort_by(|a, b| a.partial_cmp(b).expect("finite output times"));
    outputs.dedup();

    let sys = System { field, layout: Layout { n, pairs: pairs.len() }, pairs: &pairs };
    let len = sys.layout.len();
    let mut y = vec![0.0; len];
    y[..n].copy_from_slice(x0.as_slice());
    for i in 0..n {
        y[sys.layout.phi(i, i)] = 1.0;
    }

    let mut traj = FlowTrajectory {
        times: Vec::with_capacity(outputs.len()),
        points: Vec::with_capacity(outputs.len()),
        first_var: Vec::with_capacity(outputs.len()),
        second_var: Vec::with_capacity(outputs.len()),
        pairs: pairs.clone(),
        steps: (0, 0),
    };
    let record = |traj: &mut FlowTrajectory, t: f64, y: &[f64]| {
        let (x, phi) = sys.unpack(y);
        traj.times.push(t);
        traj.points.push(x);
        traj.first_var.push(phi);
        traj.second_var.push(
            (0..pairs.len())
                .map(|p| Vector::from_slice(&y[sys.layout.var(p)..sys.layout.var(p) + n]))
                .collect(),
        );
    };

    let mut k: [Vec<f64>; 7] = core::array::from_fn(|_| vec![0.0; len]);
    let mut stage = vec![0.0; len];
    let mut y_new = vec![0.0; len];
    let mut err = vec![0.0; len];
    let mut t = 0.0;
    sys.rhs(t, &y, &mut k[0])?;

    // Initial step (Hairer–Nørsett–Wanner heuristic).
    let sc = |v: f64| opts.atol + opts.rtol * v.abs();
    let d0 = y.iter().map(|v| (v / sc(*v)).abs()).fold(0.0, f64::max);
    let d1 = k[0].iter().zip(&y).map(|(v, yi)| (v / sc(*yi)).abs()).fold(0.0, f64::max);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(horizon).max(STEP_FLOOR * horizon * 10.0);

    let floor = STEP_FLOOR * horizon;
    let mut next = 0;
    while next < outputs.len() && outputs[next] <= t {
        record(&mut traj, t, &y);
        next += 1;
    }
    let mut reject_streak = false;
    while next < outputs.len() {
        let target = outputs[next];
        let mut hs = h.min(target - t);
        let land = target - (t + hs) <= floor;
        if land {
            hs = target - t;
        }
        if traj.steps.0 + traj.steps.1 >= MAX_STEPS {
            return Err(Error::StepFailure { t, h: hs });
        }
        for s in 1..7 {
            for i in 0..len {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += hs * A[s][j] * kj[i];
                }
                stage[i] = acc;
            }
            let (_, tail) = k.split_at_mut(s);
            sys.rhs(t + C[s] * hs, &stage, &mut tail[0])?;
        }
        // stage 6 evaluates at the fifth-order solution (FSAL)
        y_new.copy_from_slice(&stage);
        for i in 0..len {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            err[i] = hs * e;
        }
        let en = error_norm(&y, &y_new, &err, opts);
        if en <= 1.0 {
            t = if land { target } else { t + hs };
            core::mem::swap(&mut y, &mut y_new);
            let last = k[6].clone();
            k[0].copy_from_slice(&last);
            traj.steps.0 += 1;
            let mut fac = if en == 0.0 { 5.0 } else { 0.9 * libm::pow(en, -0.2) };
            fac = fac.clamp(0.2, 5.0);
            if reject_streak {
                fac = fac.min(1.0);
            }
            reject_streak = false;
            // a step clipped to hit an output time does not shrink the controller's step
            h = if land && hs < h { h } else { (hs * fac).min(horizon) };
            while next < outputs.len() && outputs[next] <= t {
                record(&mut traj, t, &y);
                next += 1;
            }
        } else {
            traj.steps.1 += 1;
            reject_streak = true;
            let fac = (0.9 * libm::pow(en, -0.2)).clamp(0.2, 1.0);
            h = hs * fac;
        }
        if !en.is_finite() || h < floor {
            return Err(Error::StepFailure { t, h });
        }
    }
    Ok(traj)
}

/// Integrates with default tolerances for a single `(v, w)` pair.
pub fn integrate_flow<F: AmbientField + ?Sized>(
    field: &F,
    x0: &Vector,
    horizon: f64,
    v: &Vector,
    w: &Vector,
) -> Result<FlowTrajectory> {
    integrate_flow_with(
        field,
        x0,
        horizon,
        &SecondVariation::Pairs(vec![(*v, *w)]),
        &FlowOptions::default(),
    )
}

/// `(‖F(p)‖, ‖DF(p) + I‖_F)` at the designated fixed point.
pub fn fixed_point_residuals<F: AmbientField + ?Sized>(field: &F) -> Result<(f64, f64)> {
    let n = field.dim();
    let p = field.fixed_point();
    let fp = field.eval(&p)?.norm();
    let mut jac = Matrix::zeros(n);
    for j in 0..n {
        let col = field.jvp(&p, &Vector::basis(n, j))?;
        jac.set_column(j, &col);
    }
    let res = jac.sub(&Matrix::identity(n).scale(-1.0)).frobenius();
    Ok((fp, res))
}

/// Residuals of the linearization law at the fixed point and of the closed
/// form `e^t V(t) = W (1 − e^{−t})` for `V(t) = (d²η_t)ₚ(v, w)`, `W = (d²F)ₚ(v, w)`.
#[derive(Clone, Debug)]
pub struct Lemma21Report {
    /// `sup_t ‖(dη_t)ₚ − e^{−t} I‖_F`
    pub first_var_residual: f64,
    /// `sup_t ‖e^t V(t) − W(1 − e^{−t})‖`
    pub din8_residual: f64,
    /// `din8_residual / ‖W‖` (absolute when `W = 0`).
    pub din8_relative: f64,
    /// `‖e^T V(T) − W‖`
    pub tail_discrepancy: f64,
    pub w: Vector,
    pub horizon: f64,
    /// Per output time: `(t, first-variation residual, din8 residual)`.
    pub samples: Vec<(f64, f64, f64)>,
}

pub fn check_lemma21_with<F: AmbientField + ?Sized>(
    field: &F,
    v: &Vector,
    w: &Vector,
    horizon: f64,
    opts: &FlowOptions,
) -> Result<Lemma21Report> {
    let (fp, jac) = fixed_point_residuals(field)?;
    if fp > FIXED_POINT_TOL || jac > FIXED_POINT_JACOBIAN_TOL {
        return Err(Error::InvalidInput("field does not satisfy X(p) = 0 and dX(p) = -I"));
    }
    let p = field.fixed_point();
    let wv = field.hvp(&p, v, w)?;
    let traj = integrate_flow_with(
        field,
        &p,
        horizon,
        &SecondVariation::Pairs(vec![(*v, *w)]),
        opts,
    )?;
    let n = field.dim();
    let mut samples = Vec::with_capacity(traj.times.len());
    let (mut first, mut din8) = (0.0f64, 0.0f64);
    for (idx, &t) in traj.times.iter().enumerate() {
        let e = libm::exp(-t);
        let r1 = traj.first_var[idx].sub(&Matrix::identity(n).scale(e)).frobenius();
        let etv = traj.second_var[idx][0].scale(libm::exp(t));
        let r2 = (etv - wv.scale(1.0 - e)).norm();
        first = first.max(r1);
        din8 = din8.max(r2);
        samples.push((t, r1, r2));
    }
    let last = traj.second_var.last().expect("at least one output")[0];
    let tail = (last.scale(libm::exp(horizon)) - wv).norm();
    let wn = wv.norm();
    Ok(Lemma21Report {
        first_var_residual: first,
        din8_residual: din8,
        din8_relative: if wn > 0.0 { din8 / wn } else { din8 },
        tail_discrepancy: tail,
        w: wv,
        horizon,
        samples,
    })
}

pub fn check_lemma21<F: AmbientField + ?Sized>(
    field: &F,
    v: &Vector,
    w: &Vector,
    horizon: f64,
) -> Result<Lemma21Report> {
    check_lemma21_with(field, v, w, horizon, &FlowOptions::default())
}
