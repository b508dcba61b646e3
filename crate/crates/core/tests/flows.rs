use bieberbach_core::attractor::{conformal_attractor, extend_normal, tangential_attractor};
use bieberbach_core::chart::ChartMap;
use bieberbach_core::flow::{
    check_lemma21_with, fixed_point_residuals, integrate_flow, integrate_flow_with, AmbientField,
    BernoulliField, FlowOptions, LinearField, SecondVariation,
};
use bieberbach_core::geometry::frame_at;
use bieberbach_core::{Error, SurfacePatch, Vector};

fn grid(step: f64, end: f64) -> Vec<f64> {
    let n = (end / step).round() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

#[test]
fn flowed_immersions_keep_their_certificates() {
    for t in [0.5, 1.0, 2.0] {
        let s = SurfacePatch::helicoid(1.0).precompose(ChartMap::dilation((-t as f64).exp()));
        let x = conformal_attractor(&s).unwrap();
        x.certify_conformal().unwrap();
        assert!(x.normalization_residual().unwrap() <= 1e-8);
    }
}

#[test]
fn attractor_certificates() {
    let h = SurfacePatch::helicoid(1.0);
    conformal_attractor(&h).unwrap().certify_conformal().unwrap();
    // The tangential field normalizes correctly but is not holomorphic here.
    let t = tangential_attractor(&h).unwrap();
    assert!(t.normalization_residual().unwrap() <= 1e-8);
    assert!(matches!(t.certify_conformal(), Err(Error::NotConformal { .. })));
    assert!(conformal_attractor(&SurfacePatch::graph(Default::default())).is_err());
}

#[test]
fn extension_is_minus_identity_at_p_and_tangent_on_the_surface() {
    let x = conformal_attractor(&SurfacePatch::helicoid(1.0)).unwrap();
    let e = extend_normal(&x).unwrap();
    let p = *e.basepoint();
    let n = Vector::basis(3, 1);
    let d = e.jvp_fd(&p, &n, e.first_step()).unwrap();
    assert!((d + n).norm() <= 1e-7);
    // On the surface the extension is the tangent field itself.
    let q = x.host.point(0.2, -0.1).unwrap();
    let v = e.eval(&q).unwrap();
    let frame = frame_at(&x.host, 0.2, -0.1).unwrap();
    assert!(frame.project_normal(&v).norm() <= 1e-10 * (1.0 + v.norm()));
    assert!((v - frame.project_tangent(&v)).norm() <= 1e-10);
}

#[test]
fn helicoid_orbit_converges_to_p() {
    let x = conformal_attractor(&SurfacePatch::helicoid(1.0)).unwrap();
    let e = extend_normal(&x).unwrap();
    let x0 = x.host.point(0.5, 0.3).unwrap();
    let v = Vector::basis(3, 0);
    let traj = integrate_flow(&e, &x0, 15.0, &v, &v).unwrap();
    let end = traj.points.last().unwrap();
    assert!((*end - *e.basepoint()).norm() <= 1e-5);
}

#[test]
fn flow_is_a_semigroup() {
    let f = BernoulliField { a: 0.3 };
    let x0 = Vector::from_slice(&[0.7]);
    let v = Vector::basis(1, 0);
    let full = integrate_flow(&f, &x0, 3.0, &v, &v).unwrap();
    let half = integrate_flow(&f, &x0, 1.2, &v, &v).unwrap();
    let rest = integrate_flow(&f, half.points.last().unwrap(), 1.8, &v, &v).unwrap();
    assert!((*full.points.last().unwrap() - *rest.points.last().unwrap()).norm() <= 1e-9);
    // Closed-form orbit.
    let e = (-3.0f64).exp();
    let exact = e * 0.7 / (1.0 - 0.3 * 0.7 * (1.0 - e));
    assert!((full.points.last().unwrap()[0] - exact).abs() <= 1e-9);
}

#[test]
fn second_variation_matches_differenced_flow() {
    // (d²η_t)(v, w) against a four-point stencil on η_t itself, away from p.
    let f = BernoulliField { a: 0.3 };
    let v = Vector::basis(1, 0);
    let opts = FlowOptions { rtol: 1e-12, atol: 1e-14, outputs: Some(vec![0.0, 2.0]) };
    let pair = SecondVariation::Pairs(vec![(v, v)]);
    let end = |x: f64| {
        integrate_flow_with(&f, &Vector::from_slice(&[x]), 2.0, &pair, &opts).unwrap()
    };
    let traj = end(0.4);
    let h = 1e-3;
    let fd = (end(0.4 + h).points[1][0] - 2.0 * traj.points[1][0] + end(0.4 - h).points[1][0]) / (h * h);
    assert!((traj.second_var[1][0][0] - fd).abs() <= 1e-5);
    let jac = (end(0.4 + h).points[1][0] - end(0.4 - h).points[1][0]) / (2.0 * h);
    assert!((traj.first_var[1].get(0, 0) - jac).abs() <= 1e-6);
}

#[test]
fn lemma21_on_the_helicoid_extension() {
    let x = conformal_attractor(&SurfacePatch::helicoid(1.0)).unwrap();
    let e = extend_normal(&x).unwrap();
    let (fp, jac) = fixed_point_residuals(&e).unwrap();
    assert!(fp <= 1e-12 && jac <= 1e-8);
    let v = Vector::from_slice(&[0.6, 0.0, 0.8]);
    let w = Vector::from_slice(&[0.0, 1.0, 0.0]);
    let mut opts = FlowOptions::with_tolerance(1e-10);
    opts.outputs = Some(grid(0.1, 10.0));
    let r = check_lemma21_with(&e, &v, &w, 10.0, &opts).unwrap();
    assert!(r.first_var_residual <= 1e-6);
    assert!(r.din8_relative <= 1e-6);
}

#[test]
fn first_variation_residual_tracks_tolerance() {
    let x = conformal_attractor(&SurfacePatch::helicoid(1.0)).unwrap();
    let e = extend_normal(&x).unwrap();
    let v = Vector::basis(3, 0);
    let run = |tol: f64| {
        let mut opts = FlowOptions::with_tolerance(tol);
        opts.outputs = Some(grid(0.1, 10.0));
        check_lemma21_with(&e, &v, &v, 10.0, &opts).unwrap().first_var_residual
    };
    let (coarse, mid, fine) = (run(1e-6), run(1e-8), run(1e-10));
    assert!(fine <= mid && mid <= coarse);
    assert!(fine <= 1e-2 * coarse);
}

#[test]
fn linear_field_flows_exactly() {
    let c = Vector::from_slice(&[1.0, -2.0]);
    let f = LinearField { center: c };
    let x0 = Vector::from_slice(&[3.0, 0.5]);
    let v = Vector::basis(2, 1);
    let traj = integrate_flow(&f, &x0, 4.0, &v, &v).unwrap();
    for (t, p) in traj.times.iter().zip(&traj.points) {
        let want = c + (x0 - c).scale((-t).exp());
        assert!((*p - want).norm() <= 1e-9);
    }
    assert!(traj.second_var.iter().all(|s| s[0].norm() <= 1e-12));
    assert_eq!(f.dim(), 2);
}

#[test]
fn invalid_flow_inputs_are_rejected() {
    let f = BernoulliField { a: 0.3 };
    let v = Vector::basis(1, 0);
    assert!(integrate_flow(&f, &Vector::zeros(2), 1.0, &v, &v).is_err());
    assert!(integrate_flow(&f, &Vector::zeros(1), -1.0, &v, &v).is_err());
    // From x₀ = 2/a the orbit blows up at t = ln 2.
    let blow = integrate_flow(&f, &Vector::from_slice(&[2.0 / 0.3]), 5.0, &v, &v);
    assert!(blow.is_err());
}
