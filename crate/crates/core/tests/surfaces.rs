use bieberbach_core::chart::ChartMap;
use bieberbach_core::geometry::{
    christoffels, dz, frame_at, second_fundamental, second_fundamental_complex,
    second_fundamental_table,
};
use bieberbach_core::jet::split;
use bieberbach_core::surface::REGISTRY_KEYS;
use bieberbach_core::{complex_z_derivatives, registry, SurfacePatch, Vector};
use num_complex::Complex64;

fn registered() -> Vec<SurfacePatch> {
    REGISTRY_KEYS.iter().map(|k| registry(k, &[]).unwrap()).collect()
}

fn rel(a: &Vector, b: &Vector) -> f64 {
    (*a - *b).norm() / a.norm().max(1.0)
}

/// Central differences of the surface itself, independent of the jet code.
fn fd_partials(s: &SurfacePatch, x: f64, y: f64) -> ([Vector; 2], [Vector; 3]) {
    let f = |a: f64, b: f64| s.point(a, b).unwrap();
    let h1 = 1e-6;
    let fx = (f(x + h1, y) - f(x - h1, y)).scale(0.5 / h1);
    let fy = (f(x, y + h1) - f(x, y - h1)).scale(0.5 / h1);
    let h2 = 1e-4;
    let c = f(x, y);
    let fxx = (f(x + h2, y) - c.scale(2.0) + f(x - h2, y)).scale(1.0 / (h2 * h2));
    let fyy = (f(x, y + h2) - c.scale(2.0) + f(x, y - h2)).scale(1.0 / (h2 * h2));
    let fxy = (f(x + h2, y + h2) - f(x + h2, y - h2) - f(x - h2, y + h2) + f(x - h2, y - h2))
        .scale(1.0 / (4.0 * h2 * h2));
    ([fx, fy], [fxx, fxy, fyy])
}

#[test]
fn jets_match_finite_differences_on_every_registered_surface() {
    for s in registered() {
        for (x, y) in s.sample_grid(7) {
            let (_, d1, d2) = split(&s.jet(x, y).unwrap());
            let (f1, f2) = fd_partials(&s, x, y);
            for i in 0..2 {
                assert!(rel(&d1[i], &f1[i]) <= 1e-6, "{} first {i} at ({x},{y})", s.name);
            }
            for i in 0..3 {
                assert!(rel(&d2[i], &f2[i]) <= 1e-5, "{} second {i} at ({x},{y})", s.name);
            }
        }
    }
}

#[test]
fn helicoid_origin_values() {
    let g = SurfacePatch::helicoid(1.0);
    let (fz, fzz) = complex_z_derivatives(&g.jet(0.0, 0.0).unwrap());
    let want_fz = [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, -0.5)];
    let want_fzz = [Complex64::new(0.0, 0.0), Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.0)];
    let sigma = second_fundamental_complex(&g, (0.0, 0.0), dz()).unwrap();
    for k in 0..3 {
        assert!((fz.get(k) - want_fz[k]).norm() <= 1e-10);
        assert!((fzz.get(k) - want_fzz[k]).norm() <= 1e-10);
        assert!((sigma.get(k) - want_fzz[k]).norm() <= 1e-10);
    }
    let frame = frame_at(&g, 0.0, 0.0).unwrap();
    assert!((frame.normal[0].dot(&Vector::basis(3, 1)).abs() - 1.0).abs() <= 1e-12);
}

#[test]
fn second_fundamental_form_is_symmetric_and_normal() {
    let vs = [[1.0, 0.0], [0.3, -0.8], [-0.5, 1.2]];
    for s in registered() {
        for (x, y) in s.sample_grid(3) {
            let frame = frame_at(&s, x, y).unwrap();
            for v in vs {
                for w in vs {
                    let a = second_fundamental(&s, (x, y), v, w).unwrap();
                    let b = second_fundamental(&s, (x, y), w, v).unwrap();
                    assert!((a - b).norm() <= 1e-13);
                    let t = frame.project_tangent(&a);
                    assert!(t.norm() <= 1e-10 * (1.0 + a.norm()), "{}", s.name);
                }
            }
        }
    }
}

#[test]
fn gauss_formula_splits_second_partials() {
    // fᵢⱼ = Γᵏᵢⱼ f_k + σ(∂ᵢ, ∂ⱼ)
    for s in registered() {
        for (x, y) in s.sample_grid(3) {
            let (_, f1, f2) = split(&s.jet(x, y).unwrap());
            let table = second_fundamental_table(&s, (x, y)).unwrap();
            let gamma = christoffels(&s, (x, y)).unwrap();
            for (idx, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
                let tangential = f1[0].scale(gamma[0][i][j]) + f1[1].scale(gamma[1][i][j]);
                let r = f2[idx] - tangential - table[idx];
                assert!(r.norm() <= 1e-10 * (1.0 + f2[idx].norm()), "{} ({i},{j})", s.name);
            }
        }
    }
}

#[test]
fn christoffels_are_metric_compatible() {
    // ∂ₖ gᵢⱼ = Γˡₖᵢ gₗⱼ + Γˡₖⱼ gᵢₗ, with ∂ₖ g by finite differences of the metric.
    let metric = |s: &SurfacePatch, x: f64, y: f64| {
        let (_, f1, _) = split(&s.jet(x, y).unwrap());
        [[f1[0].dot(&f1[0]), f1[0].dot(&f1[1])], [f1[1].dot(&f1[0]), f1[1].dot(&f1[1])]]
    };
    let h = 1e-6;
    for s in registered() {
        for (x, y) in s.sample_grid(3) {
            let g = metric(&s, x, y);
            let gamma = christoffels(&s, (x, y)).unwrap();
            for k in 0..2 {
                let (dx, dy) = if k == 0 { (h, 0.0) } else { (0.0, h) };
                let gp = metric(&s, x + dx, y + dy);
                let gm = metric(&s, x - dx, y - dy);
                for i in 0..2 {
                    for j in 0..2 {
                        let fd = (gp[i][j] - gm[i][j]) / (2.0 * h);
                        let mut want = 0.0;
                        for l in 0..2 {
                            want += gamma[l][k][i] * g[l][j] + gamma[l][k][j] * g[i][l];
                        }
                        assert!((fd - want).abs() <= 1e-6 * (1.0 + want.abs()), "{}", s.name);
                    }
                }
            }
        }
    }
}

#[test]
fn helicoid_christoffel_off_axis() {
    let gamma = christoffels(&SurfacePatch::helicoid(1.0), (0.5, 0.0)).unwrap();
    assert!((gamma[0][0][0] - libm::tanh(0.5)).abs() <= 1e-12);
    let at_origin = christoffels(&SurfacePatch::helicoid(1.0), (0.0, 0.0)).unwrap();
    assert!(at_origin.iter().flatten().flatten().all(|g| g.abs() <= 1e-15));
}

#[test]
fn rotation_multiplies_z_derivatives_by_unimodular_factors() {
    let theta = 0.7;
    let u = Complex64::from_polar(1.0, theta);
    for s in registered().into_iter().filter(|s| s.conformal) {
        let r = s.clone().precompose(ChartMap::rotation(theta));
        let (fz, fzz) = complex_z_derivatives(&s.jet(0.0, 0.0).unwrap());
        let (gz, gzz) = complex_z_derivatives(&r.jet(0.0, 0.0).unwrap());
        assert!((gz - fz.scale(u)).norm() <= 1e-12);
        assert!((gzz - fzz.scale(u * u)).norm() <= 1e-12);
    }
}

#[test]
fn registry_rejects_bad_input() {
    assert!(registry("torus", &[]).is_err());
    assert!(registry("helicoid", &[("c", 1.0)]).is_err());
    assert!(registry("helicoid", &[("r", f64::NAN)]).is_err());
    assert!(registry("koebe_plane", &[("c", 1.5)]).is_err());
    assert!(registry("plane", &[("n", 2.5)]).is_err());
    assert_eq!(registry("plane", &[("n", 5.0)]).unwrap().dim(), 5);
}
