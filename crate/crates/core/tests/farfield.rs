mod common;

use axielastic::geometry::{build_mesh, make_builtin_curve};
use axielastic::incident::IncidentField;
use axielastic::postprocess::{unit, EvalOptions, FieldEvaluator, SphericalGrid};
use axielastic::solver::{solve_all, SolverOptions};
use num_complex::Complex64 as C64;

fn norm(a: &[C64; 3]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn reconstruction_error_decays_like_one_over_r() {
    let (kp, ks) = (1.0, 2.0);
    let mesh = build_mesh(&make_builtin_curve("sphere").unwrap(), 6, 16, 0).unwrap();
    let field = IncidentField::default_plane(kp, ks);
    let (d, _) = solve_all(&mesh, &field, &SolverOptions::default()).unwrap();
    let ev = FieldEvaluator::new(&mesh, &d, EvalOptions::default()).unwrap();
    for xhat in [unit(0.3, 0.5), unit(2.0, 1.4), unit(4.0, 2.6)] {
        let (ap, as_) = ev.far_amplitudes(xhat).unwrap();
        let rs = [1e3, 1e4, 1e5, 1e6];
        let errs: Vec<f64> = rs
            .iter()
            .map(|&r| {
                let (u, _) = ev.scattered_field(xhat.map(|c| c * r)).unwrap();
                let (ep, es) = (C64::new(0.0, kp * r).exp() / r, C64::new(0.0, ks * r).exp() / r);
                let diff = [0, 1, 2].map(|i| u[i] - ap[i] * ep - as_[i] * es);
                norm(&diff) / norm(&u)
            })
            .collect();
        // the 1/R coefficient beats between the P and S corrections, so only
        // its size is stable
        for (r, e) in rs.iter().zip(&errs) {
            assert!(r * e < 10.0, "{errs:?}");
        }
        assert!(errs[3] < 1e-5, "{errs:?}");
    }
}

#[test]
fn amplitudes_are_longitudinal_and_transverse() {
    let mesh = build_mesh(&make_builtin_curve("ellipsoid").unwrap(), 6, 12, 0).unwrap();
    let (d, _) = solve_all(&mesh, &IncidentField::default_plane(1.0, 2.0), &SolverOptions::default()).unwrap();
    let ev = FieldEvaluator::new(&mesh, &d, EvalOptions::default()).unwrap();
    for pt in ev.far_field(&SphericalGrid::full(5, 4)).unwrap().points {
        let x = unit(pt.theta, pt.phi);
        let s_dot: C64 = (0..3).map(|i| pt.a_s[i] * x[i]).sum();
        let p_cross = [
            pt.a_p[1] * x[2] - pt.a_p[2] * x[1],
            pt.a_p[2] * x[0] - pt.a_p[0] * x[2],
            pt.a_p[0] * x[1] - pt.a_p[1] * x[0],
        ];
        assert!(s_dot.norm() <= 1e-13 * norm(&pt.a_s).max(1e-300));
        assert!(norm(&p_cross) <= 1e-13 * norm(&pt.a_p).max(1e-300));
    }
}

#[test]
fn axisymmetric_incidence_gives_azimuth_independent_pattern() {
    let mesh = build_mesh(&make_builtin_curve("sphere").unwrap(), 4, 12, 0).unwrap();
    let field = IncidentField::Plane { d: [0.0, 0.0, 1.0], p: [0.0, 0.0, 1.0], kappa_p: 1.0, kappa_s: 2.0 };
    let (d, _) = solve_all(&mesh, &field, &SolverOptions::default()).unwrap();
    assert_eq!(d.m_max, 0);
    let ev = FieldEvaluator::new(&mesh, &d, EvalOptions::default()).unwrap();
    let grid = SphericalGrid::full(8, 5);
    let pts = ev.far_field(&grid).unwrap().points;
    // rows of constant phi
    for j in 0..grid.n_phi {
        let row: Vec<(f64, f64)> = (0..grid.n_theta).map(|k| &pts[k * grid.n_phi + j]).map(|p| (norm(&p.a_p), norm(&p.a_s))).collect();
        for &(p, s) in &row {
            assert!((p - row[0].0).abs() <= 1e-10 * row[0].0 && (s - row[0].1).abs() <= 1e-10 * row[0].1.max(1e-300));
        }
    }
}
