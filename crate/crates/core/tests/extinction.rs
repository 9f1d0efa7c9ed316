mod common;

use std::f64::consts::PI;

use axielastic::geometry::{build_mesh, make_builtin_curve};
use axielastic::incident::IncidentField;
use axielastic::postprocess::{EvalOptions, FieldEvaluator, ProbeSphere};
use axielastic::solver::{solve_all, SolverOptions};
use axielastic::usercurve::{build_user_curve, CurveSpec, PieceSpec};
use axielastic::Error;
use common::extinction_run;

#[test]
fn sphere_error_decreases_with_panels_until_plateau() {
    let e: Vec<f64> = [2, 4, 8].iter().map(|&n| extinction_run("sphere", n, 8, 0, 1.0, 2.0, false, 256).e.e_error).collect();
    assert!(e[1] < e[0] && e[2] < e[1], "{e:?}");
    assert!(e[2] < 1e-9, "{e:?}");
}

#[test]
fn corner_refinement_helps_the_droplet() {
    let r = extinction_run("droplet", 10, 12, 3, 1.0, 2.0, false, 256);
    let u = extinction_run("droplet", 13, 12, 0, 1.0, 2.0, false, 256);
    assert_eq!(r.n_pts, u.n_pts);
    assert!(r.e.e_error < u.e.e_error, "{} vs {}", r.e.e_error, u.e.e_error);
}

fn user_sphere(pieces: Vec<PieceSpec>) -> f64 {
    let curve = build_user_curve(&CurveSpec { name: "s".into(), corners: vec![], interior_ref: None, pieces }).unwrap();
    let mesh = build_mesh(&curve, 4, 16, 0).unwrap();
    let field = IncidentField::default_point_source(1.0, 2.0);
    let (d, _) = solve_all(&mesh, &field, &SolverOptions::default()).unwrap();
    FieldEvaluator::new(&mesh, &d, EvalOptions::default()).unwrap().extinction_error(&field, &ProbeSphere::default()).unwrap().e_error
}

#[test]
fn expression_curve_matches_builtin_accuracy() {
    let e = user_sphere(vec![PieceSpec::AnalyticExpression { interval: [0.0, PI], r: "2*sin(t)".into(), z: "2*cos(t)".into() }]);
    assert!(e < 1e-12, "{e:e}");
}

#[test]
fn sampled_curve_is_usable() {
    let n = 121;
    let t: Vec<f64> = (0..n).map(|k| PI * k as f64 / (n - 1) as f64).collect();
    let mut r: Vec<f64> = t.iter().map(|t| 2.0 * t.sin()).collect();
    r[0] = 0.0;
    r[n - 1] = 0.0;
    let z = t.iter().map(|t| 2.0 * t.cos()).collect();
    let e = user_sphere(vec![PieceSpec::Sampled { t, r, z, blend: 8 }]);
    assert!(e < 1e-6, "{e:e}");
}

#[test]
fn invalid_probe_setups_are_rejected() {
    let mesh = build_mesh(&make_builtin_curve("sphere").unwrap(), 3, 8, 0).unwrap();
    let field = IncidentField::default_point_source(1.0, 2.0);
    let (d, _) = solve_all(&mesh, &field, &SolverOptions::default()).unwrap();
    let ev = FieldEvaluator::new(&mesh, &d, EvalOptions::default()).unwrap();
    assert!(ev.extinction_error(&field, &ProbeSphere { radius: 1.5, count: 50 }).is_err());
    assert!(ev.extinction_error(&IncidentField::default_plane(1.0, 2.0), &ProbeSphere::default()).is_err());
    let outside = IncidentField::PointSource { y0: [3.0, 0.0, 0.0], p: [1.0, 0.0, 0.0], mu: 1.0, kappa_p: 1.0, kappa_s: 2.0 };
    assert!(ev.extinction_error(&outside, &ProbeSphere::default()).is_err());
    assert!(matches!(ev.scattered_field([0.5, 0.0, 0.0]), Err(Error::NotExterior(_))));
}
