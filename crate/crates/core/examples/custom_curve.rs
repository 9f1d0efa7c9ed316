//! A user-defined body from expressions, solved with the extinction check.
//!
//! cargo run --release --example custom_curve

use axielastic::geometry::build_mesh;
use axielastic::incident::IncidentField;
use axielastic::postprocess::{EvalOptions, FieldEvaluator, ProbeSphere};
use axielastic::solver::{solve_all, SolverOptions};
use axielastic::usercurve::{build_user_curve, parse_curve};

const PEANUT: &str = r#"
name = "peanut"

[[piece]]
kind = "analytic-expression"
interval = [0.0, 3.141592653589793]
r = "sin(t)*(1.2 + 0.3*cos(2*t))"
z = "1.8*cos(t)"
"#;

fn main() -> axielastic::Result<()> {
    let curve = build_user_curve(&parse_curve(PEANUT)?)?;
    let mesh = build_mesh(&curve, 10, 16, 0)?;
    let field = IncidentField::default_point_source(1.0, 2.0);
    let (dens, report) = solve_all(&mesh, &field, &SolverOptions::default())?;
    let e = FieldEvaluator::new(&mesh, &dens, EvalOptions::default())?
        .extinction_error(&field, &ProbeSphere::default())?;
    println!("{}: N_pts {}, N_f {}, E_error {:.2e}", curve.name(), report.n_pts, dens.m_max, e.e_error);
    Ok(())
}
