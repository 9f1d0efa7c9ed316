//! Point source inside a sphere: the exterior field of the source and the
//! computed scattered field must cancel, so their difference on a probe
//! sphere measures the solver error.
//!
//! cargo run --release --example sphere_extinction

use axielastic::geometry::{build_mesh, make_builtin_curve};
use axielastic::incident::IncidentField;
use axielastic::postprocess::{EvalOptions, FieldEvaluator, ProbeSphere};
use axielastic::solver::{solve_all, SolverOptions};

fn main() -> axielastic::Result<()> {
    let curve = make_builtin_curve("sphere")?;
    let field = IncidentField::default_point_source(1.0, 2.0);
    println!("{:>7} {:>6} {:>4} {:>10}", "panels", "N_pts", "N_f", "E_error");
    for n_panels in [2, 4, 8] {
        let mesh = build_mesh(&curve, n_panels, 16, 0)?;
        let (dens, report) = solve_all(&mesh, &field, &SolverOptions::default())?;
        let ev = FieldEvaluator::new(&mesh, &dens, EvalOptions::default())?;
        let e = ev.extinction_error(&field, &ProbeSphere::default())?;
        println!("{:>7} {:>6} {:>4} {:>10.2e}", n_panels, report.n_pts, dens.m_max, e.e_error);
    }
    Ok(())
}
