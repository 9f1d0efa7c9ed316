//! Droplet with a conical tip: dyadic panel refinement toward the corner
//! versus a uniform mesh with the same number of nodes.
//!
//! cargo run --release --example droplet_corner

use axielastic::geometry::{build_mesh, make_builtin_curve};
use axielastic::incident::IncidentField;
use axielastic::postprocess::{EvalOptions, FieldEvaluator, ProbeSphere};
use axielastic::solver::{solve_all, SolverOptions};

fn main() -> axielastic::Result<()> {
    let curve = make_builtin_curve("droplet")?;
    let field = IncidentField::default_point_source(1.0, 2.0);
    for (panels, depth) in [(15, 4), (19, 0)] {
        let mesh = build_mesh(&curve, panels, 16, depth)?;
        let (dens, report) = solve_all(&mesh, &field, &SolverOptions::default())?;
        let e = FieldEvaluator::new(&mesh, &dens, EvalOptions::default())?
            .extinction_error(&field, &ProbeSphere::default())?;
        println!("panels {panels:>2} depth {depth}: N_pts {:>4}, E_error {:.2e}", report.n_pts, e.e_error);
    }
    Ok(())
}
