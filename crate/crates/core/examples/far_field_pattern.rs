//! Plane wave on a sphere: P and S far-field amplitudes on a coarse grid,
//! checked against the scattered field far away.
//!
//! cargo run --release --example far_field_pattern

use axielastic::geometry::{build_mesh, make_builtin_curve};
use axielastic::incident::IncidentField;
use axielastic::postprocess::{unit, EvalOptions, FieldEvaluator, SphericalGrid};
use axielastic::solver::{solve_all, SolverOptions};
use num_complex::Complex64 as C64;

fn main() -> axielastic::Result<()> {
    let mesh = build_mesh(&make_builtin_curve("sphere")?, 8, 16, 0)?;
    let field = IncidentField::default_plane(1.0, 2.0);
    let (dens, _) = solve_all(&mesh, &field, &SolverOptions::default())?;
    let ev = FieldEvaluator::new(&mesh, &dens, EvalOptions::default())?;

    let pattern = ev.far_field(&SphericalGrid::full(4, 3))?;
    println!("{:>6} {:>6} {:>10} {:>10}", "theta", "phi", "|A_p|", "|A_s|");
    for pt in &pattern.points {
        let norm = |a: &[C64; 3]| a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        println!("{:>6.3} {:>6.3} {:>10.3e} {:>10.3e}", pt.theta, pt.phi, norm(&pt.a_p), norm(&pt.a_s));
    }

    // the leading term has a relative O(1/R) correction
    let xhat = unit(0.7, 1.1);
    let (ap, as_) = ev.far_amplitudes(xhat)?;
    for r in [1e2, 1e3, 1e4] {
        let (u, _) = ev.scattered_field(xhat.map(|c| c * r))?;
        let (ep, es) = (C64::new(0.0, 1.0 * r).exp() / r, C64::new(0.0, 2.0 * r).exp() / r);
        let err: f64 = (0..3).map(|i| (u[i] - ap[i] * ep - as_[i] * es).norm_sqr()).sum::<f64>().sqrt();
        let size: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        println!("R = {r:.0e}: relative mismatch {:.2e}", err / size);
    }
    Ok(())
}
