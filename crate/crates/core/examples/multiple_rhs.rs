//! One factorization, several incident plane waves.
//!
//! cargo run --release --example multiple_rhs

use std::time::Instant;

use axielastic::geometry::{build_mesh, make_builtin_curve};
use axielastic::incident::{boundary_data, unit_from_angles, IncidentField};
use axielastic::postprocess::{EvalOptions, FieldEvaluator};
use axielastic::solver::{FactoredOperator, SolverOptions};

fn main() -> axielastic::Result<()> {
    let mesh = build_mesh(&make_builtin_curve("ellipsoid")?, 8, 16, 0)?;
    let opts = SolverOptions::default();
    let (kp, ks) = (1.0, 2.0);
    let fields: Vec<IncidentField> = [0.0, 0.5, 1.0, 1.5]
        .iter()
        .map(|&phi| IncidentField::Plane { d: unit_from_angles(0.3, phi), p: unit_from_angles(1.2, 0.9), kappa_p: kp, kappa_s: ks })
        .collect();
    let data: Vec<_> = fields.iter().map(|f| boundary_data(f, &mesh, opts.mode_threshold, opts.m_cap)).collect::<Result<_, _>>()?;
    let m_max = data.iter().map(|d| d.m_max).max().unwrap_or(0);

    let t = Instant::now();
    let op = FactoredOperator::new(&mesh, kp, ks, m_max, &opts)?;
    println!("factored |m| <= {m_max} in {:.2}s", t.elapsed().as_secs_f64());
    for (k, d) in data.iter().enumerate() {
        let t = Instant::now();
        let dens = op.solve(d)?;
        let dt = t.elapsed().as_secs_f64();
        let (ap, as_) = FieldEvaluator::new(&mesh, &dens, EvalOptions::default())?.far_amplitudes([0.0, 0.0, 1.0])?;
        let n = |a: [num_complex::Complex64; 3]| a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        println!("field {k}: solve {:.1}ms, |A_p(z)| {:.3e}, |A_s(z)| {:.3e}", 1e3 * dt, n(ap), n(as_));
    }
    Ok(())
}
