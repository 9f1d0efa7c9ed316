//! Command implementations behind the `axielastic` binary.
//!
//! `solve` writes into the output directory:
//! - `report.json`: one [`ReportRow`] plus extinction and mode details
//! - `densities.csv`: modal densities per node
//! - `near_field.csv`, `far_field.csv`: when the grids are configured
//! - `error.csv`: pointwise extinction error (point sources only)
//!
//! `convergence` writes `convergence.csv`; `kernels-selftest` writes
//! `selftest.json` when given a directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::incident::IncidentField;
use crate::postprocess::{
    write_densities_csv, write_error_csv, write_far_field_csv, write_near_field_csv, ExtinctionReport, FieldEvaluator,
};
use crate::selftest::{run_selftest, SelftestOptions, SelftestReport};
use crate::solver::{solve_all, with_workers, ModeReport};

/// Table columns of one run. Timings in seconds.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ReportRow {
    pub geometry: String,
    pub kappa_p: f64,
    pub kappa_s: f64,
    /// Highest Fourier mode kept.
    pub n_f: usize,
    pub n_pts: usize,
    pub n_panels: usize,
    pub order: usize,
    pub corner_depth: u32,
    pub t_matgen: f64,
    pub t_solve: f64,
    pub t_syn: f64,
    /// Extinction error; point sources only.
    pub e_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub row: ReportRow,
    pub workers: usize,
    pub max_residual: f64,
    pub modes: Vec<ModeReport>,
    pub extinction: Option<ExtinctionReport>,
    /// Field points whose quadrature stopped at the sampling cap.
    pub unconverged_points: usize,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConvergenceRow {
    pub n_panels: usize,
    pub corner_depth: u32,
    pub n_pts: usize,
    pub n_f: usize,
    pub e_error: f64,
    pub seconds: f64,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create output dir {}: {e}", dir.display())))
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Runs one configured solve and writes its artifacts to `out_dir`.
pub fn cmd_solve(cfg: &RunConfig, out_dir: &Path) -> Result<SolveOutcome> {
    ensure_dir(out_dir)?;
    let mesh = cfg.mesh()?;
    let field = cfg.incident_field()?;
    let opts = cfg.solver_options();
    let (dens, report) = solve_all(&mesh, &field, &opts)?;
    let mut files = Vec::new();
    let mut unconverged = 0;

    let extinction = with_workers(opts.workers, || -> Result<Option<ExtinctionReport>> {
        let ev = FieldEvaluator::new(&mesh, &dens, cfg.eval_options())?;
        if cfg.output.densities {
            let p = out_dir.join("densities.csv");
            write_densities_csv(&p, &mesh, &dens)?;
            files.push(p);
        }
        if let Some(nf) = &cfg.output.near_field {
            let xs = nf.grid().points(nf.radius);
            let vals = ev.scattered_fields(&xs)?;
            unconverged += vals.unconverged;
            let p = out_dir.join("near_field.csv");
            write_near_field_csv(&p, &xs, &vals.values)?;
            files.push(p);
        }
        if let Some(ff) = &cfg.output.far_field {
            let pattern = ev.far_field(&ff.grid())?;
            let p = out_dir.join("far_field.csv");
            write_far_field_csv(&p, &pattern)?;
            files.push(p);
        }
        if matches!(field, IncidentField::PointSource { .. }) {
            let e = ev.extinction_error(&field, &cfg.output.probe)?;
            unconverged += e.unconverged;
            let p = out_dir.join("error.csv");
            write_error_csv(&p, &e)?;
            files.push(p);
            return Ok(Some(e));
        }
        Ok(None)
    })??;

    let d = &cfg.discretization;
    let row = ReportRow {
        geometry: cfg.geometry.name.clone(),
        kappa_p: cfg.kappa_p,
        kappa_s: cfg.kappa_s,
        n_f: dens.m_max,
        n_pts: report.n_pts,
        n_panels: mesh.n_panels(),
        order: d.order,
        corner_depth: d.corner_depth,
        t_matgen: report.t_matgen,
        t_solve: report.t_solve,
        t_syn: report.t_syn,
        e_error: extinction.as_ref().map(|e| e.e_error),
    };
    let report_path = out_dir.join("report.json");
    files.push(report_path.clone());
    let outcome = SolveOutcome {
        row,
        workers: report.workers,
        max_residual: report.max_residual(),
        modes: report.modes.clone(),
        extinction,
        unconverged_points: unconverged,
        files,
    };
    fs::write(&report_path, serde_json::to_string_pretty(&outcome).map_err(json_err)?)?;
    Ok(outcome)
}

/// Panel-count sweep of a point-source problem; writes `convergence.csv`.
pub fn cmd_convergence(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<ConvergenceRow>> {
    let field = cfg.incident_field()?;
    if !matches!(field, IncidentField::PointSource { .. }) {
        return Err(Error::Config("convergence sweeps need `incident.kind = \"point-source\"`".into()));
    }
    ensure_dir(out_dir)?;
    let opts = cfg.solver_options();
    let depths =
        if cfg.convergence.corner_depths.is_empty() { vec![cfg.discretization.corner_depth] } else { cfg.convergence.corner_depths.clone() };
    let mut rows = Vec::new();
    for &depth in &depths {
        for &n in &cfg.convergence.n_panels {
            let t = Instant::now();
            let mesh = cfg.mesh_with(n, depth)?;
            let (dens, report) = solve_all(&mesh, &field, &opts)?;
            let e = with_workers(opts.workers, || {
                FieldEvaluator::new(&mesh, &dens, cfg.eval_options())?.extinction_error(&field, &cfg.output.probe)
            })??;
            rows.push(ConvergenceRow {
                n_panels: mesh.n_panels(),
                corner_depth: depth,
                n_pts: report.n_pts,
                n_f: dens.m_max,
                e_error: e.e_error,
                seconds: t.elapsed().as_secs_f64(),
            });
        }
    }
    let path = out_dir.join("convergence.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    w.write_record(["n_panels", "corner_depth", "n_pts", "n_f", "e_error", "seconds"])
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    for r in &rows {
        w.write_record([
            r.n_panels.to_string(),
            r.corner_depth.to_string(),
            r.n_pts.to_string(),
            r.n_f.to_string(),
            format!("{:.17e}", r.e_error),
            format!("{:.6e}", r.seconds),
        ])
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(rows)
}

/// Oracle comparison of the modal kernels; `Ok` even on breach, check
/// `passed`.
pub fn cmd_kernels_selftest(opts: &SelftestOptions, workers: usize, out_dir: Option<&Path>) -> Result<SelftestReport> {
    let rep = with_workers(workers, || run_selftest(opts))??;
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        fs::write(dir.join("selftest.json"), serde_json::to_string_pretty(&rep).map_err(json_err)?)?;
    }
    Ok(rep)
}

/// One-line human summary of a report row.
pub fn format_row(r: &ReportRow) -> String {
    let e = r.e_error.map_or("-".to_string(), |e| format!("{e:.2e}"));
    format!(
        "{} kp={} ks={} N_f={} N_pts={} T_matgen={:.2}s T_solve={:.2}s T_syn={:.3}s E_error={}",
        r.geometry, r.kappa_p, r.kappa_s, r.n_f, r.n_pts, r.t_matgen, r.t_solve, r.t_syn, e
    )
}
