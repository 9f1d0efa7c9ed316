//! Mode-by-mode factorization, solves and density synthesis.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::dense::{backward_error, lu_factor, relative_residual, DenseMatrix, LuFactors};
use crate::error::{Error, Result};
use crate::geometry::PanelMesh;
use crate::incident::{boundary_data, BoundaryDataModes, IncidentField};
use crate::operators::{add_jumps, assemble_operators, AssemblyOptions, ModalSystem};

type C64 = Complex64;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub assembly: AssemblyOptions,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    /// Build negative modes from positive ones by meridian reflection.
    pub use_symmetry: bool,
    /// Keep each matrix until its backward error is measured.
    pub check_residual: bool,
    pub residual_tol: f64,
    pub mode_threshold: f64,
    pub m_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            assembly: AssemblyOptions::default(),
            workers: 0,
            use_symmetry: true,
            check_residual: true,
            residual_tol: 1e-12,
            mode_threshold: 1e-12,
            m_cap: 256,
        }
    }
}

/// Nodal densities per mode, indexed by `m + m_max`.
#[derive(Debug, Clone)]
pub struct SurfaceDensityModes {
    pub m_max: usize,
    pub kappa_p: f64,
    pub kappa_s: f64,
    pub sigma: Vec<Vec<C64>>,
    pub j1: Vec<Vec<C64>>,
    pub j2: Vec<Vec<C64>>,
}

impl SurfaceDensityModes {
    pub fn modes(&self) -> std::ops::RangeInclusive<i64> {
        -(self.m_max as i64)..=self.m_max as i64
    }

    pub fn n_pts(&self) -> usize {
        self.sigma.first().map_or(0, |v| v.len())
    }

    pub fn zeros(m_max: usize, n_pts: usize, kappa_p: f64, kappa_s: f64) -> SurfaceDensityModes {
        let z = vec![vec![C64::new(0.0, 0.0); n_pts]; 2 * m_max + 1];
        SurfaceDensityModes { m_max, kappa_p, kappa_s, sigma: z.clone(), j1: z.clone(), j2: z }
    }

    fn set(&mut self, m: i64, x: &[C64]) {
        let k = (m + self.m_max as i64) as usize;
        let n = self.n_pts();
        self.sigma[k].copy_from_slice(&x[..n]);
        self.j1[k].copy_from_slice(&x[n..2 * n]);
        self.j2[k].copy_from_slice(&x[2 * n..]);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeReport {
    pub m: i64,
    pub residual: f64,
    pub min_pivot: f64,
}

/// Timings in seconds and per-mode diagnostics.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveReport {
    pub t_matgen: f64,
    pub t_solve: f64,
    pub t_syn: f64,
    pub n_f: usize,
    pub n_pts: usize,
    pub workers: usize,
    pub modes: Vec<ModeReport>,
}

impl SolveReport {
    pub fn max_residual(&self) -> f64 {
        self.modes.iter().map(|m| m.residual).fold(0.0, f64::max)
    }
}

/// Runs `f` on a pool with `workers` threads (0: current pool).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn flip(x: &mut [C64], n: usize) {
    for v in &mut x[n..2 * n] {
        *v = -*v;
    }
}

/// Solves one assembled mode for a stack of right-hand sides, returning the
/// solutions and their relative residuals.
pub fn solve_mode(system: &ModalSystem, rhs: &[Vec<C64>]) -> Result<(Vec<Vec<C64>>, Vec<f64>)> {
    let lu = lu_factor(system.matrix.clone(), system.m)?;
    let xs: Vec<Vec<C64>> = rhs.iter().map(|b| lu.solve(b)).collect();
    let res = xs.iter().zip(rhs).map(|(x, b)| relative_residual(&system.matrix, x, b)).collect();
    Ok((xs, res))
}

/// LU factors of every mode `|m| <= m_max` for one geometry and pair of
/// wavenumbers; reusable across incident fields.
#[derive(Debug, Clone)]
pub struct FactoredOperator {
    pub m_max: usize,
    pub n_pts: usize,
    pub kappa_p: f64,
    pub kappa_s: f64,
    symmetric: bool,
    factors: Vec<(i64, LuFactors)>,
    pub report: SolveReport,
}

impl FactoredOperator {
    /// Assembles and factors all needed modes.
    pub fn new(mesh: &PanelMesh, kappa_p: f64, kappa_s: f64, m_max: usize, opts: &SolverOptions) -> Result<FactoredOperator> {
        with_workers(opts.workers, || Self::build(mesh, kappa_p, kappa_s, m_max, opts))?
    }

    fn build(mesh: &PanelMesh, kappa_p: f64, kappa_s: f64, m_max: usize, opts: &SolverOptions) -> Result<FactoredOperator> {
        let n = mesh.n_points();
        let mm = m_max as i64;
        let modes: Vec<i64> = if opts.use_symmetry { (0..=mm).collect() } else { (-mm..=mm).collect() };
        let t0 = Instant::now();
        let mut mats = assemble_operators(mesh, kappa_p, kappa_s, &modes, &opts.assembly)?;
        for a in mats.iter_mut() {
            add_jumps(a, n);
        }
        let t_matgen = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let factored: Vec<Result<(i64, LuFactors, f64)>> = modes
            .par_iter()
            .zip(mats.into_par_iter())
            .map(|(&m, a)| {
                let probe = opts.check_residual.then(|| a.clone());
                let lu = lu_factor(a, m).map_err(|e| Error::Mode { mode: m, source: Box::new(e) })?;
                let res = match probe {
                    Some(a) => residual_probe(&a, &lu),
                    None => 0.0,
                };
                Ok((m, lu, res))
            })
            .collect();
        let mut factors = Vec::with_capacity(modes.len());
        let mut reports = Vec::new();
        for f in factored {
            let (m, lu, res) = f?;
            if res > opts.residual_tol {
                return Err(Error::InaccurateSolve { mode: m, error: res, tol: opts.residual_tol });
            }
            reports.push(ModeReport { m, residual: res, min_pivot: lu.min_pivot() });
            factors.push((m, lu));
        }
        let report = SolveReport {
            t_matgen,
            t_solve: t1.elapsed().as_secs_f64(),
            t_syn: 0.0,
            n_f: m_max,
            n_pts: n,
            workers: rayon::current_num_threads(),
            modes: reports,
        };
        Ok(FactoredOperator { m_max, n_pts: n, kappa_p, kappa_s, symmetric: opts.use_symmetry, factors, report })
    }

    fn factor(&self, m: i64) -> Option<(&LuFactors, bool)> {
        let key = if self.symmetric { m.abs() } else { m };
        self.factors.iter().find(|(k, _)| *k == key).map(|(_, lu)| (lu, self.symmetric && m < 0))
    }

    /// Solves for one set of boundary data; modes beyond the factored range
    /// are an error, modes missing from the data are zero.
    pub fn solve(&self, data: &BoundaryDataModes) -> Result<SurfaceDensityModes> {
        if data.m_max > self.m_max {
            return Err(Error::InvalidArgument(format!(
                "data needs |m| <= {} but only {} modes are factored",
                data.m_max, self.m_max
            )));
        }
        let n = self.n_pts;
        let modes: Vec<i64> = data.modes().collect();
        let sols: Vec<(i64, Vec<C64>)> = modes
            .par_iter()
            .map(|&m| {
                let (lu, reflect) = self.factor(m).expect("factored mode");
                let mut b = data.rhs(m);
                if reflect {
                    flip(&mut b, n);
                }
                lu.solve_in_place(&mut b);
                if reflect {
                    flip(&mut b, n);
                }
                (m, b)
            })
            .collect();
        let mut out = SurfaceDensityModes::zeros(data.m_max, n, self.kappa_p, self.kappa_s);
        for (m, x) in sols {
            out.set(m, &x);
        }
        Ok(out)
    }
}

/// Backward error of the factored solve for a fixed pseudo-random
/// right-hand side.
fn residual_probe(a: &DenseMatrix, lu: &LuFactors) -> f64 {
    let n = a.dim();
    let b: Vec<C64> = (0..n)
        .map(|i| {
            let t = i as f64 * 0.618_033_988_749_895;
            C64::new((t * 7.0).sin(), (t * 3.0).cos())
        })
        .collect();
    let x = lu.solve(&b);
    backward_error(a, &x, &b)
}

/// Boundary data, factorization and solve for one incident field, with the
/// synthesized densities timed as `T_syn`.
pub fn solve_all(
    mesh: &PanelMesh,
    field: &IncidentField,
    opts: &SolverOptions,
) -> Result<(SurfaceDensityModes, SolveReport)> {
    with_workers(opts.workers, || {
        let data = boundary_data(field, mesh, opts.mode_threshold, opts.m_cap)?;
        let (kp, ks) = field.kappas();
        let op = FactoredOperator::build(mesh, kp, ks, data.m_max, opts)?;
        let t = Instant::now();
        let dens = op.solve(&data)?;
        let solve_extra = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let samples = (2 * dens.m_max + 1).next_power_of_two().max(4);
        let _ = synthesize(&dens, samples)?;
        let mut report = op.report.clone();
        report.t_solve += solve_extra;
        report.t_syn = t.elapsed().as_secs_f64();
        Ok((dens, report))
    })?
}

/// Physical-space densities on `n_theta` equispaced azimuths per node,
/// `[node][j]`.
#[derive(Debug, Clone)]
pub struct SynthesizedDensities {
    pub n_theta: usize,
    pub sigma: Vec<Vec<C64>>,
    pub j1: Vec<Vec<C64>>,
    pub j2: Vec<Vec<C64>>,
}

pub fn synthesize(d: &SurfaceDensityModes, n_theta: usize) -> Result<SynthesizedDensities> {
    if n_theta < 2 * d.m_max + 1 {
        return Err(Error::Undersampled { samples: n_theta, m_max: d.m_max });
    }
    let ifft = FftPlanner::new().plan_fft_inverse(n_theta);
    let run = |modes: &Vec<Vec<C64>>| -> Vec<Vec<C64>> {
        (0..d.n_pts())
            .into_par_iter()
            .map(|i| {
                let mut buf = vec![C64::new(0.0, 0.0); n_theta];
                for (k, m) in d.modes().enumerate() {
                    buf[m.rem_euclid(n_theta as i64) as usize] += modes[k][i];
                }
                ifft.process(&mut buf);
                buf
            })
            .collect()
    };
    Ok(SynthesizedDensities { n_theta, sigma: run(&d.sigma), j1: run(&d.j1), j2: run(&d.j2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthesis_round_trip() {
        let mut d = SurfaceDensityModes::zeros(2, 3, 1.0, 2.0);
        for k in 0..5 {
            for i in 0..3 {
                d.sigma[k][i] = C64::new(k as f64 + 0.5, i as f64 - 1.0);
            }
        }
        let s = synthesize(&d, 8).unwrap();
        let fft = FftPlanner::new().plan_fft_forward(8);
        let mut buf = s.sigma[1].clone();
        fft.process(&mut buf);
        for (k, m) in d.modes().enumerate() {
            let v = buf[m.rem_euclid(8) as usize] / 8.0;
            assert!((v - d.sigma[k][1]).norm() < 1e-13);
        }
        assert!(synthesize(&d, 4).is_err());
    }

    #[test]
    fn single_mode_is_constant_in_theta() {
        let mut d = SurfaceDensityModes::zeros(1, 2, 1.0, 2.0);
        d.j2[1][0] = C64::new(0.3, -0.2);
        let s = synthesize(&d, 4).unwrap();
        assert!(s.j2[0].iter().all(|z| (z - C64::new(0.3, -0.2)).norm() < 1e-15));
    }
}
