//! Modal kernel self-test against adaptive quadrature on a fixed pair grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{make_builtin_curve, GeneratingCurve};
use crate::kernels::{modal_kernels, KernelOptions, ModeBlock};
use crate::oracle::{modal_reference, Family};

#[derive(Debug, Clone)]
pub struct SelftestOptions {
    pub geometries: Vec<String>,
    pub kappas: Vec<f64>,
    pub m_max: usize,
    pub pairs_per_geometry: usize,
    pub oracle_tol: f64,
    pub far_tol: f64,
    pub near_tol: f64,
    pub recurrence_tol: f64,
    pub kernel: KernelOptions,
    /// Extra pair at this relative separation, per geometry.
    pub forced_near: Option<f64>,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            geometries: ["sphere", "ellipsoid", "starfish", "droplet"].map(String::from).to_vec(),
            kappas: vec![1.0, 2.0],
            m_max: 40,
            pairs_per_geometry: 50,
            oracle_tol: 1e-14,
            far_tol: 1e-10,
            near_tol: 1e-8,
            recurrence_tol: 1e-13,
            kernel: KernelOptions::default(),
            forced_near: Some(1e-4),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct GeometryDeviation {
    pub geometry: String,
    pub far_pairs: usize,
    pub near_pairs: usize,
    /// Worst relative error of `g^1` and its four partials, far branch.
    pub far_max: f64,
    pub near_max: f64,
    /// Worst deviation of `(g_{m+1} + g_{m-1})/2` from the cos-weighted
    /// reference, relative to the block maximum.
    pub recurrence_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub m_max: usize,
    pub kappas: Vec<f64>,
    pub geometries: Vec<GeometryDeviation>,
    pub far_max: f64,
    pub near_max: f64,
    pub recurrence_max: f64,
    pub passed: bool,
}

/// `(t_target, t_source)` pairs: a spread grid over the parameter interval
/// plus close pairs at geometric offsets.
pub fn pair_grid(curve: &GeneratingCurve, count: usize) -> Vec<(f64, f64)> {
    let (a, b) = curve.interval();
    let len = b - a;
    let spread = count - count * 2 / 5;
    let close = count - spread;
    let side = ((spread as f64).sqrt().ceil() as usize).max(1);
    let mut out = Vec::with_capacity(count);
    'outer: for i in 0..side {
        for j in 0..side {
            if out.len() == spread {
                break 'outer;
            }
            let t = a + len * (i as f64 + 0.5) / side as f64;
            let s = a + len * (j as f64 + 0.27) / side as f64;
            out.push((t, s));
        }
    }
    for k in 0..close {
        let t = a + len * (0.1 + 0.8 * ((k as f64 * 0.618_033_988_75) % 1.0));
        let dt = len * 10f64.powi(-((k % 5) as i32) - 1);
        let s = if t + dt < b { t + dt } else { t - dt };
        out.push((t, s));
    }
    out
}

fn rel(a: &ModeBlock, b: &[num_complex::Complex64], m_max: usize) -> f64 {
    let scale = b[..=m_max].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = (0..=m_max).map(|m| (a.0[m] - b[m]).norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

struct PairResult {
    near: bool,
    err: f64,
    recurrence: f64,
}

fn check_pair(rt: f64, zt: f64, r: f64, z: f64, kappa: f64, opts: &SelftestOptions) -> Result<PairResult> {
    let mm = opts.m_max;
    let dr = rt - r;
    let dz = zt - z;
    let delta = dr.hypot(dz) / rt.max(r);
    let near = delta < opts.kernel.near_threshold;
    let v = modal_kernels(rt, zt, r, z, &[kappa], mm, true, &opts.kernel)?.remove(0);
    let tol = opts.oracle_tol;
    let g = modal_reference(rt, zt, r, z, kappa, mm + 2, Family::G, tol)?;
    let mut err = rel(&v.g, &g, mm);
    let cases = [(&v.drt, rt, -r), (&v.dzt, dz, 0.0), (&v.dr, r, -rt), (&v.dz, -dz, 0.0)];
    for (blk, alpha, beta) in cases {
        let d = modal_reference(rt, zt, r, z, kappa, mm, Family::Deriv { alpha, beta }, tol)?;
        err = err.max(rel(blk, &d, mm));
    }
    let c = modal_reference(rt, zt, r, z, kappa, mm, Family::CosWeighted, tol)?;
    let scale = g.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let recurrence = (0..=mm)
        .map(|m| {
            let lo = g[if m == 0 { 1 } else { m - 1 }];
            (0.5 * (g[m + 1] + lo) - c[m]).norm() / scale
        })
        .fold(0.0, f64::max);
    Ok(PairResult { near, err, recurrence })
}

/// Runs the oracle comparison over all geometries and wavenumbers.
pub fn run_selftest(opts: &SelftestOptions) -> Result<SelftestReport> {
    let mut geometries = Vec::new();
    for name in &opts.geometries {
        let curve = make_builtin_curve(name)?;
        let mut pairs = if opts.pairs_per_geometry > 0 { pair_grid(&curve, opts.pairs_per_geometry) } else { Vec::new() };
        if opts.forced_near.is_some() {
            // NaN marks a source stepped off the curve along the normal
            let (a, b) = curve.interval();
            pairs.push((a + 0.4 * (b - a), f64::NAN));
        }
        let jobs: Vec<(f64, f64, f64, f64, f64)> = pairs
            .iter()
            .flat_map(|&(t, s)| {
                let p = curve.point(t);
                let (r, z) = if s.is_nan() {
                    let jac = p.dr.hypot(p.dz);
                    let d = opts.forced_near.unwrap_or(1e-4) * p.r;
                    (p.r + d * p.dz / jac, p.z - d * p.dr / jac)
                } else {
                    let q = curve.point(s);
                    (q.r, q.z)
                };
                opts.kappas.iter().map(move |&k| (p.r, p.z, r, z, k)).collect::<Vec<_>>()
            })
            .filter(|&(rt, _, r, _, _)| rt > 0.0 && r > 0.0)
            .collect();
        let results: Vec<PairResult> =
            jobs.par_iter().map(|&(rt, zt, r, z, k)| check_pair(rt, zt, r, z, k, opts)).collect::<Result<_>>()?;
        let mut dev = GeometryDeviation { geometry: name.clone(), ..Default::default() };
        for res in &results {
            if res.near {
                dev.near_pairs += 1;
                dev.near_max = dev.near_max.max(res.err);
            } else {
                dev.far_pairs += 1;
                dev.far_max = dev.far_max.max(res.err);
            }
            dev.recurrence_max = dev.recurrence_max.max(res.recurrence);
        }
        geometries.push(dev);
    }
    let far_max = geometries.iter().map(|g| g.far_max).fold(0.0, f64::max);
    let near_max = geometries.iter().map(|g| g.near_max).fold(0.0, f64::max);
    let recurrence_max = geometries.iter().map(|g| g.recurrence_max).fold(0.0, f64::max);
    Ok(SelftestReport {
        m_max: opts.m_max,
        kappas: opts.kappas.clone(),
        passed: far_max <= opts.far_tol && near_max <= opts.near_tol && recurrence_max <= opts.recurrence_tol,
        geometries,
        far_max,
        near_max,
        recurrence_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_mode_zero_run() {
        let opts = SelftestOptions {
            geometries: vec!["sphere".into()],
            m_max: 0,
            pairs_per_geometry: 6,
            ..Default::default()
        };
        let rep = run_selftest(&opts).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.geometries[0].near_pairs > 0 && rep.geometries[0].far_pairs > 0);
    }

    #[test]
    fn grid_has_requested_size() {
        let c = make_builtin_curve("droplet").unwrap();
        let g = pair_grid(&c, 50);
        assert_eq!(g.len(), 50);
        let (a, b) = c.interval();
        assert!(g.iter().all(|&(t, s)| t > a && t < b && s > a && s < b && t != s));
    }
}
