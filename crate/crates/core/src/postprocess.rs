//! Field evaluation from solved densities: scattered field, far-field
//! amplitudes and the extinction error.
//!
//! The scattered field is `grad S_p sigma + curl S_s J`, evaluated by the
//! panel rule in the meridian times an azimuthal trapezoid rule whose size is
//! doubled until the value settles. Panels close to a target are instead
//! integrated by nested adaptive quadrature of the interpolated densities.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{GeneratingCurve, PanelMesh};
use crate::incident::{navier_green_apply, CVec3, IncidentField};
use crate::oracle::integrate;
use crate::solver::{synthesize, SurfaceDensityModes};

type C64 = Complex64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Relative change between azimuthal refinements accepted as converged.
    pub tol: f64,
    /// Largest azimuthal sample count per node circle.
    pub max_theta: usize,
    /// Panels closer to the target than this multiple of their arclength
    /// are integrated adaptively.
    pub near_factor: f64,
    pub adaptive_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { tol: 1e-13, max_theta: 2048, near_factor: 0.5, adaptive_tol: 1e-11 }
    }
}

/// Values at a batch of points plus the count that hit `max_theta` before
/// settling.
#[derive(Debug, Clone)]
pub struct FieldValues {
    pub values: Vec<CVec3>,
    pub unconverged: usize,
}

/// Densities synthesized on one azimuthal grid, as Cartesian data per node
/// and angle.
struct Level {
    n_theta: usize,
    angles: Vec<(f64, f64)>,
    sigma: Vec<Vec<C64>>,
    jvec: Vec<Vec<CVec3>>,
}

/// Closed meridian polygon used for inside tests and distances.
struct Meridian {
    pts: Vec<[f64; 2]>,
}

impl Meridian {
    fn new(curve: &GeneratingCurve) -> Meridian {
        let (a, b) = curve.interval();
        let n = 4096;
        let mut pts: Vec<[f64; 2]> = (0..=n)
            .map(|k| {
                let p = curve.point(a + (b - a) * k as f64 / n as f64);
                [p.r.max(0.0), p.z]
            })
            .collect();
        // close along the axis
        let (first, last) = (pts[0], pts[n]);
        pts.push([0.0, last[1]]);
        pts.push([0.0, first[1]]);
        pts.push(first);
        Meridian { pts }
    }

    fn contains(&self, r: f64, z: f64) -> bool {
        let mut inside = false;
        for w in self.pts.windows(2) {
            let ([r1, z1], [r2, z2]) = (w[0], w[1]);
            if (z1 > z) != (z2 > z) {
                let rc = r1 + (z - z1) / (z2 - z1) * (r2 - r1);
                if r < rc {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn distance(&self, r: f64, z: f64) -> f64 {
        let n = self.pts.len() - 3;
        let mut best = f64::INFINITY;
        for w in self.pts[..=n].windows(2) {
            let ([r1, z1], [r2, z2]) = (w[0], w[1]);
            let (dr, dz) = (r2 - r1, z2 - z1);
            let l2 = dr * dr + dz * dz;
            let s = if l2 > 0.0 { (((r - r1) * dr + (z - z1) * dz) / l2).clamp(0.0, 1.0) } else { 0.0 };
            best = best.min((r - r1 - s * dr).hypot(z - z1 - s * dz));
        }
        best
    }

    fn max_radius(&self) -> f64 {
        self.pts.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max)
    }
}

/// Evaluator bound to one mesh and one set of solved densities.
pub struct FieldEvaluator<'a> {
    mesh: &'a PanelMesh,
    dens: &'a SurfaceDensityModes,
    opts: EvalOptions,
    meridian: Meridian,
    levels: Vec<OnceLock<Level>>,
    base_theta: usize,
    panel_len: Vec<f64>,
}

fn cross(a: [f64; 3], b: CVec3) -> CVec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3(v: &CVec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `(i k R - 1) e^{i k R} / (4 pi R^3)`, the factor of `x - y` in
/// `grad_x G`.
fn grad_factor(kappa: f64, r: f64) -> C64 {
    C64::new(-1.0, kappa * r) * C64::new(0.0, kappa * r).exp() / (4.0 * PI * r * r * r)
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(mesh: &'a PanelMesh, dens: &'a SurfaceDensityModes, opts: EvalOptions) -> Result<Self> {
        if dens.n_pts() != mesh.n_points() {
            return Err(Error::InvalidArgument(format!(
                "densities have {} nodes, mesh has {}",
                dens.n_pts(),
                mesh.n_points()
            )));
        }
        let base_theta = (2 * (2 * dens.m_max + 1)).next_power_of_two().max(16);
        let mut n_levels = 1;
        while base_theta << (n_levels - 1) < opts.max_theta {
            n_levels += 1;
        }
        let panel_len = (0..mesh.n_panels())
            .map(|k| mesh.panel_nodes(k).map(|j| mesh.node(j).jac * mesh.param_weight(j)).sum())
            .collect();
        Ok(FieldEvaluator {
            mesh,
            dens,
            meridian: Meridian::new(mesh.curve()),
            opts,
            levels: (0..n_levels).map(|_| OnceLock::new()).collect(),
            base_theta,
            panel_len,
        })
    }

    fn level(&self, k: usize) -> &Level {
        self.levels[k].get_or_init(|| {
            let n_theta = self.base_theta << k;
            let syn = synthesize(self.dens, n_theta).expect("oversampled grid");
            let angles: Vec<(f64, f64)> =
                (0..n_theta).map(|j| (2.0 * PI * j as f64 / n_theta as f64).sin_cos()).collect();
            let jvec = (0..self.mesh.n_points())
                .map(|i| {
                    let f = self.mesh.node(i);
                    (0..n_theta)
                        .map(|j| {
                            let (s, c) = angles[j];
                            let (a, b) = (syn.j1[i][j], syn.j2[i][j]);
                            [a * (f.tangent[0] * c) - b * s, a * (f.tangent[0] * s) + b * c, a * f.tangent[1]]
                        })
                        .collect()
                })
                .collect();
            Level { n_theta, angles, sigma: syn.sigma, jvec }
        })
    }

    /// Errors unless `x` lies strictly outside the body.
    pub fn check_exterior(&self, x: [f64; 3]) -> Result<()> {
        let r = x[0].hypot(x[1]);
        if self.meridian.contains(r, x[2]) || self.meridian.distance(r, x[2]) < 1e-12 {
            return Err(Error::NotExterior(x));
        }
        Ok(())
    }

    fn near_panels(&self, x: [f64; 3]) -> Vec<bool> {
        let r = x[0].hypot(x[1]);
        (0..self.mesh.n_panels())
            .map(|k| {
                self.mesh.panel_nodes(k).any(|j| {
                    let f = self.mesh.node(j);
                    (f.r - r).hypot(f.z - x[2]) < self.opts.near_factor * self.panel_len[k]
                })
            })
            .collect()
    }

    fn direct(&self, x: [f64; 3], level: &Level, skip: &[bool]) -> CVec3 {
        let (kp, ks) = (self.dens.kappa_p, self.dens.kappa_s);
        let dth = 2.0 * PI / level.n_theta as f64;
        let mut acc = [ZERO; 3];
        for k in 0..self.mesh.n_panels() {
            if skip[k] {
                continue;
            }
            for i in self.mesh.panel_nodes(k) {
                let f = self.mesh.node(i);
                let w = self.mesh.measure(i) * dth;
                for (j, &(s, c)) in level.angles.iter().enumerate() {
                    let d = [x[0] - f.r * c, x[1] - f.r * s, x[2] - f.z];
                    let rr = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                    let fp = grad_factor(kp, rr) * level.sigma[i][j] * w;
                    let cj = cross(d, level.jvec[i][j]);
                    let fs = grad_factor(ks, rr) * w;
                    for a in 0..3 {
                        acc[a] += fp * d[a] + fs * cj[a];
                    }
                }
            }
        }
        acc
    }

    /// Nested adaptive integral over panel `k`.
    fn adaptive_panel(&self, x: [f64; 3], k: usize) -> Result<CVec3> {
        let mesh = self.mesh;
        let lt = mesh.transform();
        let p = mesh.order();
        let pan = mesh.panels()[k];
        let half = 0.5 * pan.len();
        let base = k * p;
        let (kp, ks) = (self.dens.kappa_p, self.dens.kappa_s);
        let modes: Vec<i64> = self.dens.modes().collect();
        let th0 = x[1].atan2(x[0]);
        let tol = self.opts.adaptive_tol;
        let mut lrow = vec![0.0; p];
        let mut err = None;
        let outer = integrate(
            |u, out: &mut [C64]| {
                let y = mesh.curve().frame_unchecked(pan.param(u));
                lt.interp_row(u, &mut lrow);
                let interp = |v: &Vec<Vec<C64>>| -> Vec<C64> {
                    v.iter().map(|col| (0..p).map(|a| col[base + a] * lrow[a]).sum()).collect()
                };
                let (sg, a1, a2) = (interp(&self.dens.sigma), interp(&self.dens.j1), interp(&self.dens.j2));
                let w = half * y.r * y.jac;
                let inner = integrate(
                    |th, o: &mut [C64]| {
                        let (mut s, mut j1, mut j2) = (ZERO, ZERO, ZERO);
                        for (q, &m) in modes.iter().enumerate() {
                            let e = C64::new(0.0, m as f64 * th).exp();
                            s += sg[q] * e;
                            j1 += a1[q] * e;
                            j2 += a2[q] * e;
                        }
                        let (sn, cs) = th.sin_cos();
                        let jv = [j1 * (y.tangent[0] * cs) - j2 * sn, j1 * (y.tangent[0] * sn) + j2 * cs, j1 * y.tangent[1]];
                        let d = [x[0] - y.r * cs, x[1] - y.r * sn, x[2] - y.z];
                        let rr = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                        let fp = grad_factor(kp, rr) * s;
                        let fs = grad_factor(ks, rr);
                        let cj = cross(d, jv);
                        for a in 0..3 {
                            o[a] = fp * d[a] + fs * cj[a];
                        }
                    },
                    &[th0, th0 + 2.0 * PI],
                    3,
                    tol,
                    1e-300,
                    40,
                );
                match inner {
                    Ok(v) => {
                        for a in 0..3 {
                            out[a] = v.value[a] * w;
                        }
                    }
                    Err(e) => {
                        err.get_or_insert(e);
                        out.fill(ZERO);
                    }
                }
            },
            &[-1.0, 1.0],
            3,
            tol,
            1e-300,
            40,
        );
        if let Some(e) = err {
            return Err(e);
        }
        let v = outer?.value;
        Ok([v[0], v[1], v[2]])
    }

    /// Scattered displacement at one exterior point.
    pub fn scattered_field(&self, x: [f64; 3]) -> Result<(CVec3, bool)> {
        self.check_exterior(x)?;
        let skip = self.near_panels(x);
        let mut near = [ZERO; 3];
        for (k, &s) in skip.iter().enumerate() {
            if s {
                let v = self.adaptive_panel(x, k)?;
                for a in 0..3 {
                    near[a] += v[a];
                }
            }
        }
        let mut prev = self.direct(x, self.level(0), &skip);
        for k in 1..self.levels.len() {
            let cur = self.direct(x, self.level(k), &skip);
            let diff = [0, 1, 2].map(|a| cur[a] - prev[a]);
            let total = [0, 1, 2].map(|a| cur[a] + near[a]);
            let settled = norm3(&diff) <= self.opts.tol * norm3(&total).max(1e-300);
            prev = cur;
            if settled {
                return Ok((total, true));
            }
        }
        Ok(([0, 1, 2].map(|a| prev[a] + near[a]), false))
    }

    /// Scattered field at many points, in parallel.
    pub fn scattered_fields(&self, xs: &[[f64; 3]]) -> Result<FieldValues> {
        let res: Vec<(CVec3, bool)> = xs.par_iter().map(|&x| self.scattered_field(x)).collect::<Result<_>>()?;
        Ok(FieldValues {
            unconverged: res.iter().filter(|r| !r.1).count(),
            values: res.into_iter().map(|r| r.0).collect(),
        })
    }

    fn far_direct(&self, xhat: [f64; 3], level: &Level) -> (CVec3, CVec3) {
        let (kp, ks) = (self.dens.kappa_p, self.dens.kappa_s);
        let dth = 2.0 * PI / level.n_theta as f64;
        let (mut sp, mut ss) = (ZERO, [ZERO; 3]);
        for i in 0..self.mesh.n_points() {
            let f = self.mesh.node(i);
            let w = self.mesh.measure(i) * dth;
            for (j, &(s, c)) in level.angles.iter().enumerate() {
                let xy = xhat[0] * f.r * c + xhat[1] * f.r * s + xhat[2] * f.z;
                sp += level.sigma[i][j] * C64::new(0.0, -kp * xy).exp() * w;
                let es = C64::new(0.0, -ks * xy).exp() * w;
                for a in 0..3 {
                    ss[a] += level.jvec[i][j][a] * es;
                }
            }
        }
        let cp = C64::new(0.0, kp / (4.0 * PI)) * sp;
        let cs = C64::new(0.0, ks / (4.0 * PI));
        let xs = cross(xhat, ss);
        ([0, 1, 2].map(|a| cp * xhat[a]), xs.map(|z| cs * z))
    }

    /// P and S far-field amplitudes in direction `xhat` (normalized here).
    pub fn far_amplitudes(&self, xhat: [f64; 3]) -> Result<(CVec3, CVec3)> {
        let n = (xhat[0] * xhat[0] + xhat[1] * xhat[1] + xhat[2] * xhat[2]).sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidArgument("zero far-field direction".into()));
        }
        let xhat = xhat.map(|v| v / n);
        let mut prev = self.far_direct(xhat, self.level(0));
        for k in 1..self.levels.len() {
            let cur = self.far_direct(xhat, self.level(k));
            let d = norm3(&[0, 1, 2].map(|a| cur.0[a] - prev.0[a])) + norm3(&[0, 1, 2].map(|a| cur.1[a] - prev.1[a]));
            let s = norm3(&cur.0) + norm3(&cur.1);
            prev = cur;
            if d <= self.opts.tol * s.max(1e-300) {
                break;
            }
        }
        Ok(prev)
    }

    /// Far-field pattern on an azimuth by polar grid.
    pub fn far_field(&self, grid: &SphericalGrid) -> Result<FarFieldPattern> {
        let pts = grid.angles();
        let amps: Vec<(CVec3, CVec3)> =
            pts.par_iter().map(|&(th, ph)| self.far_amplitudes(unit(th, ph))).collect::<Result<_>>()?;
        Ok(FarFieldPattern {
            points: pts
                .into_iter()
                .zip(amps)
                .map(|((theta, phi), (p, s))| FarFieldPoint { theta, phi, a_p: p, a_s: s })
                .collect(),
        })
    }

    /// Extinction error of a point-source solve on an equal-area probe set.
    pub fn extinction_error(&self, field: &IncidentField, probes: &ProbeSphere) -> Result<ExtinctionReport> {
        let IncidentField::PointSource { y0, p, mu, kappa_p, kappa_s } = *field else {
            return Err(Error::InvalidArgument("extinction error needs a point-source field".into()));
        };
        let ry = y0[0].hypot(y0[1]);
        if !self.meridian.contains(ry, y0[2]) {
            return Err(Error::InvalidArgument(format!("source {y0:?} is not inside the body")));
        }
        if probes.radius <= self.meridian.max_radius() {
            return Err(Error::InvalidArgument(format!(
                "probe sphere of radius {} intersects the body (extent {})",
                probes.radius,
                self.meridian.max_radius()
            )));
        }
        let xs = probes.points();
        let vals = self.scattered_fields(&xs)?;
        let w = probes.weight();
        let mut pointwise = Vec::with_capacity(xs.len());
        let mut sum = 0.0;
        for (x, u) in xs.iter().zip(&vals.values) {
            let exact = navier_green_apply(*x, y0, p, mu, kappa_p, kappa_s)?;
            let e = norm3(&[0, 1, 2].map(|a| u[a] - exact[a]));
            sum += w * e * e;
            pointwise.push(ProbeError { x: *x, error: e });
        }
        Ok(ExtinctionReport {
            e_error: sum.sqrt(),
            probe_count: xs.len(),
            probe_radius: probes.radius,
            unconverged: vals.unconverged,
            pointwise,
        })
    }
}

/// `(cos theta sin phi, sin theta sin phi, cos phi)`.
pub fn unit(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [ct * sp, st * sp, cp]
}

/// Azimuth `theta` by polar `phi` grid; `theta_k = 2 pi k / n_theta`,
/// `phi_j = phi_max (j + 1/2) / n_phi`.
#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize, PartialEq)]
pub struct SphericalGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    #[serde(default = "default_phi_max")]
    pub phi_max: f64,
}

fn default_phi_max() -> f64 {
    PI
}

impl SphericalGrid {
    pub fn full(n_theta: usize, n_phi: usize) -> SphericalGrid {
        SphericalGrid { n_theta, n_phi, phi_max: PI }
    }

    pub fn upper_hemisphere(n_theta: usize, n_phi: usize) -> SphericalGrid {
        SphericalGrid { n_theta, n_phi, phi_max: 0.5 * PI }
    }

    /// `(theta, phi)` pairs, theta-major.
    pub fn angles(&self) -> Vec<(f64, f64)> {
        let mut v = Vec::with_capacity(self.n_theta * self.n_phi);
        for k in 0..self.n_theta {
            for j in 0..self.n_phi {
                v.push((
                    2.0 * PI * k as f64 / self.n_theta as f64,
                    self.phi_max * (j as f64 + 0.5) / self.n_phi as f64,
                ));
            }
        }
        v
    }

    pub fn points(&self, radius: f64) -> Vec<[f64; 3]> {
        self.angles().into_iter().map(|(t, p)| unit(t, p).map(|c| c * radius)).collect()
    }
}

/// Quasi-uniform equal-area probe set: point `k` of `count` sits at
/// `z = 1 - (2k + 1) / count` on a golden-angle spiral, each carrying the
/// weight `4 pi R^2 / count`.
#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize, PartialEq)]
pub struct ProbeSphere {
    pub radius: f64,
    pub count: usize,
}

impl Default for ProbeSphere {
    fn default() -> Self {
        ProbeSphere { radius: 4.0, count: 400 }
    }
}

impl ProbeSphere {
    pub fn points(&self) -> Vec<[f64; 3]> {
        let golden = PI * (3.0 - 5f64.sqrt());
        (0..self.count)
            .map(|k| {
                let z = 1.0 - (2 * k + 1) as f64 / self.count as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let (s, c) = (golden * k as f64).sin_cos();
                [self.radius * rho * c, self.radius * rho * s, self.radius * z]
            })
            .collect()
    }

    pub fn weight(&self) -> f64 {
        4.0 * PI * self.radius * self.radius / self.count as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeError {
    pub x: [f64; 3],
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtinctionReport {
    pub e_error: f64,
    pub probe_count: usize,
    pub probe_radius: f64,
    pub unconverged: usize,
    #[serde(skip)]
    pub pointwise: Vec<ProbeError>,
}

#[derive(Debug, Clone)]
pub struct FarFieldPoint {
    pub theta: f64,
    pub phi: f64,
    pub a_p: CVec3,
    pub a_s: CVec3,
}

/// P and S amplitudes: `u_sc(R xhat) ~ e^{i kp R}/R A_p + e^{i ks R}/R A_s`.
#[derive(Debug, Clone)]
pub struct FarFieldPattern {
    pub points: Vec<FarFieldPoint>,
}

fn sci(v: f64) -> String {
    format!("{v:.17e}")
}

/// `x,y,z,re_u1,re_u2,re_u3,im_u1,im_u2,im_u3`.
pub fn write_near_field_csv(path: &Path, xs: &[[f64; 3]], us: &[CVec3]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["x", "y", "z", "re_u1", "re_u2", "re_u3", "im_u1", "im_u2", "im_u3"]).map_err(csv_err)?;
    for (x, u) in xs.iter().zip(us) {
        let mut rec: Vec<String> = x.iter().map(|&v| sci(v)).collect();
        rec.extend(u.iter().map(|z| sci(z.re)));
        rec.extend(u.iter().map(|z| sci(z.im)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `theta,phi`, then real and imaginary parts of the P amplitude, then of
/// the S amplitude.
pub fn write_far_field_csv(path: &Path, pattern: &FarFieldPattern) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut head = vec!["theta".to_string(), "phi".to_string()];
    for wave in ["p", "s"] {
        for part in ["re", "im"] {
            for c in 1..=3 {
                head.push(format!("{part}_{wave}{c}"));
            }
        }
    }
    w.write_record(&head).map_err(csv_err)?;
    for pt in &pattern.points {
        let mut rec = vec![sci(pt.theta), sci(pt.phi)];
        for a in [&pt.a_p, &pt.a_s] {
            rec.extend(a.iter().map(|z| sci(z.re)));
            rec.extend(a.iter().map(|z| sci(z.im)));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `x,y,z,error` per probe.
pub fn write_error_csv(path: &Path, report: &ExtinctionReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["x", "y", "z", "error"]).map_err(csv_err)?;
    for p in &report.pointwise {
        w.write_record([sci(p.x[0]), sci(p.x[1]), sci(p.x[2]), sci(p.error)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `m,node,t,r,z` then real and imaginary parts of `sigma`, `J1`, `J2`,
/// mode-major.
pub fn write_densities_csv(path: &Path, mesh: &PanelMesh, d: &SurfaceDensityModes) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["m", "node", "t", "r", "z", "re_sigma", "im_sigma", "re_j1", "im_j1", "re_j2", "im_j2"])
        .map_err(csv_err)?;
    for (k, m) in d.modes().enumerate() {
        for i in 0..d.n_pts() {
            let f = mesh.node(i);
            let mut rec = vec![m.to_string(), i.to_string(), sci(f.t), sci(f.r), sci(f.z)];
            for z in [d.sigma[k][i], d.j1[k][i], d.j2[k][i]] {
                rec.push(sci(z.re));
                rec.push(sci(z.im));
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, make_builtin_curve};

    #[test]
    fn probes_are_on_the_sphere() {
        let ps = ProbeSphere { radius: 4.0, count: 50 };
        for x in ps.points() {
            assert!(((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() - 4.0).abs() < 1e-13);
        }
        assert!((ps.weight() * 50.0 - 4.0 * PI * 16.0).abs() < 1e-12);
    }

    #[test]
    fn inside_test_on_sphere() {
        let m = Meridian::new(&make_builtin_curve("sphere").unwrap());
        assert!(m.contains(0.5, 0.3));
        assert!(!m.contains(2.5, 0.0));
        assert!(!m.contains(0.1, 2.1));
        assert!((m.distance(3.0, 0.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_densities_give_norm_of_exact_field() {
        let mesh = build_mesh(&make_builtin_curve("sphere").unwrap(), 4, 8, 0).unwrap();
        let d = SurfaceDensityModes::zeros(2, mesh.n_points(), 1.0, 2.0);
        let ev = FieldEvaluator::new(&mesh, &d, EvalOptions::default()).unwrap();
        let field = IncidentField::default_point_source(1.0, 2.0);
        let probes = ProbeSphere { radius: 4.0, count: 30 };
        let rep = ev.extinction_error(&field, &probes).unwrap();
        let IncidentField::PointSource { y0, p, mu, .. } = field else { unreachable!() };
        let norm: f64 = probes
            .points()
            .iter()
            .map(|&x| norm3(&navier_green_apply(x, y0, p, mu, 1.0, 2.0).unwrap()).powi(2) * probes.weight())
            .sum::<f64>()
            .sqrt();
        assert!((rep.e_error - norm).abs() < 1e-14 * norm);
        assert!(ev.scattered_field([0.0, 0.0, 0.0]).is_err());
    }
}
