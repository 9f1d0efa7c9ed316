//! Incident fields and their boundary data in azimuthal modes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PanelMesh;

type C64 = Complex64;
pub type CVec3 = [C64; 3];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Default angles of the plane-wave experiments.
pub const PLANE_WAVE_ANGLES: [f64; 4] = [PI / 4.0, PI / 8.0, PI / 5.0, PI / 10.0];

/// Unit vector `(cos(theta) sin(phi), sin(theta) sin(phi), cos(phi))`.
pub fn unit_from_angles(theta: f64, phi: f64) -> [f64; 3] {
    [theta.cos() * phi.sin(), theta.sin() * phi.sin(), phi.cos()]
}

/// `(kappa_p, kappa_s)` for unit density from `omega` and Lame constants.
pub fn wavenumbers(omega: f64, lambda: f64, mu: f64) -> Result<(f64, f64)> {
    if !(omega > 0.0 && mu > 0.0 && lambda + 2.0 * mu > 0.0) {
        return Err(Error::InvalidArgument(format!("material (omega {omega}, lambda {lambda}, mu {mu})")));
    }
    Ok((omega / (lambda + 2.0 * mu).sqrt(), omega / mu.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IncidentField {
    /// `(d.p) d e^{i kp d.x} + ((d x p) x d) e^{i ks d.x}`.
    Plane { d: [f64; 3], p: [f64; 3], kappa_p: f64, kappa_s: f64 },
    /// `-Phi(x, y0) p` with `Phi` the Navier fundamental solution.
    PointSource { y0: [f64; 3], p: [f64; 3], mu: f64, kappa_p: f64, kappa_s: f64 },
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

impl IncidentField {
    /// Plane wave with the default experiment angles.
    pub fn default_plane(kappa_p: f64, kappa_s: f64) -> IncidentField {
        let [t1, p1, t2, p2] = PLANE_WAVE_ANGLES;
        IncidentField::Plane { d: unit_from_angles(t1, p1), p: unit_from_angles(t2, p2), kappa_p, kappa_s }
    }

    /// Point source of the extinction experiments.
    pub fn default_point_source(kappa_p: f64, kappa_s: f64) -> IncidentField {
        IncidentField::PointSource { y0: [0.1, 0.1, 0.1], p: [1.0, 0.0, 0.0], mu: 1.0, kappa_p, kappa_s }
    }

    pub fn kappas(&self) -> (f64, f64) {
        match *self {
            IncidentField::Plane { kappa_p, kappa_s, .. } | IncidentField::PointSource { kappa_p, kappa_s, .. } => {
                (kappa_p, kappa_s)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (kp, ks) = self.kappas();
        if !(kp > 0.0 && ks > 0.0 && kp.is_finite() && ks.is_finite()) {
            return Err(Error::InvalidArgument(format!("wavenumbers must be positive, got ({kp}, {ks})")));
        }
        match *self {
            IncidentField::Plane { d, p, .. } => {
                for (name, v) in [("d", d), ("p", p)] {
                    if (dot(v, v).sqrt() - 1.0).abs() > 1e-12 {
                        return Err(Error::InvalidArgument(format!("{name} must be a unit vector")));
                    }
                }
            }
            IncidentField::PointSource { mu, p, .. } => {
                if !(mu > 0.0) {
                    return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
                }
                if dot(p, p) == 0.0 {
                    return Err(Error::InvalidArgument("zero polarization".into()));
                }
            }
        }
        Ok(())
    }
}

/// `G = e^{i k r} / (4 pi r)` with its gradient and Hessian in `x - y`.
pub fn helmholtz_green(kappa: f64, diff: [f64; 3]) -> (C64, [C64; 3], [[C64; 3]; 3]) {
    let r = dot(diff, diff).sqrt();
    let g = C64::new(0.0, kappa * r).exp() / (4.0 * PI * r);
    let a = C64::new(-1.0 / r, kappa);
    let g1 = a * g;
    let g2 = (a * a + 1.0 / (r * r)) * g;
    let u = [diff[0] / r, diff[1] / r, diff[2] / r];
    let grad = [g1 * u[0], g1 * u[1], g1 * u[2]];
    let mut hess = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            hess[i][j] = g2 * (u[i] * u[j]) + g1 * ((delta - u[i] * u[j]) / r);
        }
    }
    (g, grad, hess)
}

/// `Phi(x, y0) p` for the Navier fundamental solution.
pub fn navier_green_apply(x: [f64; 3], y0: [f64; 3], p: [f64; 3], mu: f64, kappa_p: f64, kappa_s: f64) -> Result<CVec3> {
    let diff = [x[0] - y0[0], x[1] - y0[1], x[2] - y0[2]];
    if dot(diff, diff) == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let (gs, _, hs) = helmholtz_green(kappa_s, diff);
    let (_, _, hp) = helmholtz_green(kappa_p, diff);
    let mut out = [ZERO; 3];
    for i in 0..3 {
        let mut acc = gs * p[i];
        for j in 0..3 {
            acc += (hs[i][j] - hp[i][j]) * (p[j] / (kappa_s * kappa_s));
        }
        out[i] = acc / mu;
    }
    Ok(out)
}

pub fn eval_incident(field: &IncidentField, x: [f64; 3]) -> Result<CVec3> {
    match *field {
        IncidentField::Plane { d, p, kappa_p, kappa_s } => {
            let dp = dot(d, p);
            let s = cross(cross(d, p), d);
            let ep = C64::new(0.0, kappa_p * dot(d, x)).exp();
            let es = C64::new(0.0, kappa_s * dot(d, x)).exp();
            Ok([0, 1, 2].map(|i| ep * (dp * d[i]) + es * s[i]))
        }
        IncidentField::PointSource { y0, p, mu, kappa_p, kappa_s } => {
            let v = navier_green_apply(x, y0, p, mu, kappa_p, kappa_s)?;
            Ok(v.map(|z| -z))
        }
    }
}

/// Boundary data `f = -n . u_inc` and `g = -n x u_inc` in azimuthal modes.
///
/// `f[m + M][i]` is mode `m` at node `i`; `gt`, `gth` hold the `t` and
/// `e_theta` components of `g`.
#[derive(Debug, Clone)]
pub struct BoundaryDataModes {
    pub m_max: usize,
    pub f: Vec<Vec<C64>>,
    pub gt: Vec<Vec<C64>>,
    pub gth: Vec<Vec<C64>>,
    pub threshold: f64,
    /// Azimuthal samples per node circle used to resolve the data.
    pub samples: usize,
}

impl BoundaryDataModes {
    pub fn modes(&self) -> std::ops::RangeInclusive<i64> {
        -(self.m_max as i64)..=self.m_max as i64
    }

    /// Right-hand side of mode `m` ordered `(f, g.t, g.e_theta)`.
    pub fn rhs(&self, m: i64) -> Vec<C64> {
        let k = (m + self.m_max as i64) as usize;
        let mut v = Vec::with_capacity(3 * self.f[k].len());
        v.extend_from_slice(&self.f[k]);
        v.extend_from_slice(&self.gt[k]);
        v.extend_from_slice(&self.gth[k]);
        v
    }

    /// Largest modulus over nodes and components of mode `m`.
    pub fn mode_amplitude(&self, m: i64) -> f64 {
        let k = (m + self.m_max as i64) as usize;
        self.f[k].iter().chain(&self.gt[k]).chain(&self.gth[k]).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Samples `(f, g_t, g_theta)` on the node circles at `n` angles and returns
/// their spectra (`1/n` normalized), `[component][node][k]`.
fn sample_spectra(field: &IncidentField, mesh: &PanelMesh, n: usize) -> Result<Vec<[Vec<C64>; 3]>> {
    let o = mesh.curve().orientation();
    let fft = FftPlanner::new().plan_fft_forward(n);
    mesh.nodes()
        .par_iter()
        .map(|fr| {
            let mut bufs = [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]];
            for j in 0..n {
                let th = 2.0 * PI * j as f64 / n as f64;
                let u = eval_incident(field, fr.point3(th))?;
                let [t, e, nn] = fr.basis3(th);
                let proj = |v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
                bufs[0][j] = -proj(nn);
                bufs[1][j] = -proj(e) * o;
                bufs[2][j] = proj(t) * o;
            }
            let inv = 1.0 / n as f64;
            for b in bufs.iter_mut() {
                fft.process(b);
                b.iter_mut().for_each(|z| *z *= inv);
            }
            Ok(bufs)
        })
        .collect()
}

/// Resolves the boundary data by doubling the azimuthal sample count until
/// the spectral tail drops below `threshold` relative to the peak, then
/// keeps the modes above that level. Fails past `m_cap`.
pub fn boundary_data(field: &IncidentField, mesh: &PanelMesh, threshold: f64, m_cap: usize) -> Result<BoundaryDataModes> {
    field.validate()?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("mode threshold {threshold} not in (0, 1)")));
    }
    let mut n = 16usize;
    while n / 2 - n / 8 <= m_cap.min(64) {
        n *= 2;
    }
    loop {
        let spec = sample_spectra(field, mesh, n)?;
        // amplitude of |m| across nodes and components
        let half = n / 2;
        let mut amp = vec![0.0f64; half + 1];
        for comps in &spec {
            for b in comps {
                for m in 0..=half {
                    let a = b[m].norm().max(b[(n - m) % n].norm());
                    amp[m] = amp[m].max(a);
                }
            }
        }
        let peak = amp.iter().cloned().fold(0.0, f64::max);
        let band = half - n / 8;
        let tail = amp[band..].iter().cloned().fold(0.0, f64::max);
        let resolved = peak == 0.0 || tail <= threshold * peak;
        if resolved {
            let m_max = (0..band).rev().find(|&m| amp[m] > threshold * peak).unwrap_or(0);
            if m_max > m_cap {
                return Err(Error::ModeCapReached { threshold, m_cap, achieved: amp[m_cap + 1] / peak });
            }
            let pick = |c: usize| -> Vec<Vec<C64>> {
                (-(m_max as i64)..=m_max as i64)
                    .map(|m| spec.iter().map(|comps| comps[c][m.rem_euclid(n as i64) as usize]).collect())
                    .collect()
            };
            return Ok(BoundaryDataModes { m_max, f: pick(0), gt: pick(1), gth: pick(2), threshold, samples: n });
        }
        if band > m_cap + 1 {
            let achieved = amp[m_cap + 1..].iter().cloned().fold(0.0, f64::max) / peak;
            if achieved > threshold {
                return Err(Error::ModeCapReached { threshold, m_cap, achieved });
            }
        }
        if n >= 1 << 16 {
            return Err(Error::ModeCapReached { threshold, m_cap, achieved: tail / peak });
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, make_builtin_curve};

    #[test]
    fn plane_wave_at_origin_is_polarization() {
        let f = IncidentField::default_plane(1.0, 2.0);
        let u = eval_incident(&f, [0.0; 3]).unwrap();
        let IncidentField::Plane { p, .. } = f else { unreachable!() };
        for i in 0..3 {
            assert!((u[i] - p[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let k = 1.7;
        let x = [0.4, -0.3, 0.9];
        let (_, grad, hess) = helmholtz_green(k, x);
        let h = 1e-5;
        for j in 0..3 {
            let mut a = x;
            let mut b = x;
            a[j] += h;
            b[j] -= h;
            let (ga, da, _) = helmholtz_green(k, a);
            let (gb, db, _) = helmholtz_green(k, b);
            assert!(((ga - gb) / (2.0 * h) - grad[j]).norm() < 1e-8);
            for i in 0..3 {
                assert!(((da[i] - db[i]) / (2.0 * h) - hess[i][j]).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn axisymmetric_source_has_single_mode() {
        let mesh = build_mesh(&make_builtin_curve("sphere").unwrap(), 4, 8, 0).unwrap();
        let f = IncidentField::PointSource { y0: [0.0, 0.0, 0.3], p: [0.0, 0.0, 1.0], mu: 1.0, kappa_p: 1.0, kappa_s: 2.0 };
        let bd = boundary_data(&f, &mesh, 1e-13, 40).unwrap();
        assert_eq!(bd.m_max, 0);
    }

    #[test]
    fn data_reconstructs_samples() {
        let mesh = build_mesh(&make_builtin_curve("ellipsoid").unwrap(), 4, 8, 0).unwrap();
        let f = IncidentField::default_point_source(1.0, 2.0);
        let bd = boundary_data(&f, &mesh, 1e-12, 60).unwrap();
        let fr = mesh.node(5);
        let th = 0.77;
        let u = eval_incident(&f, fr.point3(th)).unwrap();
        let [_, _, nn] = fr.basis3(th);
        let fd = -(u[0] * nn[0] + u[1] * nn[1] + u[2] * nn[2]);
        let mut s = ZERO;
        for (k, m) in bd.modes().enumerate() {
            s += bd.f[k][5] * C64::from_polar(1.0, m as f64 * th);
        }
        assert!((s - fd).norm() < 1e-11 * fd.norm().max(1.0));
    }
}
