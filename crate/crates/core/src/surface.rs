//! Modal surface calculus on bodies of revolution.
//!
//! Source-side geometric factors are carried as trigonometric triples
//! `c0 + cc cos(phi) + cs sin(phi)` in `phi = theta_t - theta`, evaluated in
//! the target frame at `theta_t = 0`. Pairing a triple with the modes of a
//! kernel family gives the modes of the product exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Frame, PanelMesh};
use crate::kernels::ModeBlock;

type C64 = Complex64;

/// `c0 + cc cos(phi) + cs sin(phi)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Trig {
    pub c0: f64,
    pub cc: f64,
    pub cs: f64,
}

impl Trig {
    pub const fn new(c0: f64, cc: f64, cs: f64) -> Trig {
        Trig { c0, cc, cs }
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        self.c0 + self.cc * c + self.cs * s
    }

    /// d/dphi.
    pub fn dphi(&self) -> Trig {
        Trig { c0: 0.0, cc: self.cs, cs: -self.cc }
    }

    pub fn scale(&self, a: f64) -> Trig {
        Trig { c0: a * self.c0, cc: a * self.cc, cs: a * self.cs }
    }
}

/// Mode `m` of `c(phi) F(phi)` from the modes of `F`.
#[inline]
pub fn pair(c: Trig, f: &ModeBlock, m: i64) -> C64 {
    let lo = f.get(m - 1);
    let hi = f.get(m + 1);
    let mut out = f.get(m) * c.c0;
    if c.cc != 0.0 {
        out += (lo + hi) * (0.5 * c.cc);
    }
    if c.cs != 0.0 {
        out += (lo - hi) * C64::new(0.0, -0.5 * c.cs);
    }
    out
}

/// Mode `m` of `c(phi) dG/dphi`, by parts: `i m (c G)_m - (c' G)_m`.
#[inline]
pub fn pair_phi(c: Trig, g: &ModeBlock, m: i64) -> C64 {
    C64::new(0.0, m as f64) * pair(c, g, m) - pair(c.dphi(), g, m)
}

/// Mode `m` of a kernel family given by a linear combination of blocks.
#[inline]
pub fn combo<'a>(a: f64, f: &'a ModeBlock, b: f64, g: &'a ModeBlock, m: i64) -> ModeCombo<'a> {
    ModeCombo { a, f, b, g, m }
}

/// Lazy `a F + b G` used to pair triples with directional derivatives.
pub struct ModeCombo<'a> {
    a: f64,
    f: &'a ModeBlock,
    b: f64,
    g: &'a ModeBlock,
    m: i64,
}

impl ModeCombo<'_> {
    #[inline]
    fn at(&self, m: i64) -> C64 {
        self.f.get(m) * self.a + self.g.get(m) * self.b
    }

    /// Same as [`pair`] applied to `a F + b G`.
    #[inline]
    pub fn pair(&self, c: Trig) -> C64 {
        let m = self.m;
        let lo = self.at(m - 1);
        let hi = self.at(m + 1);
        let mut out = self.at(m) * c.c0;
        if c.cc != 0.0 {
            out += (lo + hi) * (0.5 * c.cc);
        }
        if c.cs != 0.0 {
            out += (lo - hi) * C64::new(0.0, -0.5 * c.cs);
        }
        out
    }
}

/// Parameter derivative of the outward normal `(n_r', n_z')`.
pub fn normal_derivative(f: &Frame, orientation: f64) -> [f64; 2] {
    [
        orientation * (f.dc * f.dz + f.c * f.ddz),
        -orientation * (f.dc * f.dr + f.c * f.ddr),
    ]
}

/// Divergence coefficients `(A, B)` with
/// `Div_y(P_y v) = B v_z + A (v_x cos phi - v_y sin phi)` for a constant
/// vector `v`, `P_y` the tangential projection at the source.
pub fn projection_divergence(f: &Frame) -> (f64, f64) {
    let rj = f.r * f.jac;
    let d_rcr = f.dr * f.c * f.dr + f.r * f.dc * f.dr + f.r * f.c * f.ddr;
    let d_rcz = f.dr * f.c * f.dz + f.r * f.dc * f.dz + f.r * f.c * f.ddz;
    (d_rcr / rj - 1.0 / f.r, d_rcz / rj)
}

/// Azimuthal decomposition of the geometric factors coupling a target frame
/// (at `theta_t = 0`) and a source frame.
///
/// `tau[0] = t(x)`, `tau[1] = e_theta(x)`. For `v = tau[i]`:
/// `proj_t[i] = v . t_y`, `proj_theta[i] = v . e_theta(y)` (the components
/// of `n_y x v x n_y`), `v_dot_n[i] = v . n_y`, `div_proj[i] = Div_y(P_y v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricKernelParts {
    pub nn: Trig,
    pub grad_nn_t: Trig,
    pub grad_nn_theta: Trig,
    pub proj_t: [Trig; 2],
    pub proj_theta: [Trig; 2],
    pub v_dot_n: [Trig; 2],
    pub div_proj: [Trig; 2],
    pub nx_ty: Trig,
    pub nx_etheta: Trig,
}

/// Trig triples for `v . t_y`, `v . e_theta(y)`, `v . n_y` with `v` given
/// by Cartesian components at `theta_t = 0`.
pub fn dot_triples(v: [f64; 3], src: &Frame) -> (Trig, Trig, Trig) {
    let (tr, tz) = (src.tangent[0], src.tangent[1]);
    let (nr, nz) = (src.normal[0], src.normal[1]);
    (
        Trig::new(v[2] * tz, v[0] * tr, -v[1] * tr),
        Trig::new(0.0, v[1], v[0]),
        Trig::new(v[2] * nz, v[0] * nr, -v[1] * nr),
    )
}

pub fn geometric_kernel_parts(target: &Frame, source: &Frame, orientation: f64) -> Result<GeometricKernelParts> {
    if source.r <= 0.0 {
        return Err(Error::InvalidArgument("source frame on the axis".into()));
    }
    let (ntr, ntz) = (target.normal[0], target.normal[1]);
    let nr = source.normal[0];
    let [dnr, dnz] = normal_derivative(source, orientation);
    let (a, b) = projection_divergence(source);
    let taus = [[target.tangent[0], 0.0, target.tangent[1]], [0.0, 1.0, 0.0]];
    let mut proj_t = [Trig::default(); 2];
    let mut proj_theta = [Trig::default(); 2];
    let mut v_dot_n = [Trig::default(); 2];
    let mut div_proj = [Trig::default(); 2];
    for (i, v) in taus.iter().enumerate() {
        let (t, th, n) = dot_triples(*v, source);
        proj_t[i] = t;
        proj_theta[i] = th;
        v_dot_n[i] = n;
        div_proj[i] = Trig::new(b * v[2], a * v[0], -a * v[1]);
    }
    let nx = [ntr, 0.0, ntz];
    let (nx_ty, nx_etheta, nn) = dot_triples(nx, source);
    Ok(GeometricKernelParts {
        nn,
        grad_nn_t: Trig::new(source.c * ntz * dnz, source.c * ntr * dnr, 0.0),
        grad_nn_theta: Trig::new(0.0, 0.0, ntr * nr / source.r),
        proj_t,
        proj_theta,
        v_dot_n,
        div_proj,
        nx_ty,
        nx_etheta,
    })
}

/// Spectral d/ds on panel `k`: `D[n][j]` maps nodal values to the arclength
/// derivative at node `n`.
pub fn discrete_gradient_matrix(mesh: &PanelMesh, k: usize) -> Vec<Vec<f64>> {
    let pan = mesh.panels()[k];
    let scale = 2.0 / pan.len();
    let nodes = mesh.panel_nodes(k);
    mesh.transform()
        .diff
        .iter()
        .zip(nodes)
        .map(|(row, i)| {
            let s = scale * mesh.node(i).c;
            row.iter().map(|d| d * s).collect()
        })
        .collect()
}

/// Parameter derivative of nodal values, panel by panel.
pub fn param_derivative(mesh: &PanelMesh, values: &[C64]) -> Vec<C64> {
    let p = mesh.order();
    let d = &mesh.transform().diff;
    let mut out = vec![C64::new(0.0, 0.0); values.len()];
    for k in 0..mesh.n_panels() {
        let s = 2.0 / mesh.panels()[k].len();
        let base = k * p;
        for n in 0..p {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..p {
                acc += values[base + j] * d[n][j];
            }
            out[base + n] = acc * s;
        }
    }
    out
}

/// `(t, e_theta)` components of `Grad (sigma_m e^{i m theta})` at the nodes.
pub fn modal_surface_gradient(sigma: &[C64], m: i64, mesh: &PanelMesh) -> Result<(Vec<C64>, Vec<C64>)> {
    if mesh.nodes().iter().any(|f| f.r <= 0.0) {
        return Err(Error::InvalidArgument("mesh node on the axis".into()));
    }
    let ds = param_derivative(mesh, sigma);
    let t = ds.iter().zip(mesh.nodes()).map(|(d, f)| d * f.c).collect();
    let th = sigma.iter().zip(mesh.nodes()).map(|(s, f)| s * C64::new(0.0, m as f64 / f.r)).collect();
    Ok((t, th))
}

/// `Div (J1_m t + J2_m e_theta) e^{i m theta}` at the nodes.
pub fn modal_surface_divergence(j1: &[C64], j2: &[C64], m: i64, mesh: &PanelMesh) -> Result<Vec<C64>> {
    if mesh.nodes().iter().any(|f| f.r <= 0.0) {
        return Err(Error::InvalidArgument("mesh node on the axis".into()));
    }
    let dj1 = param_derivative(mesh, j1);
    Ok(mesh
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, f)| (j1[i] * f.dr + dj1[i] * f.r) / (f.r * f.jac) + j2[i] * C64::new(0.0, m as f64 / f.r))
        .collect())
}
