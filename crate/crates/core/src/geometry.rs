//! Generating curves, meridian frames and panel meshes.
//!
//! A body of revolution is obtained by rotating the curve `t -> (r(t), z(t))`
//! about the z-axis. Frames carry explicit `ds/dt` factors so curves need not
//! be arclength parametrized.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, legendre_matrices, LegendreTransform, PanelRule};

/// Values and first/second parameter derivatives of `(r, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub r: f64,
    pub z: f64,
    pub dr: f64,
    pub dz: f64,
    pub ddr: f64,
    pub ddz: f64,
}

type CurveFnBox = Arc<dyn Fn(f64) -> CurvePoint + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Sphere,
    Ellipsoid,
    Starfish,
    Droplet,
    User,
}

/// Meridian curve of an axisymmetric surface.
#[derive(Clone)]
pub struct GeneratingCurve {
    name: String,
    kind: CurveKind,
    t_lo: f64,
    t_hi: f64,
    corners: Vec<f64>,
    axis_lo: bool,
    axis_hi: bool,
    func: CurveFnBox,
    interior_ref: [f64; 2],
    orientation: f64,
}

impl fmt::Debug for GeneratingCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratingCurve")
            .field("name", &self.name)
            .field("interval", &(self.t_lo, self.t_hi))
            .field("corners", &self.corners)
            .field("axis", &(self.axis_lo, self.axis_hi))
            .field("orientation", &self.orientation)
            .finish()
    }
}

/// Differential frame of the meridian at one parameter value.
///
/// `tangent` and `normal` are `(e_r, e_z)` components; the normal is the
/// outward one. `c = 1/jac` and `dc = dc/dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub r: f64,
    pub z: f64,
    pub dr: f64,
    pub dz: f64,
    pub ddr: f64,
    pub ddz: f64,
    pub jac: f64,
    pub c: f64,
    pub dc: f64,
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
}

impl Frame {
    fn from_point(t: f64, p: CurvePoint, orientation: f64) -> Frame {
        let jac = p.dr.hypot(p.dz);
        let c = 1.0 / jac;
        let dc = -(p.dr * p.ddr + p.dz * p.ddz) * c * c * c;
        Frame {
            t,
            r: p.r,
            z: p.z,
            dr: p.dr,
            dz: p.dz,
            ddr: p.ddr,
            ddz: p.ddz,
            jac,
            c,
            dc,
            tangent: [c * p.dr, c * p.dz],
            normal: [orientation * c * p.dz, -orientation * c * p.dr],
        }
    }

    /// Point on the surface at azimuth `theta`.
    pub fn point3(&self, theta: f64) -> [f64; 3] {
        [self.r * theta.cos(), self.r * theta.sin(), self.z]
    }

    /// `(t, e_theta, n)` as Cartesian vectors at azimuth `theta`.
    pub fn basis3(&self, theta: f64) -> [[f64; 3]; 3] {
        let (s, c) = theta.sin_cos();
        [
            [self.tangent[0] * c, self.tangent[0] * s, self.tangent[1]],
            [-s, c, 0.0],
            [self.normal[0] * c, self.normal[0] * s, self.normal[1]],
        ]
    }
}

fn polar(rad: f64, drad: f64, ddrad: f64, ang: f64, w: f64, z0: f64) -> CurvePoint {
    let (s, c) = ang.sin_cos();
    CurvePoint {
        r: rad * c,
        z: rad * s + z0,
        dr: drad * c - w * rad * s,
        dz: drad * s + w * rad * c,
        ddr: ddrad * c - 2.0 * w * drad * s - w * w * rad * c,
        ddz: ddrad * s + 2.0 * w * drad * c - w * w * rad * s,
    }
}

impl GeneratingCurve {
    /// User curve from a closure returning `(r, z)` and derivatives.
    ///
    /// The outward orientation is fixed by sampling against the axis point
    /// at the middle of the z-extent unless `interior_ref` is given.
    pub fn custom<F>(
        name: impl Into<String>,
        interval: (f64, f64),
        corners: Vec<f64>,
        interior_ref: Option<[f64; 2]>,
        func: F,
    ) -> Result<GeneratingCurve>
    where
        F: Fn(f64) -> CurvePoint + Send + Sync + 'static,
    {
        Self::build(name.into(), CurveKind::User, interval, corners, interior_ref, Arc::new(func))
    }

    fn build(
        name: String,
        kind: CurveKind,
        (t_lo, t_hi): (f64, f64),
        mut corners: Vec<f64>,
        interior_ref: Option<[f64; 2]>,
        func: CurveFnBox,
    ) -> Result<GeneratingCurve> {
        if !(t_lo < t_hi) || !t_lo.is_finite() || !t_hi.is_finite() {
            return Err(Error::InvalidCurve(format!("bad interval [{t_lo}, {t_hi}]")));
        }
        corners.sort_by(|a, b| a.total_cmp(b));
        corners.dedup();
        if corners.iter().any(|&c| c < t_lo || c > t_hi) {
            return Err(Error::InvalidCurve("corner outside parameter interval".into()));
        }
        let tol = 1e-12 * (1.0 + func(t_lo).r.abs().max(func(t_hi).r.abs()));
        let axis_lo = func(t_lo).r.abs() <= tol;
        let axis_hi = func(t_hi).r.abs() <= tol;

        let samples = 257;
        let mut zmin = f64::INFINITY;
        let mut zmax = f64::NEG_INFINITY;
        let mut pts = Vec::with_capacity(samples);
        for k in 0..samples {
            let t = t_lo + (t_hi - t_lo) * (k as f64 + 0.5) / samples as f64;
            let p = func(t);
            if !(p.r.is_finite() && p.z.is_finite()) || p.r < -tol {
                return Err(Error::InvalidCurve(format!("r(t) < 0 or non-finite at t = {t}")));
            }
            zmin = zmin.min(p.z);
            zmax = zmax.max(p.z);
            pts.push(p);
        }
        let interior_ref = interior_ref.unwrap_or([0.0, 0.5 * (zmin + zmax)]);
        let mut votes = 0.0;
        for p in &pts {
            let dot = p.dz * (p.r - interior_ref[0]) - p.dr * (p.z - interior_ref[1]);
            votes += dot.signum();
        }
        let orientation = if votes >= 0.0 { 1.0 } else { -1.0 };
        Ok(GeneratingCurve {
            name,
            kind,
            t_lo,
            t_hi,
            corners,
            axis_lo,
            axis_hi,
            func,
            interior_ref,
            orientation,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t_lo, self.t_hi)
    }

    pub fn corners(&self) -> &[f64] {
        &self.corners
    }

    /// Whether `(start, end)` of the interval lie on the axis.
    pub fn axis_touch(&self) -> (bool, bool) {
        (self.axis_lo, self.axis_hi)
    }

    pub fn interior_ref(&self) -> [f64; 2] {
        self.interior_ref
    }

    /// `+1` when `(z', -r')` already points outward, `-1` otherwise.
    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn point(&self, t: f64) -> CurvePoint {
        (self.func)(t)
    }

    /// Frame at `t`; rejects corners and degenerate points.
    pub fn frame(&self, t: f64) -> Result<Frame> {
        if self.corners.contains(&t) {
            return Err(Error::AtCorner { t });
        }
        let f = self.frame_unchecked(t);
        if !(f.jac > 0.0) || !f.jac.is_finite() {
            return Err(Error::DegenerateFrame { t, jac: f.jac });
        }
        Ok(f)
    }

    /// Frame without corner or degeneracy checks (quadrature nodes are
    /// interior to panels so this is safe there).
    pub fn frame_unchecked(&self, t: f64) -> Frame {
        Frame::from_point(t, (self.func)(t), self.orientation)
    }

    /// `(r, z)(t_a) - (r, z)(t_b)`. For nearby parameters the difference is
    /// integrated from the derivative, so its error scales with the
    /// separation rather than with the coordinates.
    pub fn separation(&self, t_a: f64, t_b: f64) -> [f64; 2] {
        let (lo, hi) = self.interval();
        let close = (t_a - t_b).abs() < 0.05 * (hi - lo)
            && !self.corners.iter().any(|&c| (c - t_a) * (c - t_b) < 0.0);
        if !close {
            let (a, b) = ((self.func)(t_a), (self.func)(t_b));
            return [a.r - b.r, a.z - b.z];
        }
        let gl = separation_rule();
        let (mid, half) = (0.5 * (t_a + t_b), 0.5 * (t_a - t_b));
        let (mut dr, mut dz) = (0.0, 0.0);
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let p = (self.func)(mid + half * x);
            dr += w * p.dr;
            dz += w * p.dz;
        }
        [dr * half, dz * half]
    }
}

fn separation_rule() -> &'static PanelRule {
    static RULE: std::sync::OnceLock<PanelRule> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// One of the four builtin curves by name.
pub fn make_builtin_curve(name: &str) -> Result<GeneratingCurve> {
    let lower = name.to_ascii_lowercase();
    let (kind, interval, corners, func): (CurveKind, (f64, f64), Vec<f64>, CurveFnBox) =
        match lower.as_str() {
            "sphere" => (
                CurveKind::Sphere,
                (0.0, PI),
                vec![],
                Arc::new(|t: f64| {
                    let (s, c) = t.sin_cos();
                    CurvePoint { r: 2.0 * s, z: 2.0 * c, dr: 2.0 * c, dz: -2.0 * s, ddr: -2.0 * s, ddz: -2.0 * c }
                }),
            ),
            "ellipsoid" => (
                CurveKind::Ellipsoid,
                (0.0, PI),
                vec![],
                Arc::new(|t: f64| {
                    let (s, c) = t.sin_cos();
                    CurvePoint { r: s, z: 2.0 * c, dr: c, dz: -2.0 * s, ddr: -s, ddz: -2.0 * c }
                }),
            ),
            "starfish" => (
                CurveKind::Starfish,
                (0.0, 1.0),
                vec![],
                Arc::new(|t: f64| {
                    let w = 5.0 * PI;
                    let (s, c) = (w * (t - 1.0)).sin_cos();
                    let rad = 2.0 + 0.5 * c;
                    let drad = -0.5 * w * s;
                    let ddrad = -0.5 * w * w * c;
                    let mut p = polar(rad, drad, ddrad, PI * (t - 0.5), PI, 0.0);
                    if t == 0.0 || t == 1.0 {
                        p.r = 0.0;
                    }
                    p
                }),
            ),
            "droplet" => (
                CurveKind::Droplet,
                (0.5, 1.0),
                vec![1.0],
                Arc::new(|t: f64| {
                    let (s, c) = (PI * t).sin_cos();
                    let rad = 4.0 * s;
                    let drad = 4.0 * PI * c;
                    let ddrad = -4.0 * PI * PI * s;
                    let mut p = polar(rad, drad, ddrad, 0.5 * PI * (t - 1.5), 0.5 * PI, 2.0);
                    if t == 0.5 || t == 1.0 {
                        p.r = 0.0;
                    }
                    p
                }),
            ),
            _ => return Err(Error::UnknownCurve(name.to_string())),
        };
    GeneratingCurve::build(lower, kind, interval, corners, None, func)
}

/// Frame of `curve` at `t`.
pub fn curve_frame(curve: &GeneratingCurve, t: f64) -> Result<Frame> {
    curve.frame(t)
}

/// Parameter sub-interval of a mesh panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub t0: f64,
    pub t1: f64,
    /// Number of dyadic splits that produced this panel.
    pub depth: u32,
}

impl Panel {
    pub fn len(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Maps the reference coordinate `u` in `[-1, 1]` to the parameter.
    pub fn param(&self, u: f64) -> f64 {
        0.5 * (self.t0 + self.t1) + 0.5 * (self.t1 - self.t0) * u
    }

    /// Inverse of [`Panel::param`].
    pub fn reference(&self, t: f64) -> f64 {
        (2.0 * t - self.t0 - self.t1) / (self.t1 - self.t0)
    }
}

/// Panelization of a generating curve with `p` Gauss-Legendre nodes each.
#[derive(Debug, Clone)]
pub struct PanelMesh {
    curve: GeneratingCurve,
    panels: Vec<Panel>,
    rule: PanelRule,
    transform: LegendreTransform,
    nodes: Vec<Frame>,
    weights: Vec<f64>,
}

impl PanelMesh {
    pub fn curve(&self) -> &GeneratingCurve {
        &self.curve
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn n_panels(&self) -> usize {
        self.panels.len()
    }

    pub fn order(&self) -> usize {
        self.rule.nodes.len()
    }

    pub fn rule(&self) -> &PanelRule {
        &self.rule
    }

    pub fn transform(&self) -> &LegendreTransform {
        &self.transform
    }

    pub fn n_points(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Frame] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Frame {
        &self.nodes[i]
    }

    /// Parameter-space quadrature weight of node `i`.
    pub fn param_weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Surface measure weight `r ds` of node `i` (azimuth excluded).
    pub fn measure(&self, i: usize) -> f64 {
        let f = &self.nodes[i];
        self.weights[i] * f.r * f.jac
    }

    pub fn panel_of(&self, i: usize) -> usize {
        i / self.order()
    }

    pub fn panel_nodes(&self, k: usize) -> std::ops::Range<usize> {
        let p = self.order();
        k * p..(k + 1) * p
    }

    /// Panels sharing an endpoint.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        a.abs_diff(b) == 1
    }

    /// Total arclength of the meridian by panel quadrature.
    pub fn arclength(&self) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(f, w)| f.jac * w).sum()
    }

    /// Smallest panel arclength.
    pub fn min_panel_arclength(&self) -> f64 {
        (0..self.n_panels())
            .map(|k| self.panel_nodes(k).map(|i| self.nodes[i].jac * self.weights[i]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Uniform split into `n_panels`, then `corner_depth` dyadic splits of each
/// panel touching a corner, halving toward the corner each time.
pub fn build_mesh(
    curve: &GeneratingCurve,
    n_panels: usize,
    p: usize,
    corner_depth: u32,
) -> Result<PanelMesh> {
    if n_panels < 2 {
        return Err(Error::InvalidMesh(format!("n_panels = {n_panels} < 2")));
    }
    if p < 4 {
        return Err(Error::InvalidMesh(format!("order p = {p} < 4")));
    }
    let (t_lo, t_hi) = curve.interval();
    let h = (t_hi - t_lo) / n_panels as f64;
    let mut breaks: Vec<f64> = (0..=n_panels).map(|k| t_lo + h * k as f64).collect();
    breaks[n_panels] = t_hi;
    for &c in curve.corners() {
        let near = breaks.iter().any(|&b| (b - c).abs() <= 1e-12 * (t_hi - t_lo));
        if !near {
            breaks.push(c);
        }
    }
    breaks.sort_by(|a, b| a.total_cmp(b));
    let mut panels: Vec<Panel> =
        breaks.windows(2).map(|w| Panel { t0: w[0], t1: w[1], depth: 0 }).collect();

    for &c in curve.corners() {
        let tol = 1e-12 * (t_hi - t_lo);
        let mut out = Vec::with_capacity(panels.len() + 2 * corner_depth as usize);
        for pan in panels {
            let at_start = (pan.t0 - c).abs() <= tol;
            let at_end = (pan.t1 - c).abs() <= tol;
            if !(at_start || at_end) || corner_depth == 0 {
                out.push(pan);
                continue;
            }
            let mut chain = Vec::new();
            let mut cur = pan;
            for _ in 0..corner_depth {
                let mid = 0.5 * (cur.t0 + cur.t1);
                let depth = cur.depth + 1;
                if at_start {
                    chain.push(Panel { t0: mid, t1: cur.t1, depth });
                    cur = Panel { t0: cur.t0, t1: mid, depth };
                } else {
                    chain.push(Panel { t0: cur.t0, t1: mid, depth });
                    cur = Panel { t0: mid, t1: cur.t1, depth };
                }
            }
            chain.push(cur);
            if at_start {
                chain.reverse();
            }
            out.extend(chain);
        }
        panels = out;
    }

    let rule = gauss_legendre(p);
    let transform = legendre_matrices(p);
    let mut nodes = Vec::with_capacity(panels.len() * p);
    let mut weights = Vec::with_capacity(panels.len() * p);
    for pan in &panels {
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let t = pan.param(*x);
            let f = curve.frame_unchecked(t);
            if !(f.jac > 0.0) || !f.jac.is_finite() {
                return Err(Error::DegenerateFrame { t, jac: f.jac });
            }
            nodes.push(f);
            weights.push(0.5 * pan.len() * w);
        }
    }
    Ok(PanelMesh { curve: curve.clone(), panels, rule, transform, nodes, weights })
}
