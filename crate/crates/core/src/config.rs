//! Run configuration: one TOML file per experiment.
//!
//! ```toml
//! kappa_p = 1.0
//! kappa_s = 2.0
//!
//! [geometry]
//! name = "sphere"            # builtin, or any name plus `file` / `[[geometry.piece]]`
//!
//! [discretization]
//! n_panels = 8
//! order = 16
//! corner_depth = 0
//! quadrature = "graded"      # graded | tables | adaptive
//!
//! [incident]
//! kind = "point-source"      # or "plane"
//! y0 = [0.1, 0.1, 0.1]
//! p = [1.0, 0.0, 0.0]
//! mu = 1.0
//! threshold = 1e-12
//! m_cap = 256
//!
//! [output]
//! dir = "out/sphere"
//! near_field = { radius = 4.0, n_theta = 64, n_phi = 32, hemisphere = true }
//! far_field = { n_theta = 64, n_phi = 32 }
//! probe = { radius = 4.0, count = 400 }
//! ```
//!
//! Every key has a default except `kappa_p`, `kappa_s`, `geometry.name` and
//! `incident.kind`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_mesh, make_builtin_curve, GeneratingCurve, PanelMesh};
use crate::incident::{unit_from_angles, IncidentField, PLANE_WAVE_ANGLES};
use crate::kernels::KernelOptions;
use crate::operators::AssemblyOptions;
use crate::postprocess::{EvalOptions, ProbeSphere, SphericalGrid};
use crate::quadrature::SingularRuleBackend;
use crate::selftest::SelftestOptions;
use crate::solver::SolverOptions;
use crate::usercurve::{build_user_curve, load_curve_file, CurveSpec, PieceSpec};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kappa_p: f64,
    pub kappa_s: f64,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    pub incident: IncidentConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub selftest: SelftestConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub name: String,
    /// Curve file, relative to the config file.
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub piece: Vec<PieceSpec>,
    #[serde(default)]
    pub corners: Vec<f64>,
    #[serde(default)]
    pub interior_ref: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    /// Graded composite rules generated per target.
    #[default]
    Graded,
    /// Graded rules precomputed once per panel order.
    Tables,
    /// Adaptive Gauss-Kronrod rules (slow; reference use).
    Adaptive,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationConfig {
    pub n_panels: usize,
    pub order: usize,
    pub corner_depth: u32,
    pub quadrature: QuadratureKind,
    pub adaptive_tol: f64,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig { n_panels: 8, order: 16, corner_depth: 0, quadrature: QuadratureKind::Graded, adaptive_tol: 1e-13 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum IncidentKind {
    Plane,
    PointSource,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IncidentConfig {
    pub kind: IncidentKind,
    /// Plane-wave direction; defaults from `angles`.
    #[serde(default)]
    pub d: Option<[f64; 3]>,
    /// Polarization.
    #[serde(default)]
    pub p: Option<[f64; 3]>,
    /// `[theta_d, phi_d, theta_p, phi_p]` for plane waves.
    #[serde(default)]
    pub angles: Option<[f64; 4]>,
    #[serde(default)]
    pub y0: Option<[f64; 3]>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_m_cap")]
    pub m_cap: usize,
}

fn default_threshold() -> f64 {
    1e-12
}

fn default_m_cap() -> usize {
    256
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub near_threshold: f64,
    /// Relative size of trailing kernel Fourier coefficients.
    pub tolerance: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        let k = KernelOptions::default();
        KernelConfig { near_threshold: k.near_threshold, tolerance: k.spectral_tol }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    pub residual_tol: f64,
    pub check_residual: bool,
    pub use_symmetry: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { workers: 0, residual_tol: 1e-12, check_residual: true, use_symmetry: true }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NearFieldConfig {
    #[serde(default = "default_radius")]
    pub radius: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    #[serde(default)]
    pub hemisphere: bool,
}

fn default_radius() -> f64 {
    4.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FarFieldConfig {
    pub n_theta: usize,
    pub n_phi: usize,
    #[serde(default)]
    pub hemisphere: bool,
}

fn grid(n_theta: usize, n_phi: usize, hemisphere: bool) -> SphericalGrid {
    if hemisphere {
        SphericalGrid::upper_hemisphere(n_theta, n_phi)
    } else {
        SphericalGrid::full(n_theta, n_phi)
    }
}

impl NearFieldConfig {
    pub fn grid(&self) -> SphericalGrid {
        grid(self.n_theta, self.n_phi, self.hemisphere)
    }
}

impl FarFieldConfig {
    pub fn grid(&self) -> SphericalGrid {
        grid(self.n_theta, self.n_phi, self.hemisphere)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write modal densities as CSV.
    pub densities: bool,
    pub near_field: Option<NearFieldConfig>,
    pub far_field: Option<FarFieldConfig>,
    pub probe: ProbeSphere,
    /// Field evaluation tolerance.
    pub eval_tol: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            densities: true,
            near_field: None,
            far_field: None,
            probe: ProbeSphere::default(),
            eval_tol: EvalOptions::default().tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub n_panels: Vec<usize>,
    /// Corner refinement depths; every panel count runs once per depth.
    /// Empty means the discretization's own depth.
    pub corner_depths: Vec<u32>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig { n_panels: vec![2, 4, 8], corner_depths: Vec::new() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestConfig {
    pub geometries: Vec<String>,
    pub kappas: Vec<f64>,
    pub m_max: usize,
    pub pairs_per_geometry: usize,
    pub far_tol: f64,
    pub near_tol: f64,
    pub recurrence_tol: f64,
    /// Relative separation of the extra near pair; 0 disables it.
    pub forced_near: f64,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        let o = SelftestOptions::default();
        SelftestConfig {
            geometries: o.geometries,
            kappas: o.kappas,
            m_max: o.m_max,
            pairs_per_geometry: o.pairs_per_geometry,
            far_tol: o.far_tol,
            near_tol: o.near_tol,
            recurrence_tol: o.recurrence_tol,
            forced_near: o.forced_near.unwrap_or(0.0),
        }
    }
}

impl SelftestConfig {
    pub fn options(&self) -> SelftestOptions {
        SelftestOptions {
            geometries: self.geometries.clone(),
            kappas: self.kappas.clone(),
            m_max: self.m_max,
            pairs_per_geometry: self.pairs_per_geometry,
            far_tol: self.far_tol,
            near_tol: self.near_tol,
            recurrence_tol: self.recurrence_tol,
            forced_near: (self.forced_near > 0.0).then_some(self.forced_near),
            ..SelftestOptions::default()
        }
    }
}

/// 1-based line of `key` inside `[section]` (top level when empty).
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.starts_with('[') {
            current = l.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = l.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn fail(&self, section: &str, key: &str, msg: String) -> Error {
        let path = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        match locate(self.text, section, key) {
            Some(line) => Error::Config(format!("line {line}: `{path}` {msg}")),
            None => Error::Config(format!("`{path}` {msg}")),
        }
    }

    fn tol(&self, section: &str, key: &str, v: f64) -> Result<()> {
        if v > 0.0 && v < 1.0 {
            Ok(())
        } else {
            Err(self.fail(section, key, format!("must lie in (0, 1), got {v}")))
        }
    }

    fn positive(&self, section: &str, key: &str, v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(self.fail(section, key, format!("must be positive, got {v}")))
        }
    }

    fn count(&self, section: &str, key: &str, v: usize, min: usize) -> Result<()> {
        if v >= min {
            Ok(())
        } else {
            Err(self.fail(section, key, format!("must be at least {min}, got {v}")))
        }
    }
}

impl RunConfig {
    /// Parses and validates; diagnostics carry line numbers.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    /// Reads `path`; a relative geometry file is resolved against its
    /// directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(f) = &cfg.geometry.file {
            if f.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.geometry.file = Some(base.join(f));
            }
        }
        Ok(cfg)
    }

    fn validate(&self, text: &str) -> Result<()> {
        let c = Checker { text };
        c.positive("", "kappa_p", self.kappa_p)?;
        c.positive("", "kappa_s", self.kappa_s)?;
        if self.geometry.name.trim().is_empty() {
            return Err(c.fail("geometry", "name", "must not be empty".into()));
        }
        let d = &self.discretization;
        c.count("discretization", "n_panels", d.n_panels, 2)?;
        c.count("discretization", "order", d.order, 4)?;
        if d.order > 48 {
            return Err(c.fail("discretization", "order", format!("must be at most 48, got {}", d.order)));
        }
        c.tol("discretization", "adaptive_tol", d.adaptive_tol)?;
        let i = &self.incident;
        c.tol("incident", "threshold", i.threshold)?;
        c.count("incident", "m_cap", i.m_cap, 1)?;
        if let Some(mu) = i.mu {
            c.positive("incident", "mu", mu)?;
        }
        c.positive("kernel", "near_threshold", self.kernel.near_threshold)?;
        c.tol("kernel", "tolerance", self.kernel.tolerance)?;
        c.tol("solver", "residual_tol", self.solver.residual_tol)?;
        c.tol("output", "eval_tol", self.output.eval_tol)?;
        c.positive("output", "probe.radius", self.output.probe.radius)?;
        c.count("output", "probe.count", self.output.probe.count, 1)?;
        if let Some(n) = &self.output.near_field {
            c.positive("output", "near_field.radius", n.radius)?;
            c.count("output", "near_field.n_theta", n.n_theta, 1)?;
            c.count("output", "near_field.n_phi", n.n_phi, 1)?;
        }
        if let Some(f) = &self.output.far_field {
            c.count("output", "far_field.n_theta", f.n_theta, 1)?;
            c.count("output", "far_field.n_phi", f.n_phi, 1)?;
        }
        if self.convergence.n_panels.iter().any(|&n| n < 2) {
            return Err(c.fail("convergence", "n_panels", "entries must be at least 2".into()));
        }
        self.incident_field().map_err(|e| c.fail("incident", "kind", format!("is inconsistent: {e}")))?;
        Ok(())
    }

    pub fn incident_field(&self) -> Result<IncidentField> {
        let i = &self.incident;
        let (kappa_p, kappa_s) = (self.kappa_p, self.kappa_s);
        let field = match i.kind {
            IncidentKind::Plane => {
                if i.y0.is_some() || i.mu.is_some() {
                    return Err(Error::Config("plane waves take no `y0` or `mu`".into()));
                }
                let [t1, p1, t2, p2] = i.angles.unwrap_or(PLANE_WAVE_ANGLES);
                if i.angles.is_some() && (i.d.is_some() || i.p.is_some()) {
                    return Err(Error::Config("give either `angles` or `d`/`p`, not both".into()));
                }
                IncidentField::Plane {
                    d: i.d.unwrap_or(unit_from_angles(t1, p1)),
                    p: i.p.unwrap_or(unit_from_angles(t2, p2)),
                    kappa_p,
                    kappa_s,
                }
            }
            IncidentKind::PointSource => {
                if i.d.is_some() || i.angles.is_some() {
                    return Err(Error::Config("point sources take no `d` or `angles`".into()));
                }
                IncidentField::PointSource {
                    y0: i.y0.unwrap_or([0.1, 0.1, 0.1]),
                    p: i.p.unwrap_or([1.0, 0.0, 0.0]),
                    mu: i.mu.unwrap_or(1.0),
                    kappa_p,
                    kappa_s,
                }
            }
        };
        field.validate()?;
        Ok(field)
    }

    pub fn curve(&self) -> Result<GeneratingCurve> {
        let g = &self.geometry;
        match (&g.file, g.piece.is_empty()) {
            (Some(_), false) => Err(Error::Config("geometry: give either `file` or inline pieces, not both".into())),
            (Some(path), true) => load_curve_file(path),
            (None, false) => build_user_curve(&CurveSpec {
                name: g.name.clone(),
                corners: g.corners.clone(),
                interior_ref: g.interior_ref,
                pieces: g.piece.clone(),
            }),
            (None, true) => make_builtin_curve(&g.name),
        }
    }

    pub fn mesh(&self) -> Result<PanelMesh> {
        self.mesh_with(self.discretization.n_panels, self.discretization.corner_depth)
    }

    pub fn mesh_with(&self, n_panels: usize, corner_depth: u32) -> Result<PanelMesh> {
        build_mesh(&self.curve()?, n_panels, self.discretization.order, corner_depth)
    }

    pub fn solver_options(&self) -> SolverOptions {
        let d = &self.discretization;
        let backend = match d.quadrature {
            QuadratureKind::Graded => SingularRuleBackend::default(),
            QuadratureKind::Tables => SingularRuleBackend::tables(d.order),
            QuadratureKind::Adaptive => SingularRuleBackend::AdaptiveOracle { tol: d.adaptive_tol },
        };
        SolverOptions {
            assembly: AssemblyOptions {
                kernel: KernelOptions { near_threshold: self.kernel.near_threshold, spectral_tol: self.kernel.tolerance },
                backend,
                ..AssemblyOptions::default()
            },
            workers: self.solver.workers,
            use_symmetry: self.solver.use_symmetry,
            check_residual: self.solver.check_residual,
            residual_tol: self.solver.residual_tol,
            mode_threshold: self.incident.threshold,
            m_cap: self.incident.m_cap,
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions { tol: self.output.eval_tol, ..EvalOptions::default() }
    }
}

/// Reads only the `[selftest]` table of a config file, ignoring the rest.
pub fn parse_selftest_section(text: &str) -> Result<SelftestConfig> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    match table.get("selftest") {
        None => Ok(SelftestConfig::default()),
        Some(v) => v.clone().try_into().map_err(|e: toml::de::Error| Error::Config(format!("[selftest]: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kappa_p = 1.0
kappa_s = 2.0

[geometry]
name = "sphere"

[incident]
kind = "point-source"
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.discretization.n_panels, 8);
        assert_eq!(c.incident.threshold, 1e-12);
        assert_eq!(c.incident_field().unwrap(), IncidentField::default_point_source(1.0, 2.0));
        assert_eq!(c.output.probe, ProbeSphere::default());
        assert_eq!(c.mesh().unwrap().n_points(), 128);
    }

    #[test]
    fn plane_defaults_to_named_angles() {
        let text = MINIMAL.replace("point-source", "plane");
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.incident_field().unwrap(), IncidentField::default_plane(1.0, 2.0));
    }

    #[test]
    fn missing_geometry_name_is_reported_with_line() {
        let text = MINIMAL.replace("name = \"sphere\"", "");
        let e = RunConfig::parse(&text).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("name") && msg.contains("line"), "{msg}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn semantic_errors_point_at_the_key() {
        let text = MINIMAL.replace("[incident]", "[incident]\nthreshold = 2.0");
        let msg = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("line 9") && msg.contains("incident.threshold"), "{msg}");
        let text = format!("{MINIMAL}\n[discretization]\nn_panels = 1\n");
        let msg = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("line 12"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("[geometry]", "[geometry]\nradius = 3");
        let msg = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("radius") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn inline_user_geometry() {
        let text = MINIMAL.replace(
            "name = \"sphere\"",
            "name = \"bulb\"\n[[geometry.piece]]\nkind = \"analytic-expression\"\ninterval = [0.0, 3.141592653589793]\nr = \"sin(t)*(1.5 + 0.2*cos(2*t))\"\nz = \"cos(t)\"",
        );
        let c = RunConfig::parse(&text).unwrap();
        let curve = c.curve().unwrap();
        assert_eq!(curve.name(), "bulb");
        assert_eq!(curve.axis_touch(), (true, true));
    }

    #[test]
    fn unknown_builtin_fails_at_curve_time() {
        let text = MINIMAL.replace("\"sphere\"", "\"torus\"");
        let c = RunConfig::parse(&text).unwrap();
        assert!(matches!(c.curve(), Err(Error::UnknownCurve(_))));
    }

    #[test]
    fn selftest_section_alone() {
        let s = parse_selftest_section("[selftest]\nm_max = 0\ngeometries = [\"sphere\"]\n").unwrap();
        assert_eq!(s.m_max, 0);
        assert_eq!(s.options().geometries, vec!["sphere".to_string()]);
        assert!(parse_selftest_section("[selftest]\nbogus = 1\n").is_err());
    }
}
