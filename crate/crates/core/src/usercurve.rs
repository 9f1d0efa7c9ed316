//! User-supplied generating curves: a chain of analytic-expression or
//! sampled pieces, loadable from a TOML file.
//!
//! ```toml
//! name = "capsule"
//! corners = []
//!
//! [[piece]]
//! kind = "analytic-expression"
//! interval = [0.0, 3.141592653589793]
//! r = "sin(t)"
//! z = "1.5*cos(t)"
//! ```
//!
//! Sampled pieces give `t`, `r`, `z` arrays and are interpolated by
//! Floater-Hormann barycentric rationals (blending degree 8 by default).
//! Parameter joins where the tangent turns are added to the corner list.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{CurvePoint, GeneratingCurve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PieceSpec {
    AnalyticExpression { interval: [f64; 2], r: String, z: String },
    Sampled {
        t: Vec<f64>,
        r: Vec<f64>,
        z: Vec<f64>,
        #[serde(default = "default_blend")]
        blend: usize,
    },
}

fn default_blend() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub corners: Vec<f64>,
    /// Point `(r, z)` inside the body used to orient normals.
    #[serde(default)]
    pub interior_ref: Option<[f64; 2]>,
    #[serde(rename = "piece")]
    pub pieces: Vec<PieceSpec>,
}

fn default_name() -> String {
    "user".into()
}

/// Barycentric rational interpolant with first and second derivatives.
#[derive(Debug, Clone)]
pub struct RationalInterpolant {
    x: Vec<f64>,
    w: Vec<f64>,
    f: Vec<f64>,
}

impl RationalInterpolant {
    pub fn new(x: &[f64], f: &[f64], blend: usize) -> Result<RationalInterpolant> {
        let n = x.len();
        if n < 2 || f.len() != n {
            return Err(Error::InvalidCurve(format!("sampled piece needs >= 2 matching samples, got {} and {}", n, f.len())));
        }
        if x.windows(2).any(|p| !(p[1] > p[0])) || x.iter().chain(f).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve("sample parameters must be finite and strictly increasing".into()));
        }
        let d = blend.min(n - 1);
        let last = n - 1;
        let w = (0..n)
            .map(|k| {
                let lo = k.saturating_sub(d);
                let hi = k.min(last - d);
                let mut s = 0.0;
                for i in lo..=hi {
                    let mut prod = 1.0;
                    for j in i..=i + d {
                        if j != k {
                            prod /= (x[k] - x[j]).abs();
                        }
                    }
                    s += prod;
                }
                if (k + d) % 2 == 1 {
                    -s
                } else {
                    s
                }
            })
            .collect();
        Ok(RationalInterpolant { x: x.to_vec(), w, f: f.to_vec() })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Exact `(r, r', r'')` at node `j`.
    fn at_node(&self, j: usize) -> (f64, f64, f64) {
        let (xj, fj, wj) = (self.x[j], self.f[j], self.w[j]);
        let mut d1 = 0.0;
        for k in (0..self.x.len()).filter(|&k| k != j) {
            d1 -= self.w[k] * (self.f[k] - fj) / (self.x[k] - xj);
        }
        d1 /= wj;
        let mut d2 = 0.0;
        for k in (0..self.x.len()).filter(|&k| k != j) {
            let h = self.x[k] - xj;
            d2 -= self.w[k] * ((self.f[k] - fj) / h - d1) / h;
        }
        (fj, d1, 2.0 * d2 / wj)
    }

    /// `(value, first, second)` derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        // the general formulas lose ~eps/|t - x_j|^2 in r''; near a node
        // step from the exact node values instead
        let j = self.x.partition_point(|&xj| xj < t).min(self.x.len() - 1);
        let near = [j.saturating_sub(1), j].into_iter().find(|&k| {
            let h = if k + 1 < self.x.len() { self.x[k + 1] - self.x[k] } else { self.x[k] - self.x[k - 1] };
            (t - self.x[k]).abs() < 5e-6 * h
        });
        if let Some(k) = near {
            let (v, d1, d2) = self.at_node(k);
            let s = t - self.x[k];
            return (v + s * d1 + 0.5 * s * s * d2, d1 + s * d2, d2);
        }
        let (mut d, mut n) = (0.0, 0.0);
        for k in 0..self.x.len() {
            let a = self.w[k] / (t - self.x[k]);
            d += a;
            n += a * self.f[k];
        }
        let r = n / d;
        let (mut s1, mut dd) = (0.0, 0.0);
        for k in 0..self.x.len() {
            let u = 1.0 / (t - self.x[k]);
            let a = self.w[k] * u;
            s1 += a * (r - self.f[k]) * u;
            dd -= a * u;
        }
        let r1 = s1 / d;
        let mut s2 = 0.0;
        for k in 0..self.x.len() {
            let u = 1.0 / (t - self.x[k]);
            s2 += 2.0 * self.w[k] * u * u * u * (self.f[k] - r);
        }
        let r2 = (s2 - 2.0 * r1 * dd) / d;
        (r, r1, r2)
    }
}

enum Piece {
    Analytic { lo: f64, hi: f64, r: Expr, z: Expr },
    Sampled { r: RationalInterpolant, z: RationalInterpolant },
}

impl Piece {
    fn interval(&self) -> (f64, f64) {
        match self {
            Piece::Analytic { lo, hi, .. } => (*lo, *hi),
            Piece::Sampled { r, .. } => r.interval(),
        }
    }

    fn eval(&self, t: f64) -> CurvePoint {
        match self {
            Piece::Analytic { r, z, .. } => {
                let (a, b) = (r.jet(t), z.jet(t));
                CurvePoint { r: a.v, z: b.v, dr: a.d, dz: b.d, ddr: a.dd, ddz: b.dd }
            }
            Piece::Sampled { r, z } => {
                let (a, b) = (r.eval(t), z.eval(t));
                CurvePoint { r: a.0, z: b.0, dr: a.1, dz: b.1, ddr: a.2, ddz: b.2 }
            }
        }
    }
}

fn build_piece(spec: &PieceSpec, index: usize) -> Result<Piece> {
    let ctx = |e: Error| Error::InvalidCurve(format!("piece {index}: {e}"));
    match spec {
        PieceSpec::AnalyticExpression { interval, r, z } => {
            let [lo, hi] = *interval;
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidCurve(format!("piece {index}: bad interval [{lo}, {hi}]")));
            }
            Ok(Piece::Analytic { lo, hi, r: Expr::parse(r).map_err(ctx)?, z: Expr::parse(z).map_err(ctx)? })
        }
        PieceSpec::Sampled { t, r, z, blend } => Ok(Piece::Sampled {
            r: RationalInterpolant::new(t, r, *blend).map_err(ctx)?,
            z: RationalInterpolant::new(t, z, *blend).map_err(ctx)?,
        }),
    }
}

/// Builds the curve described by `spec`.
pub fn build_user_curve(spec: &CurveSpec) -> Result<GeneratingCurve> {
    if spec.pieces.is_empty() {
        return Err(Error::InvalidCurve("curve has no pieces".into()));
    }
    let pieces: Vec<Piece> = spec.pieces.iter().enumerate().map(|(i, p)| build_piece(p, i)).collect::<Result<_>>()?;
    let mut corners = spec.corners.clone();
    for (k, pair) in pieces.windows(2).enumerate() {
        let (_, hi) = pair[0].interval();
        let (lo, _) = pair[1].interval();
        let scale = 1.0 + hi.abs().max(lo.abs());
        if (hi - lo).abs() > 1e-12 * scale {
            return Err(Error::InvalidCurve(format!("pieces {k} and {} are not contiguous in t ({hi} vs {lo})", k + 1)));
        }
        let (a, b) = (pair[0].eval(hi), pair[1].eval(lo));
        let size = 1.0 + a.r.abs().max(a.z.abs());
        if (a.r - b.r).hypot(a.z - b.z) > 1e-9 * size {
            return Err(Error::InvalidCurve(format!("gap between pieces {k} and {} at t = {hi}", k + 1)));
        }
        let turn = (a.dr * b.dz - a.dz * b.dr) / (a.dr.hypot(a.dz) * b.dr.hypot(b.dz));
        let same_way = a.dr * b.dr + a.dz * b.dz > 0.0;
        if turn.abs() > 1e-8 || !same_way {
            corners.push(hi);
        }
    }
    let lo = pieces[0].interval().0;
    let hi = pieces[pieces.len() - 1].interval().1;
    let starts: Vec<f64> = pieces.iter().map(|p| p.interval().0).collect();
    let pieces = Arc::new(pieces);
    let func = move |t: f64| {
        let k = starts.partition_point(|&s| s <= t).saturating_sub(1);
        pieces[k].eval(t)
    };
    GeneratingCurve::custom(spec.name.clone(), (lo, hi), corners, spec.interior_ref, func)
}

/// Parses a curve definition from TOML text.
pub fn parse_curve(text: &str) -> Result<CurveSpec> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_curve_file(path: &Path) -> Result<GeneratingCurve> {
    let text = std::fs::read_to_string(path)?;
    let spec = parse_curve(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    build_user_curve(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sphere_spec() -> CurveSpec {
        parse_curve(
            r#"
            name = "expr-sphere"
            [[piece]]
            kind = "analytic-expression"
            interval = [0.0, 3.141592653589793]
            r = "2*sin(t)"
            z = "2*cos(t)"
            "#,
        )
        .unwrap()
    }

    #[test]
    fn expression_sphere_matches_builtin() {
        let c = build_user_curve(&sphere_spec()).unwrap();
        let b = crate::geometry::make_builtin_curve("sphere").unwrap();
        assert_eq!(c.axis_touch(), (true, true));
        for &t in &[0.2, 1.0, 2.9] {
            let (x, y) = (c.frame(t).unwrap(), b.frame(t).unwrap());
            assert!((x.normal[0] - y.normal[0]).abs() < 1e-15 && (x.normal[1] - y.normal[1]).abs() < 1e-15);
            assert!((x.ddz - y.ddz).abs() < 1e-14);
        }
    }

    #[test]
    fn sampled_interpolant_is_high_order() {
        let n = 41;
        let t: Vec<f64> = (0..n).map(|k| PI * k as f64 / (n - 1) as f64).collect();
        let r: Vec<f64> = t.iter().map(|t| 2.0 * t.sin()).collect();
        let ip = RationalInterpolant::new(&t, &r, 8).unwrap();
        for &x in &[0.013, 0.5, 1.234, 3.1] {
            let (v, d, dd) = ip.eval(x);
            assert!((v - 2.0 * x.sin()).abs() < 1e-9, "{x}");
            assert!((d - 2.0 * x.cos()).abs() < 1e-7, "{x}");
            assert!((dd + 2.0 * x.sin()).abs() < 1e-5, "{x}");
        }
        // at a node
        for x in [t[7], t[7] + 1e-9, t[0], t[n - 1]] {
            let (v, d, dd) = ip.eval(x);
            assert!((v - 2.0 * x.sin()).abs() < 1e-9 && (d - 2.0 * x.cos()).abs() < 1e-7 && (dd + 2.0 * x.sin()).abs() < 1e-5, "{x}");
        }
    }

    #[test]
    fn kinked_join_becomes_corner() {
        // cone on a disk: z goes up the axis, then the lid
        let spec = parse_curve(
            r#"
            [[piece]]
            kind = "analytic-expression"
            interval = [0.0, 1.0]
            r = "t"
            z = "-1 + t"
            [[piece]]
            kind = "analytic-expression"
            interval = [1.0, 2.0]
            r = "2 - t"
            z = "0"
            "#,
        )
        .unwrap();
        let c = build_user_curve(&spec).unwrap();
        assert_eq!(c.corners(), &[1.0]);
        assert!(matches!(c.frame(1.0), Err(Error::AtCorner { .. })));
    }

    #[test]
    fn rejects_bad_definitions() {
        let gap = r#"
            [[piece]]
            kind = "analytic-expression"
            interval = [0.0, 1.0]
            r = "t"
            z = "t"
            [[piece]]
            kind = "analytic-expression"
            interval = [1.0, 2.0]
            r = "t"
            z = "5"
        "#;
        assert!(build_user_curve(&parse_curve(gap).unwrap()).is_err());
        let e = parse_curve("[[piece]]\nkind = \"spline\"\n").unwrap_err();
        assert!(e.to_string().contains("line"), "{e}");
        let bad_expr = "[[piece]]\nkind = \"analytic-expression\"\ninterval = [0, 1]\nr = \"sin(\"\nz = \"t\"\n";
        assert!(build_user_curve(&parse_curve(bad_expr).unwrap()).is_err());
    }
}
