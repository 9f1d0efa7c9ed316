//! Panel rules, Legendre interpolation and singular quadrature.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle;

/// Gauss-Legendre rule on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    /// Nodes and weights mapped to `[a, b]`.
    pub fn scaled(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, h * w))
    }
}

/// `(P_0 .. P_{n-1})(x)` and their derivatives.
pub fn legendre_all(n: usize, x: f64, p: &mut [f64], dp: &mut [f64]) {
    if n == 0 {
        return;
    }
    p[0] = 1.0;
    dp[0] = 0.0;
    if n == 1 {
        return;
    }
    p[1] = x;
    dp[1] = 1.0;
    for j in 1..n - 1 {
        let jf = j as f64;
        p[j + 1] = ((2.0 * jf + 1.0) * x * p[j] - jf * p[j - 1]) / (jf + 1.0);
        dp[j + 1] = dp[j - 1] + (2.0 * jf + 1.0) * p[j];
    }
}

/// Classical `p`-point Gauss-Legendre rule by Newton iteration.
pub fn gauss_legendre(p: usize) -> PanelRule {
    assert!(p >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; p];
    let mut weights = vec![0.0; p];
    let n = p as f64;
    for i in 0..p.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dpn = 1.0;
        for it in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 1..p {
                let jf = j as f64;
                let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let pn = if p == 1 { x } else { p1 };
            let pm = if p == 1 { 1.0 } else { p0 };
            dpn = n * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() < 1e-16 && it > 2 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dpn * dpn);
        nodes[p - 1 - i] = x;
        weights[p - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if p % 2 == 1 {
        nodes[p / 2] = 0.0;
    }
    PanelRule { nodes, weights }
}

/// Node values to Legendre coefficients and back, plus spectral
/// differentiation, for one reference panel.
#[derive(Debug, Clone)]
pub struct LegendreTransform {
    p: usize,
    /// `forward[j][n]`: coefficient `j` from value at node `n`.
    pub forward: Vec<Vec<f64>>,
    /// `inverse[n][j] = P_j(x_n)`.
    pub inverse: Vec<Vec<f64>>,
    /// `diff[n][k]`: d/du at node `n` from value at node `k`.
    pub diff: Vec<Vec<f64>>,
}

impl LegendreTransform {
    pub fn order(&self) -> usize {
        self.p
    }

    /// Interpolation weights `l_n(u)` so `f(u) = sum_n l_n(u) f(x_n)`.
    pub fn interp_row(&self, u: f64, out: &mut [f64]) {
        self.rows(u, Some(out), None);
    }

    /// Derivative weights `l_n'(u)`.
    pub fn deriv_row(&self, u: f64, out: &mut [f64]) {
        self.rows(u, None, Some(out));
    }

    /// Both interpolation and derivative rows.
    pub fn rows(&self, u: f64, val: Option<&mut [f64]>, der: Option<&mut [f64]>) {
        let p = self.p;
        let mut pj = vec![0.0; p];
        let mut dpj = vec![0.0; p];
        legendre_all(p, u, &mut pj, &mut dpj);
        if let Some(out) = val {
            for n in 0..p {
                out[n] = (0..p).map(|j| pj[j] * self.forward[j][n]).sum();
            }
        }
        if let Some(out) = der {
            for n in 0..p {
                out[n] = (0..p).map(|j| dpj[j] * self.forward[j][n]).sum();
            }
        }
    }

    pub fn to_coefficients(&self, values: &[f64]) -> Vec<f64> {
        self.forward.iter().map(|row| row.iter().zip(values).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn to_values(&self, coeffs: &[f64]) -> Vec<f64> {
        self.inverse.iter().map(|row| row.iter().zip(coeffs).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Transform matrices for order `p`.
pub fn legendre_matrices(p: usize) -> LegendreTransform {
    let rule = gauss_legendre(p);
    let mut inverse = vec![vec![0.0; p]; p];
    let mut dvals = vec![vec![0.0; p]; p];
    for n in 0..p {
        let (mut pj, mut dpj) = (vec![0.0; p], vec![0.0; p]);
        legendre_all(p, rule.nodes[n], &mut pj, &mut dpj);
        inverse[n] = pj;
        dvals[n] = dpj;
    }
    let mut forward = vec![vec![0.0; p]; p];
    for j in 0..p {
        for n in 0..p {
            forward[j][n] = rule.weights[n] * inverse[n][j] * (2.0 * j as f64 + 1.0) * 0.5;
        }
    }
    let mut diff = vec![vec![0.0; p]; p];
    for n in 0..p {
        for k in 0..p {
            diff[n][k] = (0..p).map(|j| dvals[n][j] * forward[j][k]).sum();
        }
    }
    LegendreTransform { p, forward, inverse, diff }
}

/// Node/weight set on `[-1, 1]` for integrands singular near one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Parameters of the graded composite rule.
#[derive(Debug, Clone, Copy)]
pub struct GradedOptions {
    /// Gauss order on pieces no longer than their distance to the singularity.
    pub piece_order: usize,
    /// Gauss order of the power-substituted end pieces.
    pub end_order: usize,
    /// Exponent `q` of `x = a + len v^q` on the end pieces.
    pub power: i32,
    /// Length below which an end piece touching the singularity is accepted.
    pub min_len: f64,
}

impl Default for GradedOptions {
    fn default() -> Self {
        GradedOptions { piece_order: 12, end_order: 16, power: 5, min_len: 2.0 / 256.0 }
    }
}

fn graded_pieces(
    a: f64,
    b: f64,
    u_star: f64,
    h: f64,
    opts: &GradedOptions,
    gl_piece: &PanelRule,
    gl_end: &PanelRule,
    out: &mut SingularRule,
) {
    let len = b - a;
    let dist = if u_star < a {
        a - u_star
    } else if u_star > b {
        u_star - b
    } else {
        0.0
    };
    let eff = dist.hypot(h);
    if len <= eff || len < 1e-13 {
        for (x, w) in gl_piece.scaled(a, b) {
            out.nodes.push(x);
            out.weights.push(w);
        }
        return;
    }
    if dist == 0.0 && u_star > a && u_star < b {
        graded_pieces(a, u_star, u_star, h, opts, gl_piece, gl_end, out);
        graded_pieces(u_star, b, u_star, h, opts, gl_piece, gl_end, out);
        return;
    }
    if dist == 0.0 && h == 0.0 && len <= opts.min_len {
        let q = opts.power as f64;
        let left = u_star <= a;
        let mut pts: Vec<(f64, f64)> = gl_end
            .scaled(0.0, 1.0)
            .map(|(v, w)| {
                let x = len * v.powi(opts.power);
                let dw = len * q * v.powi(opts.power - 1) * w;
                if left {
                    (a + x, dw)
                } else {
                    (b - x, dw)
                }
            })
            .collect();
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        for (x, w) in pts {
            out.nodes.push(x);
            out.weights.push(w);
        }
        return;
    }
    let mid = 0.5 * (a + b);
    graded_pieces(a, mid, u_star, h, opts, gl_piece, gl_end, out);
    graded_pieces(mid, b, u_star, h, opts, gl_piece, gl_end, out);
}

/// Composite Gauss rule on `[-1, 1]` graded toward `u_star`, for integrands
/// with a logarithmic singularity (and possibly a jump) there, or a near
/// singularity at complex distance `h` from the real axis.
pub fn graded_rule(u_star: f64, h: f64, opts: &GradedOptions) -> SingularRule {
    let gl_piece = gauss_legendre(opts.piece_order);
    let gl_end = gauss_legendre(opts.end_order);
    let mut out = SingularRule { nodes: Vec::new(), weights: Vec::new() };
    graded_pieces(-1.0, 1.0, u_star, h.abs(), opts, &gl_piece, &gl_end, &mut out);
    out
}

/// Rule produced by adaptive Gauss-Kronrod subdivision driven by a
/// log-singular model family times the interpolation basis.
pub fn adaptive_rule(u_star: f64, h: f64, lt: &LegendreTransform, tol: f64) -> Result<SingularRule> {
    let p = lt.order();
    let mut breaks = vec![-1.0];
    if u_star > -1.0 && u_star < 1.0 {
        breaks.push(u_star);
    }
    breaks.push(1.0);
    let mut row = vec![0.0; p];
    let res = oracle::integrate(
        |u, out| {
            lt.interp_row(u, &mut row);
            let lg = 0.5 * ((u - u_star).powi(2) + h * h).ln();
            for n in 0..p {
                out[n] = Complex64::new(row[n] * lg, row[n]);
            }
        },
        &breaks,
        p,
        tol,
        tol,
        40,
    )?;
    let mut out = SingularRule { nodes: Vec::new(), weights: Vec::new() };
    for (a, b) in res.pieces {
        for (x, w) in oracle::kronrod15(a, b) {
            out.nodes.push(x);
            out.weights.push(w);
        }
    }
    Ok(out)
}

/// Precomputed graded rules keyed by target location, with a plain-text
/// file representation.
///
/// File layout: a `#` comment line, a header line `order <p> count <k>`,
/// then one line `<target> <node> <weight>` per node in scientific notation.
/// Rules for the same target are contiguous.
#[derive(Debug, Clone, Default)]
pub struct RuleTable {
    order: usize,
    rules: BTreeMap<u64, SingularRule>,
}

fn key(u: f64) -> u64 {
    u.to_bits()
}

impl RuleTable {
    /// Rules for the `p` self-panel targets and for targets on equal,
    /// half and double sized neighbours on either side.
    pub fn generate(p: usize, opts: &GradedOptions) -> RuleTable {
        let rule = gauss_legendre(p);
        let mut rules = BTreeMap::new();
        for &x in &rule.nodes {
            rules.insert(key(x), graded_rule(x, 0.0, opts));
            for ratio in [0.5, 1.0, 2.0] {
                let left = -1.0 - ratio * (1.0 - x);
                let right = 1.0 + ratio * (1.0 + x);
                rules.insert(key(left), graded_rule(left, 0.0, opts));
                rules.insert(key(right), graded_rule(right, 0.0, opts));
            }
        }
        RuleTable { order: p, rules }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, u_star: f64) -> Option<&SingularRule> {
        self.rules.get(&key(u_star))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        let count: usize = self.rules.values().map(|r| r.nodes.len()).sum();
        writeln!(f, "# graded singular quadrature rules on [-1, 1]: target node weight")?;
        writeln!(f, "order {} count {}", self.order, count)?;
        for (k, r) in &self.rules {
            let u = f64::from_bits(*k);
            for (x, w) in r.nodes.iter().zip(&r.weights) {
                writeln!(f, "{u:.17e} {x:.17e} {w:.17e}")?;
            }
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<RuleTable> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut order = None;
        let mut count = None;
        let mut rules: BTreeMap<u64, SingularRule> = BTreeMap::new();
        let mut seen = 0usize;
        for (lineno, line) in file.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Error::Config(format!("rule table line {}: {m}", lineno + 1));
            let parts: Vec<&str> = line.split_whitespace().collect();
            if order.is_none() {
                if parts.len() != 4 || parts[0] != "order" || parts[2] != "count" {
                    return Err(bad("expected `order <p> count <k>` header"));
                }
                order = Some(parts[1].parse::<usize>().map_err(|_| bad("bad order"))?);
                count = Some(parts[3].parse::<usize>().map_err(|_| bad("bad count"))?);
                continue;
            }
            if parts.len() != 3 {
                return Err(bad("expected three columns"));
            }
            let v: Vec<f64> = parts
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| bad("bad number")))
                .collect::<Result<_>>()?;
            let r = rules
                .entry(key(v[0]))
                .or_insert_with(|| SingularRule { nodes: Vec::new(), weights: Vec::new() });
            r.nodes.push(v[1]);
            r.weights.push(v[2]);
            seen += 1;
        }
        let order = order.ok_or_else(|| Error::Config("rule table: missing header".into()))?;
        if Some(seen) != count {
            return Err(Error::Config(format!("rule table: header count {count:?}, found {seen}")));
        }
        Ok(RuleTable { order, rules })
    }
}

/// Which singular rule generator to use.
#[derive(Debug, Clone)]
pub enum SingularRuleBackend {
    /// Adaptive Gauss-Kronrod subdivision to the given tolerance.
    AdaptiveOracle { tol: f64 },
    /// Graded composite rules, looked up in the table when present and
    /// generated by the same recipe otherwise.
    PrecomputedTables { table: Option<Arc<RuleTable>>, opts: GradedOptions },
}

impl Default for SingularRuleBackend {
    fn default() -> Self {
        SingularRuleBackend::PrecomputedTables { table: None, opts: GradedOptions::default() }
    }
}

impl SingularRuleBackend {
    pub fn tables(p: usize) -> Self {
        let opts = GradedOptions::default();
        SingularRuleBackend::PrecomputedTables { table: Some(Arc::new(RuleTable::generate(p, &opts))), opts }
    }

    /// Rule for a singularity at reference coordinate `u_star`, lifted off
    /// the real axis by `h` (0 for on-curve targets).
    pub fn rule(&self, u_star: f64, h: f64, lt: &LegendreTransform) -> Result<SingularRule> {
        match self {
            SingularRuleBackend::AdaptiveOracle { tol } => adaptive_rule(u_star, h, lt, *tol),
            SingularRuleBackend::PrecomputedTables { table, opts } => {
                if h == 0.0 {
                    if let Some(r) = table.as_ref().and_then(|t| t.get(u_star)) {
                        return Ok(r.clone());
                    }
                }
                Ok(graded_rule(u_star, h, opts))
            }
        }
    }
}

/// Weight row `W_n ~ int_{-1}^{1} k(u) l_n(u) du` for a kernel with at most a
/// logarithmic singularity at `u_star`.
pub fn singular_panel_integrate<K>(
    kernel: K,
    u_star: f64,
    lt: &LegendreTransform,
    backend: &SingularRuleBackend,
) -> Result<Vec<Complex64>>
where
    K: Fn(f64) -> Complex64,
{
    let p = lt.order();
    let mut row = vec![0.0; p];
    match backend {
        SingularRuleBackend::AdaptiveOracle { tol } => {
            let mut breaks = vec![-1.0];
            if u_star > -1.0 && u_star < 1.0 {
                breaks.push(u_star);
            }
            breaks.push(1.0);
            let res = oracle::integrate(
                |u, out| {
                    lt.interp_row(u, &mut row);
                    let k = kernel(u);
                    for n in 0..p {
                        out[n] = k * row[n];
                    }
                },
                &breaks,
                p,
                *tol,
                *tol,
                40,
            )?;
            Ok(res.value)
        }
        SingularRuleBackend::PrecomputedTables { .. } => {
            let rule = backend.rule(u_star, 0.0, lt)?;
            let mut out = vec![Complex64::new(0.0, 0.0); p];
            for (u, w) in rule.nodes.iter().zip(&rule.weights) {
                lt.interp_row(*u, &mut row);
                let k = kernel(*u) * *w;
                for n in 0..p {
                    out[n] += k * row[n];
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rules() {
        let r = gauss_legendre(1);
        assert_eq!((r.nodes[0], r.weights[0]), (0.0, 2.0));
        let r = gauss_legendre(2);
        assert!((r.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn p30_exactness() {
        let r = gauss_legendre(30);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let i: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(58)).sum();
        assert!((i - 2.0 / 59.0).abs() < 1e-14);
    }

    #[test]
    fn transform_round_trip() {
        let lt = legendre_matrices(12);
        let rule = gauss_legendre(12);
        let vals: Vec<f64> = rule.nodes.iter().map(|x| (2.0 * x).sin() + x * x).collect();
        let back = lt.to_values(&lt.to_coefficients(&vals));
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
        let c = lt.to_coefficients(&[3.0; 12]);
        assert!((c[0] - 3.0).abs() < 1e-14 && c[1..].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn log_row_matches_closed_form() {
        let lt = legendre_matrices(16);
        let x0: f64 = 0.1;
        let exact = (1.0 - x0) * ((1.0 - x0).ln() - 1.0) + (1.0 + x0) * ((1.0 + x0).ln() - 1.0);
        for backend in [SingularRuleBackend::AdaptiveOracle { tol: 1e-13 }, SingularRuleBackend::default()] {
            let row = singular_panel_integrate(|u| Complex64::new((u - x0).abs().ln(), 0.0), x0, &lt, &backend)
                .unwrap();
            let s: Complex64 = row.iter().sum();
            assert!((s.re - exact).abs() < 1e-12, "{backend:?}: {}", s.re - exact);
        }
    }
}
