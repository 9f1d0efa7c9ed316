#![allow(dead_code, clippy::too_many_arguments)]

//! Shared oracles for the integration tests.

use std::f64::consts::PI;

use axielastic::geometry::{build_mesh, make_builtin_curve, Frame, GeneratingCurve, PanelMesh};
use axielastic::incident::IncidentField;
use axielastic::operators::{add_jumps, assemble_operators, AssemblyOptions};
use axielastic::oracle::integrate;
use axielastic::postprocess::{EvalOptions, ExtinctionReport, FieldEvaluator, ProbeSphere};
use axielastic::quadrature::SingularRuleBackend;
use axielastic::solver::{solve_all, SolveReport, SolverOptions, SurfaceDensityModes};
use num_complex::Complex64 as C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `g(t) r(t)^k e^{i m theta}` with `g = a cos(b t + c) + d`, smooth on
/// surfaces of revolution when `k >= |m|`.
#[derive(Debug, Clone, Copy)]
pub struct Profile {
    pub a: C64,
    pub b: f64,
    pub c: f64,
    pub d: C64,
}

impl Profile {
    pub fn sample(seed: u64) -> Profile {
        let h = |k: u64| (((seed * 7919 + k * 104_729) % 1000) as f64) / 1000.0;
        Profile {
            a: C64::new(0.5 + h(1), h(2) - 0.5),
            b: 1.0 + 2.0 * h(3),
            c: 2.0 * PI * h(4),
            d: C64::new(h(5) - 0.5, 0.3 + h(6)),
        }
    }

    /// Value and `t`-derivative of `g r^k` at frame `f`.
    pub fn eval(&self, f: &Frame, k: i32) -> (C64, C64) {
        let arg = self.b * f.t + self.c;
        let g = self.a * arg.cos() + self.d;
        let dg = -self.a * (self.b * arg.sin());
        if k == 0 {
            return (g, dg);
        }
        let rk = f.r.powi(k);
        let drk = k as f64 * f.r.powi(k - 1) * f.dr;
        (g * rk, dg * rk + g * drk)
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cdot(a: [f64; 3], b: [C64; 3]) -> C64 {
    b[0] * a[0] + b[1] * a[1] + b[2] * a[2]
}

fn ccross(a: [C64; 3], b: [f64; 3]) -> [C64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// `grad_x G` for `G = e^{i k R} / (4 pi R)`.
fn grad_g(kappa: f64, d: [f64; 3]) -> (C64, [C64; 3]) {
    let r = dot3(d, d).sqrt();
    let g = C64::new(0.0, kappa * r).exp() / (4.0 * PI * r);
    let f = C64::new(-1.0, kappa * r) * g / (r * r);
    (g, [f * d[0], f * d[1], f * d[2]])
}

/// Outward normal derivative along `t` of the meridian normal.
fn normal_dt(f: &Frame, o: f64) -> [f64; 2] {
    [o * (f.dc * f.dz + f.c * f.ddz), -o * (f.dc * f.dr + f.c * f.ddr)]
}

/// Direct and regularized forms of `v . grad S sigma` and `a . curl S J` at
/// `x`, each by nested adaptive quadrature over the surface. Returns the
/// relative discrepancies of the two identities.
pub fn regularization_discrepancy(curve: &GeneratingCurve, x: [f64; 3], v: [f64; 3], a: [f64; 3], kappa: f64, m: i64, seed: u64) -> [f64; 2] {
    let o = curve.orientation();
    let k = m.unsigned_abs() as i32;
    let (ps, p1, p2) = (Profile::sample(seed), Profile::sample(seed + 1), Profile::sample(seed + 2));
    let (ta, tb) = curve.interval();
    let mut breaks = vec![ta];
    breaks.extend(curve.corners().iter().copied().filter(|&c| c > ta && c < tb));
    breaks.push(tb);
    let th0 = x[1].atan2(x[0]);
    let tol = 1e-12;

    // side: 0 direct, 1 regularized; components [H-type, N-type]
    let side = |which: usize| -> [C64; 2] {
        let res = integrate(
            |t, out: &mut [C64]| {
                let f = curve.frame_unchecked(t);
                let (sg, dsg) = ps.eval(&f, k);
                let (j1, _) = p1.eval(&f, k + 1);
                let (j2, dj2) = p2.eval(&f, k + 1);
                let dn = normal_dt(&f, o);
                let inner = integrate(
                    |th, w: &mut [C64]| {
                        let e = C64::new(0.0, m as f64 * th).exp();
                        let [t3, eth, n3] = f.basis3(th);
                        let y = f.point3(th);
                        let (g, gx) = grad_g(kappa, [x[0] - y[0], x[1] - y[1], x[2] - y[2]]);
                        let sigma = sg * e;
                        let jv = [0, 1, 2].map(|i| (j1 * e) * t3[i] + (j2 * e) * eth[i]);
                        if which == 0 {
                            w[0] = cdot(v, gx) * sigma;
                            // a . (grad_x G x J) = J . (a x grad_x G)
                            let axg = [
                                gx[2] * a[1] - gx[1] * a[2],
                                gx[0] * a[2] - gx[2] * a[0],
                                gx[1] * a[0] - gx[0] * a[1],
                            ];
                            w[1] = (0..3).map(|i| jv[i] * axg[i]).sum();
                        } else {
                            let (s, c) = th.sin_cos();
                            let dn3 = [dn[0] * c, dn[0] * s, dn[1]];
                            let dn_th = [-f.normal[0] * s, f.normal[0] * c, 0.0];
                            let vn = dot3(v, n3);
                            // d/dn_y G = -n . grad_x G
                            let dng = -cdot(n3, gx);
                            let div_pv = -vn * (dot3(t3, dn3) / f.jac + f.normal[0] / f.r);
                            let pv = [0, 1, 2].map(|i| v[i] - vn * n3[i]);
                            let grad_s = [0, 1, 2].map(|i| (dsg * e / f.jac) * t3[i] + (sigma * C64::new(0.0, m as f64 / f.r)) * eth[i]);
                            let pv_grad: C64 = (0..3).map(|i| grad_s[i] * pv[i]).sum();
                            w[0] = g * (sigma * div_pv + pv_grad) - dng * vn * sigma;
                            // J x n = o (J1 e_theta - J2 t)
                            let jxn = [0, 1, 2].map(|i| ((j1 * e) * eth[i] - (j2 * e) * t3[i]) * o);
                            let grad_an = [0, 1, 2].map(|i| t3[i] * (dot3(a, dn3) / f.jac) + eth[i] * (dot3(a, dn_th) / f.r));
                            let div_jxn = (-(f.dr * j2 + f.r * dj2) / (f.r * f.jac) + C64::new(0.0, m as f64) * j1 / f.r) * (o * e);
                            let an = dot3(a, n3);
                            let n_jxa = cdot(n3, ccross(jv, a));
                            w[1] = g * ((0..3).map(|i| jxn[i] * grad_an[i]).sum::<C64>() + div_jxn * an) - dng * n_jxa;
                        }
                    },
                    &[th0, th0 + 2.0 * PI],
                    2,
                    tol,
                    1e-16,
                    50,
                )
                .expect("azimuthal quadrature");
                let dsa = f.r * f.jac;
                out[0] = inner.value[0] * dsa;
                out[1] = inner.value[1] * dsa;
            },
            &breaks,
            2,
            tol,
            1e-16,
            50,
        )
        .expect("meridian quadrature");
        [res.value[0], res.value[1]]
    };
    let (d, r) = (side(0), side(1));
    [0, 1].map(|i| (d[i] - r[i]).norm() / d[i].norm().max(r[i].norm()))
}

/// Point at distance `h` outside the surface along the normal at `t`,
/// azimuth `theta`.
pub fn offset_point(curve: &GeneratingCurve, t: f64, theta: f64, h: f64) -> [f64; 3] {
    let f = curve.frame_unchecked(t);
    let [_, _, n] = f.basis3(theta);
    let p = f.point3(theta);
    [p[0] + h * n[0], p[1] + h * n[1], p[2] + h * n[2]]
}

/// Densities of one mode sampled from smooth profiles.
pub fn smooth_mode_densities(mesh: &PanelMesh, m: i64, kp: f64, ks: f64, seed: u64) -> SurfaceDensityModes {
    let mm = m.unsigned_abs() as usize;
    let mut d = SurfaceDensityModes::zeros(mm, mesh.n_points(), kp, ks);
    let k = (m + mm as i64) as usize;
    let kk = mm as i32;
    let (ps, p1, p2) = (Profile::sample(seed), Profile::sample(seed + 1), Profile::sample(seed + 2));
    for i in 0..mesh.n_points() {
        let f = mesh.node(i);
        d.sigma[k][i] = ps.eval(f, kk).0;
        d.j1[k][i] = p1.eval(f, kk + 1).0;
        d.j2[k][i] = p2.eval(f, kk + 1).0;
    }
    d
}

/// Max over sampled nodes of the gap between the field at `x_i + h n_i` and
/// the assembled one-sided limit, for each `h`.
pub fn jump_limit_errors(mesh: &PanelMesh, m: i64, kp: f64, ks: f64, hs: &[f64], nodes: &[usize], seed: u64) -> Vec<f64> {
    let n = mesh.n_points();
    let dens = smooth_mode_densities(mesh, m, kp, ks, seed);
    let k = (m + dens.m_max as i64) as usize;
    let mut a = assemble_operators(mesh, kp, ks, &[m], &AssemblyOptions::default()).unwrap().remove(0);
    add_jumps(&mut a, n);
    let mut x = dens.sigma[k].clone();
    x.extend_from_slice(&dens.j1[k]);
    x.extend_from_slice(&dens.j2[k]);
    let ax = a.matvec(&x);
    let o = mesh.curve().orientation();
    let ev = FieldEvaluator::new(mesh, &dens, EvalOptions::default()).unwrap();
    hs.iter()
        .map(|&h| {
            nodes
                .iter()
                .map(|&i| {
                    let f = mesh.node(i);
                    let xp = [f.r + h * f.normal[0], 0.0, f.z + h * f.normal[1]];
                    let (u, _) = ev.scattered_field(xp).unwrap();
                    let [t3, e3, n3] = f.basis3(0.0);
                    let un = cdot(n3, u);
                    let ut = cdot(t3, u);
                    let ue = cdot(e3, u);
                    // (n x u) . t = o u . e_theta, (n x u) . e_theta = -o u . t
                    let got = [un, ue * o, -ut * o];
                    let want = [ax[i], ax[n + i], ax[2 * n + i]];
                    let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
                    (0..3).map(|c| (got[c] - want[c]).norm()).fold(0.0, f64::max) / scale
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Standard point-source extinction run.
pub struct ExtinctionRun {
    pub e: ExtinctionReport,
    pub report: SolveReport,
    pub n_pts: usize,
    pub m_max: usize,
    pub seconds: f64,
}

pub fn extinction_run(name: &str, n_panels: usize, p: usize, depth: u32, kp: f64, ks: f64, tables: bool, m_cap: usize) -> ExtinctionRun {
    let t = std::time::Instant::now();
    let mesh = build_mesh(&make_builtin_curve(name).unwrap(), n_panels, p, depth).unwrap();
    let field = IncidentField::default_point_source(kp, ks);
    let mut o = SolverOptions { m_cap, ..Default::default() };
    if tables {
        o.assembly.backend = SingularRuleBackend::tables(p);
    }
    let (d, report) = solve_all(&mesh, &field, &o).unwrap();
    let ev = FieldEvaluator::new(&mesh, &d, EvalOptions::default()).unwrap();
    let e = ev.extinction_error(&field, &ProbeSphere::default()).unwrap();
    ExtinctionRun { e, n_pts: report.n_pts, m_max: d.m_max, report, seconds: t.elapsed().as_secs_f64() }
}
