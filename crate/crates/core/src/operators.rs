//! Per-mode Nyström assembly of the coupled boundary system.
//!
//! Unknowns per node: `sigma`, `J1` (along `t`), `J2` (along `e_theta`).
//! Rows per node: normal equation, then the `t` and `e_theta` components of
//! the tangential equation. Matrices are ordered by blocks:
//! `[sigma | J1 | J2]` columns and `[n | t | theta]` rows, `N` each.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::geometry::{Frame, PanelMesh};
use crate::kernels::{modal_kernels_sep, KernelOptions, ModalKernelValues};
use crate::quadrature::SingularRuleBackend;
use crate::surface::{combo, geometric_kernel_parts, pair, pair_phi, GeometricKernelParts, Trig};

type C64 = Complex64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Tuning for the Nyström assembly.
#[derive(Debug, Clone)]
pub struct AssemblyOptions {
    pub kernel: KernelOptions,
    pub backend: SingularRuleBackend,
    /// A non-adjacent panel closer to the target than this multiple of its
    /// own arclength is integrated with a graded rule.
    pub near_factor: f64,
    /// Byte budget for simultaneously assembled mode matrices.
    pub memory_budget: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            kernel: KernelOptions::default(),
            backend: SingularRuleBackend::default(),
            near_factor: 0.5,
            memory_budget: 1 << 30,
        }
    }
}

/// Assembled matrix of one azimuthal mode, jump terms included.
#[derive(Debug, Clone)]
pub struct ModalSystem {
    pub m: i64,
    pub kappa_p: f64,
    pub kappa_s: f64,
    pub n_pts: usize,
    pub matrix: DenseMatrix,
}

// coefficient slots of one source point: value and parameter-derivative
// couplings of each unknown
const SIG: usize = 0;
const DSIG: usize = 1;
const J1: usize = 2;
const J2: usize = 3;
const DJ2: usize = 4;

/// Mode-independent data of one (target, source) coupling.
struct Coupling {
    parts: GeometricKernelParts,
    o: f64,
    x: Frame,
    y: Frame,
}

impl Coupling {
    /// Kernel coefficients of one source point for mode `m`, rows
    /// `[n, t, theta]`, slots `[sig, sig', J1, J2, J2']`, per unit measure.
    fn coeffs(&self, kp: &ModalKernelValues, ks: &ModalKernelValues, m: i64) -> [[C64; 5]; 3] {
        let (x, y, g, o) = (&self.x, &self.y, &self.parts, self.o);
        let (ntr, ntz) = (x.normal[0], x.normal[1]);
        let (ttr, ttz) = (x.tangent[0], x.tangent[1]);
        let (nr, nz) = (y.normal[0], y.normal[1]);
        let im = C64::new(0.0, m as f64);
        let mut out = [[ZERO; 5]; 3];

        // K: n_x . grad_x S sigma
        out[0][SIG] = kp.drt.get(m) * ntr + kp.dzt.get(m) * ntz;

        // N: n_x . curl S J, with the curl moved to the source by parts
        let dny_s = combo(nr, &ks.dr, nz, &ks.dz, m);
        let gs_nn = pair(g.nn, &ks.g, m);
        out[0][J1] = pair(g.grad_nn_theta, &ks.g, m) * o + im * gs_nn * (o / y.r)
            + dny_s.pair(Trig::new(0.0, 0.0, ntr)) * o;
        out[0][J2] = -pair(g.grad_nn_t, &ks.g, m) * o - gs_nn * (o * y.dr / (y.r * y.jac))
            - dny_s.pair(g.nx_ty) * o;
        out[0][DJ2] = -gs_nn * (o / y.jac);

        // H: n x grad S sigma; D(v) is the regularized v . grad S sigma
        let dny_p = combo(nr, &kp.dr, nz, &kp.dz, m);
        let d_val = |i: usize| {
            pair(g.div_proj[i], &kp.g, m) + im * pair(g.proj_theta[i], &kp.g, m) / y.r - dny_p.pair(g.v_dot_n[i])
        };
        let d_der = |i: usize| pair(g.proj_t[i], &kp.g, m) * y.c;
        out[1][SIG] = d_val(1) * o;
        out[1][DSIG] = d_der(1) * o;
        out[2][SIG] = -d_val(0) * o;
        out[2][DSIG] = -d_der(0) * o;

        // M: n_x x curl S J = grad(n_x . S J) - (n_x . grad) S J
        let dt = combo(ttr, &ks.drt, ttz, &ks.dzt, m);
        let dn = combo(ntr, &ks.drt, ntz, &ks.dzt, m);
        out[1][J1] = dt.pair(g.nx_ty) - dn.pair(g.proj_t[0]);
        out[1][J2] = dt.pair(g.nx_etheta) - dn.pair(g.proj_theta[0]);
        out[2][J1] = pair_phi(g.nx_ty, &ks.g, m) / x.r - dn.pair(g.proj_t[1]);
        out[2][J2] = pair_phi(g.nx_etheta, &ks.g, m) / x.r - dn.pair(g.proj_theta[1]);
        out
    }
}

/// Row storage for one target: per mode, the `[n, t, theta]` rows.
type TargetRows<'a> = Vec<[&'a mut [C64]; 3]>;

fn is_near(mesh: &PanelMesh, target: &Frame, k: usize, factor: f64) -> Option<(usize, f64)> {
    let range = mesh.panel_nodes(k);
    let len: f64 = range.clone().map(|j| mesh.node(j).jac * mesh.param_weight(j)).sum();
    let (mut best, mut arg) = (f64::INFINITY, range.start);
    for j in range {
        let f = mesh.node(j);
        let d = (f.r - target.r).hypot(f.z - target.z);
        if d < best {
            best = d;
            arg = j;
        }
    }
    (best < factor * len).then_some((arg, best))
}

/// Assembles the rows of target `i` for all `modes` (no jump terms).
fn assemble_target(
    mesh: &PanelMesh,
    i: usize,
    kappas: [f64; 2],
    modes: &[i64],
    opts: &AssemblyOptions,
    rows: &mut TargetRows<'_>,
) -> Result<()> {
    let n = mesh.n_points();
    let p = mesh.order();
    let x = *mesh.node(i);
    let o = mesh.curve().orientation();
    let m_max = modes.iter().map(|m| m.unsigned_abs() as usize).max().unwrap_or(0);
    let lt = mesh.transform();
    let pi = mesh.panel_of(i);
    let nq = modes.len();
    // derivative couplings of on-node sources, applied panel-wise at the end
    let mut der = vec![[[ZERO; 2]; 3]; nq * n];
    let mut lrow = vec![0.0; p];
    let mut drow = vec![0.0; p];

    let curve = mesh.curve();
    let kernels_at = |y: &Frame, accurate: bool| -> Result<Option<Vec<ModalKernelValues>>> {
        let sep = if accurate { curve.separation(x.t, y.t) } else { [x.r - y.r, x.z - y.z] };
        match modal_kernels_sep(x.r, y.r, sep, &kappas, m_max, true, &opts.kernel) {
            Ok(v) => Ok(Some(v)),
            Err(Error::CoincidentPoints) => Ok(None),
            Err(e) => Err(e),
        }
    };

    for k in 0..mesh.n_panels() {
        let pan = mesh.panels()[k];
        let near = if k == pi || mesh.adjacent(k, pi) {
            Some((pan.reference(x.t), 0.0))
        } else {
            is_near(mesh, &x, k, opts.near_factor).map(|(j, d)| {
                let f = mesh.node(j);
                (pan.reference(f.t), d / (f.jac * 0.5 * pan.len()))
            })
        };
        match near {
            None => {
                for j in mesh.panel_nodes(k) {
                    let y = *mesh.node(j);
                    let Some(kv) = kernels_at(&y, false)? else { continue };
                    let w = mesh.measure(j);
                    let cp = Coupling { parts: geometric_kernel_parts(&x, &y, o)?, o, x, y };
                    for (q, &m) in modes.iter().enumerate() {
                        let c = cp.coeffs(&kv[0], &kv[1], m);
                        let d = &mut der[q * n + j];
                        for (r, row) in rows[q].iter_mut().enumerate() {
                            row[j] += c[r][SIG] * w;
                            row[n + j] += c[r][J1] * w;
                            row[2 * n + j] += c[r][J2] * w;
                            d[r][0] += c[r][DSIG] * w;
                            d[r][1] += c[r][DJ2] * w;
                        }
                    }
                }
            }
            Some((u_star, h)) => {
                let rule = opts.backend.rule(u_star, h, lt)?;
                let half = 0.5 * pan.len();
                let base = k * p;
                for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
                    let y = mesh.curve().frame_unchecked(pan.param(u));
                    if !(y.r > 0.0) {
                        continue;
                    }
                    let Some(kv) = kernels_at(&y, true)? else { continue };
                    let w = wu * half * y.r * y.jac;
                    lt.rows(u, Some(&mut lrow), Some(&mut drow));
                    let cp = Coupling { parts: geometric_kernel_parts(&x, &y, o)?, o, x, y };
                    for (q, &m) in modes.iter().enumerate() {
                        let c = cp.coeffs(&kv[0], &kv[1], m);
                        for (r, row) in rows[q].iter_mut().enumerate() {
                            let sig = c[r][SIG] * w;
                            let dsig = c[r][DSIG] * (w / half);
                            let j1 = c[r][J1] * w;
                            let j2 = c[r][J2] * w;
                            let dj2 = c[r][DJ2] * (w / half);
                            for a in 0..p {
                                let (l, dl) = (lrow[a], drow[a]);
                                row[base + a] += sig * l + dsig * dl;
                                row[n + base + a] += j1 * l;
                                row[2 * n + base + a] += j2 * l + dj2 * dl;
                            }
                        }
                    }
                }
            }
        }
    }

    // on-node derivative couplings through the spectral differentiation
    let diff = &lt.diff;
    for k in 0..mesh.n_panels() {
        let s = 2.0 / mesh.panels()[k].len();
        let base = k * p;
        for q in 0..nq {
            for (r, row) in rows[q].iter_mut().enumerate() {
                for a in 0..p {
                    let d = der[q * n + base + a][r];
                    if d[0] == ZERO && d[1] == ZERO {
                        continue;
                    }
                    let (d0, d1) = (d[0] * s, d[1] * s);
                    for (b, &dab) in diff[a].iter().enumerate() {
                        row[base + b] += d0 * dab;
                        row[2 * n + base + b] += d1 * dab;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Operator matrices (`3N x 3N`, without jump terms) for each mode in
/// `modes`, kernels shared across modes. Rows are assembled in parallel on
/// the current rayon pool; each row is produced by exactly one task so the
/// result does not depend on the worker count.
pub fn assemble_operators(
    mesh: &PanelMesh,
    kappa_p: f64,
    kappa_s: f64,
    modes: &[i64],
    opts: &AssemblyOptions,
) -> Result<Vec<DenseMatrix>> {
    if !(kappa_p >= 0.0 && kappa_s > 0.0) || !kappa_p.is_finite() || !kappa_s.is_finite() {
        return Err(Error::InvalidArgument(format!("wavenumbers ({kappa_p}, {kappa_s})")));
    }
    let n = mesh.n_points();
    let dim = 3 * n;
    let bytes = dim * dim * std::mem::size_of::<C64>();
    let per_chunk = (opts.memory_budget / bytes.max(1)).max(1);
    let mut out = Vec::with_capacity(modes.len());
    for chunk in modes.chunks(per_chunk) {
        let mut mats: Vec<DenseMatrix> = chunk.iter().map(|_| DenseMatrix::zeros(dim)).collect();
        let mut per_target: Vec<TargetRows<'_>> = (0..n).map(|_| Vec::with_capacity(chunk.len())).collect();
        for mat in mats.iter_mut() {
            let mut rows: Vec<Option<&mut [C64]>> = mat.as_mut_slice().chunks_mut(dim).map(Some).collect();
            for (i, slot) in per_target.iter_mut().enumerate() {
                let a = rows[i].take().expect("row");
                let b = rows[n + i].take().expect("row");
                let c = rows[2 * n + i].take().expect("row");
                slot.push([a, b, c]);
            }
        }
        per_target
            .into_par_iter()
            .enumerate()
            .try_for_each(|(i, mut rows)| assemble_target(mesh, i, [kappa_p, kappa_s], chunk, opts, &mut rows))?;
        out.extend(mats);
    }
    Ok(out)
}

/// Adds the jump terms: `-1/2` on `sigma` in the normal rows and `+1/2` on
/// `J` in the tangential rows.
pub fn add_jumps(a: &mut DenseMatrix, n: usize) {
    for i in 0..n {
        a.add(i, i, C64::new(-0.5, 0.0));
        a.add(n + i, n + i, C64::new(0.5, 0.0));
        a.add(2 * n + i, 2 * n + i, C64::new(0.5, 0.0));
    }
}

pub fn assemble_system(
    m: i64,
    mesh: &PanelMesh,
    kappa_p: f64,
    kappa_s: f64,
    opts: &AssemblyOptions,
) -> Result<ModalSystem> {
    let mut a = assemble_operators(mesh, kappa_p, kappa_s, &[m], opts)?.remove(0);
    add_jumps(&mut a, mesh.n_points());
    Ok(ModalSystem { m, kappa_p, kappa_s, n_pts: mesh.n_points(), matrix: a })
}

fn operator_block(
    m: i64,
    mesh: &PanelMesh,
    kappa_p: f64,
    kappa_s: f64,
    rows: (usize, usize),
    cols: (usize, usize),
    opts: &AssemblyOptions,
) -> Result<DenseMatrix> {
    let n = mesh.n_points();
    let a = assemble_operators(mesh, kappa_p, kappa_s, &[m], opts)?.remove(0);
    Ok(a.block(rows.0 * n, cols.0 * n, rows.1 * n, cols.1 * n))
}

/// `K`: `n . grad S sigma` (principal value), `N x N`.
pub fn assemble_k(m: i64, mesh: &PanelMesh, kappa_p: f64, opts: &AssemblyOptions) -> Result<DenseMatrix> {
    operator_block(m, mesh, kappa_p, kappa_p.max(1.0), (0, 1), (0, 1), opts)
}

/// `M`: `(t, e_theta)` components of `n x curl S J` (principal value), `2N x 2N`.
pub fn assemble_m(m: i64, mesh: &PanelMesh, kappa_s: f64, opts: &AssemblyOptions) -> Result<DenseMatrix> {
    operator_block(m, mesh, kappa_s, kappa_s, (1, 2), (1, 2), opts)
}

/// `H`: `(t, e_theta)` components of `n x grad S sigma`, `2N x N`.
pub fn assemble_h(m: i64, mesh: &PanelMesh, kappa_p: f64, opts: &AssemblyOptions) -> Result<DenseMatrix> {
    operator_block(m, mesh, kappa_p, kappa_p.max(1.0), (1, 2), (0, 1), opts)
}

/// `N`: `n . curl S J`, `N x 2N`.
pub fn assemble_n(m: i64, mesh: &PanelMesh, kappa_s: f64, opts: &AssemblyOptions) -> Result<DenseMatrix> {
    operator_block(m, mesh, kappa_s, kappa_s, (0, 1), (1, 2), opts)
}

/// `A(-m) = S A(m) S` with `S = diag(I, -I, I)`: reflection in the
/// meridian plane flips the `t` row (it carries `u_theta`) and the `J1`
/// column (`J` enters through a curl). Returns the sign of entry `(i, j)`.
pub fn reflection_sign(i: usize, j: usize, n: usize) -> f64 {
    let r = if (n..2 * n).contains(&i) { -1.0 } else { 1.0 };
    let c = if (n..2 * n).contains(&j) { -1.0 } else { 1.0 };
    r * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, make_builtin_curve};

    #[test]
    fn laplace_k_of_constant_on_sphere() {
        let mesh = build_mesh(&make_builtin_curve("sphere").unwrap(), 6, 12, 0).unwrap();
        let k = assemble_k(0, &mesh, 0.0, &AssemblyOptions::default()).unwrap();
        let ones = vec![C64::new(1.0, 0.0); mesh.n_points()];
        let v = k.matvec(&ones);
        let err = v.iter().map(|z| (z + 0.5).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn negative_mode_by_reflection() {
        let mesh = build_mesh(&make_builtin_curve("ellipsoid").unwrap(), 4, 8, 0).unwrap();
        let mats = assemble_operators(&mesh, 1.0, 2.0, &[2, -2], &AssemblyOptions::default()).unwrap();
        let n = mesh.n_points();
        let scale = mats[0].max_abs();
        for i in 0..3 * n {
            for j in 0..3 * n {
                let d = mats[1].get(i, j) - mats[0].get(i, j) * reflection_sign(i, j, n);
                assert!(d.norm() < 1e-12 * scale, "({i},{j})");
            }
        }
    }
}
