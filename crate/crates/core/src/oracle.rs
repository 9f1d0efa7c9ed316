//! Adaptive Gauss-Kronrod integration used as a reference for the fast paths.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Node abscissae of the 15-point Kronrod rule on `[a, b]` with weights.
pub fn kronrod15(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 15];
    for k in 0..7 {
        out[k] = (c - h * XGK[k], h * WGK[k]);
        out[14 - k] = (c + h * XGK[k], h * WGK[k]);
    }
    out[7] = (c, h * WGK[7]);
    out
}

struct Piece {
    a: f64,
    b: f64,
    depth: u32,
    err: f64,
    val: Vec<Complex64>,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then_with(|| o.a.total_cmp(&self.a))
    }
}

fn gk_piece<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [Complex64], depth: u32) -> Piece
where
    F: FnMut(f64, &mut [Complex64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![Complex64::new(0.0, 0.0); dim];
    let mut g = vec![Complex64::new(0.0, 0.0); dim];
    f(c, buf);
    for i in 0..dim {
        k[i] += buf[i] * WGK[7];
        g[i] += buf[i] * WG[3];
    }
    for j in 0..7 {
        for &x in &[c - h * XGK[j], c + h * XGK[j]] {
            f(x, buf);
            for i in 0..dim {
                k[i] += buf[i] * WGK[j];
                if j % 2 == 1 {
                    g[i] += buf[i] * WG[j / 2];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for i in 0..dim {
        k[i] *= h;
        g[i] *= h;
        err = err.max((k[i] - g[i]).norm());
    }
    Piece { a, b, depth, err, val: k }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone)]
pub struct Adaptive {
    pub value: Vec<Complex64>,
    pub error: f64,
    /// Accepted subintervals, ordered by left endpoint.
    pub pieces: Vec<(f64, f64)>,
}

/// Globally adaptive G7/K15 integration of a vector-valued integrand over
/// the union of the consecutive intervals given by `breaks`.
///
/// Stops when the summed error estimate is below
/// `max(tol_abs, tol_rel * max_i |I_i|)`.
pub fn integrate<F>(
    mut f: F,
    breaks: &[f64],
    dim: usize,
    tol_rel: f64,
    tol_abs: f64,
    depth_cap: u32,
) -> Result<Adaptive>
where
    F: FnMut(f64, &mut [Complex64]),
{
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk_piece(&mut f, w[0], w[1], dim, &mut buf, 0));
        }
    }
    let total = |heap: &BinaryHeap<Piece>| {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        let mut e = 0.0;
        for p in heap.iter() {
            for i in 0..dim {
                v[i] += p.val[i];
            }
            e += p.err;
        }
        (v, e)
    };
    let max_pieces = 20_000;
    let (mut v, mut e) = total(&heap);
    let mut since_resum = 0usize;
    loop {
        if since_resum >= 256 {
            (v, e) = total(&heap);
            since_resum = 0;
        }
        let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let target = tol_abs.max(tol_rel * scale);
        let worst_depth = heap.peek().map(|p| p.depth).unwrap_or(0);
        if e <= target || worst_depth >= depth_cap || heap.len() >= max_pieces {
            (v, e) = total(&heap);
            let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let target = tol_abs.max(tol_rel * scale);
            let done = e <= target;
            if done || worst_depth >= depth_cap || heap.len() >= max_pieces {
                if !done && e > 1e3 * target {
                    return Err(Error::QuadratureNotConverged { depth: depth_cap, estimate: e });
                }
                let mut pieces: Vec<(f64, f64)> = heap.iter().map(|p| (p.a, p.b)).collect();
                pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
                return Ok(Adaptive { value: v, error: e, pieces });
            }
        }
        let worst = heap.pop().expect("non-empty");
        let m = 0.5 * (worst.a + worst.b);
        let l = gk_piece(&mut f, worst.a, m, dim, &mut buf, worst.depth + 1);
        let r = gk_piece(&mut f, m, worst.b, dim, &mut buf, worst.depth + 1);
        for i in 0..dim {
            v[i] += l.val[i] + r.val[i] - worst.val[i];
        }
        e += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        since_resum += 1;
    }
}

/// Scalar complex convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(mut f: F, breaks: &[f64], tol_rel: f64, tol_abs: f64) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let r = integrate(|x, out| out[0] = f(x), breaks, 1, tol_rel, tol_abs, 50)?;
    Ok(r.value[0])
}

/// Modal Green's function family computed by adaptive quadrature.
///
/// Returns, for `m = 0..=m_max`, the modes
/// `int_0^{2 pi} F(phi) e^{-i m phi} dphi` of
/// `F = w(phi) e^{i kappa rho} / (4 pi rho^k)` where `k = 1` with `w = 1`
/// (`Family::G`), `k = 1` with `w = cos phi` (`Family::CosWeighted`) or
/// `k = 3` with `w = (i kappa rho - 1) (alpha + beta cos phi)`
/// (`Family::Deriv`).
#[derive(Debug, Clone, Copy)]
pub enum Family {
    G,
    CosWeighted,
    Deriv { alpha: f64, beta: f64 },
}

/// Reference modes of the modal Green's function (see [`Family`]).
pub fn modal_reference(
    rt: f64,
    zt: f64,
    r: f64,
    z: f64,
    kappa: f64,
    m_max: usize,
    family: Family,
    tol: f64,
) -> Result<Vec<Complex64>> {
    let dz = zt - z;
    let d2 = (rt - r) * (rt - r) + dz * dz;
    let b = 2.0 * rt * r;
    if d2 == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let scale = (d2.sqrt() / rt.max(r)).min(1.0);
    let mut breaks = vec![0.0];
    let mut x = scale;
    while x < 1.0 {
        breaks.push(x);
        x *= 4.0;
    }
    breaks.push(1.0);
    breaks.push(std::f64::consts::PI);
    let dim = m_max + 1;
    let res = integrate(
        |phi, out| {
            let s = (0.5 * phi).sin();
            let rho2 = d2 + 2.0 * b * s * s;
            let rho = rho2.sqrt();
            let e = Complex64::new(0.0, kappa * rho).exp();
            let val = match family {
                Family::G => e / rho,
                Family::CosWeighted => e * phi.cos() / rho,
                Family::Deriv { alpha, beta } => {
                    e * Complex64::new(-1.0, kappa * rho) * (alpha + beta * phi.cos()) / (rho2 * rho)
                }
            };
            for (m, o) in out.iter_mut().enumerate() {
                *o = val * (m as f64 * phi).cos();
            }
        },
        &breaks,
        dim,
        tol,
        0.0,
        60,
    )?;
    // even integrand: twice the half-period integral, divided by 4 pi
    Ok(res.value.into_iter().map(|v| v * (2.0 / (4.0 * std::f64::consts::PI))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate_scalar(|x| Complex64::new(x.powi(20), 0.0), &[-1.0, 1.0], 1e-14, 0.0).unwrap();
        assert!((v.re - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn log_endpoint() {
        let v = integrate_scalar(|x| Complex64::new(x.ln(), 0.0), &[0.0, 1.0], 1e-13, 0.0).unwrap();
        assert!((v.re + 1.0).abs() < 1e-12, "{}", v.re);
    }
}
