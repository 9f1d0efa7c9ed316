//! Modal Green's functions of the Helmholtz kernel on circles of revolution.
//!
//! For a target `(r_t, z_t)` and source `(r, z)` with
//! `rho^2 = r_t^2 + r^2 - 2 r_t r cos(phi) + (z_t - z)^2`,
//!
//! ```text
//! g_m = int_0^{2 pi} e^{i kappa rho} / (4 pi rho) e^{-i m phi} dphi
//! ```
//!
//! All blocks are even in `m` and are stored for `m = 0..=M+1`.
//!
//! Well-separated pairs are handled by one FFT of the sampled integrand
//! (oversampled until the trailing coefficients vanish). Close pairs split
//! the kernel into `C(rho^2)/rho + i S(rho^2)` with `C, S` entire in `rho^2`;
//! the modes of `1/rho` and `1/rho^3` come from half-integer Legendre
//! functions and are combined with the FFT modes of `C` by discrete
//! convolution. Derivative kernels use `W = (i kappa rho - 1) e^{i kappa rho} / rho^3`
//! split the same way.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::special::legendre_q_half;

type C64 = Complex64;
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

/// Tuning knobs of the kernel evaluator.
#[derive(Debug, Clone, Copy)]
pub struct KernelOptions {
    /// Pairs with `delta = |(r_t, z_t) - (r, z)| / max(r_t, r)` below this use
    /// the split (near) branch.
    pub near_threshold: f64,
    /// Relative size of trailing Fourier coefficients accepted as converged.
    pub spectral_tol: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { near_threshold: 1.0, spectral_tol: 1e-16 }
    }
}

/// One evaluation request.
#[derive(Debug, Clone, Copy)]
pub struct ModalKernelRequest {
    pub rt: f64,
    pub zt: f64,
    pub r: f64,
    pub z: f64,
    pub kappa: f64,
    pub m_max: usize,
    pub derivatives: bool,
}

/// Nonnegative-mode block of an even modal sequence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModeBlock(pub Vec<C64>);

impl ModeBlock {
    #[inline]
    pub fn get(&self, m: i64) -> C64 {
        self.0[m.unsigned_abs() as usize]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `g^1` and its partial derivatives, modes `0..=m_max + 1`.
#[derive(Debug, Clone, Default)]
pub struct ModalKernelValues {
    pub m_max: usize,
    pub g: ModeBlock,
    pub drt: ModeBlock,
    pub dzt: ModeBlock,
    pub dr: ModeBlock,
    pub dz: ModeBlock,
}

impl ModalKernelValues {
    pub fn g1(&self, m: i64) -> C64 {
        self.g.get(m)
    }

    pub fn g2(&self, m: i64) -> C64 {
        0.5 * (self.g.get(m + 1) + self.g.get(m - 1))
    }

    pub fn g3(&self, m: i64) -> C64 {
        -0.5 * (self.g.get(m + 1) - self.g.get(m - 1))
    }
}

struct Pair {
    d2: f64,
    b: f64,
    dr: f64,
    dz: f64,
    rt: f64,
    r: f64,
}

impl Pair {
    fn new(rt: f64, zt: f64, r: f64, z: f64) -> Result<Pair> {
        Pair::with_separation(rt, r, [rt - r, zt - z])
    }

    /// `sep = (r_t - r, z_t - z)`, possibly computed more accurately than
    /// by subtracting rounded coordinates.
    fn with_separation(rt: f64, r: f64, sep: [f64; 2]) -> Result<Pair> {
        let [dr, dz] = sep;
        let d2 = dr * dr + dz * dz;
        if d2 == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        Ok(Pair { d2, b: 2.0 * rt * r, dr, dz, rt, r })
    }

    fn delta(&self) -> f64 {
        self.d2.sqrt() / self.rt.max(self.r)
    }

    /// `rho^2` at `phi = 2 pi j / n` for `j = 0..=n/2`.
    fn rho2_half(&self, n: usize) -> Vec<f64> {
        (0..=n / 2)
            .map(|j| {
                let s = (PI * j as f64 / n as f64).sin();
                self.d2 + 2.0 * self.b * s * s
            })
            .collect()
    }

    /// `(alpha, beta)` of `d rho / d q = (alpha + beta cos phi) / rho`, and
    /// `(gamma, eta)` with `alpha + beta cos phi = gamma + eta rho^2`.
    fn coeffs(&self) -> [(f64, f64, f64, f64); 4] {
        let (rt, r, dr, dz) = (self.rt, self.r, self.dr, self.dz);
        let g_rt = (dr * (rt + r) - dz * dz) / (2.0 * rt);
        let g_r = (-dr * (r + rt) - dz * dz) / (2.0 * r);
        [
            (rt, -r, g_rt, 0.5 / rt),
            (dz, 0.0, dz, 0.0),
            (r, -rt, g_r, 0.5 / r),
            (-dz, 0.0, -dz, 0.0),
        ]
    }
}

/// Cap on azimuthal samples per spectrum.
const MAX_SAMPLES: usize = 1 << 18;

/// Relative tail level below which a band that stopped shrinking on
/// doubling is taken as sampling noise rather than unresolved signal.
const PLATEAU: f64 = 1e-12;

/// FFT modes `(1/n) sum_j f(phi_j) e^{-i m phi_j}` for `m = 0..` of several
/// even functions of `rho^2`, doubling `n` until each trailing band is below
/// `tol` relative to its peak. Returns the spectra truncated to
/// `[0, n/2 - n/8)`.
fn even_spectra<F>(pair: &Pair, nfun: usize, m_need: usize, tol: f64, mut sample: F) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &mut [C64]),
{
    let mut n = 16usize;
    while n / 2 - n / 8 <= m_need + 1 {
        n *= 2;
    }
    let mut vals = vec![ZERO; nfun];
    let mut prev = vec![f64::INFINITY; nfun];
    loop {
        let rho2 = pair.rho2_half(n);
        let mut bufs = vec![vec![ZERO; n]; nfun];
        for (j, &x) in rho2.iter().enumerate() {
            sample(x, &mut vals);
            for f in 0..nfun {
                bufs[f][j] = vals[f];
                if j > 0 && j < n - j {
                    bufs[f][n - j] = vals[f];
                }
            }
        }
        let fft = plan(n);
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        let inv = 1.0 / n as f64;
        let band = n / 2 - n / 8;
        let mut ok = true;
        let mut worst = 0.0f64;
        for (f, buf) in bufs.iter_mut().enumerate() {
            // rounding floor of the unnormalized transform
            let amp = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let noise = 16.0 * f64::EPSILON * (n as f64).sqrt() * amp;
            fft.process_with_scratch(buf, &mut scratch);
            let peak = buf[..=n / 2].iter().map(|z| z.norm()).fold(0.0, f64::max);
            let tail = buf[band..=n / 2].iter().map(|z| z.norm()).fold(0.0, f64::max);
            let rel = if peak > 0.0 { tail / peak } else { 0.0 };
            // resolved signal drops far faster than 4x per doubling; noise
            // only by sqrt(2)
            let plateau = rel < PLATEAU && rel > 0.25 * prev[f];
            if tail > (tol * peak).max(noise) && !plateau {
                ok = false;
                worst = worst.max(rel);
            }
            prev[f] = rel;
        }
        if ok || n >= MAX_SAMPLES {
            if !ok {
                return Err(Error::QuadratureNotConverged { depth: MAX_SAMPLES.trailing_zeros(), estimate: worst });
            }
            return Ok(bufs
                .into_iter()
                .map(|b| b[..band].iter().map(|z| z * inv).collect())
                .collect());
        }
        n *= 2;
    }
}

fn effective_width(s: &[C64], tol: f64) -> usize {
    let peak = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0;
    }
    let mut w = s.len();
    while w > 1 && s[w - 1].norm() <= tol * peak {
        w -= 1;
    }
    w
}

/// `sum_j a_j L_{m-j}` over `|j| < width` for even `a` and `L`.
fn convolve_even(a: &[C64], width: usize, l: &[f64], m: usize) -> C64 {
    let mut s = a[0] * l[m];
    for j in 1..width {
        s += a[j] * (l[m + j] + l[m.abs_diff(j)]);
    }
    s
}

fn far_branch(pair: &Pair, kappa: f64, mm: usize, derivs: bool, tol: f64) -> Result<ModalKernelValues> {
    let nfun = if derivs { 2 } else { 1 };
    let spec = even_spectra(pair, nfun, mm + 1, tol, |x, out| {
        let rho = x.sqrt();
        let e = C64::from_polar(1.0, kappa * rho);
        out[0] = e / rho;
        if out.len() > 1 {
            out[1] = e * C64::new(-1.0, kappa * rho) / (x * rho);
        }
    })?;
    let g = ModeBlock((0..=mm).map(|m| 0.5 * spec[0][m]).collect());
    let mut vals = ModalKernelValues { m_max: mm - 1, g, ..Default::default() };
    if derivs {
        let w = &spec[1];
        let c = pair.coeffs();
        let mk = |(al, be, _, _): (f64, f64, f64, f64)| {
            ModeBlock(
                (0..=mm)
                    .map(|m| {
                        let lo = w[if m == 0 { 1 } else { m - 1 }];
                        0.5 * (al * w[m] + be * 0.5 * (lo + w[m + 1]))
                    })
                    .collect(),
            )
        };
        vals.drt = mk(c[0]);
        vals.dzt = mk(c[1]);
        vals.dr = mk(c[2]);
        vals.dz = mk(c[3]);
    }
    Ok(vals)
}

struct NearSpectra {
    c: Vec<C64>,
    s: Vec<C64>,
    p: Vec<C64>,
    rr: Vec<C64>,
    rr2: Vec<C64>,
    wc: usize,
    wp: usize,
}

fn near_spectra(pair: &Pair, kappa: f64, mm: usize, derivs: bool, tol: f64) -> Result<NearSpectra> {
    let nfun = if derivs { 5 } else { 2 };
    let mut spec = even_spectra(pair, nfun, mm + 1, tol, |x, out| {
        let rho = x.sqrt();
        let u = kappa * rho;
        let (su, cu) = u.sin_cos();
        out[0] = C64::new(cu, 0.0);
        out[1] = C64::new(if rho > 0.0 { su / rho } else { kappa }, 0.0);
        if out.len() > 2 {
            out[2] = C64::new(-cu - u * su, 0.0);
            let rv = if u < 0.5 {
                let u2 = u * u;
                let mut term = -2.0 / 6.0;
                let mut sum = term;
                let mut k = 1.0f64;
                loop {
                    k += 1.0;
                    // ratio of consecutive terms (-1)^k 2k u^{2k-2} / (2k+1)!
                    term *= -u2 * k / (k - 1.0) / ((2.0 * k) * (2.0 * k + 1.0));
                    sum += term;
                    if term.abs() < 1e-18 * sum.abs() {
                        break;
                    }
                }
                kappa * kappa * kappa * sum
            } else {
                (u * cu - su) / (x * rho)
            };
            out[3] = C64::new(rv, 0.0);
            out[4] = C64::new(rv * x, 0.0);
        }
    })?;
    let wc = effective_width(&spec[0], tol).max(1);
    let (p, rr, rr2, wp) = if derivs {
        let rr2 = spec.pop().unwrap();
        let rr = spec.pop().unwrap();
        let p = spec.pop().unwrap();
        let wp = effective_width(&p, tol).max(1);
        (p, rr, rr2, wp)
    } else {
        (Vec::new(), Vec::new(), Vec::new(), 0)
    };
    let s = spec.pop().unwrap();
    let c = spec.pop().unwrap();
    Ok(NearSpectra { c, s, p, rr, rr2, wc, wp })
}

/// Modes of `1/rho` and `1/rho^3` for `m = 0..=k_max`.
fn singular_families(pair: &Pair, k_max: usize, tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let e = pair.d2 / pair.b;
    if e <= 0.5 {
        let (q, dq) = legendre_q_half(e, k_max);
        let sb = pair.b.sqrt();
        let c1 = 2f64.sqrt() / (PI * sb);
        let c3 = -2.0 * 2f64.sqrt() / (PI * sb * pair.b);
        Ok((q.iter().map(|v| c1 * v).collect(), dq.iter().map(|v| c3 * v).collect()))
    } else {
        let spec = even_spectra(pair, 2, k_max, tol, |x, out| {
            let rho = x.sqrt();
            out[0] = C64::new(1.0 / rho, 0.0);
            out[1] = C64::new(1.0 / (x * rho), 0.0);
        })?;
        let take = |s: &Vec<C64>| -> Vec<f64> {
            (0..=k_max).map(|k| if k < s.len() { s[k].re } else { 0.0 }).collect()
        };
        Ok((take(&spec[0]), take(&spec[1])))
    }
}

fn near_branch(pair: &Pair, kappas: &[f64], mm: usize, derivs: bool, tol: f64) -> Result<Vec<ModalKernelValues>> {
    let spectra: Vec<NearSpectra> =
        kappas.iter().map(|&k| near_spectra(pair, k, mm, derivs, tol)).collect::<Result<_>>()?;
    let width = spectra.iter().map(|s| s.wc.max(s.wp)).max().unwrap_or(1);
    let (l1, l3) = singular_families(pair, mm + width, tol)?;
    let c = pair.coeffs();
    let i = C64::new(0.0, 1.0);
    Ok(spectra
        .iter()
        .map(|sp| {
            let g = ModeBlock(
                (0..=mm).map(|m| 0.5 * (convolve_even(&sp.c, sp.wc, &l1, m) + i * sp.s.get(m).copied().unwrap_or(ZERO))).collect(),
            );
            let mut v = ModalKernelValues { m_max: mm - 1, g, ..Default::default() };
            if derivs {
                let pl3: Vec<C64> = (0..=mm).map(|m| convolve_even(&sp.p, sp.wp, &l3, m)).collect();
                let pl1: Vec<C64> = (0..=mm).map(|m| convolve_even(&sp.p, sp.wp, &l1, m)).collect();
                let at = |s: &Vec<C64>, m: usize| s.get(m).copied().unwrap_or(ZERO);
                let mk = |(_, _, ga, et): (f64, f64, f64, f64)| {
                    ModeBlock(
                        (0..=mm)
                            .map(|m| 0.5 * (ga * pl3[m] + et * pl1[m] + i * (ga * at(&sp.rr, m) + et * at(&sp.rr2, m))))
                            .collect(),
                    )
                };
                v.drt = mk(c[0]);
                v.dzt = mk(c[1]);
                v.dr = mk(c[2]);
                v.dz = mk(c[3]);
            }
            v
        })
        .collect())
}

/// Modal kernels for several wavenumbers at one `(target, source)` pair,
/// sharing the geometric work. Blocks cover `m = 0..=m_max + 1`.
pub fn modal_kernels(
    rt: f64,
    zt: f64,
    r: f64,
    z: f64,
    kappas: &[f64],
    m_max: usize,
    derivatives: bool,
    opts: &KernelOptions,
) -> Result<Vec<ModalKernelValues>> {
    modal_kernels_sep(rt, r, [rt - r, zt - z], kappas, m_max, derivatives, opts)
}

/// As [`modal_kernels`] with the separation `(r_t - r, z_t - z)` given
/// explicitly. Normal-derivative combinations such as
/// `n_t . (x - y) / |x - y|^2` cancel to `O(1)` near coincidence, so their
/// accuracy is limited by the separation's absolute error.
pub fn modal_kernels_sep(
    rt: f64,
    r: f64,
    sep: [f64; 2],
    kappas: &[f64],
    m_max: usize,
    derivatives: bool,
    opts: &KernelOptions,
) -> Result<Vec<ModalKernelValues>> {
    let pair = Pair::with_separation(rt, r, sep)?;
    let mm = m_max + 1;
    if pair.delta() >= opts.near_threshold || pair.b == 0.0 {
        kappas.iter().map(|&k| far_branch(&pair, k, mm, derivatives, opts.spectral_tol)).collect()
    } else {
        near_branch(&pair, kappas, mm, derivatives, opts.spectral_tol)
    }
}

/// Far branch forced regardless of separation (used to cross-check branches).
pub fn modal_kernels_far(req: &ModalKernelRequest, opts: &KernelOptions) -> Result<ModalKernelValues> {
    let pair = Pair::new(req.rt, req.zt, req.r, req.z)?;
    far_branch(&pair, req.kappa, req.m_max + 1, req.derivatives, opts.spectral_tol)
}

/// Near branch forced regardless of separation.
pub fn modal_kernels_near(req: &ModalKernelRequest, opts: &KernelOptions) -> Result<ModalKernelValues> {
    let pair = Pair::new(req.rt, req.zt, req.r, req.z)?;
    Ok(near_branch(&pair, &[req.kappa], req.m_max + 1, req.derivatives, opts.spectral_tol)?.remove(0))
}

/// `g^1_m` for `|m| <= M + 1`.
pub fn eval_g1_block(req: &ModalKernelRequest, opts: &KernelOptions) -> Result<ModeBlock> {
    let mut v = modal_kernels(req.rt, req.zt, req.r, req.z, &[req.kappa], req.m_max, false, opts)?;
    Ok(v.remove(0).g)
}

/// `(g^2_m, g^3_m)` for `m = -M..=M`, indexed by `m + M`, from a `g^1`
/// block covering `|m| <= M + 1`.
pub fn g23_from_g1(g1: &ModeBlock, m_max: usize) -> (Vec<C64>, Vec<C64>) {
    let mm = m_max as i64;
    let g2 = (-mm..=mm).map(|m| 0.5 * (g1.get(m + 1) + g1.get(m - 1))).collect();
    let g3 = (-mm..=mm).map(|m| -0.5 * (g1.get(m + 1) - g1.get(m - 1))).collect();
    (g2, g3)
}

/// Partial derivatives of `g^1_m` with respect to `r_t, z_t, r, z`.
pub fn eval_derivative_blocks(req: &ModalKernelRequest, opts: &KernelOptions) -> Result<ModalKernelValues> {
    let mut v = modal_kernels(req.rt, req.zt, req.r, req.z, &[req.kappa], req.m_max, true, opts)?;
    Ok(v.remove(0))
}
