//! Complete elliptic integrals and toroidal Legendre functions.

use std::f64::consts::PI;

/// `(K, E)` for modulus `k` given both `k^2` and `k'^2 = 1 - k^2`, so that
/// the near-singular regime `k' -> 0` keeps full relative accuracy.
pub fn ellipke(k2: f64, kp2: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = kp2.sqrt();
    let mut c2 = k2;
    let mut sum = 0.5 * k2;
    let mut pow = 0.5;
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        // c_{n+1} = c_n^2 / (4 a_{n+1}) avoids the cancellation in (a - b) / 2
        let c = c2 / (4.0 * an);
        b = (a * b).sqrt();
        a = an;
        c2 = c * c;
        pow *= 2.0;
        sum += pow * c2;
        if c <= 1e-17 * a {
            break;
        }
    }
    let kk = PI / (2.0 * a);
    (kk, kk * (1.0 - sum))
}

/// `Q_{k-1/2}(chi)` and `Q'_{k-1/2}(chi)` for `k = 0..=k_max`, with
/// `chi = 1 + e`, `e > 0` passed separately to avoid cancellation.
pub fn legendre_q_half(e: f64, k_max: usize) -> (Vec<f64>, Vec<f64>) {
    let chi = 1.0 + e;
    let k2 = 2.0 / (2.0 + e);
    let kp2 = e / (2.0 + e);
    let k = k2.sqrt();
    let (kk, ee) = ellipke(k2, kp2);
    let q_m = k * kk;
    let q_p = chi * k * kk - 2.0 / k * ee;
    let n = k_max + 2;
    let mut q = vec![0.0; n + 1];
    let lam = chi + (e * (2.0 + e)).sqrt();
    let ln_lam = lam.ln();
    if 2.0 * (n as f64) * ln_lam < 7.0 {
        q[0] = q_m;
        q[1] = q_p;
        for m in 1..n {
            let mf = m as f64;
            q[m + 1] = (2.0 * mf * chi * q[m] - (mf - 0.5) * q[m - 1]) / (mf + 0.5);
        }
    } else {
        // Miller backward recurrence normalized by Q_{-1/2}
        let extra = (40.0 / ln_lam).ceil() as usize + 8;
        let top = n + extra;
        let mut hi = 0.0;
        let mut cur = 1e-200;
        let mut vals = vec![0.0; n + 1];
        for m in (1..=top).rev() {
            let mf = m as f64;
            // (m - 1/2) Q_{m-3/2} = 2 m chi Q_{m-1/2} - (m + 1/2) Q_{m+1/2}
            let lo = (2.0 * mf * chi * cur - (mf + 0.5) * hi) / (mf - 0.5);
            hi = cur;
            cur = lo;
            if m - 1 <= n {
                vals[m - 1] = cur;
            }
            if m <= n {
                vals[m] = hi;
            }
            if cur.abs() > 1e250 {
                let s = 1e-250;
                cur *= s;
                hi *= s;
                for v in vals.iter_mut() {
                    *v *= s;
                }
            }
        }
        let scale = q_m / vals[0];
        for (dst, v) in q.iter_mut().zip(&vals) {
            *dst = v * scale;
        }
    }
    let den = e * (chi + 1.0);
    let mut dq = vec![0.0; k_max + 1];
    for kidx in 0..=k_max {
        let nu = kidx as f64 - 0.5;
        let prev = if kidx == 0 { q[1] } else { q[kidx - 1] };
        dq[kidx] = nu * (chi * q[kidx] - prev) / den;
    }
    q.truncate(k_max + 1);
    (q, dq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_reference_values() {
        let (k, e) = ellipke(0.5, 0.5);
        assert!((k - 1.854_074_677_301_372).abs() < 1e-14);
        assert!((e - 1.350_643_881_047_675_5).abs() < 1e-14);
        let (k, e) = ellipke(0.0, 1.0);
        assert!((k - PI / 2.0).abs() < 1e-15 && (e - PI / 2.0).abs() < 1e-15);
    }

    fn q_direct(nu: f64, chi: f64) -> f64 {
        // Q_{k-1/2}(chi) = (1/sqrt 2) int_0^pi cos(k phi) / sqrt(chi - cos phi) dphi
        let k = nu + 0.5;
        let n = 20000;
        let mut s = 0.0;
        for j in 0..n {
            let phi = PI * (j as f64 + 0.5) / n as f64;
            s += (k * phi).cos() / (chi - phi.cos()).sqrt();
        }
        s * PI / n as f64 / 2f64.sqrt()
    }

    #[test]
    fn recurrences_match_integral() {
        for &e in &[0.3, 0.05] {
            let (q, dq) = legendre_q_half(e, 12);
            for k in [0usize, 1, 5, 12] {
                let d = q_direct(k as f64 - 0.5, 1.0 + e);
                assert!((q[k] - d).abs() < 1e-9 * d.abs(), "e={e} k={k}: {} vs {d}", q[k]);
                let h = 1e-6;
                let fd = (q_direct(k as f64 - 0.5, 1.0 + e + h) - q_direct(k as f64 - 0.5, 1.0 + e - h)) / (2.0 * h);
                assert!((dq[k] - fd).abs() < 1e-5 * fd.abs(), "dq e={e} k={k}");
            }
        }
    }

    #[test]
    fn miller_agrees_with_forward() {
        let e = 0.2;
        let (a, _) = legendre_q_half(e, 3);
        let (b, _) = legendre_q_half(e, 60);
        for k in 0..=3 {
            assert!((a[k] - b[k]).abs() < 1e-13 * a[k].abs());
        }
        assert!(b[60] > 0.0 && b[60] < b[59]);
    }
}
