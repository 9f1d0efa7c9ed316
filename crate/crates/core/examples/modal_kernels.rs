//! Azimuthal Fourier modes of the Helmholtz Green's function for one
//! meridian pair, compared with direct quadrature of a few modes.
//!
//! cargo run --release --example modal_kernels

use axielastic::kernels::{modal_kernels, KernelOptions};
use axielastic::oracle::{modal_reference, Family};

fn main() -> axielastic::Result<()> {
    let (rt, zt, r, z) = (1.0, 0.2, 1.3, -0.1);
    let kappa = 2.0;
    let m_max = 16;
    let v = modal_kernels(rt, zt, r, z, &[kappa], m_max, true, &KernelOptions::default())?.remove(0);
    let reference = modal_reference(rt, zt, r, z, kappa, m_max, Family::G, 1e-14)?;
    println!("{:>3} {:>24} {:>10}", "m", "g_m", "rel diff");
    for m in (0..=m_max).step_by(4) {
        let g = v.g.get(m as i64);
        let d = (g - reference[m]).norm() / reference[0].norm();
        println!("{m:>3} {:>11.4e}{:>+11.4e}i {d:>10.1e}", g.re, g.im);
    }
    Ok(())
}
