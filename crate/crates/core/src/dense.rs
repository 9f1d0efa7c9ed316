//! Dense complex matrices and LU with partial pivoting.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

const BLOCK: usize = 48;

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> DenseMatrix {
        DenseMatrix::zeros_rect(n, n)
    }

    pub fn zeros_rect(rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_rows(n: usize, data: Vec<C64>) -> Result<DenseMatrix> {
        DenseMatrix::from_rect(n, n, data)
    }

    pub fn from_rect(rows: usize, cols: usize, data: Vec<C64>) -> Result<DenseMatrix> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!("expected {} entries, got {}", rows * cols, data.len())));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn identity(n: usize) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(n);
        for i in 0..n {
            a.set(i, i, C64::new(1.0, 0.0));
        }
        a
    }

    /// Row count; equals the dimension for square matrices.
    pub fn dim(&self) -> usize {
        self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] += v;
    }

    /// Copy of rows `r0..r0 + nr`, columns `c0..c0 + nc`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> DenseMatrix {
        let mut data = Vec::with_capacity(nr * nc);
        for i in r0..r0 + nr {
            data.extend_from_slice(&self.row(i)[c0..c0 + nc]);
        }
        DenseMatrix { rows: nr, cols: nc, data }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Text dump: header `m rows cols`, then one `re im` pair per line in
    /// row-major order.
    pub fn write_text(&self, mode: i64, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "{} {} {}", mode, self.rows, self.cols)?;
        for z in &self.data {
            writeln!(w, "{:.17e} {:.17e}", z.re, z.im)?;
        }
        Ok(())
    }
}

/// In-place LU factors `P A = L U` (unit lower `L`).
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<C64>,
    piv: Vec<usize>,
    min_pivot: f64,
}

/// Blocked right-looking LU. `mode` only labels the error.
pub fn lu_factor(a: DenseMatrix, mode: i64) -> Result<LuFactors> {
    if a.rows != a.cols {
        return Err(Error::InvalidArgument(format!("LU of a {}x{} matrix", a.rows, a.cols)));
    }
    let n = a.rows;
    let scale = a.max_abs();
    let mut lu = a.data;
    let mut piv = vec![0usize; n];
    let mut min_pivot = f64::INFINITY;
    let tiny = scale * 1e-14;
    let mut k0 = 0;
    while k0 < n {
        let kb = (k0 + BLOCK).min(n);
        // panel factorization on columns k0..kb
        for k in k0..kb {
            let mut p = k;
            let mut best = lu[k * n + k].norm();
            for i in k + 1..n {
                let v = lu[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Error::SingularMatrix { mode, column: k, pivot: best });
            }
            min_pivot = min_pivot.min(best);
            piv[k] = p;
            if p != k {
                let (lo, hi) = lu.split_at_mut(p * n);
                lo[k * n..(k + 1) * n].swap_with_slice(&mut hi[..n]);
            }
            let inv = 1.0 / lu[k * n + k];
            let (top, rest) = lu.split_at_mut((k + 1) * n);
            let prow = &top[k * n + k + 1..k * n + kb];
            for i in 0..n - k - 1 {
                let row = &mut rest[i * n..(i + 1) * n];
                let l = row[k] * inv;
                row[k] = l;
                if l != C64::new(0.0, 0.0) {
                    for (dst, src) in row[k + 1..kb].iter_mut().zip(prow) {
                        *dst -= l * src;
                    }
                }
            }
        }
        if kb < n {
            // U12 = L11^{-1} A12
            for k in k0..kb {
                let (top, rest) = lu.split_at_mut((k + 1) * n);
                let prow = &top[k * n + kb..(k + 1) * n];
                for i in 0..kb - k - 1 {
                    let row = &mut rest[i * n..(i + 1) * n];
                    let l = row[k];
                    for (dst, src) in row[kb..].iter_mut().zip(prow) {
                        *dst -= l * src;
                    }
                }
            }
            // A22 -= L21 U12
            let (top, rest) = lu.split_at_mut(kb * n);
            let u12 = &top[k0 * n..];
            for row in rest.chunks_mut(n) {
                for k in k0..kb {
                    let l = row[k];
                    if l == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let src = &u12[(k - k0) * n + kb..(k - k0 + 1) * n];
                    for (dst, s) in row[kb..].iter_mut().zip(src) {
                        *dst -= l * s;
                    }
                }
            }
        }
        k0 = kb;
    }
    Ok(LuFactors { n, lu, piv, min_pivot })
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Smallest pivot modulus met during elimination.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
        }
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: C64 = row.iter().zip(&b[..i]).map(|(a, x)| a * x).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: C64 = row[i + 1..].iter().zip(&b[i + 1..]).map(|(a, x)| a * x).sum();
            b[i] = (b[i] - s) / row[i];
        }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// `||A x - b|| / ||b||` in the 2-norm.
pub fn relative_residual(a: &DenseMatrix, x: &[C64], b: &[C64]) -> f64 {
    let ax = a.matvec(x);
    let num: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Normwise backward error `||A x - b|| / (||A|| ||x|| + ||b||)` in the
/// infinity norm.
pub fn backward_error(a: &DenseMatrix, x: &[C64], b: &[C64]) -> f64 {
    let ax = a.matvec(x);
    let inf = |v: &mut dyn Iterator<Item = f64>| v.fold(0.0, f64::max);
    let r = inf(&mut ax.iter().zip(b).map(|(p, q)| (p - q).norm()));
    let an = inf(&mut (0..a.rows).map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>()));
    let xn = inf(&mut x.iter().map(|z| z.norm()));
    let bn = inf(&mut b.iter().map(|z| z.norm()));
    let den = an * xn + bn;
    if den == 0.0 {
        r
    } else {
        r / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn random_systems_solve() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for &n in &[1usize, 5, 47, 48, 49, 130] {
            let data: Vec<C64> = (0..n * n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let a = DenseMatrix::from_rows(n, data).unwrap();
            let x: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
            let b = a.matvec(&x);
            let lu = lu_factor(a.clone(), 0).unwrap();
            let y = lu.solve(&b);
            assert!(relative_residual(&a, &y, &b) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn singular_is_reported() {
        let mut a = DenseMatrix::zeros(3);
        a.set(0, 0, C64::new(1.0, 0.0));
        a.set(1, 1, C64::new(1.0, 0.0));
        assert!(matches!(lu_factor(a, 4), Err(Error::SingularMatrix { mode: 4, column: 2, .. })));
    }

    #[test]
    fn pivoting_needed() {
        let a = DenseMatrix::from_rows(
            2,
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0)],
        )
        .unwrap();
        let lu = lu_factor(a, 0).unwrap();
        let x = lu.solve(&[C64::new(1.0, 0.0), C64::new(5.0, 0.0)]);
        assert!((x[0] - 1.0).norm() < 1e-15 && (x[1] - 1.0).norm() < 1e-15);
    }
}
