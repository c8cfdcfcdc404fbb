//! Dense complex matrices and a non-Hermitian eigensolver.
//!
//! The solver follows the classical route: balancing (row/column permutations
//! that isolate eigenvalues, then power-of-two diagonal scaling), Householder
//! reduction to upper Hessenberg form, single-shift complex QR iteration to a
//! Schur form `T`, and eigenvectors by back substitution on `T`. Balancing
//! matters here: a matrix with only one off-diagonal band is isolated
//! completely, so its eigenvalues come back as the exact diagonal, and the
//! scaling step undoes the exponential non-normality of nearly one-way chains.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from rows; panics if the rows are ragged or not square.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Self {
            dim,
            data: rows.concat(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.dim {
                self.data.swap(a * self.dim + j, b * self.dim + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.dim {
                self.data.swap(i * self.dim + a, i * self.dim + b);
            }
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Eigenvalues and unit-norm right eigenvectors (columns of `vectors`), unsorted.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Balancing result: `B = D^{-1} P^T A P D`.
struct Balanced {
    matrix: CMatrix,
    /// `perm[i]` is the original index sitting at position `i`.
    perm: Vec<usize>,
    scale: Vec<f64>,
    lo: usize,
    hi: usize,
}

fn balance(a: &CMatrix) -> Balanced {
    let n = a.dim();
    let mut m = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut scale = vec![1.0; n];

    let swap = |m: &mut CMatrix, perm: &mut Vec<usize>, i: usize, j: usize| {
        m.swap_rows(i, j);
        m.swap_cols(i, j);
        perm.swap(i, j);
    };

    // Rows with no off-diagonal entries inside the active block go to the bottom.
    let mut lo = 0usize;
    let mut hi = n.saturating_sub(1);
    if n > 0 {
        while let Some(j) = (0..=hi)
            .rev()
            .find(|&j| (0..=hi).all(|i| i == j || m[(j, i)] == ZERO))
        {
            swap(&mut m, &mut perm, j, hi);
            if hi == 0 {
                break;
            }
            hi -= 1;
        }
    }
    // Columns with no off-diagonal entries go to the top.
    while lo < hi {
        let Some(j) = (lo..=hi).find(|&j| (lo..=hi).all(|i| i == j || m[(i, j)] == ZERO)) else {
            break;
        };
        swap(&mut m, &mut perm, j, lo);
        lo += 1;
    }
    if lo < hi {
        const RADIX: f64 = 2.0;
        let mut changed = true;
        let mut sweeps = 0;
        while changed && sweeps < 1000 {
            changed = false;
            sweeps += 1;
            for i in lo..=hi {
                let mut c = 0.0;
                let mut r = 0.0;
                for j in lo..=hi {
                    if j != i {
                        c += m[(j, i)].norm();
                        r += m[(i, j)].norm();
                    }
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let s = c + r;
                let mut f = 1.0;
                let mut g = r / RADIX;
                while c < g {
                    f *= RADIX;
                    c *= RADIX;
                    r /= RADIX;
                    g /= RADIX;
                }
                g = c / RADIX;
                while g >= r {
                    f /= RADIX;
                    c /= RADIX;
                    g /= RADIX;
                    r *= RADIX;
                }
                if c + r >= 0.95 * s {
                    continue;
                }
                changed = true;
                scale[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }

    Balanced {
        matrix: m,
        perm,
        scale,
        lo,
        hi,
    }
}

/// Householder reduction of rows/columns `lo..=hi` to upper Hessenberg form; returns the accumulated unitary.
fn hessenberg(h: &mut CMatrix, lo: usize, hi: usize) -> CMatrix {
    let n = h.dim();
    let mut q = CMatrix::identity(n);
    if hi < lo + 2 {
        return q;
    }
    for j in lo..hi - 1 {
        let x: Vec<Complex64> = (j + 1..=hi).map(|i| h[(i, j)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if tail == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            ONE
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        // H = I - 2 v v^H / |v|^2
        let k = 2.0 / vnorm2;

        for col in j..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(t, vt)| vt.conj() * h[(j + 1 + t, col)])
                .sum();
            let dot = dot * k;
            for (t, vt) in v.iter().enumerate() {
                h[(j + 1 + t, col)] -= vt * dot;
            }
        }
        for row in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(t, vt)| h[(row, j + 1 + t)] * vt)
                .sum();
            let dot = dot * k;
            for (t, vt) in v.iter().enumerate() {
                h[(row, j + 1 + t)] -= dot * vt.conj();
            }
        }
        for row in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(t, vt)| q[(row, j + 1 + t)] * vt)
                .sum();
            let dot = dot * k;
            for (t, vt) in v.iter().enumerate() {
                q[(row, j + 1 + t)] -= dot * vt.conj();
            }
        }
        for t in 2..=(hi - j) {
            h[(j + t, j)] = ZERO;
        }
    }
    q
}

/// Rotation `[[c, s], [-conj(s), c]]` sending `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, ONE);
    }
    let norm = ax.hypot(ay);
    (ax / norm, (x / ax) * y.conj() / norm)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Shifted QR iteration on the Hessenberg block `lo..=hi`. `t` becomes upper triangular, `z` accumulates.
fn schur(t: &mut CMatrix, z: &mut CMatrix, lo: usize, hi: usize) -> Result<()> {
    let n = t.dim();
    if hi <= lo {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let tiny = f64::MIN_POSITIVE / eps;
    let block_norm = {
        let mut s = 0.0f64;
        for i in lo..=hi {
            for j in lo..=hi {
                s += t[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };
    let max_iter = 30 * (hi - lo + 1).max(10);
    let mut total = 0usize;
    let mut top = hi;
    let mut iter = 0usize;

    while top > lo {
        // Find the start of the unreduced block ending at `top`.
        let mut l = lo;
        let mut k = top;
        while k > lo {
            let sub = t[(k, k - 1)].norm();
            let mut scale = t[(k - 1, k - 1)].norm() + t[(k, k)].norm();
            if scale == 0.0 {
                scale = block_norm;
            }
            if sub <= eps * scale || sub <= tiny {
                t[(k, k - 1)] = ZERO;
                l = k;
                break;
            }
            k -= 1;
        }
        if l == top {
            top -= 1;
            iter = 0;
            continue;
        }
        if total >= max_iter * (hi - lo + 1) {
            return Err(Error::SolverFailure {
                iterations: total,
                lo,
                hi: top,
            });
        }
        iter += 1;
        total += 1;

        let shift = if iter.is_multiple_of(10) {
            t[(top, top)] + 0.75 * t[(top, top - 1)].re.abs()
        } else {
            wilkinson_shift(
                t[(top - 1, top - 1)],
                t[(top - 1, top)],
                t[(top, top - 1)],
                t[(top, top)],
            )
        };

        for k in l..top {
            let (x, y) = if k == l {
                (t[(l, l)] - shift, t[(l + 1, l)])
            } else {
                (t[(k, k - 1)], t[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            let first = if k == l { l } else { k - 1 };
            for j in first..n {
                let a = t[(k, j)];
                let b = t[(k + 1, j)];
                t[(k, j)] = a * c + s * b;
                t[(k + 1, j)] = -s.conj() * a + b * c;
            }
            if k > l {
                t[(k + 1, k - 1)] = ZERO;
            }
            let last = (k + 2).min(top);
            for i in 0..=last {
                let a = t[(i, k)];
                let b = t[(i, k + 1)];
                t[(i, k)] = a * c + b * s.conj();
                t[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = -a * s + b * c;
            }
        }
    }
    Ok(())
}

/// Right eigenvectors of an upper triangular matrix, by back substitution.
fn triangular_eigenvectors(t: &CMatrix) -> Vec<Vec<Complex64>> {
    let n = t.dim();
    let eps = f64::EPSILON;
    let small = f64::MIN_POSITIVE * (n as f64) / eps;
    const BIG: f64 = 1e150;
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let smin = (eps * (lambda.re.abs() + lambda.im.abs())).max(small);
            let mut x = vec![ZERO; n];
            x[k] = ONE;
            for i in (0..k).rev() {
                let sum: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * x[j]).sum();
                let mut denom = t[(i, i)] - lambda;
                if denom.re.abs() + denom.im.abs() < smin {
                    denom = Complex64::new(smin, 0.0);
                }
                x[i] = -sum / denom;
                if x[i].norm() > BIG {
                    let s = x[i].norm().recip();
                    x.iter_mut().for_each(|z| *z *= s);
                }
            }
            x
        })
        .collect()
}

fn normalize(v: &mut [Complex64]) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    v.iter_mut().for_each(|z| *z /= scale);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
}

/// All eigenpairs of a dense complex matrix.
pub fn eig(a: &CMatrix) -> Result<Eigen> {
    let n = a.dim();
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: vec![],
        });
    }
    let Balanced {
        matrix: mut t,
        perm,
        scale,
        lo,
        hi,
    } = balance(a);
    let mut z = hessenberg(&mut t, lo, hi);
    schur(&mut t, &mut z, lo, hi)?;

    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let vectors = triangular_eigenvectors(&t)
        .into_iter()
        .map(|x| {
            let y = z.mul_vec(&x);
            let mut v = vec![ZERO; n];
            for (pos, yi) in y.into_iter().enumerate() {
                v[perm[pos]] = yi * scale[pos];
            }
            normalize(&mut v);
            v
        })
        .collect();
    Ok(Eigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(a: &CMatrix, lambda: Complex64, v: &[Complex64]) -> f64 {
        a.mul_vec(v)
            .iter()
            .zip(v)
            .map(|(av, vi)| (av - lambda * vi).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn diagonal_and_triangular_are_exact() {
        let a = CMatrix::from_rows(&[
            vec![c(1.44, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.04, 0.0), c(0.04, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.04, 0.0), c(0.64, 0.0)],
        ]);
        let e = eig(&a).unwrap();
        let mut vals: Vec<f64> = e.values.iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![0.04, 0.64, 1.44]);
        assert!(e.values.iter().all(|z| z.im == 0.0));
        for (l, v) in e.values.iter().zip(&e.vectors) {
            assert!(residual(&a, *l, v) < 1e-15);
        }
    }

    #[test]
    fn hermitian_2x2() {
        let a = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ]);
        let e = eig(&a).unwrap();
        let mut vals: Vec<f64> = e.values.iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        assert!(e.values.iter().all(|z| z.im.abs() < 1e-14));
    }

    #[test]
    fn jordan_block_vectors_coalesce() {
        let a = CMatrix::from_rows(&[
            vec![c(0.25, 0.0), c(0.0, 0.0)],
            vec![c(0.04, 0.0), c(0.25, 0.0)],
        ]);
        let e = eig(&a).unwrap();
        let overlap: Complex64 = e.vectors[0]
            .iter()
            .zip(&e.vectors[1])
            .map(|(x, y)| x.conj() * y)
            .sum();
        assert!(1.0 - overlap.norm() < 1e-12);
    }

    #[test]
    fn dense_residuals() {
        let a = CMatrix::from_fn(7, |i, j| {
            let x = (i * 7 + j) as f64;
            c((x * 0.37).sin(), (x * 1.3).cos() * 0.5)
        });
        let e = eig(&a).unwrap();
        let norm = a.norm_fro();
        for (l, v) in e.values.iter().zip(&e.vectors) {
            assert!(residual(&a, *l, v) < 1e-12 * norm);
        }
        let trace: Complex64 = (0..7).map(|i| a[(i, i)]).sum();
        let sum: Complex64 = e.values.iter().sum();
        assert!((trace - sum).norm() < 1e-12);
    }

    #[test]
    fn badly_scaled_chain_stays_real() {
        // Tridiagonal chain similar to a symmetric one through a huge diagonal scaling.
        let n = 33;
        let (s1, s2) = (0.08 * 1.999, 0.08 * 0.001);
        let a = CMatrix::from_fn(n, |i, j| {
            if i == j {
                let d = i as f64 - 16.0 + 0.5;
                c(d * d, 0.0)
            } else if i == j + 1 {
                c(s1, 0.0)
            } else if j == i + 1 {
                c(s2, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let e = eig(&a).unwrap();
        let max_im = e.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(max_im < 1e-10, "max_im = {max_im}");
    }
}
