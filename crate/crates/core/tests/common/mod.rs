#![allow(dead_code)]

use ringflux_core::linalg::CMatrix;
use ringflux_core::Complex64;

/// Coefficients `p[k]` of `det(lambda I - A) = sum_k p[k] lambda^k` (Faddeev–LeVerrier).
pub fn char_poly(a: &CMatrix) -> Vec<Complex64> {
    let n = a.dim();
    let mut p = vec![Complex64::default(); n + 1];
    p[n] = Complex64::new(1.0, 0.0);
    let mut m = CMatrix::zeros(n);
    for k in 1..=n {
        // M_k = A M_{k-1} + p[n-k+1] I
        let prev = m.clone();
        m = CMatrix::from_fn(n, |i, j| {
            let mut acc: Complex64 = (0..n).map(|l| a[(i, l)] * prev[(l, j)]).sum();
            if i == j {
                acc += p[n - k + 1];
            }
            acc
        });
        let trace: Complex64 = (0..n)
            .map(|i| (0..n).map(|l| a[(i, l)] * m[(l, i)]).sum::<Complex64>())
            .sum();
        p[n - k] = -trace / k as f64;
    }
    p
}

fn horner(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::default();
    let mut d = Complex64::default();
    for c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

/// Roots of a monic polynomial: Durand–Kerner iterations, then Newton polishing.
pub fn poly_roots(p: &[Complex64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    let radius = 1.0 + p[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        let mut change = 0.0f64;
        for i in 0..n {
            let (v, _) = horner(p, z[i]);
            let denom: Complex64 = (0..n).filter(|&j| j != i).map(|j| z[i] - z[j]).product();
            let step = v / denom;
            z[i] -= step;
            change = change.max(step.norm());
        }
        if change < 1e-15 * radius {
            break;
        }
    }
    for zi in &mut z {
        for _ in 0..5 {
            let (v, d) = horner(p, *zi);
            if d.norm() == 0.0 {
                break;
            }
            *zi -= v / d;
        }
    }
    z
}

/// Largest distance between two multisets of points under greedy nearest matching.
pub fn match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut pool = b.to_vec();
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = pool
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|u, v| u.1.total_cmp(&v.1))
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(k);
    }
    worst
}
