//! Static-flux spectra: Hamiltonian assembly, eigenpairs, band sweeps over the
//! flux Brillouin zone, the PT-breaking threshold and exceptional points.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{eig, CMatrix};
use crate::model::{free_energy, ModeWindow, RingPotential};
use crate::optimize::golden_section_min;

/// Default residual tolerance (relative to the Frobenius norm of `H`).
pub const DEFAULT_SOLVER_TOL: f64 = 1e-12;

/// Momentum-space Hamiltonian `H[n, m] = (n - f)^2 delta_{nm} + u_{n-m}` on a window.
#[derive(Clone, Debug)]
pub struct HamiltonianMatrix {
    pub window: ModeWindow,
    pub f: f64,
    pub entries: CMatrix,
}

pub fn build_hamiltonian(p: &RingPotential, f: f64, window: ModeWindow) -> HamiltonianMatrix {
    let dim = window.len();
    let mut entries = CMatrix::zeros(dim);
    for (i, n) in window.modes().enumerate() {
        entries[(i, i)] += Complex64::new(free_energy(n, f), 0.0);
        for (q, u) in p.harmonics() {
            if let Some(j) = window.index_of(n - q) {
                entries[(i, j)] += u;
            }
        }
    }
    HamiltonianMatrix { window, f, entries }
}

/// Eigenpairs sorted by ascending real part, then imaginary part.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub eigenvalues: Vec<Complex64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`; unit 2-norm.
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
}

impl EigenSolution {
    /// `1 - |<v_i, v_j>|`.
    pub fn coalescence_metric(&self, i: usize, j: usize) -> f64 {
        let overlap: Complex64 = self.eigenvectors[i]
            .iter()
            .zip(&self.eigenvectors[j])
            .map(|(a, b)| a.conj() * b)
            .sum();
        (1.0 - overlap.norm()).max(0.0)
    }

    pub fn max_im(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }
}

/// Order for eigenvalues: ascending real part; real parts equal to within a
/// relative `1e-12` are ordered by imaginary part.
fn sorted_order(values: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .re
            .total_cmp(&values[b].re)
            .then(values[a].im.total_cmp(&values[b].im))
    });
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() {
            let (x, y) = (values[idx[end - 1]].re, values[idx[end]].re);
            if (y - x).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                break;
            }
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| values[a].im.total_cmp(&values[b].im));
        start = end;
    }
    idx
}

/// Dense eigensolve with the residual contract `|H v - lambda v| <= tol |H|_F` for every pair.
pub fn eigensolve(h: &HamiltonianMatrix, tol: f64) -> Result<EigenSolution> {
    if !h.entries.is_finite() {
        return Err(invalid("Hamiltonian has non-finite entries"));
    }
    let raw = eig(&h.entries)?;
    let order = sorted_order(&raw.values);
    let eigenvalues: Vec<Complex64> = order.iter().map(|&k| raw.values[k]).collect();
    let eigenvectors: Vec<Vec<Complex64>> = order.iter().map(|&k| raw.vectors[k].clone()).collect();
    let norm = h.entries.norm_fro();
    let mut residuals = Vec::with_capacity(eigenvalues.len());
    for (k, (lambda, v)) in eigenvalues.iter().zip(&eigenvectors).enumerate() {
        let hv = h.entries.mul_vec(v);
        let r = hv
            .iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if r > tol * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::Residual {
                index: k,
                residual: r,
                bound: tol * norm,
            });
        }
        residuals.push(r);
    }
    Ok(EigenSolution {
        eigenvalues,
        eigenvectors,
        residuals,
    })
}

/// Flux-resolved bands over `f in [-1/2, 1/2)`, tracked by continuity.
#[derive(Clone, Debug, Serialize)]
pub struct BandStructure {
    pub f_grid: Vec<f64>,
    /// `bands[b][k]` is the energy of band `b` at `f_grid[k]`.
    pub bands: Vec<Vec<Complex64>>,
    pub max_im: f64,
    /// `(grid index, band)` where tracking was ambiguous or jumped.
    pub flagged: Vec<(usize, usize)>,
}

impl BandStructure {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "f,band,re_E,im_E")?;
        for (k, f) in self.f_grid.iter().enumerate() {
            for (b, band) in self.bands.iter().enumerate() {
                let e = band[k];
                writeln!(w, "{},{},{},{}", f, b, e.re, e.im)?;
            }
        }
        Ok(())
    }
}

/// Uniform grid `f_k = -1/2 + k / n_f`, `k = 0..n_f`.
pub fn flux_grid(n_f: usize) -> Vec<f64> {
    (0..n_f).map(|k| -0.5 + k as f64 / n_f as f64).collect()
}

/// Eigenvalues at each flux sample, solved in parallel; results ordered by grid index.
pub fn spectra_on_grid(
    p: &RingPotential,
    window: ModeWindow,
    f_grid: &[f64],
) -> Result<Vec<Vec<Complex64>>> {
    f_grid
        .par_iter()
        .map(|&f| {
            eigensolve(&build_hamiltonian(p, f, window), DEFAULT_SOLVER_TOL).map(|s| s.eigenvalues)
        })
        .collect()
}

pub fn band_sweep(p: &RingPotential, window: ModeWindow, n_f: usize) -> Result<BandStructure> {
    if n_f < 8 {
        return Err(invalid(format!(
            "band sweep needs at least 8 flux samples, got {n_f}"
        )));
    }
    let f_grid = flux_grid(n_f);
    let spectra = spectra_on_grid(p, window, &f_grid)?;
    let (bands, flagged) = track_bands(&spectra);
    let max_im = spectra
        .iter()
        .flatten()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    Ok(BandStructure {
        f_grid,
        bands,
        max_im,
        flagged,
    })
}

/// Nearest-neighbour continuation in the complex plane with linear prediction.
///
/// Returns band-major energies and the flagged `(grid index, band)` points:
/// jumps larger than ten times the median step, and assignments whose
/// runner-up candidate was nearly as close (near-degeneracies).
pub fn track_bands(spectra: &[Vec<Complex64>]) -> (Vec<Vec<Complex64>>, Vec<(usize, usize)>) {
    let n_k = spectra.len();
    if n_k == 0 {
        return (vec![], vec![]);
    }
    let n_b = spectra[0].len();
    let mut bands: Vec<Vec<Complex64>> = (0..n_b).map(|b| vec![spectra[0][b]]).collect();
    let mut ambiguous = Vec::new();

    for k in 1..n_k {
        let current = &spectra[k];
        let predicted: Vec<Complex64> = bands
            .iter()
            .map(|band| {
                let last = band[k - 1];
                if k >= 2 {
                    last * 2.0 - band[k - 2]
                } else {
                    last
                }
            })
            .collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n_b * n_b);
        for (b, pred) in predicted.iter().enumerate() {
            for (j, lambda) in current.iter().enumerate() {
                pairs.push(((pred - lambda).norm(), b, j));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut band_taken = vec![false; n_b];
        let mut eig_taken = vec![false; n_b];
        let mut chosen = vec![(0usize, 0.0f64); n_b];
        for &(d, b, j) in &pairs {
            if !band_taken[b] && !eig_taken[j] {
                band_taken[b] = true;
                eig_taken[j] = true;
                chosen[b] = (j, d);
            }
        }
        for (b, &(j, d)) in chosen.iter().enumerate() {
            bands[b].push(current[j]);
            let runner_up = current
                .iter()
                .enumerate()
                .filter(|&(jj, _)| jj != j)
                .map(|(_, lambda)| (predicted[b] - lambda).norm())
                .fold(f64::INFINITY, f64::min);
            if runner_up <= 2.0 * d {
                ambiguous.push((k, b));
            }
        }
    }

    let mut steps: Vec<f64> = bands
        .iter()
        .flat_map(|band| band.windows(2).map(|w| (w[1] - w[0]).norm()))
        .collect();
    let mut flagged = ambiguous;
    if !steps.is_empty() {
        steps.sort_by(f64::total_cmp);
        let median = steps[steps.len() / 2];
        let threshold = if median > 0.0 {
            10.0 * median
        } else {
            f64::INFINITY
        };
        for (b, band) in bands.iter().enumerate() {
            for k in 1..band.len() {
                if (band[k] - band[k - 1]).norm() > threshold {
                    flagged.push((k, b));
                }
            }
        }
    }
    flagged.sort_unstable();
    flagged.dedup();
    (bands, flagged)
}

/// Largest `|Im E|` over a flux sweep of the reference potential.
pub fn reference_max_im(v0: f64, alpha: f64, window: ModeWindow, n_f: usize) -> Result<f64> {
    let p = RingPotential::reference(v0, alpha)?;
    let spectra = spectra_on_grid(&p, window, &flux_grid(n_f))?;
    Ok(spectra
        .iter()
        .flatten()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max))
}

/// Bisection for the PT-breaking strength of the reference family at fixed `v0`.
///
/// The predicate is "every eigenvalue on the flux grid has `|Im| <= im_tol`";
/// it must hold at `alpha_range.0` and fail at `alpha_range.1`. Returns the
/// midpoint of the final bracket, whose width is at most `1e-3`.
pub fn estimate_alpha_c(
    v0: f64,
    alpha_range: (f64, f64),
    im_tol: f64,
    window: ModeWindow,
    n_f: usize,
) -> Result<f64> {
    let (mut lo, mut hi) = alpha_range;
    if !(lo < hi && lo >= 0.0 && im_tol > 0.0) {
        return Err(invalid(format!(
            "alpha range {alpha_range:?} / im_tol {im_tol} invalid"
        )));
    }
    let real = |alpha: f64| reference_max_im(v0, alpha, window, n_f).map(|m| m <= im_tol);
    let (at_lo, at_hi) = (real(lo)?, real(hi)?);
    if !at_lo || at_hi {
        return Err(Error::BracketInvalid {
            low: lo,
            high: hi,
            at_low: at_lo,
            at_high: at_hi,
        });
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if real(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A pair of coalescing eigenpairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EPReport {
    pub f_star: f64,
    /// Indices into the sorted eigenvalues at `f_star`.
    pub pair: (usize, usize),
    pub gap: f64,
    pub coalescence_metric: f64,
}

/// Exceptional-point search settings.
#[derive(Clone, Copy, Debug)]
pub struct EpSearch {
    pub gap_tol: f64,
    pub vec_tol: f64,
    /// Coarse samples across the search interval before refinement.
    pub scan_points: usize,
    /// Width of the final golden-section bracket.
    pub f_tol: f64,
}

impl Default for EpSearch {
    fn default() -> Self {
        Self {
            gap_tol: 1e-6,
            vec_tol: 1e-4,
            scan_points: 241,
            f_tol: 1e-11,
        }
    }
}

fn min_gap(values: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            best = best.min((values[i] - values[j]).norm());
        }
    }
    best
}

/// Scan `f_search` for minima of the smallest eigenvalue gap, refine each by
/// golden-section search and keep the pairs whose gap and eigenvector overlap
/// both indicate coalescence.
pub fn locate_exceptional_points(
    p: &RingPotential,
    window: ModeWindow,
    f_search: (f64, f64),
    gap_tol: f64,
    vec_tol: f64,
) -> Result<Vec<EPReport>> {
    locate_exceptional_points_with(
        p,
        window,
        f_search,
        EpSearch {
            gap_tol,
            vec_tol,
            ..EpSearch::default()
        },
    )
}

pub fn locate_exceptional_points_with(
    p: &RingPotential,
    window: ModeWindow,
    f_search: (f64, f64),
    cfg: EpSearch,
) -> Result<Vec<EPReport>> {
    let (a, b) = f_search;
    if !(a < b) || cfg.scan_points < 3 {
        return Err(invalid(format!("EP search interval {f_search:?} invalid")));
    }
    let gap_at = |f: f64| -> Result<f64> {
        let s = eigensolve(&build_hamiltonian(p, f, window), DEFAULT_SOLVER_TOL)?;
        Ok(min_gap(&s.eigenvalues))
    };
    let n = cfg.scan_points;
    let grid: Vec<f64> = (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect();
    let gaps: Vec<f64> = grid.par_iter().map(|&f| gap_at(f)).collect::<Result<_>>()?;

    let mut candidates = Vec::new();
    for k in 0..n {
        let left = if k == 0 { f64::INFINITY } else { gaps[k - 1] };
        let right = if k + 1 == n {
            f64::INFINITY
        } else {
            gaps[k + 1]
        };
        if gaps[k] <= left && gaps[k] <= right {
            let lo = grid[k.saturating_sub(1)];
            let hi = grid[(k + 1).min(n - 1)];
            let mut failure = None;
            let (f_star, _) = golden_section_min(
                |f| match gap_at(f) {
                    Ok(g) => g,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::INFINITY
                    }
                },
                lo,
                hi,
                cfg.f_tol,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            candidates.push(f_star);
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|x, y| (*x - *y).abs() < 1e-6);

    let mut reports = Vec::new();
    for f_star in candidates {
        let s = eigensolve(&build_hamiltonian(p, f_star, window), DEFAULT_SOLVER_TOL)?;
        for i in 0..s.eigenvalues.len() {
            for j in i + 1..s.eigenvalues.len() {
                let gap = (s.eigenvalues[i] - s.eigenvalues[j]).norm();
                if gap > cfg.gap_tol {
                    continue;
                }
                let metric = s.coalescence_metric(i, j);
                if metric <= cfg.vec_tol {
                    reports.push(EPReport {
                        f_star,
                        pair: (i, j),
                        gap,
                        coalescence_metric: metric,
                    });
                }
            }
        }
    }
    Ok(reports)
}

/// Largest change of the lowest `n_bands` eigenvalues when the window is doubled.
pub fn window_drift(p: &RingPotential, f: f64, window: ModeWindow, n_bands: usize) -> Result<f64> {
    let small = eigensolve(&build_hamiltonian(p, f, window), DEFAULT_SOLVER_TOL)?;
    let large = eigensolve(
        &build_hamiltonian(p, f, window.doubled()),
        DEFAULT_SOLVER_TOL,
    )?;
    Ok(small
        .eigenvalues
        .iter()
        .zip(&large.eigenvalues)
        .take(n_bands)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// Whether `window` is converged in the sense of [`window_drift`] (`< 1e-8` on the lowest 8 bands) across `f_grid`.
pub fn window_converged(p: &RingPotential, window: ModeWindow, f_grid: &[f64]) -> Result<bool> {
    for &f in f_grid {
        if window_drift(p, f, window, 8)? >= 1e-8 {
            return Ok(false);
        }
    }
    Ok(true)
}
