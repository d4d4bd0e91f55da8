//! Reduced density matrix of the `x` subsystem and its entropies.
//!
//! With `B_ik = ψ(x_i, y_k)·√(dx·dy)` the matrix `M = B·B†` has entries
//! `ρ(x_i, x_j)·dx`, so its eigenvalues are the dimensionless Schmidt weights
//! of the joint state and sum to its norm.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::ComplexField2D;

/// Weights below this are left out of `−Σ λ ln λ`.
pub const LOG_CUTOFF: f64 = 1e-14;
/// Eigenvalues in `[−NEGATIVE_TOLERANCE, 0)` are solver noise and set to 0.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;
/// Largest accepted `|Tr M − 1|`.
pub const TRACE_TOLERANCE: f64 = 1e-6;
/// Largest accepted disagreement between the two purity evaluations.
pub const PURITY_TOLERANCE: f64 = 1e-8;
/// Grid rows whose total weight is below this are dropped before
/// diagonalizing; they perturb the spectrum by at most their weight.
pub const ROW_CUTOFF: f64 = 1e-28;

#[derive(Debug, Clone)]
pub struct ReducedDensityMatrix {
    /// Dimension of the retained block.
    pub n: usize,
    /// Grid rows the retained block corresponds to.
    pub rows: Vec<usize>,
    /// Row-major `n × n`, `ρ(x_i, x_j)·dx`.
    pub entries: Vec<Complex64>,
    /// Clipped eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Most negative raw eigenvalue (0 if none).
    pub min_raw_eigenvalue: f64,
    pub trace: f64,
}

/// Reduce over `y` and diagonalize.
pub fn reduce(psi: &ComplexField2D) -> Result<ReducedDensityMatrix> {
    let (nx, ny) = (psi.nx(), psi.ny());
    let w = psi.cell_area().sqrt();
    let row_weight: Vec<f64> = psi
        .values
        .par_chunks(ny)
        .map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>() * w * w)
        .collect();
    let rows: Vec<usize> = (0..nx).filter(|&i| row_weight[i] >= ROW_CUTOFF).collect();
    let n = rows.len();
    if n == 0 {
        return Err(Error::integrity("rdm.empty", "field has no weight"));
    }
    // Split real and imaginary parts so the inner products vectorize.
    let mut re = vec![0.0; n * ny];
    let mut im = vec![0.0; n * ny];
    for (r, &i) in rows.iter().enumerate() {
        for k in 0..ny {
            let v = psi.values[i * ny + k] * w;
            re[r * ny + k] = v.re;
            im[r * ny + k] = v.im;
        }
    }

    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    entries.par_chunks_mut(n).enumerate().for_each(|(a, out)| {
        let (ar, ai) = (&re[a * ny..(a + 1) * ny], &im[a * ny..(a + 1) * ny]);
        for b in 0..=a {
            let (br, bi) = (&re[b * ny..(b + 1) * ny], &im[b * ny..(b + 1) * ny]);
            out[b] = dot_conj(ar, ai, br, bi);
        }
    });
    // Mirror the lower triangle so the matrix is exactly Hermitian.
    for a in 0..n {
        for b in (a + 1)..n {
            entries[a * n + b] = entries[b * n + a].conj();
        }
        entries[a * n + a].im = 0.0;
    }

    let trace: f64 = (0..n).map(|a| entries[a * n + a].re).sum();
    if (trace - 1.0).abs() > TRACE_TOLERANCE {
        return Err(Error::integrity(
            "rdm.trace",
            format!("reduced density matrix has trace {trace}"),
        ));
    }

    let m = DMatrix::from_row_slice(n, n, &entries);
    let raw = m.symmetric_eigenvalues();
    let mut eigenvalues: Vec<f64> = raw.iter().copied().collect();
    let min_raw = eigenvalues.iter().copied().fold(0.0, f64::min);
    if min_raw < -NEGATIVE_TOLERANCE {
        return Err(Error::integrity(
            "rdm.negative_eigenvalue",
            format!("eigenvalue {min_raw} below -{NEGATIVE_TOLERANCE}"),
        ));
    }
    for l in eigenvalues.iter_mut() {
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(ReducedDensityMatrix {
        n,
        rows,
        entries,
        eigenvalues,
        min_raw_eigenvalue: min_raw,
        trace,
    })
}

/// `Σ_k (a_k)(b_k)*` with a fixed four-way accumulation order.
#[inline]
fn dot_conj(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> Complex64 {
    let mut sr = [0.0f64; 4];
    let mut si = [0.0f64; 4];
    let chunks = ar.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let k = 4 * c + l;
            sr[l] += ar[k] * br[k] + ai[k] * bi[k];
            si[l] += ai[k] * br[k] - ar[k] * bi[k];
        }
    }
    for k in 4 * chunks..ar.len() {
        sr[0] += ar[k] * br[k] + ai[k] * bi[k];
        si[0] += ai[k] * br[k] - ar[k] * bi[k];
    }
    Complex64::new((sr[0] + sr[1]) + (sr[2] + sr[3]), (si[0] + si[1]) + (si[2] + si[3]))
}

/// Reduced density matrix of the `y` subsystem.
pub fn reduce_y(psi: &ComplexField2D) -> Result<ReducedDensityMatrix> {
    reduce(&psi.transposed())
}

impl ReducedDensityMatrix {
    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.entries[a * self.n + b]
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.n {
            for b in 0..self.n {
                worst = worst.max((self.entry(a, b) - self.entry(b, a).conj()).norm());
            }
        }
        worst
    }

    /// `Tr M²` as the squared Frobenius norm.
    pub fn purity_frobenius(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `Tr M²` as `Σ λ²`.
    pub fn purity_spectral(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l * l).sum()
    }
}

/// Purity, cross-checked between the matrix and its spectrum.
pub fn purity(rdm: &ReducedDensityMatrix) -> Result<f64> {
    let a = rdm.purity_frobenius();
    let b = rdm.purity_spectral();
    if (a - b).abs() > PURITY_TOLERANCE {
        return Err(Error::integrity(
            "rdm.purity_mismatch",
            format!("Frobenius purity {a} vs spectral purity {b}"),
        ));
    }
    Ok(b)
}

pub fn linear_entropy(rdm: &ReducedDensityMatrix) -> Result<f64> {
    Ok(1.0 - purity(rdm)?)
}

pub fn von_neumann_entropy(rdm: &ReducedDensityMatrix) -> f64 {
    von_neumann_from_weights(&rdm.eigenvalues)
}

pub fn linear_entropy_from_weights(weights: &[f64]) -> f64 {
    1.0 - weights.iter().map(|l| l * l).sum::<f64>()
}

/// `−Σ λ ln λ` in nats over weights above [`LOG_CUTOFF`].
pub fn von_neumann_from_weights(weights: &[f64]) -> f64 {
    -weights
        .iter()
        .filter(|&&l| l > LOG_CUTOFF)
        .map(|&l| l * l.ln())
        .sum::<f64>()
}

/// `(S_L, S_V)` of the `x` subsystem.
pub fn entropies(psi: &ComplexField2D) -> Result<(f64, f64)> {
    let rdm = reduce(psi)?;
    Ok((linear_entropy(&rdm)?, von_neumann_entropy(&rdm)))
}
