//! Uniform position grids, their conjugate momentum lattices, and the 2D
//! spectral transform used by the split-operator propagator.
//!
//! A [`Grid1D`] with `n` points on `[x_min, x_max)` has spacing
//! `dx = (x_max − x_min)/n` and a momentum lattice `p_k = ħ·2πk/(n·dx)` in
//! FFT order (`k = 0, 1, …, n/2−1, −n/2, …, −1`), so `dx·dp·n = 2πħ`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dp: f64,
    pub hbar: f64,
}

impl Grid1D {
    pub fn new(n: usize, x_min: f64, x_max: f64, hbar: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::validation(
                "grid.not_pow2",
                format!("grid size must be a power of two >= 8 (got {n})"),
            ));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::validation(
                "grid.bad_extent",
                format!("need finite x_max > x_min (got [{x_min}, {x_max}))"),
            ));
        }
        if !(hbar > 0.0) {
            return Err(Error::validation("grid.bad_hbar", "hbar must be > 0"));
        }
        let dx = (x_max - x_min) / n as f64;
        let dp = 2.0 * PI * hbar / (n as f64 * dx);
        Ok(Grid1D {
            n,
            x_min,
            x_max,
            dx,
            dp,
            hbar,
        })
    }

    /// Symmetric grid on `[−half_width, half_width)`.
    pub fn symmetric(n: usize, half_width: f64, hbar: f64) -> Result<Self> {
        Self::new(n, -half_width, half_width, hbar)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    /// Signed frequency index of FFT slot `k`.
    #[inline]
    pub fn freq_index(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn p(&self, k: usize) -> f64 {
        self.freq_index(k) as f64 * self.dp
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Momentum lattice in FFT order.
    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.p(k)).collect()
    }

    /// Largest representable |p|, `n·dp/2`.
    pub fn p_max(&self) -> f64 {
        0.5 * self.n as f64 * self.dp
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x < self.x_max
    }
}

/// Complex amplitudes `ψ(x_i, y_j)` stored row-major with `x` as the row index.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    pub grid_x: Grid1D,
    pub grid_y: Grid1D,
    pub values: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn zeros(grid_x: Grid1D, grid_y: Grid1D) -> Self {
        let len = grid_x.n * grid_y.n;
        ComplexField2D {
            grid_x,
            grid_y,
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_fn(grid_x: Grid1D, grid_y: Grid1D, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        let ny = grid_y.n;
        let mut values = vec![Complex64::new(0.0, 0.0); grid_x.n * ny];
        values.par_chunks_mut(ny).enumerate().for_each(|(i, row)| {
            let x = grid_x.x(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(x, grid_y.x(j));
            }
        });
        ComplexField2D {
            grid_x,
            grid_y,
            values,
        }
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.grid_x.n
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.grid_y.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.ny() + j]
    }

    pub fn cell_area(&self) -> f64 {
        self.grid_x.dx * self.grid_y.dx
    }

    /// `Σ |ψ|² dx dy`.
    pub fn norm_sqr(&self) -> f64 {
        ordered_sum(&self.values, |v| v.norm_sqr()) * self.cell_area()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm_sqr();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::integrity(
                "field.zero_norm",
                format!("cannot normalize a field with norm {norm}"),
            ));
        }
        let scale = norm.sqrt().recip();
        self.values.iter_mut().for_each(|v| *v *= scale);
        Ok(norm)
    }

    pub fn max_abs_diff(&self, other: &ComplexField2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Field with the roles of `x` and `y` exchanged.
    pub fn transposed(&self) -> ComplexField2D {
        let mut values = vec![Complex64::new(0.0, 0.0); self.values.len()];
        transpose(&self.values, &mut values, self.nx(), self.ny());
        ComplexField2D {
            grid_x: self.grid_y.clone(),
            grid_y: self.grid_x.clone(),
            values,
        }
    }

    pub fn has_non_finite(&self) -> bool {
        self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
    }
}

/// Deterministic sum over a slice in fixed-size blocks, independent of the
/// rayon pool size.
pub(crate) fn ordered_sum<T: Sync>(items: &[T], f: impl Fn(&T) -> f64 + Sync) -> f64 {
    const BLOCK: usize = 4096;
    let partials: Vec<f64> = items
        .par_chunks(BLOCK)
        .map(|chunk| chunk.iter().map(&f).sum::<f64>())
        .collect();
    partials.iter().sum()
}

/// Out-of-place transpose of a row-major `rows × cols` matrix.
pub(crate) fn transpose<T: Copy + Send + Sync>(src: &[T], dst: &mut [T], rows: usize, cols: usize) {
    const TILE: usize = 32;
    debug_assert_eq!(src.len(), rows * cols);
    // dst is cols × rows; each rayon task owns a band of TILE destination rows.
    dst.par_chunks_mut(TILE * rows)
        .enumerate()
        .for_each(|(band, out)| {
            let c0 = band * TILE;
            let c1 = (c0 + TILE).min(cols);
            for r0 in (0..rows).step_by(TILE) {
                let r1 = (r0 + TILE).min(rows);
                for c in c0..c1 {
                    let out_row = &mut out[(c - c0) * rows..(c - c0 + 1) * rows];
                    for r in r0..r1 {
                        out_row[r] = src[r * cols + c];
                    }
                }
            }
        });
}

/// Unitary 2D DFT between position and momentum representations.
///
/// Row transforms are independent, so the result is bit-identical for any
/// number of worker threads.
pub struct SpectralTransform {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralTransform")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

impl SpectralTransform {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        SpectralTransform {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        }
    }

    pub fn for_field(field: &ComplexField2D) -> Self {
        Self::new(field.nx(), field.ny())
    }

    fn rows(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64], len: usize) {
        const ROWS_PER_TASK: usize = 8;
        data.par_chunks_mut(len * ROWS_PER_TASK).for_each_init(
            || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            |scratch, block| fft.process_with_scratch(block, scratch),
        );
    }

    /// Unnormalized forward DFT. Input `data` is `[x][y]`; the result is left
    /// in `out` in transposed `[ky][kx]` layout and `data` is clobbered.
    pub(crate) fn forward_to_transposed(&self, data: &mut [Complex64], out: &mut [Complex64]) {
        Self::rows(&self.fwd_y, data, self.ny);
        transpose(data, out, self.nx, self.ny);
        Self::rows(&self.fwd_x, out, self.nx);
    }

    /// Unnormalized inverse DFT from transposed `[ky][kx]` layout in `spec`
    /// back to `[x][y]` in `data`; `spec` is clobbered.
    pub(crate) fn inverse_from_transposed(&self, spec: &mut [Complex64], data: &mut [Complex64]) {
        Self::rows(&self.inv_x, spec, self.nx);
        transpose(spec, data, self.ny, self.nx);
        Self::rows(&self.inv_y, data, self.ny);
    }

    /// Unitary forward transform; momentum-space values in `[kx][ky]` FFT order.
    pub fn forward(&self, field: &ComplexField2D) -> ComplexField2D {
        self.apply(field, true)
    }

    /// Unitary inverse of [`forward`](Self::forward).
    pub fn inverse(&self, field: &ComplexField2D) -> ComplexField2D {
        self.apply(field, false)
    }

    fn apply(&self, field: &ComplexField2D, forward: bool) -> ComplexField2D {
        assert_eq!((field.nx(), field.ny()), (self.nx, self.ny));
        let (fx, fy) = if forward {
            (&self.fwd_x, &self.fwd_y)
        } else {
            (&self.inv_x, &self.inv_y)
        };
        let mut data = field.values.clone();
        let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
        Self::rows(fy, &mut data, self.ny);
        transpose(&data, &mut tmp, self.nx, self.ny);
        Self::rows(fx, &mut tmp, self.nx);
        transpose(&tmp, &mut data, self.ny, self.nx);
        let scale = ((self.nx * self.ny) as f64).sqrt().recip();
        data.iter_mut().for_each(|v| *v *= scale);
        ComplexField2D {
            grid_x: field.grid_x.clone(),
            grid_y: field.grid_y.clone(),
            values: data,
        }
    }
}

/// Integer box counts on an `(x, p_x)` pixel lattice.
///
/// Pixel `(i, k)` covers `[x_lo + i·dx, x_lo + (i+1)·dx) × [p_lo + k·dp, p_lo + (k+1)·dp)`;
/// points exactly on an edge go to the higher-index pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceHistogram {
    pub x_lo: f64,
    pub dx: f64,
    pub nx: usize,
    pub p_lo: f64,
    pub dp: f64,
    pub np: usize,
    /// Row-major `[ix][ip]`.
    pub counts: Vec<u64>,
    pub out_of_range: u64,
}

impl PhaseSpaceHistogram {
    pub fn empty(x_lo: f64, dx: f64, nx: usize, p_lo: f64, dp: f64, np: usize) -> Self {
        PhaseSpaceHistogram {
            x_lo,
            dx,
            nx,
            p_lo,
            dp,
            np,
            counts: vec![0; nx * np],
            out_of_range: 0,
        }
    }

    /// Pixels matched to a quantum grid: one pixel per `(x_i, p_k)` lattice
    /// point, centred on it, so the pixel area is exactly `dx·dp`.
    pub fn matched(grid: &Grid1D) -> Self {
        Self::coarsened(grid, 1)
    }

    /// Like [`matched`](Self::matched) with `factor × factor` lattice cells
    /// merged per pixel.
    pub fn coarsened(grid: &Grid1D, factor: usize) -> Self {
        let factor = factor.max(1);
        let dx = grid.dx * factor as f64;
        let dp = grid.dp * factor as f64;
        let nx = (grid.n / factor).max(1);
        let np = (grid.n / factor).max(1);
        let x_lo = grid.x_min - 0.5 * grid.dx;
        let p_lo = -(grid.n as f64 / 2.0) * grid.dp - 0.5 * grid.dp;
        Self::empty(x_lo, dx, nx, p_lo, dp, np)
    }

    #[inline]
    pub fn x_edge(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx
    }

    #[inline]
    pub fn p_edge(&self, k: usize) -> f64 {
        self.p_lo + k as f64 * self.dp
    }

    pub fn pixel_area(&self) -> f64 {
        self.dx * self.dp
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// In-range plus out-of-range points.
    pub fn total(&self) -> u64 {
        self.in_range() + self.out_of_range
    }

    pub fn get(&self, ix: usize, ip: usize) -> u64 {
        self.counts[ix * self.np + ip]
    }

    pub fn clear(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.out_of_range = 0;
    }

    /// Add counts of a histogram on the same lattice.
    pub fn merge(&mut self, other: &PhaseSpaceHistogram) {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.out_of_range += other.out_of_range;
    }

    /// Bin index on a half-open lattice, `None` when out of range.
    #[inline]
    fn index(lo: f64, step: f64, n: usize, v: f64, edge: impl Fn(usize) -> f64) -> Option<usize> {
        let guess = ((v - lo) / step).floor();
        if !(guess >= -1.0 && guess <= n as f64) {
            return None;
        }
        let mut i = guess as i64;
        // Snap against the exact edge values so boundary points are assigned
        // consistently despite rounding in the division.
        if i >= 0 && (i as usize) < n && v < edge(i as usize) {
            i -= 1;
        } else if i + 1 >= 0 && ((i + 1) as usize) <= n && v >= edge((i + 1) as usize) {
            i += 1;
        }
        if i < 0 || i as usize >= n {
            None
        } else {
            Some(i as usize)
        }
    }

    #[inline]
    pub fn pixel_of(&self, x: f64, p: f64) -> Option<(usize, usize)> {
        let ix = Self::index(self.x_lo, self.dx, self.nx, x, |i| self.x_edge(i))?;
        let ip = Self::index(self.p_lo, self.dp, self.np, p, |k| self.p_edge(k))?;
        Some((ix, ip))
    }

    #[inline]
    pub fn add(&mut self, x: f64, p: f64) {
        match self.pixel_of(x, p) {
            Some((ix, ip)) => self.counts[ix * self.np + ip] += 1,
            None => self.out_of_range += 1,
        }
    }

    /// Fraction of points that fell outside the lattice.
    pub fn out_of_range_fraction(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.out_of_range as f64 / total as f64
        }
    }
}
