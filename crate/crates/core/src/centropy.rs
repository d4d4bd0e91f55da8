//! Coarse-grained classical entropies by box counting on `(x, p_x)` pixels.
//!
//! With `N` points in total (in range or not) and `c` of them in a pixel of
//! area `dx·dp`, the density is `ρ̃ = c/(N·dx·dp)`, so
//! `S_L^cl = 1 − 2πħ·Σ ρ̃² dx dp` and `S_V^cl = −Σ ρ̃ ln(2πħ ρ̃) dx dp`.
//! Empty pixels contribute nothing to either sum.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::cdyn::TrajectoryEnsemble;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, PhaseSpaceHistogram};

/// Which conjugate pair of the ensemble to project onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    X,
    Y,
}

/// Count `(x, p)` points on the pixels of `template`.
pub fn bin_points(points: &[(f64, f64)], template: &PhaseSpaceHistogram) -> Result<PhaseSpaceHistogram> {
    if points.is_empty() {
        return Err(Error::validation("centropy.empty", "cannot bin an empty point set"));
    }
    let mut h = template.clone();
    h.clear();
    // Pixel lookup is parallel; the integer increments are applied in index
    // order, so the counts do not depend on the thread count.
    let idx: Vec<Option<(usize, usize)>> = points.par_iter().map(|&(x, p)| h.pixel_of(x, p)).collect();
    for i in idx {
        match i {
            Some((ix, ip)) => h.counts[ix * h.np + ip] += 1,
            None => h.out_of_range += 1,
        }
    }
    Ok(h)
}

/// Bin a point list on the pixels matched to `grid_x`.
pub fn bin_snapshot(points: &[(f64, f64)], grid_x: &Grid1D) -> Result<PhaseSpaceHistogram> {
    bin_points(points, &PhaseSpaceHistogram::matched(grid_x))
}

/// Bin one subsystem of an ensemble.
pub fn bin_ensemble(ens: &TrajectoryEnsemble, which: Subsystem, template: &PhaseSpaceHistogram) -> Result<PhaseSpaceHistogram> {
    let pts = match which {
        Subsystem::X => ens.x_projection(),
        Subsystem::Y => ens.y_projection(),
    };
    bin_points(&pts, template)
}

fn cell_ratio(h: &PhaseSpaceHistogram, hbar: f64) -> f64 {
    TAU * hbar / h.pixel_area()
}

/// `1 − 2πħ Σ ρ̃² dx dp`. Can be negative when the points are concentrated
/// below one `2πħ` cell; see [`is_sub_planck`].
pub fn classical_linear_entropy(h: &PhaseSpaceHistogram, hbar: f64) -> f64 {
    let n = h.total() as f64;
    let sum_sq: f64 = h
        .counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / n;
            f * f
        })
        .sum();
    1.0 - cell_ratio(h, hbar) * sum_sq
}

/// `−Σ ρ̃ ln(2πħ ρ̃) dx dp`.
pub fn classical_von_neumann_entropy(h: &PhaseSpaceHistogram, hbar: f64) -> f64 {
    let n = h.total() as f64;
    let r = cell_ratio(h, hbar);
    -h.counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / n;
            f * (r * f).ln()
        })
        .sum::<f64>()
}

/// A negative linear entropy means the density is concentrated below one
/// `2πħ` cell; the value is reported unclamped.
pub fn is_sub_planck(linear_entropy: f64) -> bool {
    linear_entropy < 0.0
}
