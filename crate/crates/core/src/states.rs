//! Initial quantum states on the grid and their classical phase-space analogs.
//!
//! Every state is built from the minimum-uncertainty packet
//! `φ(x; x₀, p₀) = (2πσ²)^{-1/4} exp(−(x−x₀)²/4σ² + ip₀x/ħ)`.
//! Note the phase is `p₀x`, not `p₀(x−x₀)`, so overlaps of displaced packets
//! carry a phase `e^{iΔp·x̄/ħ}` with `x̄` the midpoint.
//!
//! The cat and Bell states are both two-term superpositions
//! `Ψ = (A/√2)[a(x)a′(y) + b(x)b′(y)]` (for the cat, `a′ = b′`), so they share
//! the normalization, Schmidt weights and reduced Wigner function below.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cdyn::TrajectoryEnsemble;
use crate::error::{Error, Result};
use crate::grid::{ComplexField2D, Grid1D};
use crate::model::PhasePoint;

/// Phase-space centre `(q, p)` of a packet along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet1D {
    pub q: f64,
    pub p: f64,
}

impl Packet1D {
    pub const fn new(q: f64, p: f64) -> Self {
        Packet1D { q, p }
    }

    #[inline]
    fn amplitude(&self, x: f64, sigma2: f64, hbar: f64) -> Complex64 {
        let norm = (TAU * sigma2).powf(-0.25);
        let d = x - self.q;
        Complex64::from_polar(norm * (-d * d / (4.0 * sigma2)).exp(), self.p * x / hbar)
    }
}

/// `|⟨a|b⟩|` for two packets of equal width.
pub fn overlap_modulus(a: Packet1D, b: Packet1D, sigma2: f64, hbar: f64) -> f64 {
    let dq = b.q - a.q;
    let dp = b.p - a.p;
    (-dq * dq / (8.0 * sigma2) - sigma2 * dp * dp / (2.0 * hbar * hbar)).exp()
}

/// `⟨a|b⟩ = |⟨a|b⟩|·e^{i(p_b−p_a)(q_a+q_b)/2ħ}`.
pub fn overlap(a: Packet1D, b: Packet1D, sigma2: f64, hbar: f64) -> Complex64 {
    let phase = (b.p - a.p) * 0.5 * (a.q + b.q) / hbar;
    Complex64::from_polar(overlap_modulus(a, b, sigma2, hbar), phase)
}

/// Separable Gaussian packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    pub x0: f64,
    pub y0: f64,
    pub px0: f64,
    pub py0: f64,
    pub sigma2: f64,
}

impl GaussianSpec {
    pub const fn new(x0: f64, y0: f64, px0: f64, py0: f64, sigma2: f64) -> Self {
        GaussianSpec {
            x0,
            y0,
            px0,
            py0,
            sigma2,
        }
    }

    pub fn x_packet(&self) -> Packet1D {
        Packet1D::new(self.x0, self.px0)
    }

    pub fn y_packet(&self) -> Packet1D {
        Packet1D::new(self.y0, self.py0)
    }
}

/// Superposition of two packets in `x` times a single packet in `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatSpec {
    pub packet1: Packet1D,
    pub packet2: Packet1D,
    pub environment: Packet1D,
    pub sigma2: f64,
}

/// `(A/√2)[a(x)a′(y) + b(x)b′(y)]` with component `k` centred at
/// `(x_k, p_{x,k})` ⊗ `(y_k, p_{y,k})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellSpec {
    pub x1: Packet1D,
    pub y1: Packet1D,
    pub x2: Packet1D,
    pub y2: Packet1D,
    pub sigma2: f64,
}

impl BellSpec {
    /// Crossed pairing: the `y` centre of each component is the `x` centre of
    /// the other.
    pub fn crossed(center1: Packet1D, center2: Packet1D, sigma2: f64) -> Self {
        BellSpec {
            x1: center1,
            y1: center2,
            x2: center2,
            y2: center1,
            sigma2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Gaussian(GaussianSpec),
    Cat(CatSpec),
    Bell(BellSpec),
}

/// The generic two-term form shared by cat and Bell states.
#[derive(Debug, Clone, Copy)]
struct TwoTerm {
    ax: Packet1D,
    ay: Packet1D,
    bx: Packet1D,
    by: Packet1D,
    sigma2: f64,
}

impl TwoTerm {
    fn overlap(&self, hbar: f64) -> Complex64 {
        overlap(self.ax, self.bx, self.sigma2, hbar) * overlap(self.ay, self.by, self.sigma2, hbar)
    }

    /// `A²` with `A⁻² = 1 + Re⟨a_x|b_x⟩⟨a_y|b_y⟩`.
    fn a_squared(&self, hbar: f64) -> f64 {
        1.0 / (1.0 + self.overlap(hbar).re)
    }

    /// Schmidt weights `(λ₊, λ₋)` from `λ₊λ₋ = (A⁴/4)(1−g_x²)(1−g_y²)`.
    fn schmidt_weights(&self, hbar: f64) -> (f64, f64) {
        let gx = overlap_modulus(self.ax, self.bx, self.sigma2, hbar);
        let gy = overlap_modulus(self.ay, self.by, self.sigma2, hbar);
        let a2 = self.a_squared(hbar);
        let det = 0.25 * a2 * a2 * (1.0 - gx * gx) * (1.0 - gy * gy);
        let root = (1.0 - 4.0 * det).max(0.0).sqrt();
        (0.5 * (1.0 + root), 0.5 * (1.0 - root))
    }

    fn reduced_wigner(&self, hbar: f64, x: f64, p: f64) -> f64 {
        let s2 = self.sigma2;
        let a2 = self.a_squared(hbar);
        let (a, b) = (self.ax, self.bx);
        let mid = Packet1D::new(0.5 * (a.q + b.q), 0.5 * (a.p + b.p));
        let (dq, dp) = (b.q - a.q, b.p - a.p);
        let gy = overlap_modulus(self.ay, self.by, s2, hbar);
        let y_phase = (self.by.p - self.ay.p) * 0.5 * (self.ay.q + self.by.q) / hbar;
        let cross = 2.0 * gy * gaussian_wigner(mid, s2, hbar, x, p) * ((dp * x - (p - mid.p) * dq) / hbar + y_phase).cos();
        0.5 * a2 * (gaussian_wigner(a, s2, hbar, x, p) + gaussian_wigner(b, s2, hbar, x, p) + cross)
    }
}

/// Wigner function `(1/πħ)exp(−(x−q)²/2σ² − 2σ²(p−p₀)²/ħ²)` of one packet.
pub fn gaussian_wigner(c: Packet1D, sigma2: f64, hbar: f64, x: f64, p: f64) -> f64 {
    let dx = x - c.q;
    let dp = p - c.p;
    (-dx * dx / (2.0 * sigma2) - 2.0 * sigma2 * dp * dp / (hbar * hbar)).exp() / (PI * hbar)
}

impl StateSpec {
    pub fn sigma2(&self) -> f64 {
        match self {
            StateSpec::Gaussian(g) => g.sigma2,
            StateSpec::Cat(c) => c.sigma2,
            StateSpec::Bell(b) => b.sigma2,
        }
    }

    fn two_term(&self) -> Option<TwoTerm> {
        match *self {
            StateSpec::Gaussian(_) => None,
            StateSpec::Cat(c) => Some(TwoTerm {
                ax: c.packet1,
                ay: c.environment,
                bx: c.packet2,
                by: c.environment,
                sigma2: c.sigma2,
            }),
            StateSpec::Bell(b) => Some(TwoTerm {
                ax: b.x1,
                ay: b.y1,
                bx: b.x2,
                by: b.y2,
                sigma2: b.sigma2,
            }),
        }
    }

    /// All `(x-packet, y-packet)` products appearing in the state.
    pub fn components(&self) -> Vec<(Packet1D, Packet1D)> {
        match *self {
            StateSpec::Gaussian(g) => vec![(g.x_packet(), g.y_packet())],
            StateSpec::Cat(c) => vec![(c.packet1, c.environment), (c.packet2, c.environment)],
            StateSpec::Bell(b) => vec![(b.x1, b.y1), (b.x2, b.y2)],
        }
    }

    /// Normalization constant `A²` (1 for a single Gaussian).
    pub fn normalization_sq(&self, hbar: f64) -> f64 {
        self.two_term().map_or(1.0, |t| t.a_squared(hbar))
    }

    /// Closed-form Schmidt weights, descending; a single Gaussian gives `[1]`.
    pub fn schmidt_weights(&self, hbar: f64) -> Vec<f64> {
        match self.two_term() {
            None => vec![1.0],
            Some(t) => {
                let (hi, lo) = t.schmidt_weights(hbar);
                vec![hi, lo]
            }
        }
    }

    /// Closed-form `(S_L, S_V)` of the reduced `x` state at `t = 0`.
    pub fn initial_entropies(&self, hbar: f64) -> (f64, f64) {
        let w = self.schmidt_weights(hbar);
        let purity: f64 = w.iter().map(|l| l * l).sum();
        let sv = -w.iter().filter(|&&l| l > 0.0).map(|l| l * l.ln()).sum::<f64>();
        (1.0 - purity, sv)
    }

    /// Reduced Wigner function `W_X(x, p_x)` at `t = 0`.
    pub fn reduced_wigner(&self, hbar: f64, x: f64, p: f64) -> f64 {
        match self {
            StateSpec::Gaussian(g) => gaussian_wigner(g.x_packet(), g.sigma2, hbar, x, p),
            _ => self.two_term().unwrap().reduced_wigner(hbar, x, p),
        }
    }

    /// Reject grids that do not cover every packet to ±5 widths in position
    /// and momentum.
    pub fn check_coverage(&self, gx: &Grid1D, gy: &Grid1D) -> Result<()> {
        let s = self.sigma2().sqrt();
        for (px, py) in self.components() {
            for (pk, g, axis) in [(px, gx, 'x'), (py, gy, 'y')] {
                let sp = g.hbar / (2.0 * s);
                let pos_ok = pk.q - 5.0 * s >= g.x_min && pk.q + 5.0 * s <= g.x_max;
                let mom_ok = pk.p.abs() + 5.0 * sp <= g.p_max();
                if !pos_ok || !mom_ok {
                    return Err(Error::validation(
                        "state.off_grid",
                        format!(
                            "packet at ({}, {}) along {axis} is not covered by the grid [{}, {}) with |p| < {}",
                            pk.q,
                            pk.p,
                            g.x_min,
                            g.x_max,
                            g.p_max()
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Sample the state on the grid and normalize it.
    ///
    /// The analytic normalization must already be correct to 1e-6 on the
    /// grid; the residual is then removed so the norm is 1 to rounding.
    pub fn build(&self, gx: &Grid1D, gy: &Grid1D) -> Result<ComplexField2D> {
        if !(self.sigma2() > 0.0) {
            return Err(Error::validation("state.bad_sigma2", "sigma2 must be > 0"));
        }
        self.check_coverage(gx, gy)?;
        let hbar = gx.hbar;
        let s2 = self.sigma2();
        let comps = self.components();
        let coeff = match self {
            StateSpec::Gaussian(_) => 1.0,
            _ => (0.5 * self.normalization_sq(hbar)).sqrt(),
        };
        let mut field = ComplexField2D::from_fn(gx.clone(), gy.clone(), |x, y| {
            comps
                .iter()
                .map(|(a, b)| a.amplitude(x, s2, hbar) * b.amplitude(y, s2, hbar))
                .sum::<Complex64>()
                * coeff
        });
        let norm = field.norm_sqr();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::integrity(
                "state.norm",
                format!("analytic state has grid norm {norm}; the grid under-resolves it"),
            ));
        }
        field.normalize()?;
        Ok(field)
    }

    /// Interference-free phase-space density with the Wigner covariances.
    pub fn classical_analog(&self, hbar: f64) -> ClassicalDensitySpec {
        let s2 = self.sigma2();
        let var_mom = hbar * hbar / (4.0 * s2);
        let mut comps: Vec<PhaseSpaceComponent> = Vec::new();
        let all = self.components();
        let w = 1.0 / all.len() as f64;
        for (a, b) in all {
            let c = PhaseSpaceComponent {
                weight: w,
                x: a.q,
                px: a.p,
                y: b.q,
                py: b.p,
                var_pos: s2,
                var_mom,
            };
            // Coincident components collapse into one.
            if let Some(existing) = comps.iter_mut().find(|e| e.same_center(&c)) {
                existing.weight += c.weight;
            } else {
                comps.push(c);
            }
        }
        ClassicalDensitySpec { components: comps }
    }
}

pub fn build_gaussian(spec: &GaussianSpec, gx: &Grid1D, gy: &Grid1D) -> Result<ComplexField2D> {
    StateSpec::Gaussian(*spec).build(gx, gy)
}

pub fn build_cat(spec: &CatSpec, gx: &Grid1D, gy: &Grid1D) -> Result<ComplexField2D> {
    StateSpec::Cat(*spec).build(gx, gy)
}

pub fn build_bell(spec: &BellSpec, gx: &Grid1D, gy: &Grid1D) -> Result<ComplexField2D> {
    StateSpec::Bell(*spec).build(gx, gy)
}

/// One Gaussian term of a classical phase-space density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceComponent {
    pub weight: f64,
    pub x: f64,
    pub px: f64,
    pub y: f64,
    pub py: f64,
    pub var_pos: f64,
    pub var_mom: f64,
}

impl PhaseSpaceComponent {
    fn same_center(&self, o: &PhaseSpaceComponent) -> bool {
        self.x == o.x && self.px == o.px && self.y == o.y && self.py == o.py
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDensitySpec {
    pub components: Vec<PhaseSpaceComponent>,
}

/// Points per independently seeded RNG stream.
pub const SAMPLE_CHUNK: usize = 4096;

impl ClassicalDensitySpec {
    /// `(weight, x, p_x, var_pos, var_mom)` per component, sorted.
    pub fn x_marginal(&self) -> Vec<[f64; 5]> {
        let mut v: Vec<[f64; 5]> = self
            .components
            .iter()
            .map(|c| [c.weight, c.x, c.px, c.var_pos, c.var_mom])
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Density of the `(x, p_x)` marginal.
    pub fn x_marginal_density(&self, x: f64, p: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let dx = x - c.x;
                let dp = p - c.px;
                c.weight * (-0.5 * dx * dx / c.var_pos - 0.5 * dp * dp / c.var_mom).exp()
                    / (TAU * (c.var_pos * c.var_mom).sqrt())
            })
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if self.components.is_empty()
            || self.components.iter().any(|c| !(c.weight > 0.0) || !(c.var_pos > 0.0) || !(c.var_mom > 0.0))
            || (total - 1.0).abs() > 1e-12
        {
            return Err(Error::validation(
                "density.bad_components",
                "component weights must be positive and sum to 1, variances positive",
            ));
        }
        Ok(())
    }

    /// Draw `n` points.
    ///
    /// Point `i` belongs to chunk `i / 4096`, whose generator is ChaCha8
    /// seeded with `seed` on stream `chunk`. Each point consumes one uniform
    /// to pick its component and two Box–Muller pairs for its four normal
    /// deviates, in the order `x, y, p_x, p_y`. The content is therefore
    /// independent of the thread count.
    pub fn sample(&self, n: usize, seed: u64) -> Result<TrajectoryEnsemble> {
        self.validate()?;
        if n == 0 {
            return Err(Error::validation("density.empty", "need at least one trajectory"));
        }
        let cumulative: Vec<f64> = self
            .components
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.weight;
                Some(*acc)
            })
            .collect();
        let mut points = vec![PhasePoint::new(0.0, 0.0, 0.0, 0.0); n];
        points.par_chunks_mut(SAMPLE_CHUNK).enumerate().for_each(|(chunk, out)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            for pt in out.iter_mut() {
                let u = unit_uniform(&mut rng);
                let k = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
                let c = &self.components[k];
                let (z0, z1) = box_muller(&mut rng);
                let (z2, z3) = box_muller(&mut rng);
                let sq = c.var_pos.sqrt();
                let sp = c.var_mom.sqrt();
                *pt = PhasePoint::new(c.x + sq * z0, c.y + sq * z1, c.px + sp * z2, c.py + sp * z3);
            }
        });
        Ok(TrajectoryEnsemble::new(points, seed))
    }
}

pub fn sample_ensemble(density: &ClassicalDensitySpec, n: usize, seed: u64) -> Result<TrajectoryEnsemble> {
    density.sample(n, seed)
}

/// Uniform on `[0, 1)` with 53 random bits.
#[inline]
fn unit_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Two independent standard normals. `libm` keeps the transcendental
/// functions bit-identical across platforms.
#[inline]
fn box_muller(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = 1.0 - unit_uniform(rng);
    let u2 = unit_uniform(rng);
    let r = (-2.0 * libm::log(u1)).sqrt();
    let theta = TAU * u2;
    (r * libm::cos(theta), r * libm::sin(theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpectralTransform;
    use crate::model::ModelParams;
    use crate::qdyn::{momentum_means, position_moments};

    const HBAR: f64 = 1.0;
    const S2: f64 = 0.5;

    fn grids(n: usize, half: f64) -> (Grid1D, Grid1D) {
        let g = Grid1D::symmetric(n, half, HBAR).unwrap();
        (g.clone(), g)
    }

    fn cat_scenario() -> CatSpec {
        let p = ModelParams::regular();
        let pe = (2.0 * p.shifted_energy(15.0, 2.5).unwrap()).sqrt();
        CatSpec {
            packet1: Packet1D::new(-2.5, pe),
            packet2: Packet1D::new(2.5, -pe),
            environment: Packet1D::new(0.0, 0.0),
            sigma2: S2,
        }
    }

    fn bell_scenario() -> BellSpec {
        let p = ModelParams::regular();
        let pe = -(2.0 * p.shifted_energy(15.0, 2.5).unwrap()).sqrt();
        BellSpec::crossed(Packet1D::new(2.5, pe), Packet1D::new(0.0, 0.0), S2)
    }

    /// Reduced density `ρ(x_i, x_j)` of a grid field by direct summation.
    fn rho(f: &ComplexField2D, i: usize, j: usize) -> Complex64 {
        let ny = f.ny();
        (0..ny).map(|k| f.at(i, k) * f.at(j, k).conj()).sum::<Complex64>() * f.grid_y.dx
    }

    /// Wigner transform of the reduced density at grid point `i`, evaluated by
    /// quadrature over the symmetric offsets available on the grid.
    fn numeric_wigner(f: &ComplexField2D, i: usize, p: f64) -> f64 {
        let dx = f.grid_x.dx;
        let n = f.nx();
        let kmax = i.min(n - 1 - i);
        let mut acc = 0.0;
        for k in -(kmax as i64)..=(kmax as i64) {
            let plus = (i as i64 + k) as usize;
            let minus = (i as i64 - k) as usize;
            let s = k as f64 * dx;
            acc += (rho(f, minus, plus) * Complex64::cis(2.0 * p * s / HBAR)).re;
        }
        // Offset s corresponds to a 2s separation, so ds = dx.
        acc * dx / (PI * HBAR)
    }

    #[test]
    fn gaussian_moments_and_norm() {
        let (gx, gy) = grids(128, 10.0);
        let spec = GaussianSpec::new(1.0, -0.5, 2.0, -1.0, S2);
        let f = build_gaussian(&spec, &gx, &gy).unwrap();
        assert!((f.norm_sqr() - 1.0).abs() < 1e-10);
        let m = position_moments(&f);
        assert!((m[0] - 1.0).abs() < 1e-8 && (m[1] + 0.5).abs() < 1e-8);
        let (px, py) = momentum_means(&f, &SpectralTransform::new(128, 128));
        assert!((px - 2.0).abs() < 1e-8 && (py + 1.0).abs() < 1e-8);

        let f0 = build_gaussian(&GaussianSpec::new(0.0, 0.0, 0.0, 0.0, S2), &gx, &gy).unwrap();
        let m = position_moments(&f0);
        assert!(m[0].abs() < 1e-12 && m[1].abs() < 1e-12);
    }

    #[test]
    fn off_grid_centre_rejected() {
        let (gx, gy) = grids(64, 5.0);
        let err = build_gaussian(&GaussianSpec::new(4.5, 0.0, 0.0, 0.0, S2), &gx, &gy).unwrap_err();
        assert_eq!(err.code(), "state.off_grid");
        let err = build_gaussian(&GaussianSpec::new(0.0, 0.0, 25.0, 0.0, S2), &gx, &gy).unwrap_err();
        assert_eq!(err.code(), "state.off_grid");
    }

    #[test]
    fn overlap_matches_grid_quadrature() {
        let g = Grid1D::symmetric(512, 12.0, HBAR).unwrap();
        let a = Packet1D::new(-0.4, 0.7);
        let b = Packet1D::new(0.9, -0.3);
        let num: Complex64 = (0..g.n)
            .map(|i| a.amplitude(g.x(i), S2, HBAR).conj() * b.amplitude(g.x(i), S2, HBAR))
            .sum::<Complex64>()
            * g.dx;
        assert!((num - overlap(a, b, S2, HBAR)).norm() < 1e-12);
    }

    #[test]
    fn cat_scenario_and_degenerate_limit() {
        let (gx, gy) = grids(256, 14.0);
        let cat = cat_scenario();
        let a2 = StateSpec::Cat(cat).normalization_sq(HBAR);
        assert!((a2 - 1.0).abs() < 1e-10);
        let f = build_cat(&cat, &gx, &gy).unwrap();
        assert!((f.norm_sqr() - 1.0).abs() < 1e-10);

        let p0 = Packet1D::new(0.0, 1.3);
        let deg = CatSpec {
            packet1: p0,
            packet2: p0,
            environment: Packet1D::new(0.0, 0.0),
            sigma2: S2,
        };
        assert!((StateSpec::Cat(deg).normalization_sq(HBAR) - 0.5).abs() < 1e-15);
        let fc = build_cat(&deg, &gx, &gy).unwrap();
        let fg = build_gaussian(&GaussianSpec::new(0.0, 0.0, 1.3, 0.0, S2), &gx, &gy).unwrap();
        assert!(fc.max_abs_diff(&fg) < 1e-12);
    }

    #[test]
    fn random_cats_are_normalized() {
        let (gx, gy) = grids(128, 10.0);
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let q1 = -3.0 + 6.0 * next();
            let q2 = -3.0 + 6.0 * next();
            let cat = CatSpec {
                packet1: Packet1D::new(q1, -4.0 + 8.0 * next()),
                packet2: Packet1D::new(q2, -4.0 + 8.0 * next()),
                environment: Packet1D::new(-2.0 + 4.0 * next(), -2.0 + 4.0 * next()),
                sigma2: S2,
            };
            let unnormalized = {
                let coeff = (0.5 * StateSpec::Cat(cat).normalization_sq(HBAR)).sqrt();
                ComplexField2D::from_fn(gx.clone(), gy.clone(), |x, y| {
                    (cat.packet1.amplitude(x, S2, HBAR) + cat.packet2.amplitude(x, S2, HBAR))
                        * cat.environment.amplitude(y, S2, HBAR)
                        * coeff
                })
            };
            assert!((unnormalized.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bell_weights_and_entropies() {
        let far = StateSpec::Bell(BellSpec::crossed(Packet1D::new(4.0, -6.0), Packet1D::new(-2.0, 1.0), S2));
        let w = far.schmidt_weights(HBAR);
        assert!((w[0] - 0.5).abs() < 1e-6 && (w[1] - 0.5).abs() < 1e-6);

        // The scenario packets overlap at the 1e-4 level, which shows up in
        // the weights but only quadratically in the entropies.
        let s = StateSpec::Bell(bell_scenario());
        let w = s.schmidt_weights(HBAR);
        assert!((w[0] - 0.5).abs() < 1e-3);
        let (sl, sv) = s.initial_entropies(HBAR);
        assert!((sl - 0.5).abs() < 1e-6);
        assert!((sv - 2f64.ln()).abs() < 1e-6);

        let c = Packet1D::new(0.3, -0.2);
        let coincident = StateSpec::Bell(BellSpec::crossed(c, c, S2));
        let (sl, sv) = coincident.initial_entropies(HBAR);
        assert!(sl.abs() < 1e-15 && sv.abs() < 1e-15);
    }

    #[test]
    fn bell_partial_overlap_purity_matches_grid() {
        // Close centres so the overlaps matter.
        let bell = BellSpec::crossed(Packet1D::new(0.6, 0.4), Packet1D::new(-0.2, -0.5), S2);
        let s = StateSpec::Bell(bell);
        let (gx, gy) = grids(64, 7.0);
        let f = build_bell(&bell, &gx, &gy).unwrap();
        let n = f.nx();
        let mut purity = 0.0;
        for i in 0..n {
            for j in 0..n {
                purity += rho(&f, i, j).norm_sqr();
            }
        }
        purity *= gx.dx * gx.dx;
        let (sl, _) = s.initial_entropies(HBAR);
        assert!((1.0 - purity - sl).abs() < 1e-10, "{} vs {sl}", 1.0 - purity);
        assert!(sl > 0.01 && sl < 0.49);
    }

    #[test]
    fn reduced_wigner_matches_grid_transform() {
        let (gx, gy) = grids(128, 9.0);
        let cases = [
            StateSpec::Gaussian(GaussianSpec::new(0.4, -0.3, 1.1, 0.2, S2)),
            StateSpec::Cat(CatSpec {
                packet1: Packet1D::new(-1.0, 0.8),
                packet2: Packet1D::new(1.2, -0.6),
                environment: Packet1D::new(0.3, 0.1),
                sigma2: S2,
            }),
            StateSpec::Bell(BellSpec::crossed(Packet1D::new(0.9, -0.7), Packet1D::new(-0.4, 0.5), S2)),
        ];
        for spec in cases {
            let f = spec.build(&gx, &gy).unwrap();
            for &i in &[50usize, 60, 64, 70, 77] {
                for &p in &[-1.3, -0.2, 0.0, 0.45, 1.0] {
                    let num = numeric_wigner(&f, i, p);
                    let ana = spec.reduced_wigner(HBAR, gx.x(i), p);
                    assert!((num - ana).abs() < 1e-8, "{spec:?} x={} p={p}: {num} vs {ana}", gx.x(i));
                }
            }
        }
    }

    #[test]
    fn reduced_wigner_examples() {
        let g = StateSpec::Gaussian(GaussianSpec::new(1.0, 0.0, 2.0, 0.0, S2));
        assert!((g.reduced_wigner(HBAR, 1.0, 2.0) - 1.0 / PI).abs() < 1e-15);

        // The interference term lives at the midpoint of the two packets.
        let cat = StateSpec::Cat(cat_scenario());
        let w_mid = cat.reduced_wigner(HBAR, 0.0, 0.0);
        assert!(w_mid.abs() > 0.1 / PI);

        // Separated Y centres suppress the cross term by g_y.
        let bell = StateSpec::Bell(bell_scenario());
        let bs = bell_scenario();
        let mid_x = 0.5 * (bs.x1.q + bs.x2.q);
        let mid_p = 0.5 * (bs.x1.p + bs.x2.p);
        let gy = overlap_modulus(bs.y1, bs.y2, S2, HBAR);
        let w = bell.reduced_wigner(HBAR, mid_x, mid_p);
        let direct = 0.5 * (gaussian_wigner(bs.x1, S2, HBAR, mid_x, mid_p) + gaussian_wigner(bs.x2, S2, HBAR, mid_x, mid_p));
        assert!((w - direct).abs() <= 1.01 * gy / PI);
        assert!(gy < 1e-3);
    }

    #[test]
    fn reduced_wigner_integrates_to_one() {
        let specs = [
            StateSpec::Gaussian(GaussianSpec::new(0.4, 0.0, -1.0, 0.0, S2)),
            StateSpec::Cat(cat_scenario()),
            StateSpec::Bell(bell_scenario()),
        ];
        for spec in specs {
            let (h, k) = (0.02, 0.02);
            let mut acc = 0.0;
            for i in -500..500 {
                for j in -500..500 {
                    acc += spec.reduced_wigner(HBAR, i as f64 * h, j as f64 * k);
                }
            }
            assert!((acc * h * k - 1.0).abs() < 1e-6, "{spec:?}: {}", acc * h * k);
        }
    }

    #[test]
    fn classical_analogs() {
        let g = StateSpec::Gaussian(GaussianSpec::new(0.0, 0.0, 1.0, 1.0, S2)).classical_analog(HBAR);
        assert_eq!(g.components.len(), 1);
        assert_eq!(g.components[0].weight, 1.0);
        assert_eq!(g.components[0].var_mom, 0.5);

        let cat = cat_scenario();
        let ca = StateSpec::Cat(cat).classical_analog(HBAR);
        assert_eq!(ca.components.len(), 2);
        assert!(ca.components.iter().all(|c| c.weight == 0.5 && c.y == 0.0 && c.py == 0.0));
        assert_eq!((ca.components[0].x, ca.components[0].px), (cat.packet1.q, cat.packet1.p));

        let bell = BellSpec::crossed(cat.packet1, cat.packet2, S2);
        let ba = StateSpec::Bell(bell).classical_analog(HBAR);
        assert_eq!(ba.x_marginal(), ca.x_marginal());

        let c = Packet1D::new(0.0, 1.0);
        let deg = CatSpec {
            packet1: c,
            packet2: c,
            environment: c,
            sigma2: S2,
        };
        let da = StateSpec::Cat(deg).classical_analog(HBAR);
        assert_eq!(da.components.len(), 1);
        assert_eq!(da.components[0].weight, 1.0);
    }

    #[test]
    fn sampling_moments_and_determinism() {
        let p15 = 15f64.sqrt();
        let d = StateSpec::Gaussian(GaussianSpec::new(0.0, 0.0, p15, p15, S2)).classical_analog(HBAR);
        let n = 100_000;
        let e = d.sample(n, 11).unwrap();
        let mean_px = e.states.iter().map(|s| s.px).sum::<f64>() / n as f64;
        let mean_x = e.states.iter().map(|s| s.x).sum::<f64>() / n as f64;
        assert!((mean_px - p15).abs() < 5.0 * 0.7071 / (n as f64).sqrt());
        assert!(mean_x.abs() < 5.0 * 0.7071 / (n as f64).sqrt());
        let var_x = e.states.iter().map(|s| (s.x - mean_x).powi(2)).sum::<f64>() / n as f64;
        let var_px = e.states.iter().map(|s| (s.px - mean_px).powi(2)).sum::<f64>() / n as f64;
        assert!((var_x / 0.5 - 1.0).abs() < 0.1);
        assert!((var_px / 0.5 - 1.0).abs() < 0.1);

        let again = d.sample(n, 11).unwrap();
        assert_eq!(e.states, again.states);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let threaded = pool.install(|| d.sample(n, 11).unwrap());
        assert_eq!(e.states, threaded.states);
        assert_ne!(d.sample(n, 12).unwrap().states, e.states);

        let ca = StateSpec::Cat(cat_scenario()).classical_analog(HBAR);
        let ce = ca.sample(n, 3).unwrap();
        let left = ce.states.iter().filter(|s| s.x < 0.0).count() as f64;
        // Binomial(n, 1/2) standard deviation is √n/2 ≈ 158; the packets are
        // 3.5σ from the origin so a negligible fraction crosses it.
        assert!((left - n as f64 / 2.0).abs() < 5.0 * 158.2 + 50.0);
    }

    #[test]
    fn sampling_rejects_bad_input() {
        let d = ClassicalDensitySpec { components: vec![] };
        assert!(d.sample(10, 0).is_err());
        let g = StateSpec::Gaussian(GaussianSpec::new(0.0, 0.0, 0.0, 0.0, S2)).classical_analog(HBAR);
        assert!(g.sample(0, 0).is_err());
    }
}
