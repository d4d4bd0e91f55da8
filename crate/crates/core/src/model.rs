//! The coupled quartic oscillator pair and its closed-form classical anchors.
//!
//! ```text
//! H(x, y, px, py) = (px² + py²)/2m + (β/4)(x⁴ + y⁴) + (α/2) x² y²
//! ```
//!
//! All quantities are in the same arbitrary units (m = ħ = 1 by default).
//! Small α gives regular motion, α = 1 a fully chaotic well.

use crate::error::{Error, Result};

/// Coupling strength producing regular dynamics.
pub const ALPHA_REGULAR: f64 = 0.03;
/// Coupling strength producing chaotic dynamics.
pub const ALPHA_CHAOTIC: f64 = 1.0;

/// Physical constants of the model plus the Gaussian packet width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub m: f64,
    pub hbar: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Squared position width σ² of every Gaussian packet.
    pub sigma2: f64,
}

impl ModelParams {
    pub fn new(m: f64, hbar: f64, alpha: f64, beta: f64, sigma2: f64) -> Result<Self> {
        let p = ModelParams {
            m,
            hbar,
            alpha,
            beta,
            sigma2,
        };
        p.validate()?;
        Ok(p)
    }

    /// m = 1, ħ = 1, β = 0.01, σ² = 0.5 with the given coupling.
    pub fn with_alpha(alpha: f64) -> Self {
        ModelParams {
            m: 1.0,
            hbar: 1.0,
            alpha,
            beta: 0.01,
            sigma2: 0.5,
        }
    }

    pub fn regular() -> Self {
        Self::with_alpha(ALPHA_REGULAR)
    }

    pub fn chaotic() -> Self {
        Self::with_alpha(ALPHA_CHAOTIC)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.m, self.hbar, self.alpha, self.beta, self.sigma2]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::validation("model.non_finite", "model parameters must be finite"));
        }
        if self.m <= 0.0 || self.hbar <= 0.0 || self.beta <= 0.0 || self.sigma2 <= 0.0 {
            return Err(Error::validation(
                "model.non_positive",
                format!("m, hbar, beta and sigma2 must be > 0 (got {self:?})"),
            ));
        }
        if self.alpha < 0.0 {
            return Err(Error::validation("model.alpha_negative", "alpha must be >= 0"));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Momentum width ħ/2σ of a minimum-uncertainty packet.
    pub fn sigma_p(&self) -> f64 {
        self.hbar / (2.0 * self.sigma())
    }

    #[inline]
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        let x2 = x * x;
        let y2 = y * y;
        0.25 * self.beta * (x2 * x2 + y2 * y2) + 0.5 * self.alpha * (x2 * y2)
    }

    #[inline]
    pub fn kinetic(&self, px: f64, py: f64) -> f64 {
        (px * px + py * py) / (2.0 * self.m)
    }

    #[inline]
    pub fn hamiltonian(&self, p: &PhasePoint) -> f64 {
        self.kinetic(p.px, p.py) + self.potential(p.x, p.y)
    }

    /// Force `(-∂V/∂x, -∂V/∂y)`.
    #[inline]
    pub fn force(&self, x: f64, y: f64) -> (f64, f64) {
        let x2 = x * x;
        let y2 = y * y;
        (
            -x * (self.beta * x2 + self.alpha * y2),
            -y * (self.beta * y2 + self.alpha * x2),
        )
    }

    /// Energy left for motion after displacing a packet to `x0` along a
    /// channel: `E₀ − βx₀⁴/4`.
    pub fn shifted_energy(&self, e0: f64, x0: f64) -> Result<f64> {
        let shifted = e0 - 0.25 * self.beta * x0.powi(4);
        if shifted < 0.0 {
            return Err(Error::validation(
                "model.shifted_energy_negative",
                format!("E0 - beta*x0^4/4 = {shifted} < 0 for E0 = {e0}, x0 = {x0}"),
            ));
        }
        Ok(shifted)
    }

    /// Turning point `(2E₀/(β+α))^{1/4}` of the periodic orbit along `y = x`.
    pub fn diagonal_turning_point(&self, e0: f64) -> Result<f64> {
        check_energy(e0)?;
        Ok((2.0 * e0 / (self.beta + self.alpha)).powf(0.25))
    }

    /// Turning point `(4E₀/β)^{1/4}` of motion along a channel (`y = 0`).
    pub fn channel_turning_point(&self, e0: f64) -> Result<f64> {
        check_energy(e0)?;
        Ok((4.0 * e0 / self.beta).powf(0.25))
    }

    /// Time between successive passages of the diagonal periodic orbit
    /// through the origin.
    ///
    /// Along `x = y` the motion is `dx/dt = √(E₀/m)·√(1 − γx⁴)` with
    /// `γ = (β+α)/2E₀`, so the half period is
    /// `2x₊·√(m/E₀)·₂F₁(1/4, 1/2; 5/4; 1)`.
    pub fn half_period_diagonal(&self, e0: f64) -> Result<f64> {
        let x_turn = self.diagonal_turning_point(e0)?;
        // The series argument γx₊⁴ is 1 by definition of the turning point.
        let f = hyp2f1_series(0.25, 0.5, 1.25, 1.0)?;
        Ok(2.0 * x_turn * (self.m / e0).sqrt() * f)
    }

    /// Half period of motion along a channel; independent of α.
    pub fn half_period_channel(&self, e0: f64) -> Result<f64> {
        let x_turn = self.channel_turning_point(e0)?;
        let f = hyp2f1_series(0.25, 0.5, 1.25, 1.0)?;
        Ok(2.0 * x_turn * (self.m / (2.0 * e0)).sqrt() * f)
    }

    /// Rounded closed form `3.12·[(β+α)E₀/m²]^{-1/4}`.
    pub fn half_period_diagonal_approx(&self, e0: f64) -> f64 {
        3.12 * ((self.beta + self.alpha) * e0 / (self.m * self.m)).powf(-0.25)
    }

    /// Rounded closed form `2.62·(βE₀/m²)^{-1/4}`.
    pub fn half_period_channel_approx(&self, e0: f64) -> f64 {
        2.62 * (self.beta * e0 / (self.m * self.m)).powf(-0.25)
    }

    /// Distance `x₊ − x₋` between the diagonal turning points.
    pub fn spreading_extent(&self, e0: f64) -> Result<f64> {
        Ok(2.0 * self.diagonal_turning_point(e0)?)
    }

    /// Width of a freely spreading Gaussian, `σ√(1 + (ħt/2mσ²)²)`.
    pub fn free_spreading_width(&self, t: f64) -> f64 {
        let s = self.hbar * t / (2.0 * self.m * self.sigma2);
        self.sigma() * (1.0 + s * s).sqrt()
    }

    /// Time at which a free packet reaches `width`; inverse of
    /// [`free_spreading_width`](Self::free_spreading_width).
    pub fn spreading_time(&self, width: f64) -> Result<f64> {
        let sigma = self.sigma();
        if !(width >= sigma) {
            return Err(Error::validation(
                "model.width_below_sigma",
                format!("target width {width} is below the initial width {sigma}"),
            ));
        }
        let ratio = width / sigma;
        Ok(2.0 * self.m * self.sigma2 / self.hbar * (ratio * ratio - 1.0).sqrt())
    }

    /// Time for a free packet to grow to the diagonal turning point `x₊`.
    pub fn spreading_time_to_turning_point(&self, e0: f64) -> Result<f64> {
        self.spreading_time(self.diagonal_turning_point(e0)?)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::regular()
    }
}

fn check_energy(e0: f64) -> Result<()> {
    if !(e0 > 0.0) || !e0.is_finite() {
        return Err(Error::validation(
            "model.energy_non_positive",
            format!("E0 must be > 0 (got {e0})"),
        ));
    }
    Ok(())
}

/// A point `(x, y, px, py)` of the four-dimensional phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl PhasePoint {
    pub const fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        PhasePoint { x, y, px, py }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.px.is_finite() && self.py.is_finite()
    }
}

const HYP2F1_TOL: f64 = 1e-12;
const HYP2F1_MAX_TERMS: usize = 100_000;

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for `0 ≤ z ≤ 1`.
///
/// For `z < 1` the power series is summed until a term drops below 1e-12.
/// At `z = 1` the terms decay only algebraically (like `k^{a+b-c-1}`), so the
/// series limit is taken from Gauss's summation theorem instead, which
/// requires `c − a − b > 0`.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::validation(
            "hyp2f1.domain",
            format!("z = {z} outside [0, 1]"),
        ));
    }
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::validation(
            "hyp2f1.domain",
            format!("c = {c} is a non-positive integer"),
        ));
    }
    if z == 1.0 {
        if c - a - b <= 0.0 {
            return Err(Error::validation(
                "hyp2f1.divergent",
                format!("series diverges at z = 1 for c - a - b = {}", c - a - b),
            ));
        }
        let g = libm::tgamma;
        return Ok(g(c) * g(c - a - b) / (g(c - a) * g(c - b)));
    }

    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..HYP2F1_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() < HYP2F1_TOL {
            return Ok(sum);
        }
    }
    Err(Error::validation(
        "hyp2f1.not_converged",
        format!("series did not converge within {HYP2F1_MAX_TERMS} terms at z = {z}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss–Legendre (5-point) quadrature on `[a, b]`.
    fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let mid = a + (i as f64 + 0.5) * h;
                NODES
                    .iter()
                    .zip(WEIGHTS)
                    .map(|(n, w)| w * f(mid + 0.5 * h * n))
                    .sum::<f64>()
                    * 0.5
                    * h
            })
            .sum()
    }

    /// `∫₀¹ dt/√(1 − z t⁴)`, which equals `₂F₁(1/4, 1/2; 5/4; z)`.
    /// The endpoint singularity at z = 1 is removed by `t = 1 − s²`.
    fn quartic_integral(z: f64) -> f64 {
        gauss_legendre(
            |s| {
                let t: f64 = 1.0 - s * s;
                2.0 * s / (1.0 - z * t.powi(4)).sqrt()
            },
            0.0,
            1.0,
            2000,
        )
    }

    #[test]
    fn potential_examples() {
        let p = ModelParams::regular();
        assert_eq!(p.potential(0.0, 0.0), 0.0);
        let x_turn = p.channel_turning_point(15.0).unwrap();
        assert!((p.potential(x_turn, 0.0) - 15.0).abs() < 1e-12);

        let c = ModelParams::chaotic();
        assert!((c.potential(2.0, 3.0) - 18.2425).abs() < 1e-12);
    }

    #[test]
    fn potential_symmetries_exact() {
        let p = ModelParams::chaotic();
        for &(x, y) in &[(1.3, -0.7), (-4.1, 2.9), (0.0, 5.5), (12.25, -0.125)] {
            let v = p.potential(x, y);
            assert_eq!(v, p.potential(y, x));
            assert_eq!(v, p.potential(-x, y));
            assert_eq!(v, p.potential(x, -y));
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let p = ModelParams::regular();
        let e0: f64 = 1.5;
        let q = (p.m * e0).sqrt();
        assert!((p.hamiltonian(&PhasePoint::new(0.0, 0.0, q, q)) - 1.5).abs() < 1e-14);
        assert_eq!(p.hamiltonian(&PhasePoint::default()), 0.0);
        let h = p.hamiltonian(&PhasePoint::new(2.5, 0.0, 0.0, 0.0));
        assert!((h - 0.097_656_25).abs() < 1e-15);
        assert!((p.shifted_energy(15.0, 2.5).unwrap() - (15.0 - 0.097_656_25)).abs() < 1e-14);
    }

    #[test]
    fn force_examples() {
        let c = ModelParams::chaotic();
        assert_eq!(c.force(0.0, 0.0), (0.0, 0.0));
        let (fx, fy) = c.force(1.0, 1.0);
        assert!((fx + 1.01).abs() < 1e-14 && (fy + 1.01).abs() < 1e-14);
        let (fx, _) = c.force(0.3, -2.2);
        let (_, fy) = c.force(-2.2, 0.3);
        assert_eq!(fx, fy);
    }

    #[test]
    fn hyp2f1_matches_quadrature() {
        assert_eq!(hyp2f1_series(0.25, 0.5, 1.25, 0.0).unwrap(), 1.0);
        for &z in &[0.1, 0.5, 0.9, 1.0] {
            let series = hyp2f1_series(0.25, 0.5, 1.25, z).unwrap();
            let oracle = quartic_integral(z);
            assert!(
                (series - oracle).abs() < 1e-9,
                "z = {z}: series {series} vs quadrature {oracle}"
            );
        }
        let at_one = hyp2f1_series(0.25, 0.5, 1.25, 1.0).unwrap();
        assert!((at_one - 1.31).abs() < 0.005);
    }

    #[test]
    fn hyp2f1_domain_errors() {
        assert!(hyp2f1_series(0.25, 0.5, 1.25, 1.5).is_err());
        assert!(hyp2f1_series(0.25, 0.5, 1.25, -0.1).is_err());
        assert!(hyp2f1_series(1.0, 1.0, 1.5, 1.0).is_err());
        assert!(hyp2f1_series(0.5, 0.5, -2.0, 0.5).is_err());
    }

    #[test]
    fn half_period_diagonal_values() {
        let reg = ModelParams::regular();
        assert!((reg.half_period_diagonal(1.5).unwrap() - 6.30).abs() < 0.01);
        // E0 = 150 at the regular coupling is the 1.99 quoted alongside 6.30.
        assert!((reg.half_period_diagonal(150.0).unwrap() - 1.99).abs() < 0.01);
        // Direct quadrature of the orbit integral gives 3.54 at E0 = 15.
        let t15 = reg.half_period_diagonal(15.0).unwrap();
        let x_turn = reg.diagonal_turning_point(15.0).unwrap();
        let oracle = 2.0 * x_turn / 15f64.sqrt() * quartic_integral(1.0);
        assert!((t15 - oracle).abs() < 1e-9);
        assert!((t15 - 3.54).abs() < 0.01);

        let chaos = ModelParams::chaotic();
        let t = chaos.half_period_diagonal(150.0).unwrap();
        assert!((t - 0.889).abs() < 0.001, "{t}");
    }

    #[test]
    fn half_period_approximations_within_one_percent() {
        for alpha in [0.0, ALPHA_REGULAR, 0.3, ALPHA_CHAOTIC] {
            let p = ModelParams::with_alpha(alpha);
            for e0 in [0.1, 1.5, 15.0, 150.0, 1000.0] {
                let exact = p.half_period_diagonal(e0).unwrap();
                let approx = p.half_period_diagonal_approx(e0);
                assert!(((exact - approx) / exact).abs() <= 0.01);
                let exact = p.half_period_channel(e0).unwrap();
                let approx = p.half_period_channel_approx(e0);
                assert!(((exact - approx) / exact).abs() <= 0.01);
            }
        }
    }

    #[test]
    fn half_period_channel_values() {
        let reg = ModelParams::regular();
        let chaos = ModelParams::chaotic();
        assert!((reg.half_period_channel(15.0).unwrap() - 4.21).abs() < 0.01);
        assert_eq!(
            reg.half_period_channel(15.0).unwrap(),
            chaos.half_period_channel(15.0).unwrap()
        );
        assert!((reg.half_period_channel(150.0).unwrap() - 2.37).abs() < 0.01);
        let ratio = reg.half_period_channel(16.0 * 3.0).unwrap() / reg.half_period_channel(3.0).unwrap();
        assert!((ratio - 0.5).abs() < 1e-12);
        assert!(reg.half_period_channel(0.0).is_err());
        assert!(reg.half_period_diagonal(-1.0).is_err());
    }

    #[test]
    fn spreading_extent_values() {
        let reg = ModelParams::regular();
        let du = reg.spreading_extent(1.5).unwrap();
        assert!((du - 2.0 * 75f64.powf(0.25)).abs() < 1e-12);
        assert!((du - 5.89).abs() < 0.01);
        let ratio = reg.spreading_extent(16.0 * 7.0).unwrap() / reg.spreading_extent(7.0).unwrap();
        assert!((ratio - 2.0).abs() < 1e-12);
        let chaos = ModelParams::chaotic();
        assert!((chaos.spreading_extent(150.0).unwrap() - 8.30).abs() < 0.01);
    }

    #[test]
    fn free_spreading() {
        let p = ModelParams::regular();
        assert!((p.free_spreading_width(0.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((p.free_spreading_width(1.0) - 1.0).abs() < 1e-14);
        let t = 1e4;
        let asym = p.hbar * t / (2.0 * p.m * p.sigma());
        assert!((p.free_spreading_width(t) / asym - 1.0).abs() < 1e-8);
        let mut last = 0.0;
        for i in 0..100 {
            let w = p.free_spreading_width(i as f64 * 0.3);
            assert!(w > last);
            last = w;
        }
    }

    #[test]
    fn spreading_time_inverts_width() {
        let p = ModelParams::regular();
        for w in [0.8, 2.0, 5.0] {
            let t = p.spreading_time(w).unwrap();
            assert!((p.free_spreading_width(t) - w).abs() < 1e-12);
        }
        assert!(p.spreading_time(0.1).is_err());
        // Growing to the turning point x₊ gives t ≈ 4.0, 7.3, 13.1 at E0 = 1.5, 15, 150;
        // growing to the full extent Δu takes about twice as long.
        let times: Vec<f64> = [1.5, 15.0, 150.0]
            .iter()
            .map(|&e| p.spreading_time_to_turning_point(e).unwrap())
            .collect();
        assert!((times[0] - 4.04).abs() < 0.01);
        assert!((times[1] - 7.33).abs() < 0.01);
        assert!((times[2] - 13.12).abs() < 0.01);
        let full = p.spreading_time(p.spreading_extent(1.5).unwrap()).unwrap();
        assert!((full - 8.26).abs() < 0.01);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 1.0, 0.03, 0.01, 0.5).is_ok());
        assert!(ModelParams::new(0.0, 1.0, 0.03, 0.01, 0.5).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 0.01, 0.5).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.5).is_err());
        assert!(ModelParams::new(1.0, f64::NAN, 0.0, 0.01, 0.5).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn force_matches_central_differences(x in -20.0f64..20.0, y in -20.0f64..20.0) {
                let p = ModelParams::chaotic();
                let h = 1e-4;
                let dvdx = (p.potential(x + h, y) - p.potential(x - h, y)) / (2.0 * h);
                let dvdy = (p.potential(x, y + h) - p.potential(x, y - h)) / (2.0 * h);
                let (fx, fy) = p.force(x, y);
                let scale_x = dvdx.abs().max(1e-3);
                let scale_y = dvdy.abs().max(1e-3);
                prop_assert!((fx + dvdx).abs() / scale_x <= 1e-6);
                prop_assert!((fy + dvdy).abs() / scale_y <= 1e-6);
            }
        }
    }
}
