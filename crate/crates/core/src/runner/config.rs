//! Scenario configuration: a flat TOML table validated into a [`Scenario`].
//!
//! ```toml
//! name = "example"
//! state_kind = "gaussian_diagonal"   # see StateKind
//! alpha = 0.03                        # coupling, energy/length^4
//! e0 = 15.0                           # energy
//! # optional, with defaults resolved from e0:
//! # x0 = 2.5                          # packet offset, length
//! # y0 = 2.5                          # bell y offset, length
//! # n_traj = 100000
//! # seed = 1
//! # grid_n = 256                      # points per axis, power of two
//! # grid_half_width = 14.1            # length; grid is [-L, L)
//! # dt_quantum = 0.002                # time
//! # dt_classical = 0.0005             # time; 0.00025 above e0 = 15
//! # t_final = 100.0                   # time
//! # sample_interval = 0.25            # time
//! # pixel_factor = 1                  # box-counting pixels merge factor x factor cells
//! # branches = "both"                 # both | quantum | classical
//! # beta = 0.01, m = 1.0, hbar = 1.0, sigma2 = 0.5
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cdyn::default_classical_dt;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model::ModelParams;
use crate::qdyn::step_count;
use crate::states::{BellSpec, CatSpec, GaussianSpec, Packet1D, StateSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    /// Centred at the origin with `p_x = p_y = √(mE₀)`.
    GaussianDiagonal,
    /// Centred at the origin with `p_x = √(2mE₀)`.
    GaussianChannelX,
    /// Centred at the origin with `p_y = √(2mE₀)`.
    GaussianChannelY,
    /// Packets at `(∓x₀, ±√(2mE′₀))` along `x`, environment at rest at `y = 0`.
    CatChannel,
    /// Crossed pairing of `(x₀, −√(2mE′₀))` and the origin at rest.
    Bell,
    /// Single packet at `(x₀, 0)` with `p_x = −sign(x₀)√(2mE′₀)`; the second
    /// cat packet on its own.
    GaussianOffset,
}

impl StateKind {
    pub const ALL: [StateKind; 6] = [
        StateKind::GaussianDiagonal,
        StateKind::GaussianChannelX,
        StateKind::GaussianChannelY,
        StateKind::CatChannel,
        StateKind::Bell,
        StateKind::GaussianOffset,
    ];

    /// The config-file spelling.
    pub fn name(self) -> &'static str {
        match self {
            StateKind::GaussianDiagonal => "gaussian_diagonal",
            StateKind::GaussianChannelX => "gaussian_channel_x",
            StateKind::GaussianChannelY => "gaussian_channel_y",
            StateKind::CatChannel => "cat_channel",
            StateKind::Bell => "bell",
            StateKind::GaussianOffset => "gaussian_offset",
        }
    }
}

impl std::str::FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StateKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = StateKind::ALL.iter().map(|k| k.name()).collect();
            Error::validation("config.unknown_state_kind", format!("unknown state kind {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Branches {
    #[default]
    Both,
    Quantum,
    Classical,
}

impl Branches {
    pub fn quantum(self) -> bool {
        matches!(self, Branches::Both | Branches::Quantum)
    }

    pub fn classical(self) -> bool {
        matches!(self, Branches::Both | Branches::Classical)
    }
}

pub const DEFAULT_N_TRAJ: usize = 100_000;
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 0.25;
/// Halving it changes the entropy curves by about 2e-5 at E₀ = 150.
pub const DEFAULT_DT_QUANTUM: f64 = 0.002;
pub const DEFAULT_OFFSET: f64 = 2.5;
/// Grid half width in units of the channel turning point.
pub const EXTENT_MARGIN: f64 = 1.6;
/// Smallest accepted half width in units of the channel turning point.
pub const MIN_EXTENT_MARGIN: f64 = 1.5;
/// The momentum lattice must reach this multiple of `√(2mE₀)`.
pub const MOMENTUM_MARGIN: f64 = 1.5;
/// Largest accepted `E₀·dt/ħ`.
pub const MAX_PHASE_PER_STEP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub state_kind: StateKind,
    pub alpha: f64,
    pub e0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_quantum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_classical: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    #[serde(default = "default_pixel_factor")]
    pub pixel_factor: usize,
    #[serde(default)]
    pub branches: Branches,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_one")]
    pub m: f64,
    #[serde(default = "default_one")]
    pub hbar: f64,
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
}

fn default_n_traj() -> usize {
    DEFAULT_N_TRAJ
}
fn default_seed() -> u64 {
    1
}
fn default_sample_interval() -> f64 {
    DEFAULT_SAMPLE_INTERVAL
}
fn default_pixel_factor() -> usize {
    1
}
fn default_beta() -> f64 {
    0.01
}
fn default_one() -> f64 {
    1.0
}
fn default_sigma2() -> f64 {
    0.5
}

/// A fully resolved and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub params: ModelParams,
    pub e0: f64,
    pub kind: StateKind,
    pub state: StateSpec,
    pub grid: Grid1D,
    pub dt_quantum: f64,
    pub dt_classical: f64,
    pub t_final: f64,
    pub sample_interval: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub pixel_factor: usize,
    pub branches: Branches,
}

impl Scenario {
    pub fn sample_count(&self) -> usize {
        (self.t_final / self.sample_interval).round() as usize + 1
    }

    /// Sample times `k·Δt_sample`, shared by both branches.
    pub fn sample_times(&self) -> Vec<f64> {
        (0..self.sample_count()).map(|k| k as f64 * self.sample_interval).collect()
    }
}

impl ScenarioConfig {
    /// Minimal config; every optional field takes its default.
    pub fn new(name: impl Into<String>, state_kind: StateKind, alpha: f64, e0: f64) -> Self {
        ScenarioConfig {
            name: name.into(),
            state_kind,
            alpha,
            e0,
            x0: None,
            y0: None,
            n_traj: DEFAULT_N_TRAJ,
            seed: 1,
            grid_n: None,
            grid_half_width: None,
            dt_quantum: None,
            dt_classical: None,
            t_final: None,
            sample_interval: DEFAULT_SAMPLE_INTERVAL,
            pixel_factor: 1,
            branches: Branches::Both,
            beta: default_beta(),
            m: 1.0,
            hbar: 1.0,
            sigma2: default_sigma2(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation("config.parse", e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn default_grid_n(e0: f64) -> usize {
        if e0 <= 15.0 {
            256
        } else {
            512
        }
    }

    pub fn default_t_final(e0: f64) -> f64 {
        if e0 <= 15.0 {
            100.0
        } else {
            60.0
        }
    }

    fn state(&self, params: &ModelParams) -> Result<StateSpec> {
        let e0 = self.e0;
        let m = params.m;
        let s2 = params.sigma2;
        let x0 = self.x0.unwrap_or(DEFAULT_OFFSET);
        let y0 = self.y0.unwrap_or(DEFAULT_OFFSET);
        let shifted = |x: f64| -> Result<f64> {
            let e = params.shifted_energy(e0, x)?;
            Ok((2.0 * m * e).sqrt())
        };
        let at_rest = Packet1D::new(0.0, 0.0);
        Ok(match self.state_kind {
            StateKind::GaussianDiagonal => {
                let p = (m * e0).sqrt();
                StateSpec::Gaussian(GaussianSpec::new(0.0, 0.0, p, p, s2))
            }
            StateKind::GaussianChannelX => StateSpec::Gaussian(GaussianSpec::new(0.0, 0.0, (2.0 * m * e0).sqrt(), 0.0, s2)),
            StateKind::GaussianChannelY => StateSpec::Gaussian(GaussianSpec::new(0.0, 0.0, 0.0, (2.0 * m * e0).sqrt(), s2)),
            StateKind::CatChannel => {
                let p = shifted(x0)?;
                StateSpec::Cat(CatSpec {
                    packet1: Packet1D::new(-x0, p),
                    packet2: Packet1D::new(x0, -p),
                    environment: at_rest,
                    sigma2: s2,
                })
            }
            StateKind::Bell => {
                if x0 != y0 {
                    return Err(Error::validation(
                        "config.bell_offsets",
                        format!("the crossed pairing needs x0 = y0 (got {x0}, {y0})"),
                    ));
                }
                let p = shifted(x0)?;
                StateSpec::Bell(BellSpec::crossed(Packet1D::new(x0, -p), at_rest, s2))
            }
            StateKind::GaussianOffset => {
                let p = shifted(x0)?;
                StateSpec::Gaussian(GaussianSpec::new(x0, 0.0, -x0.signum() * p, 0.0, s2))
            }
        })
    }

    /// Resolve defaults and check every constraint.
    pub fn resolve(&self) -> Result<Scenario> {
        let bad = |code: &'static str, msg: String| Err(Error::validation(code, msg));
        if self.name.trim().is_empty() || self.name.contains(['/', '\\']) {
            return bad("config.bad_name", format!("name {:?} must be non-empty and contain no path separators", self.name));
        }
        if !(self.e0 > 0.0) || !self.e0.is_finite() {
            return bad("config.bad_energy", format!("e0 must be > 0 (got {})", self.e0));
        }
        let params = ModelParams::new(self.m, self.hbar, self.alpha, self.beta, self.sigma2)?;
        let state = self.state(&params)?;

        let turning = params.channel_turning_point(self.e0)?;
        let half = self.grid_half_width.unwrap_or(EXTENT_MARGIN * turning);
        if !(half >= MIN_EXTENT_MARGIN * turning) {
            return bad(
                "config.grid_too_small",
                format!("grid half width {half} is below {MIN_EXTENT_MARGIN} x the turning point {turning}"),
            );
        }
        let n = self.grid_n.unwrap_or(Self::default_grid_n(self.e0));
        let grid = Grid1D::symmetric(n, half, params.hbar)?;
        let p_needed = MOMENTUM_MARGIN * (2.0 * params.m * self.e0).sqrt();
        if grid.p_max() < p_needed {
            return bad(
                "config.momentum_unresolved",
                format!("momentum lattice reaches {} but {p_needed} is needed; increase grid_n", grid.p_max()),
            );
        }
        state.check_coverage(&grid, &grid)?;

        let dt_q = self.dt_quantum.unwrap_or(DEFAULT_DT_QUANTUM);
        let dt_cl = self.dt_classical.unwrap_or_else(|| default_classical_dt(self.e0));
        for (label, dt) in [("dt_quantum", dt_q), ("dt_classical", dt_cl)] {
            if !(dt > 0.0) || !dt.is_finite() {
                return bad("config.bad_dt", format!("{label} must be > 0 (got {dt})"));
            }
            let phase = self.e0 * dt / params.hbar;
            if phase > MAX_PHASE_PER_STEP {
                return bad(
                    "config.dt_unstable",
                    format!("{label} = {dt} advances the phase by {phase} rad per step at E0 (limit {MAX_PHASE_PER_STEP})"),
                );
            }
        }
        let t_final = self.t_final.unwrap_or(Self::default_t_final(self.e0));
        let interval = self.sample_interval;
        if !(interval > 0.0) {
            return bad("config.bad_sampling", format!("sample_interval must be > 0 (got {interval})"));
        }
        if !(t_final >= 0.0) || !t_final.is_finite() {
            return bad("config.bad_time", format!("t_final must be >= 0 (got {t_final})"));
        }
        step_count(t_final, interval).map_err(|_| {
            Error::validation("config.bad_sampling", format!("t_final {t_final} is not a multiple of sample_interval {interval}"))
        })?;
        for (label, dt) in [("dt_quantum", dt_q), ("dt_classical", dt_cl)] {
            step_count(interval, dt).map_err(|_| {
                Error::validation("config.bad_sampling", format!("sample_interval {interval} is not a multiple of {label} {dt}"))
            })?;
        }
        if self.n_traj == 0 && self.branches.classical() {
            return bad("config.bad_ntraj", "n_traj must be >= 1".into());
        }
        if self.pixel_factor == 0 || n % self.pixel_factor != 0 {
            return bad("config.bad_pixels", format!("pixel_factor {} must divide grid_n {n}", self.pixel_factor));
        }
        Ok(Scenario {
            name: self.name.clone(),
            params,
            e0: self.e0,
            kind: self.state_kind,
            state,
            grid,
            dt_quantum: dt_q,
            dt_classical: dt_cl,
            t_final,
            sample_interval: interval,
            n_traj: self.n_traj,
            seed: self.seed,
            pixel_factor: self.pixel_factor,
            branches: self.branches,
        })
    }
}
