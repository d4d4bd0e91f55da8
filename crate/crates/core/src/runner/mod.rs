//! Paired quantum and classical runs on a shared sample clock.

mod config;
mod emit;
mod presets;
pub mod selfcheck;

pub use config::{
    Branches, Scenario, ScenarioConfig, StateKind, DEFAULT_DT_QUANTUM, DEFAULT_N_TRAJ, DEFAULT_OFFSET, DEFAULT_SAMPLE_INTERVAL,
    EXTENT_MARGIN, MAX_PHASE_PER_STEP, MIN_EXTENT_MARGIN, MOMENTUM_MARGIN,
};
pub use emit::{csv_string, emit, svg_string, write_csv, write_svg, CSV_HEADER};
pub use presets::{preset, preset_names, PresetInfo, PRESETS};

use crate::cdyn::propagate_ensemble;
use crate::centropy::{bin_ensemble, classical_linear_entropy, classical_von_neumann_entropy, is_sub_planck, Subsystem};
use crate::error::{Error, Result};
use crate::grid::PhaseSpaceHistogram;
use crate::qdyn::{propagate, step_count, PropagatorPlan};
use crate::rdm::{linear_entropy, reduce, reduce_y, von_neumann_entropy};

/// Largest accepted relative change of the quantum `⟨H⟩` over a run.
pub const ENERGY_DRIFT_TOLERANCE: f64 = 1e-3;
/// Largest accepted relative energy error of any classical trajectory.
pub const CLASSICAL_ENERGY_TOLERANCE: f64 = 1e-5;
/// Largest accepted difference between the entropies of the two subsystems.
pub const SUBSYSTEM_TOLERANCE: f64 = 1e-6;
/// Number of samples at which the `y` reduced matrix is also diagonalized.
pub const SUBSYSTEM_CHECKS: usize = 5;

/// Entropy curves of one scenario. Columns of a branch that was not run hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    pub name: String,
    pub times: Vec<f64>,
    pub s_l_quantum: Vec<f64>,
    pub s_v_quantum: Vec<f64>,
    pub s_l_classical: Vec<f64>,
    pub s_v_classical: Vec<f64>,
    pub norm_drift: Vec<f64>,
    pub energy_drift: Vec<f64>,
    pub out_of_range_fraction: Vec<f64>,
    /// Worst relative energy error over all trajectories and samples.
    pub classical_energy_error: f64,
    /// Worst `|S(x) − S(y)|` over the subsystem spot checks.
    pub subsystem_defect: f64,
    /// Worst `|Tr ρ̃² − Σλ²|` over all samples.
    pub purity_defect: f64,
    pub warnings: Vec<String>,
}

impl EntropySeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn columns(&self) -> [&Vec<f64>; 8] {
        [
            &self.times,
            &self.s_l_quantum,
            &self.s_v_quantum,
            &self.s_l_classical,
            &self.s_v_classical,
            &self.norm_drift,
            &self.energy_drift,
            &self.out_of_range_fraction,
        ]
    }

    /// Equal column lengths and strictly increasing times.
    pub fn check(&self) -> Result<()> {
        let n = self.times.len();
        if self.columns().iter().any(|c| c.len() != n) {
            return Err(Error::integrity("runner.ragged_series", "series columns have unequal lengths"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::integrity("runner.time_order", "sample times are not strictly increasing"));
        }
        Ok(())
    }

    /// Indices of the last quarter of the samples.
    pub fn saturation_window(&self) -> std::ops::Range<usize> {
        let n = self.len();
        n - n / 4..n
    }
}

struct QuantumBranch {
    s_l: Vec<f64>,
    s_v: Vec<f64>,
    norm_drift: Vec<f64>,
    energy_drift: Vec<f64>,
    subsystem_defect: f64,
    purity_defect: f64,
}

struct ClassicalBranch {
    s_l: Vec<f64>,
    s_v: Vec<f64>,
    oor: Vec<f64>,
    energy_error: f64,
    warnings: Vec<String>,
}

/// Sample indices that get the subsystem spot check, spread over the run.
fn spot_checks(samples: usize) -> Vec<usize> {
    let last = samples - 1;
    let mut v: Vec<usize> = (0..SUBSYSTEM_CHECKS).map(|k| k * last / (SUBSYSTEM_CHECKS - 1)).collect();
    v.dedup();
    v
}

fn run_quantum(s: &Scenario) -> Result<QuantumBranch> {
    let g = &s.grid;
    let mut psi = s.state.build(g, g)?;
    let plan = PropagatorPlan::new(&s.params, g, g, s.dt_quantum)?;
    let total = step_count(s.t_final, s.dt_quantum)?;
    let every = step_count(s.sample_interval, s.dt_quantum)?;
    let n = s.sample_count();
    let checks = spot_checks(n);
    let mut s_l = Vec::with_capacity(n);
    let mut s_v = Vec::with_capacity(n);
    let mut subsystem_defect = 0f64;
    let mut purity_defect = 0f64;
    let obs = propagate(&s.params, &plan, &mut psi, total, every, |_, t, psi| {
        let r = reduce(psi)?;
        let sl = linear_entropy(&r)?;
        let sv = von_neumann_entropy(&r);
        purity_defect = purity_defect.max((r.purity_frobenius() - r.purity_spectral()).abs());
        if checks.contains(&s_l.len()) {
            let ry = reduce_y(psi)?;
            let d = (linear_entropy(&ry)? - sl).abs().max((von_neumann_entropy(&ry) - sv).abs());
            if d > SUBSYSTEM_TOLERANCE {
                return Err(Error::integrity(
                    "runner.subsystem_asymmetry",
                    format!("x and y reduced entropies differ by {d:e} at t = {t}"),
                ));
            }
            subsystem_defect = subsystem_defect.max(d);
        }
        s_l.push(sl);
        s_v.push(sv);
        Ok(())
    })?;
    let norm0 = obs[0].norm;
    let e0 = obs[0].energy;
    let norm_drift: Vec<f64> = obs.iter().map(|o| (o.norm - norm0).abs()).collect();
    let energy_drift: Vec<f64> = obs.iter().map(|o| ((o.energy - e0) / e0).abs()).collect();
    if let Some((k, d)) = energy_drift.iter().enumerate().find(|(_, &d)| d > ENERGY_DRIFT_TOLERANCE) {
        return Err(Error::integrity(
            "runner.energy_drift",
            format!("<H> drifted by {d:e} (relative) at t = {}", obs[k].t),
        ));
    }
    Ok(QuantumBranch {
        s_l,
        s_v,
        norm_drift,
        energy_drift,
        subsystem_defect,
        purity_defect,
    })
}

fn run_classical(s: &Scenario) -> Result<ClassicalBranch> {
    let hbar = s.params.hbar;
    let mut ens = s.state.classical_analog(hbar).sample(s.n_traj, s.seed)?;
    let template = PhaseSpaceHistogram::coarsened(&s.grid, s.pixel_factor);
    let total = step_count(s.t_final, s.dt_classical)?;
    let every = step_count(s.sample_interval, s.dt_classical)?;
    let n = s.sample_count();
    let mut s_l = Vec::with_capacity(n);
    let mut s_v = Vec::with_capacity(n);
    let mut oor = Vec::with_capacity(n);
    let mut warnings = Vec::new();
    propagate_ensemble(&s.params, &mut ens, s.dt_classical, total, every, |_, t, ens| {
        let h = bin_ensemble(ens, Subsystem::X, &template)?;
        let sl = classical_linear_entropy(&h, hbar);
        if is_sub_planck(sl) {
            warnings.push(format!("classical S_L = {sl} < 0 at t = {t}: density below one 2πħ cell"));
        }
        s_l.push(sl);
        s_v.push(classical_von_neumann_entropy(&h, hbar));
        oor.push(h.out_of_range_fraction());
        Ok(())
    })?;
    if ens.max_energy_error > CLASSICAL_ENERGY_TOLERANCE {
        return Err(Error::integrity(
            "runner.classical_energy",
            format!(
                "worst trajectory energy error {:e} exceeds {CLASSICAL_ENERGY_TOLERANCE:e}; lower dt_classical",
                ens.max_energy_error
            ),
        ));
    }
    Ok(ClassicalBranch {
        s_l,
        s_v,
        oor,
        energy_error: ens.max_energy_error,
        warnings,
    })
}

/// Run both branches of a resolved scenario concurrently.
pub fn run_scenario(s: &Scenario) -> Result<EntropySeries> {
    let (q, c) = rayon::join(
        || s.branches.quantum().then(|| run_quantum(s)).transpose(),
        || s.branches.classical().then(|| run_classical(s)).transpose(),
    );
    let (q, c) = (q?, c?);
    let times = s.sample_times();
    let n = times.len();
    let nan = || vec![f64::NAN; n];
    let mut out = EntropySeries {
        name: s.name.clone(),
        times,
        s_l_quantum: nan(),
        s_v_quantum: nan(),
        s_l_classical: nan(),
        s_v_classical: nan(),
        norm_drift: nan(),
        energy_drift: nan(),
        out_of_range_fraction: nan(),
        classical_energy_error: f64::NAN,
        subsystem_defect: f64::NAN,
        purity_defect: f64::NAN,
        warnings: Vec::new(),
    };
    if let Some(q) = q {
        out.s_l_quantum = q.s_l;
        out.s_v_quantum = q.s_v;
        out.norm_drift = q.norm_drift;
        out.energy_drift = q.energy_drift;
        out.subsystem_defect = q.subsystem_defect;
        out.purity_defect = q.purity_defect;
    }
    if let Some(c) = c {
        out.s_l_classical = c.s_l;
        out.s_v_classical = c.s_v;
        out.out_of_range_fraction = c.oor;
        out.classical_energy_error = c.energy_error;
        out.warnings = c.warnings;
    }
    out.check()?;
    Ok(out)
}

/// Validate and run.
pub fn run_config(cfg: &ScenarioConfig) -> Result<EntropySeries> {
    run_scenario(&cfg.resolve()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: StateKind, alpha: f64) -> ScenarioConfig {
        let mut c = ScenarioConfig::new("small", kind, alpha, 1.5);
        c.grid_n = Some(64);
        c.t_final = Some(1.0);
        c.n_traj = 20_000;
        c
    }

    #[test]
    fn zero_duration_gives_initial_row() {
        let mut c = small(StateKind::GaussianDiagonal, 0.03);
        c.t_final = Some(0.0);
        let s = run_config(&c).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.times, vec![0.0]);
        assert!(s.s_l_quantum[0].abs() < 1e-6);
        assert!(s.s_v_quantum[0].abs() < 1e-4);
        assert!((s.s_v_classical[0] - (1.0 - 2f64.ln())).abs() < 0.05);
        assert_eq!(s.norm_drift[0], 0.0);
        assert_eq!(s.energy_drift[0], 0.0);
    }

    #[test]
    fn branches_share_the_clock() {
        let s = run_config(&small(StateKind::GaussianChannelX, 1.0)).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(s.s_l_quantum.iter().chain(&s.s_l_classical).all(|v| v.is_finite()));
        assert!(s.subsystem_defect <= SUBSYSTEM_TOLERANCE);
        assert!(s.purity_defect <= 1e-10);
        assert!(s.classical_energy_error <= CLASSICAL_ENERGY_TOLERANCE);
    }

    #[test]
    fn branches_do_not_contaminate_each_other() {
        let base = small(StateKind::CatChannel, 0.03);
        let a = run_config(&base).unwrap();
        let mut c = base.clone();
        c.seed = 99;
        c.n_traj = 5_000;
        let b = run_config(&c).unwrap();
        assert_eq!(a.s_l_quantum, b.s_l_quantum);
        assert_eq!(a.s_v_quantum, b.s_v_quantum);
        let mut c = base.clone();
        c.dt_quantum = Some(0.001);
        let d = run_config(&c).unwrap();
        assert_eq!(a.s_l_classical, d.s_l_classical);
        assert_eq!(a.s_v_classical, d.s_v_classical);
    }

    #[test]
    fn single_branch_leaves_nan() {
        let mut c = small(StateKind::Bell, 0.03);
        c.branches = Branches::Quantum;
        let s = run_config(&c).unwrap();
        assert!(s.s_l_classical.iter().all(|v| v.is_nan()));
        assert!(s.s_l_quantum.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn spot_checks_cover_ends() {
        assert_eq!(spot_checks(401), vec![0, 100, 200, 300, 400]);
        assert_eq!(spot_checks(1), vec![0]);
        assert_eq!(spot_checks(3), vec![0, 1, 2]);
    }
}
