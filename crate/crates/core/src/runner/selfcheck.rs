//! Quick anchor and convergence suite behind `qcent selfcheck`.

use std::f64::consts::LN_2;

use crate::centropy::{bin_ensemble, classical_linear_entropy, classical_von_neumann_entropy, Subsystem};
use crate::error::Result;
use crate::grid::PhaseSpaceHistogram;
use crate::qdyn::{Propagator, PropagatorPlan};
use crate::rdm::entropies;
use crate::states::{BellSpec, Packet1D, StateSpec};

use super::config::{Branches, ScenarioConfig, StateKind};
use super::run_config;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            target,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        (self.value - self.target).abs() <= self.tolerance
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {:.6e} (target {} ± {:e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.target,
            self.tolerance
        )
    }
}

fn anchors(out: &mut Vec<Check>) -> Result<()> {
    for (label, kind, sl_q, sv_q, q_tol, sl_cl, sv_cl, cl_tol) in [
        ("gaussian", StateKind::GaussianDiagonal, 0.0, 0.0, 1e-6, 0.0, 1.0 - LN_2, 0.02),
        ("cat", StateKind::CatChannel, 0.0, 0.0, 1e-6, 0.5, 1.0, 0.03),
        ("bell", StateKind::Bell, 0.5, LN_2, 1e-4, f64::NAN, f64::NAN, 0.0),
    ] {
        let mut cfg = ScenarioConfig::new(label, kind, 0.03, 15.0);
        cfg.t_final = Some(0.0);
        let s = run_config(&cfg)?;
        out.push(Check::new(format!("{label} quantum S_L(0)"), s.s_l_quantum[0], sl_q, q_tol));
        out.push(Check::new(format!("{label} quantum S_V(0)"), s.s_v_quantum[0], sv_q, q_tol.max(1e-4)));
        if sl_cl.is_finite() {
            out.push(Check::new(format!("{label} classical S_L(0)"), s.s_l_classical[0], sl_cl, 0.02));
            out.push(Check::new(format!("{label} classical S_V(0)"), s.s_v_classical[0], sv_cl, cl_tol));
        }
    }
    let cfg = ScenarioConfig::new("bell-coincident", StateKind::Bell, 0.03, 15.0).resolve()?;
    let c = Packet1D::new(1.0, 2.0);
    let psi = StateSpec::Bell(BellSpec::crossed(c, c, cfg.params.sigma2)).build(&cfg.grid, &cfg.grid)?;
    let (sl, sv) = entropies(&psi)?;
    out.push(Check::new("coincident bell S_L(0)", sl, 0.0, 1e-6));
    out.push(Check::new("coincident bell S_V(0)", sv, 0.0, 1e-6));
    Ok(())
}

fn reversal(out: &mut Vec<Check>) -> Result<()> {
    let mut cfg = ScenarioConfig::new("reversal", StateKind::CatChannel, 1.0, 15.0);
    cfg.grid_n = Some(128);
    let s = cfg.resolve()?;
    let psi0 = s.state.build(&s.grid, &s.grid)?;
    let plan = PropagatorPlan::new(&s.params, &s.grid, &s.grid, s.dt_quantum)?;
    let back = plan.time_reversed();
    let mut psi = psi0.clone();
    Propagator::new(&plan).advance(&mut psi, 500)?;
    Propagator::new(&back).advance(&mut psi, 500)?;
    out.push(Check::new("time reversal max |Δψ|", psi.max_abs_diff(&psi0), 0.0, 1e-8));
    Ok(())
}

fn convergence(out: &mut Vec<Check>) -> Result<()> {
    let mut cfg = ScenarioConfig::new("halving", StateKind::GaussianDiagonal, 1.0, 15.0);
    cfg.t_final = Some(5.0);
    cfg.branches = Branches::Quantum;
    let a = run_config(&cfg)?;
    cfg.dt_quantum = Some(0.001);
    let b = run_config(&cfg)?;
    let d = a
        .s_v_quantum
        .iter()
        .zip(&b.s_v_quantum)
        .chain(a.s_l_quantum.iter().zip(&b.s_l_quantum))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    out.push(Check::new("dt halving max |ΔS|", d, 0.0, 1e-3));
    out.push(Check::new("norm drift", a.norm_drift.iter().copied().fold(0.0, f64::max), 0.0, 1e-8));
    out.push(Check::new("relative <H> drift", a.energy_drift.iter().copied().fold(0.0, f64::max), 0.0, 1e-3));
    out.push(Check::new("purity matrix vs eigenvalues", a.purity_defect, 0.0, 1e-10));

    cfg.branches = Branches::Classical;
    cfg.n_traj = 20_000;
    let c = run_config(&cfg)?;
    out.push(Check::new("classical energy error", c.classical_energy_error, 0.0, 1e-5));
    Ok(())
}

/// Bin-count of a sample in `(y, p_y)` must equal that of its mirror image in
/// `(x, p_x)` for an exchange-symmetric state.
fn exchange(out: &mut Vec<Check>) -> Result<()> {
    let cfg = ScenarioConfig::new("exchange", StateKind::GaussianDiagonal, 0.03, 15.0).resolve()?;
    let ens = cfg.state.classical_analog(1.0).sample(50_000, 3)?;
    let tpl = PhaseSpaceHistogram::matched(&cfg.grid);
    let hx = bin_ensemble(&ens, Subsystem::X, &tpl)?;
    let hy = bin_ensemble(&ens, Subsystem::Y, &tpl)?;
    let dl = (classical_linear_entropy(&hx, 1.0) - classical_linear_entropy(&hy, 1.0)).abs();
    let dv = (classical_von_neumann_entropy(&hx, 1.0) - classical_von_neumann_entropy(&hy, 1.0)).abs();
    out.push(Check::new("classical x/y entropy gap at t = 0", dl.max(dv), 0.0, 0.02));
    Ok(())
}

/// Run every check. Errors are numerical failures that prevented a check.
pub fn run() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    anchors(&mut out)?;
    reversal(&mut out)?;
    convergence(&mut out)?;
    exchange(&mut out)?;
    Ok(out)
}
