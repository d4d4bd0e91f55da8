//! Browser bindings for three small operations: half periods, initial
//! entropies and a short paired run. Heavy scenarios belong to the CLI.

use qcent::centropy::{bin_ensemble, classical_linear_entropy, classical_von_neumann_entropy, Subsystem};
use qcent::grid::PhaseSpaceHistogram;
use qcent::model::ModelParams;
use qcent::runner::{run_config, ScenarioConfig, StateKind};
use qcent::Result;
use wasm_bindgen::prelude::*;

/// Browser runs are capped so a click cannot lock the tab for minutes.
pub const MAX_T_FINAL: f64 = 20.0;
pub const MAX_N_TRAJ: usize = 50_000;
pub const DEMO_GRID_N: usize = 128;

/// `[τ_diag, τ_diag_approx, τ_channel, τ_channel_approx]`.
pub fn half_periods_impl(alpha: f64, e0: f64) -> Result<Vec<f64>> {
    let p = ModelParams::with_alpha(alpha);
    p.validate()?;
    Ok(vec![
        p.half_period_diagonal(e0)?,
        p.half_period_diagonal_approx(e0),
        p.half_period_channel(e0)?,
        p.half_period_channel_approx(e0),
    ])
}

fn demo_config(kind: &str, alpha: f64, e0: f64) -> Result<ScenarioConfig> {
    let mut c = ScenarioConfig::new("demo", kind.parse::<StateKind>()?, alpha, e0);
    c.grid_n = Some(DEMO_GRID_N);
    Ok(c)
}

/// `[S_L, S_V, S_L_cl, S_V_cl]` at t = 0: quantum from the Schmidt weights,
/// classical by box counting `n_traj` samples.
pub fn initial_entropies_impl(kind: &str, alpha: f64, e0: f64, n_traj: usize, seed: u64) -> Result<Vec<f64>> {
    let s = demo_config(kind, alpha, e0)?.resolve()?;
    let hbar = s.params.hbar;
    let (sl, sv) = s.state.initial_entropies(hbar);
    let ens = s.state.classical_analog(hbar).sample(n_traj.clamp(1, MAX_N_TRAJ), seed)?;
    let h = bin_ensemble(&ens, Subsystem::X, &PhaseSpaceHistogram::matched(&s.grid))?;
    Ok(vec![sl, sv, classical_linear_entropy(&h, hbar), classical_von_neumann_entropy(&h, hbar)])
}

/// Five concatenated columns of equal length: `t, S_L, S_V, S_L_cl, S_V_cl`.
pub fn simulate_impl(kind: &str, alpha: f64, e0: f64, t_final: f64, n_traj: usize) -> Result<Vec<f64>> {
    let mut c = demo_config(kind, alpha, e0)?;
    c.t_final = Some(t_final.clamp(0.0, MAX_T_FINAL));
    c.n_traj = n_traj.clamp(1, MAX_N_TRAJ);
    let s = run_config(&c)?;
    Ok([s.times, s.s_l_quantum, s.s_v_quantum, s.s_l_classical, s.s_v_classical].concat())
}

fn js(r: Result<Vec<f64>>) -> std::result::Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn half_periods(alpha: f64, e0: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(half_periods_impl(alpha, e0))
}

#[wasm_bindgen]
pub fn initial_entropies(kind: &str, alpha: f64, e0: f64, n_traj: u32, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    js(initial_entropies_impl(kind, alpha, e0, n_traj as usize, seed as u64))
}

#[wasm_bindgen]
pub fn simulate(kind: &str, alpha: f64, e0: f64, t_final: f64, n_traj: u32) -> std::result::Result<Vec<f64>, JsError> {
    js(simulate_impl(kind, alpha, e0, t_final, n_traj as usize))
}
