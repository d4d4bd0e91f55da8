//! Second-order (Strang) split-operator propagation of the joint wavefunction.
//!
//! One step is `e^{-iV dt/2ħ} · F⁻¹ e^{-iT dt/ħ} F · e^{-iV dt/2ħ}`. Between
//! samples, adjacent potential half steps are fused into one full step, so a
//! run of `k` steps costs `k` kinetic and `k + 1` potential multiplies.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ComplexField2D, Grid1D, SpectralTransform};
use crate::model::ModelParams;

/// Steps between non-finite checks during propagation.
pub const NAN_GUARD_INTERVAL: usize = 100;

#[derive(Debug)]
pub struct PropagatorPlan {
    pub dt: f64,
    pub grid_x: Grid1D,
    pub grid_y: Grid1D,
    /// `e^{-iV dt/2ħ}` in `[x][y]` layout.
    pub half_potential_phase: Vec<Complex64>,
    /// `e^{-i(p_x²+p_y²) dt/2mħ}` in `[kx][ky]` FFT layout.
    pub kinetic_phase: Vec<Complex64>,
    full_potential_phase: Vec<Complex64>,
    // Kinetic phase in the transposed `[ky][kx]` layout produced by the
    // transform, with the 1/(nx·ny) round-trip scaling folded in.
    kinetic_scaled_t: Vec<Complex64>,
    transform: SpectralTransform,
}

impl PropagatorPlan {
    pub fn new(params: &ModelParams, grid_x: &Grid1D, grid_y: &Grid1D, dt: f64) -> Result<Self> {
        if !dt.is_finite() || dt < 0.0 {
            return Err(Error::validation("qdyn.bad_dt", format!("dt must be finite and >= 0 (got {dt})")));
        }
        let (nx, ny) = (grid_x.n, grid_y.n);
        let hbar = params.hbar;
        let mut half_potential_phase = vec![Complex64::new(0.0, 0.0); nx * ny];
        let mut full_potential_phase = vec![Complex64::new(0.0, 0.0); nx * ny];
        half_potential_phase
            .par_chunks_mut(ny)
            .zip(full_potential_phase.par_chunks_mut(ny))
            .enumerate()
            .for_each(|(i, (half, full))| {
                let x = grid_x.x(i);
                for j in 0..ny {
                    let v = params.potential(x, grid_y.x(j));
                    half[j] = Complex64::cis(-0.5 * v * dt / hbar);
                    full[j] = Complex64::cis(-v * dt / hbar);
                }
            });

        let scale = ((nx * ny) as f64).recip();
        let px = grid_x.momenta();
        let py = grid_y.momenta();
        let mut kinetic_phase = vec![Complex64::new(0.0, 0.0); nx * ny];
        let mut kinetic_scaled_t = vec![Complex64::new(0.0, 0.0); nx * ny];
        for (kx, &p) in px.iter().enumerate() {
            for (ky, &q) in py.iter().enumerate() {
                let t = params.kinetic(p, q);
                let phase = Complex64::cis(-t * dt / hbar);
                kinetic_phase[kx * ny + ky] = phase;
                kinetic_scaled_t[ky * nx + kx] = phase * scale;
            }
        }
        Ok(PropagatorPlan {
            dt,
            grid_x: grid_x.clone(),
            grid_y: grid_y.clone(),
            half_potential_phase,
            kinetic_phase,
            full_potential_phase,
            kinetic_scaled_t,
            transform: SpectralTransform::new(nx, ny),
        })
    }

    /// Plan for the same grid and step with every phase conjugated, i.e. a
    /// step backwards in time.
    pub fn time_reversed(&self) -> PropagatorPlan {
        let conj = |v: &Vec<Complex64>| v.iter().map(|c| c.conj()).collect::<Vec<_>>();
        PropagatorPlan {
            dt: -self.dt,
            grid_x: self.grid_x.clone(),
            grid_y: self.grid_y.clone(),
            half_potential_phase: conj(&self.half_potential_phase),
            kinetic_phase: conj(&self.kinetic_phase),
            full_potential_phase: conj(&self.full_potential_phase),
            kinetic_scaled_t: conj(&self.kinetic_scaled_t),
            transform: SpectralTransform::new(self.grid_x.n, self.grid_y.n),
        }
    }

    pub fn transform(&self) -> &SpectralTransform {
        &self.transform
    }

    /// Largest deviation of any phase factor from unit modulus.
    pub fn max_modulus_error(&self) -> f64 {
        self.half_potential_phase
            .iter()
            .chain(&self.kinetic_phase)
            .chain(&self.full_potential_phase)
            .map(|c| (c.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn check_field(&self, psi: &ComplexField2D) -> Result<()> {
        if psi.nx() != self.grid_x.n || psi.ny() != self.grid_y.n {
            return Err(Error::validation(
                "qdyn.shape_mismatch",
                format!(
                    "field is {}x{} but plan is {}x{}",
                    psi.nx(),
                    psi.ny(),
                    self.grid_x.n,
                    self.grid_y.n
                ),
            ));
        }
        Ok(())
    }

    /// A single Strang step.
    pub fn step(&self, psi: &mut ComplexField2D) -> Result<()> {
        Propagator::new(self).advance(psi, 1)
    }
}

/// A plan plus the momentum-space scratch buffer it needs.
pub struct Propagator<'a> {
    plan: &'a PropagatorPlan,
    spec: Vec<Complex64>,
}

fn multiply(data: &mut [Complex64], phase: &[Complex64]) {
    const CHUNK: usize = 4096;
    data.par_chunks_mut(CHUNK)
        .zip(phase.par_chunks(CHUNK))
        .for_each(|(d, p)| d.iter_mut().zip(p).for_each(|(a, b)| *a *= b));
}

impl<'a> Propagator<'a> {
    pub fn new(plan: &'a PropagatorPlan) -> Self {
        Propagator {
            plan,
            spec: vec![Complex64::new(0.0, 0.0); plan.grid_x.n * plan.grid_y.n],
        }
    }

    fn kinetic(&mut self, data: &mut [Complex64]) {
        let t = &self.plan.transform;
        t.forward_to_transposed(data, &mut self.spec);
        multiply(&mut self.spec, &self.plan.kinetic_scaled_t);
        t.inverse_from_transposed(&mut self.spec, data);
    }

    /// Advance `steps` Strang steps with fused inner potential half steps.
    pub fn advance(&mut self, psi: &mut ComplexField2D, steps: usize) -> Result<()> {
        self.plan.check_field(psi)?;
        if steps == 0 {
            return Ok(());
        }
        let plan = self.plan;
        let data = &mut psi.values;
        multiply(data, &plan.half_potential_phase);
        for s in 0..steps {
            self.kinetic(data);
            if s + 1 < steps {
                multiply(data, &plan.full_potential_phase);
            }
            if (s + 1) % NAN_GUARD_INTERVAL == 0 && has_non_finite(data) {
                return Err(non_finite_error(s + 1, plan.dt));
            }
        }
        multiply(data, &plan.half_potential_phase);
        if has_non_finite(data) {
            return Err(non_finite_error(steps, plan.dt));
        }
        Ok(())
    }
}

fn has_non_finite(data: &[Complex64]) -> bool {
    data.par_iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
}

fn non_finite_error(step: usize, dt: f64) -> Error {
    Error::integrity(
        "qdyn.non_finite",
        format!("non-finite amplitude after step {step} (dt = {dt}); reduce dt or enlarge the grid"),
    )
}

/// `⟨T⟩` from momentum-space quadrature plus `⟨V⟩` from position-space
/// quadrature, divided by the norm.
pub fn expectation_energy(params: &ModelParams, psi: &ComplexField2D, transform: &SpectralTransform) -> f64 {
    let (kin, pot) = expectation_parts(params, psi, transform);
    kin + pot
}

/// `(⟨T⟩, ⟨V⟩)` for a possibly unnormalized field.
pub fn expectation_parts(params: &ModelParams, psi: &ComplexField2D, transform: &SpectralTransform) -> (f64, f64) {
    let ny = psi.ny();
    let gx = &psi.grid_x;
    let gy = &psi.grid_y;
    let rows: Vec<(f64, f64)> = psi
        .values
        .par_chunks(ny)
        .enumerate()
        .map(|(i, row)| {
            let x = gx.x(i);
            let mut w = 0.0;
            let mut v = 0.0;
            for (j, a) in row.iter().enumerate() {
                let d = a.norm_sqr();
                w += d;
                v += d * params.potential(x, gy.x(j));
            }
            (w, v)
        })
        .collect();
    let (w_pos, v_sum) = rows.iter().fold((0.0, 0.0), |(a, b), (w, v)| (a + w, b + v));

    let spec = transform.forward(psi);
    let py = gy.momenta();
    let rows: Vec<(f64, f64)> = spec
        .values
        .par_chunks(ny)
        .enumerate()
        .map(|(kx, row)| {
            let p = gx.p(kx);
            let mut w = 0.0;
            let mut t = 0.0;
            for (ky, a) in row.iter().enumerate() {
                let d = a.norm_sqr();
                w += d;
                t += d * params.kinetic(p, py[ky]);
            }
            (w, t)
        })
        .collect();
    let (w_mom, t_sum) = rows.iter().fold((0.0, 0.0), |(a, b), (w, t)| (a + w, b + t));
    (t_sum / w_mom, v_sum / w_pos)
}

/// `(⟨x⟩, ⟨y⟩, ⟨x²⟩, ⟨y²⟩)` over `|ψ|²`.
pub fn position_moments(psi: &ComplexField2D) -> [f64; 4] {
    let ny = psi.ny();
    let gx = &psi.grid_x;
    let gy = &psi.grid_y;
    let rows: Vec<[f64; 5]> = psi
        .values
        .par_chunks(ny)
        .enumerate()
        .map(|(i, row)| {
            let x = gx.x(i);
            let mut acc = [0.0; 5];
            for (j, a) in row.iter().enumerate() {
                let d = a.norm_sqr();
                let y = gy.x(j);
                acc[0] += d;
                acc[1] += d * x;
                acc[2] += d * y;
                acc[3] += d * x * x;
                acc[4] += d * y * y;
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 5];
    for r in &rows {
        for k in 0..5 {
            tot[k] += r[k];
        }
    }
    [tot[1] / tot[0], tot[2] / tot[0], tot[3] / tot[0], tot[4] / tot[0]]
}

/// `(⟨p_x⟩, ⟨p_y⟩)` from momentum-space quadrature.
pub fn momentum_means(psi: &ComplexField2D, transform: &SpectralTransform) -> (f64, f64) {
    let spec = transform.forward(psi);
    let ny = psi.ny();
    let py = psi.grid_y.momenta();
    let mut w = 0.0;
    let mut mx = 0.0;
    let mut my = 0.0;
    for (kx, row) in spec.values.chunks(ny).enumerate() {
        let p = psi.grid_x.p(kx);
        for (ky, a) in row.iter().enumerate() {
            let d = a.norm_sqr();
            w += d;
            mx += d * p;
            my += d * py[ky];
        }
    }
    (mx / w, my / w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumObservables {
    pub t: f64,
    pub norm: f64,
    pub energy: f64,
}

/// Number of steps of size `dt` in `t`, rejecting non-commensurate values.
pub fn step_count(t: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::validation("qdyn.bad_dt", format!("dt must be > 0 (got {dt})")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::validation("qdyn.bad_time", format!("time must be >= 0 (got {t})")));
    }
    let k = (t / dt).round();
    if (k * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::validation(
            "qdyn.incommensurate",
            format!("time {t} is not a whole number of steps of {dt}"),
        ));
    }
    Ok(k as usize)
}

/// Propagate `psi` to `steps_total` steps, calling `observer` at step 0 and
/// every `sample_every` steps (and at the final step).
///
/// Norm is checked at every sample: a change beyond 1e-8 from the initial
/// norm is an integrity error.
pub fn propagate<F>(
    params: &ModelParams,
    plan: &PropagatorPlan,
    psi: &mut ComplexField2D,
    steps_total: usize,
    sample_every: usize,
    mut observer: F,
) -> Result<Vec<QuantumObservables>>
where
    F: FnMut(usize, f64, &ComplexField2D) -> Result<()>,
{
    if sample_every == 0 {
        return Err(Error::validation("qdyn.bad_sampling", "sample_every must be >= 1"));
    }
    let mut prop = Propagator::new(plan);
    let norm0 = psi.norm_sqr();
    let mut out = Vec::with_capacity(steps_total / sample_every + 2);
    let mut done = 0usize;
    loop {
        let t = done as f64 * plan.dt;
        let norm = psi.norm_sqr();
        if (norm - norm0).abs() > 1e-8 {
            return Err(Error::integrity(
                "qdyn.norm_drift",
                format!("norm drifted from {norm0} to {norm} at t = {t}"),
            ));
        }
        let energy = expectation_energy(params, psi, plan.transform());
        out.push(QuantumObservables { t, norm, energy });
        observer(done, t, psi)?;
        if done >= steps_total {
            break;
        }
        let k = sample_every.min(steps_total - done);
        prop.advance(psi, k)?;
        done += k;
    }
    Ok(out)
}
