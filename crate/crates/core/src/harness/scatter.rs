//! Scattered-field extraction Ψ₊ ≈ W⁰(−t)(F(t) − F_{v(t)}(t)).

use serde::Serialize;

use crate::dynamics::particle_velocity;
use crate::error::{Error, Result};
use crate::fields::FieldPair;
use crate::soliton::{soliton_fields, GridCharge};
use crate::state::PhaseVector;

#[derive(Debug, Clone, Serialize)]
pub struct ScatteringReport {
    pub times: Vec<f64>,
    /// ‖Ψ(tᵢ₊₁) − Ψ(tᵢ)‖_𝓕.
    pub cauchy_residuals: Vec<f64>,
    /// ‖Ψ(tᵢ)‖_𝓕.
    pub norms: Vec<f64>,
    /// ‖Ψ(t) − Ψ(t_last)‖_𝓕 for every t but the last: the remainder r₊ proxy.
    pub remainders: Vec<f64>,
    pub strictly_decreasing: bool,
    /// Ψ at the last extraction time.
    #[serde(skip)]
    pub estimate: FieldPair,
}

/// W⁰(−t)(F − F_{q̇}(· − q)) for one lab-frame state at time t.
pub fn scattered_field_at(charge: &GridCharge, t: f64, y: &PhaseVector) -> Result<FieldPair> {
    let v = particle_velocity(charge, y);
    let accompanying = soliton_fields(charge, &v)?.translated(y.q);
    Ok(y.fields.sub(&accompanying).free_wave_group(-t))
}

/// Ψ(tᵢ) at increasing times and the Cauchy residuals between consecutive ones.
pub fn extract_scattered_field(
    charge: &GridCharge,
    samples: &[(f64, PhaseVector)],
    wrap_limit: f64,
) -> Result<ScatteringReport> {
    if samples.len() < 3 {
        return Err(Error::Config(format!("scattering needs at least 3 extraction times, got {}", samples.len())));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Config("extraction times must increase".into()));
    }
    if let Some((t, _)) = samples.iter().find(|(t, _)| t.abs() > wrap_limit) {
        return Err(Error::WrapGuard { t_final: *t, limit: wrap_limit });
    }
    let psi: Vec<FieldPair> = samples.iter().map(|(t, y)| scattered_field_at(charge, *t, y)).collect::<Result<_>>()?;
    let cauchy: Vec<f64> = psi.windows(2).map(|w| w[1].sub(&w[0]).norm_f()).collect();
    let last = psi.last().expect("at least three samples");
    Ok(ScatteringReport {
        times: samples.iter().map(|(t, _)| *t).collect(),
        strictly_decreasing: cauchy.windows(2).all(|w| w[1] < w[0]),
        norms: psi.iter().map(|p| p.norm_f()).collect(),
        remainders: psi[..psi.len() - 1].iter().map(|p| p.sub(last).norm_f()).collect(),
        cauchy_residuals: cauchy,
        estimate: last.clone(),
    })
}
