//! Decay experiments for the frozen linearized flow and the modified wave group.

use serde::Serialize;

use super::config::ExperimentConfig;
use super::fit::{fit_decay, DecayFit};
use super::perturb::build_perturbation;
use crate::error::Result;
use crate::fields::{FieldPair, Vec3};
use crate::linearized::{integrate_frozen, FrozenOptions, FrozenSample};
use crate::soliton::GridCharge;

#[derive(Debug, Clone, Serialize)]
pub struct FrozenDecayReport {
    pub delta: f64,
    pub samples: Vec<FrozenSample>,
    /// Fit of ‖X(t)‖_{−2−δ}.
    pub fit: DecayFit,
    /// max |Ω(τⱼ, X(t))| over the run.
    pub max_secular: f64,
    /// Largest relative change of 𝓗_{v,v}.
    pub max_hamiltonian_drift: f64,
}

/// Evolves the projected perturbation of `cfg` under Ẋ = A_{v,v}X and fits the decay of
/// ‖X(t)‖_{−2−δ} over the configured window.
pub fn frozen_decay(charge: &GridCharge, cfg: &ExperimentConfig) -> Result<FrozenDecayReport> {
    cfg.validate()?;
    let v = Vec3::from(cfg.initial.v);
    let x0 = build_perturbation(charge, &v, &cfg.initial.perturbation, cfg.seed)?;
    let delta = cfg.analysis.delta;
    let opts = FrozenOptions {
        delta,
        sample_stride: cfg.integrator.output_stride,
        weighted_norms: true,
        wrap_limit: Some(cfg.wrap_time()),
        energy_tol: cfg.integrator.energy_tol,
    };
    let tr = integrate_frozen(charge, &v, &x0, cfg.t_final(), cfg.dt()?, false, &opts)?;
    let series: Vec<(f64, f64)> = tr.samples.iter().map(|s| (s.t, s.decay_norm)).collect();
    let fit = fit_decay(&series, cfg.fit_window())?;
    let h0 = tr.samples[0].hamiltonian;
    let max_hamiltonian_drift = tr.samples.iter().map(|s| ((s.hamiltonian - h0) / h0).abs()).fold(0.0, f64::max);
    let max_secular = tr.samples.iter().flat_map(|s| s.secular.iter().map(|x| x.abs())).fold(0.0, f64::max);
    Ok(FrozenDecayReport { delta, samples: tr.samples, fit, max_secular, max_hamiltonian_drift })
}

/// ‖(1+|x|)^{−α}E‖ + ‖(1+|x|)^{−α}A‖ + ‖(1+|x|)^{−α}∇A‖.
pub fn local_energy(f: &FieldPair, alpha: f64) -> f64 {
    f.e.norm_weighted(-alpha, 0) + f.a.norm_weighted(-alpha, 1)
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveDecayReport {
    pub alpha: f64,
    pub series: Vec<(f64, f64)>,
    pub fit: DecayFit,
}

/// Local energy of W_v(t)F at the given times, fitted over `window`.
pub fn wave_group_decay(
    f: &FieldPair,
    v: &Vec3,
    alpha: f64,
    times: &[f64],
    window: (f64, f64),
) -> Result<WaveDecayReport> {
    let series: Vec<(f64, f64)> =
        times.iter().map(|&t| (t, local_energy(&f.modified_wave_group(v, t), alpha))).collect();
    let fit = fit_decay(&series, window)?;
    Ok(WaveDecayReport { alpha, series, fit })
}
