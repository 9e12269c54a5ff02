//! Perturbed-soliton runs with symplectic projection at every output time.

use std::collections::BTreeMap;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::fit::{fit_decay, DecayFit};
use super::perturb::initial_state;
use super::scatter::{extract_scattered_field, scattered_field_at, ScatteringReport};
use crate::dynamics::{evolve_with, modulation_rates, EvolveOptions};
use crate::error::{Error, Result};
use crate::fields::{FieldPair, Vec3};
use crate::soliton::{GridCharge, SolitonParams};
use crate::state::PhaseVector;
use crate::symplectic::{project_to_manifold_from, ProjectionOptions};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunSample {
    pub t: f64,
    pub q: [f64; 3],
    pub p: [f64; 3],
    pub qdot: [f64; 3],
    /// Projected soliton parameters σ(t) = (b, v).
    pub b: [f64; 3],
    pub v: [f64; 3],
    /// c(t) = b(t) − ∫₀ᵗ v(s) ds.
    pub c: [f64; 3],
    pub bdot: [f64; 3],
    pub vdot: [f64; 3],
    /// ‖Z(t)‖_{−β}.
    pub z_decay: f64,
    /// ‖Z(t)‖ in the energy norm.
    pub z_energy: f64,
    pub energy: f64,
    /// max |Ω(Z, τⱼ(σ))|.
    pub projection_residual: f64,
    pub newton_iterations: usize,
}

impl RunSample {
    pub fn vdot_norm(&self) -> f64 {
        Vec3::from(self.vdot).norm()
    }

    /// |ċ| = |ḃ − v|.
    pub fn cdot_norm(&self) -> f64 {
        (Vec3::from(self.bdot) - Vec3::from(self.v)).norm()
    }
}

/// A fit, or the reason it could not be made.
#[derive(Debug, Clone, Serialize)]
pub struct FitOutcome {
    pub fit: Option<DecayFit>,
    pub error: Option<String>,
}

impl FitOutcome {
    fn from(r: Result<DecayFit>) -> Self {
        match r {
            Ok(f) => Self { fit: Some(f), error: None },
            Err(e) => Self { fit: None, error: Some(e.to_string()) },
        }
    }
}

/// An asymptotic vector with the drift over the last window as its uncertainty.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: [f64; 3],
    pub uncertainty: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub beta: f64,
    pub wrap_time: f64,
    pub fit_window: [f64; 2],
    /// ‖Z₀‖_β.
    pub d_beta: f64,
    pub samples: Vec<RunSample>,
    pub v_plus: Estimate,
    pub a_plus: Estimate,
    /// |q̇(t) − v₊| per sample.
    pub velocity_deviation: Vec<f64>,
    /// |q(t) − v₊t − a₊| per sample.
    pub position_deviation: Vec<f64>,
    /// Keys: z_decay, vdot, vdot_envelope, cdot, remainder.
    pub fits: BTreeMap<String, FitOutcome>,
    /// (|v(t_end) − v(t_mid)|, |v(t_mid) − v(0)|).
    pub adiabatic: [f64; 2],
    pub max_energy_drift: f64,
    pub scattering: Option<ScatteringReport>,
    pub scattering_error: Option<String>,
    /// ‖Ψ(t) − Ψ(t_last)‖_𝓕 at the remainder times, the r₊ proxy.
    pub remainder: Vec<(f64, f64)>,
    #[serde(skip)]
    pub extracted_states: Vec<(f64, PhaseVector)>,
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

fn projection_options() -> ProjectionOptions {
    ProjectionOptions { tol: 1e-13, ..Default::default() }
}

pub fn run_perturbed_soliton(cfg: &ExperimentConfig) -> Result<DecayReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let charge = GridCharge::new(&cfg.density()?, &grid);
    run_perturbed_soliton_on(&charge, cfg)
}

/// Evolves S(σ₀) + Z₀, projecting onto the solitary manifold at each output time.
pub fn run_perturbed_soliton_on(charge: &GridCharge, cfg: &ExperimentConfig) -> Result<DecayReport> {
    cfg.validate()?;
    let beta = cfg.beta();
    let (y0, z0) = initial_state(charge, cfg)?;
    let mut sigma = cfg.sigma0()?;
    let t_final = cfg.t_final();
    let wrap = cfg.wrap_time();
    let opts = EvolveOptions {
        output_stride: cfg.integrator.output_stride,
        keep_states: false,
        wrap_limit: Some(wrap),
        energy_tol: cfg.integrator.energy_tol,
    };
    let popts = projection_options();
    let mut pending: Vec<f64> = cfg.extraction_times();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    let mut extracted = Vec::new();
    let mut pending_psi: Vec<f64> = cfg.remainder_times();
    pending_psi.reverse();
    let mut psi: Vec<(f64, FieldPair)> = Vec::new();
    let mut samples: Vec<RunSample> = Vec::new();
    let mut integral_v = Vec3::zeros();
    let radius = cfg.analysis.neighborhood_radius;
    let ptol = cfg.analysis.projection_tol;
    let traj = evolve_with(charge, &y0, t_final, cfg.dt()?, &opts, |d, y| {
        let lost = |reason: String| Error::ProjectionLost { t: d.t, reason };
        let pr = project_to_manifold_from(charge, y, Some(sigma), popts).map_err(|e| lost(e.to_string()))?;
        if pr.residual > ptol {
            return Err(lost(format!("orthogonality residual {:.3e}", pr.residual)));
        }
        let z_decay = pr.z.norm_weighted(-beta);
        if !(z_decay <= radius) {
            return Err(lost(format!("|Z|_-beta = {z_decay:.3e} left the neighborhood {radius}")));
        }
        let rates = modulation_rates(charge, y, &pr.sigma, popts.fd_step).map_err(|e| lost(e.to_string()))?;
        if let Some(prev) = samples.last() {
            integral_v += (Vec3::from(prev.v) + pr.sigma.v) * (0.5 * (d.t - prev.t));
        }
        sigma = pr.sigma;
        samples.push(RunSample {
            t: d.t,
            q: arr(&d.q),
            p: arr(&y.p),
            qdot: arr(&d.qdot),
            b: arr(&sigma.b),
            v: arr(&sigma.v),
            c: arr(&(sigma.b - integral_v)),
            bdot: arr(&rates.b),
            vdot: arr(&rates.v),
            z_decay,
            z_energy: pr.z.norm_energy(),
            energy: d.energy,
            projection_residual: pr.residual,
            newton_iterations: pr.iterations,
        });
        if let Some(&te) = pending.last() {
            if d.t >= te - 1e-9 {
                pending.pop();
                extracted.push((d.t, y.clone()));
            }
        }
        if let Some(&te) = pending_psi.last() {
            if d.t >= te - 1e-9 {
                pending_psi.pop();
                psi.push((d.t, scattered_field_at(charge, d.t, y)?));
            }
        }
        Ok(())
    })?;
    let (scattering, scattering_error) = match extract_scattered_field(charge, &extracted, wrap) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut report = summarize(cfg, samples, traj.max_energy_drift, scattering, scattering_error);
    if let Some((_, last)) = psi.last() {
        let n = psi.len() - 1;
        report.remainder = psi[..n].iter().map(|(t, p)| (*t, p.sub(last).norm_f())).collect();
        if n > 0 {
            let window = (psi[0].0, psi[n - 1].0);
            report.fits.insert("remainder".into(), FitOutcome::from(fit_decay(&report.remainder, window)));
        }
    }
    report.d_beta = z0.norm_weighted(beta);
    report.extracted_states = extracted;
    Ok(report)
}

/// sup_{s ≥ t} of the series: the smallest non-increasing majorant.
pub fn envelope(series: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = series.to_vec();
    let mut m = f64::NEG_INFINITY;
    for p in out.iter_mut().rev() {
        m = m.max(p.1);
        p.1 = m;
    }
    out
}

fn summarize(
    cfg: &ExperimentConfig,
    samples: Vec<RunSample>,
    max_energy_drift: f64,
    scattering: Option<ScatteringReport>,
    scattering_error: Option<String>,
) -> DecayReport {
    let window = cfg.fit_window();
    let last = *samples.last().expect("evolve records t = 0");
    let t_end = last.t;
    let v_end = Vec3::from(last.v);
    let b_end = Vec3::from(last.b);
    let a_plus = b_end - v_end * t_end;
    let tail_start = window.0.max(0.5 * (window.0 + t_end));
    let tail: Vec<&RunSample> = samples.iter().filter(|s| s.t >= tail_start).collect();
    let v_drift = tail.iter().map(|s| (Vec3::from(s.v) - v_end).norm()).fold(0.0, f64::max);
    let a_drift = tail.iter().map(|s| (Vec3::from(s.b) - v_end * s.t - a_plus).norm()).fold(0.0, f64::max);
    let mid = samples
        .iter()
        .min_by(|a, b| (a.t - 0.5 * t_end).abs().total_cmp(&(b.t - 0.5 * t_end).abs()))
        .expect("nonempty");
    let v0 = Vec3::from(samples[0].v);
    let vm = Vec3::from(mid.v);
    let series = |f: &dyn Fn(&RunSample) -> f64| -> Vec<(f64, f64)> { samples.iter().map(|s| (s.t, f(s))).collect() };
    let mut fits = BTreeMap::new();
    fits.insert("z_decay".into(), FitOutcome::from(fit_decay(&series(&|s| s.z_decay), window)));
    fits.insert("vdot".into(), FitOutcome::from(fit_decay(&series(&|s| s.vdot_norm()), window)));
    fits.insert("cdot".into(), FitOutcome::from(fit_decay(&series(&|s| s.cdot_norm()), window)));
    fits.insert("vdot_envelope".into(), FitOutcome::from(fit_decay(&envelope(&series(&|s| s.vdot_norm())), window)));
    DecayReport {
        beta: cfg.beta(),
        wrap_time: cfg.wrap_time(),
        fit_window: [window.0, window.1],
        d_beta: f64::NAN,
        velocity_deviation: samples.iter().map(|s| (Vec3::from(s.qdot) - v_end).norm()).collect(),
        position_deviation: samples.iter().map(|s| (Vec3::from(s.q) - v_end * s.t - a_plus).norm()).collect(),
        v_plus: Estimate { value: arr(&v_end), uncertainty: v_drift },
        a_plus: Estimate { value: arr(&a_plus), uncertainty: a_drift },
        fits,
        adiabatic: [(v_end - vm).norm(), (vm - v0).norm()],
        max_energy_drift,
        scattering,
        scattering_error,
        remainder: Vec::new(),
        samples,
        extracted_states: Vec::new(),
    }
}

impl DecayReport {
    pub fn fit(&self, key: &str) -> Option<&DecayFit> {
        self.fits.get(key).and_then(|f| f.fit.as_ref())
    }

    pub fn sigma_end(&self) -> SolitonParams {
        let s = self.samples.last().expect("nonempty");
        SolitonParams { b: Vec3::from(s.b), v: Vec3::from(s.v) }
    }
}
