//! Perturbation recipes for initial data near a soliton.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

use super::config::{ExperimentConfig, PerturbationKind, PerturbationSpec};
use crate::error::Result;
use crate::fields::{curl_gaussian, Vec3};
use crate::soliton::{soliton_state, GridCharge};
use crate::state::PhaseVector;
use crate::symplectic::TransversalProjector;

fn direction(spec: &PerturbationSpec, rng: &mut ChaCha8Rng) -> Vec3 {
    match spec.direction {
        Some(d) => Vec3::from(d).normalize(),
        None => Vec3::from(UnitSphere.sample(rng)),
    }
}

/// Any unit vector orthogonal to `d`.
fn orthogonal(d: &Vec3) -> Vec3 {
    let trial = if d[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    d.cross(&trial).normalize()
}

/// Z₀ in the moving frame: the raw recipe, projected by P_v, rescaled to the requested
/// energy norm. Zero when the recipe is empty or the projection removes everything.
pub fn build_perturbation(charge: &GridCharge, v: &Vec3, spec: &PerturbationSpec, seed: u64) -> Result<PhaseVector> {
    let grid = charge.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = direction(spec, &mut rng);
    let mut x = PhaseVector::zeros(grid);
    match spec.kind {
        PerturbationKind::None => return Ok(x),
        PerturbationKind::Bump => {
            let c = Vec3::from(spec.center);
            x.fields.e = curl_gaussian(grid, c, spec.width, d);
            x.fields.a = curl_gaussian(grid, c, spec.width, orthogonal(&d));
        }
        PerturbationKind::Kick => x.p = d,
        PerturbationKind::Offset => x.q = d,
    }
    let x = TransversalProjector::new(charge, v)?.apply(&x);
    let norm = x.norm_energy();
    if norm == 0.0 || spec.amplitude == 0.0 {
        return Ok(PhaseVector::zeros(grid));
    }
    Ok(x.scaled(spec.amplitude / norm))
}

/// Y₀ = S(σ₀) + Z₀ in the lab frame, together with Z₀.
pub fn initial_state(charge: &GridCharge, cfg: &ExperimentConfig) -> Result<(PhaseVector, PhaseVector)> {
    let sigma = cfg.sigma0()?;
    let z0 = build_perturbation(charge, &sigma.v, &cfg.initial.perturbation, cfg.seed)?;
    // S(σ₀) already carries q = b, so only the fields of Z₀ are shifted.
    let shifted = PhaseVector { fields: z0.fields.translated(sigma.b), q: z0.q, p: z0.p };
    let y0 = soliton_state(charge, &sigma)?.add(&shifted);
    Ok((y0, z0))
}
