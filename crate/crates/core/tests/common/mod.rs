#![allow(dead_code)]

pub mod oracles;

use std::sync::Arc;

use mlsim::charge::RadialChargeDensity;
use mlsim::fields::{curl_gaussian, FieldPair, FourierGrid, Vec3};
use mlsim::soliton::GridCharge;
use mlsim::state::PhaseVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A cheap grid with a well-coupled charge, for algebraic identities.
pub fn small() -> GridCharge {
    let grid = FourierGrid::new(16, 6.0).unwrap();
    GridCharge::new(&RadialChargeDensity::reference_with_radius(1.5), &grid)
}

pub fn medium() -> GridCharge {
    let grid = FourierGrid::new(32, 8.0).unwrap();
    GridCharge::new(&RadialChargeDensity::reference_with_radius(2.0), &grid)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rvec(rng: &mut ChaCha8Rng, s: f64) -> Vec3 {
    Vec3::new(rng.random_range(-s..s), rng.random_range(-s..s), rng.random_range(-s..s))
}

/// Sum of a few curl-Gaussian bumps with random centers, widths and directions.
pub fn random_fields(grid: &Arc<FourierGrid>, rng: &mut ChaCha8Rng) -> FieldPair {
    let l = grid.half_length();
    let mut f = FieldPair::zeros(grid);
    for _ in 0..3 {
        let w = rng.random_range(0.6..1.5);
        let e = curl_gaussian(grid, rvec(rng, 0.3 * l), w, rvec(rng, 1.0));
        let a = curl_gaussian(grid, rvec(rng, 0.3 * l), w, rvec(rng, 1.0));
        f.e.axpy(1.0, &e);
        f.a.axpy(1.0, &a);
    }
    f
}

pub fn random_state(grid: &Arc<FourierGrid>, rng: &mut ChaCha8Rng) -> PhaseVector {
    PhaseVector { fields: random_fields(grid, rng), q: rvec(rng, 1.0), p: rvec(rng, 1.0) }
}
