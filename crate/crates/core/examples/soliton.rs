//! A moving soliton on a grid: momentum, stationary residual and translation under the flow.

use mlsim::charge::RadialChargeDensity;
use mlsim::dynamics::{evolve, EvolveOptions};
use mlsim::fields::{FourierGrid, Vec3};
use mlsim::soliton::{soliton_momentum, soliton_state, stationary_residual, GridCharge, SolitonParams};

fn main() -> mlsim::Result<()> {
    let grid = FourierGrid::new(32, 16.0)?;
    let charge = GridCharge::new(&RadialChargeDensity::reference_with_radius(4.0), &grid);
    let v = Vec3::new(0.3, 0.1, 0.0);
    let sigma = SolitonParams::new(Vec3::zeros(), v)?;
    println!("P_v = {:.6?}", soliton_momentum(&charge, &v)?.as_slice());
    println!("stationary residual {:.2e}", stationary_residual(&charge, &v)?.max());

    let y0 = soliton_state(&charge, &sigma)?;
    let t = 4.0;
    let tr = evolve(&charge, &y0, t, 0.02, &EvolveOptions::default())?;
    let exact = soliton_state(&charge, &SolitonParams { b: v * t, v })?;
    println!(
        "after t = {t}: |q - vt| = {:.2e}, field error {:.2e}, energy drift {:.2e}",
        (tr.final_state.q - v * t).norm(),
        tr.final_state.fields.sub(&exact.fields).norm_f(),
        tr.max_energy_drift
    );
    Ok(())
}
