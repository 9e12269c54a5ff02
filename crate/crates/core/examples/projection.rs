//! Symplectic projection of a perturbed soliton onto the solitary manifold.

use mlsim::charge::RadialChargeDensity;
use mlsim::fields::{FourierGrid, Vec3};
use mlsim::harness::build_perturbation;
use mlsim::harness::config::PerturbationSpec;
use mlsim::soliton::{soliton_state, GridCharge, SolitonParams};
use mlsim::symplectic::{omega_matrix, project_to_manifold, projection_residual};

fn main() -> mlsim::Result<()> {
    let grid = FourierGrid::new(32, 16.0)?;
    let charge = GridCharge::new(&RadialChargeDensity::reference_with_radius(4.0), &grid);
    let sigma = SolitonParams::new(Vec3::new(0.5, -0.25, 0.0), Vec3::new(0.3, 0.0, 0.0))?;
    let om = omega_matrix(&charge, &sigma.v)?;
    println!("Omega+ eigenvalues {:.4?}", om.plus_eigenvalues.as_slice());

    // A generic perturbation: it has components along the tangent space, so σ moves.
    let spec = PerturbationSpec { amplitude: 2e-2, ..Default::default() };
    let mut y = soliton_state(&charge, &sigma)?;
    let mut kick = build_perturbation(&charge, &sigma.v, &spec, 3)?;
    kick.p += Vec3::new(0.01, 0.0, 0.005);
    y.axpy(1.0, &kick);

    let pr = project_to_manifold(&charge, &y)?;
    let res = projection_residual(&charge, &y, &pr.sigma)?;
    println!("projected b = {:.6?}, v = {:.6?}", pr.sigma.b.as_slice(), pr.sigma.v.as_slice());
    println!(
        "max |Omega(Z, tau_j)| = {:.2e} after {} Newton steps",
        res.iter().fold(0.0f64, |m, r| m.max(r.abs())),
        pr.iterations
    );
    println!("|Z| in the energy norm {:.4e}", pr.z.norm_energy());
    Ok(())
}
