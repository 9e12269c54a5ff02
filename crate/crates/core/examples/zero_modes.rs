//! Zero modes of the linearized operator, skew-symmetry and positivity of the linearized energy.

use mlsim::charge::RadialChargeDensity;
use mlsim::fields::{FourierGrid, Vec3};
use mlsim::linearized::{linearized_hamiltonian, Linearization};
use mlsim::soliton::{tangent_frame, GridCharge};
use mlsim::spectral::orthogonality_conditions;

fn main() -> mlsim::Result<()> {
    let grid = FourierGrid::new(32, 16.0)?;
    let charge = GridCharge::new(&RadialChargeDensity::reference_with_radius(4.0), &grid);
    let v = Vec3::new(0.6, 0.0, 0.0);
    let lin = Linearization::new(&charge, &v, &v)?;
    let frame = tangent_frame(&charge, &v)?;
    for j in 0..3 {
        let a0 = lin.apply(frame.get(j)).norm_energy();
        let a1 = lin.apply(frame.get(j + 3)).sub(frame.get(j)).norm_energy();
        let h = linearized_hamiltonian(&charge, &v, &v, frame.get(j + 3))?;
        println!("j = {}: |A tau_j| = {a0:.1e}, |A tau_(j+3) - tau_j| = {a1:.1e}, H(tau_(j+3)) = {h:.4}", j + 1);
    }
    for j in [0, 3] {
        let r = orthogonality_conditions(&charge, &v, frame.get(j))?;
        println!("tau_{}: first condition {:.3e}, second {:.3e}", j + 1, r.first.amax(), r.second.amax());
    }
    Ok(())
}
