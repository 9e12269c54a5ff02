//! Coefficient integrals on the imaginary axis and the positivity of Im d1, Im d.

use mlsim::charge::RadialChargeDensity;
use mlsim::fields::Vec3;
use mlsim::spectral::{off_axis_limit, SpectralContext};

fn main() -> mlsim::Result<()> {
    let ctx = SpectralContext::new(&RadialChargeDensity::reference(), &Vec3::new(0.3, 0.0, 0.0))?;
    println!("{:>6} {:>24} {:>24} {:>12}", "omega", "d1", "d", "route gap");
    for w in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let p = ctx.wiener_positivity(w)?;
        let c = ctx.coeffs_on_axis(w)?;
        println!("{w:6} {:>24.6e} {:>24.6e} {:12.1e}", c.d1, c.d, p.route_gap);
    }
    let lim = off_axis_limit(&ctx, 1.0, &[1e-2, 1e-3, 1e-4])?;
    let axis = ctx.coeffs_on_axis(1.0)?;
    println!("d1 at omega = 1: axis {:.8e}, from Re lambda -> 0+ {:.8e}", axis.d1, lim.d1);
    let t = ctx.taylor_at_zero();
    println!("Taylor data at 0: I1 = {:.6e}, I = {:.6e}, J1 = {:.6e}, J = {:.6e}", t.i1, t.i, t.j1, t.j);
    Ok(())
}
