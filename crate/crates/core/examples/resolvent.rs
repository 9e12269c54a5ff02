//! Structure of M(iω)⁻¹: the block identity and the O(1/|ω|) bound at large frequency.

use mlsim::charge::RadialChargeDensity;
use mlsim::fields::Vec3;
use mlsim::spectral::SpectralContext;
use num_complex::Complex64 as C64;

fn main() -> mlsim::Result<()> {
    let ctx = SpectralContext::new(&RadialChargeDensity::reference(), &Vec3::new(0.3, 0.0, 0.0))?;
    let m = ctx.m_matrix_at(C64::new(0.2, 1.0))?;
    println!("det M: direct {:.6e}, factored {:.6e}", m.det_direct, m.det_factored);
    println!("{:>6} {:>12} {:>12} {:>12}", "omega", "identity", "|M^-1|", "w |M^-1|");
    for w in [0.1, 0.5, 2.0, 10.0, 50.0] {
        let s = ctx.m_inverse_structure(w)?;
        println!("{w:6} {:12.2e} {:12.4e} {:12.4}", s.identity_residual, s.inverse_norm, w * s.inverse_norm);
    }
    Ok(())
}
