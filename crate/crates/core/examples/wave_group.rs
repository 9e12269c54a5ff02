//! Local energy decay under the modified wave group for a moving frame.

use mlsim::fields::{curl_gaussian, FieldPair, FourierGrid, Vec3};
use mlsim::harness::wave_group_decay;

fn main() -> mlsim::Result<()> {
    let grid = FourierGrid::new(48, 24.0)?;
    let f = FieldPair {
        e: curl_gaussian(&grid, Vec3::zeros(), 1.5, Vec3::z()),
        a: curl_gaussian(&grid, Vec3::zeros(), 1.5, Vec3::y()),
    };
    let times: Vec<f64> = (0..=30).map(|i| 0.5 * i as f64).collect();
    let r = wave_group_decay(&f, &Vec3::new(0.3, 0.0, 0.0), 2.0, &times, (4.0, 15.0))?;
    println!("local energy slope {:.3} (R^2 {:.4}) over t in [4, 15]", r.fit.exponent, r.fit.r_squared);
    Ok(())
}
