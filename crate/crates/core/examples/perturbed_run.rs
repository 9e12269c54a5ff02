//! Nonlinear run from a perturbed soliton with projection at each output time.
//!
//! Pass a TOML config path to run something else, e.g. `configs/experiment.toml`.

use mlsim::harness::{run_perturbed_soliton, ExperimentConfig};

fn main() -> mlsim::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/small.toml").into());
    let cfg = ExperimentConfig::from_path(path.as_ref())?;
    let r = run_perturbed_soliton(&cfg)?;
    for s in &r.samples {
        println!("t = {:6.2}  v = {:.8?}  |Z|_(-beta) = {:.3e}  |vdot| = {:.3e}", s.t, s.v, s.z_decay, s.vdot_norm());
    }
    println!("v+ = {:.8?} +- {:.1e}", r.v_plus.value, r.v_plus.uncertainty);
    println!("a+ = {:.8?} +- {:.1e}", r.a_plus.value, r.a_plus.uncertainty);
    for (k, f) in &r.fits {
        if let Some(f) = &f.fit {
            println!("fit {k}: slope {:.3} (R^2 {:.3})", f.exponent, f.r_squared);
        }
    }
    Ok(())
}
