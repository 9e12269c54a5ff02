//! Scattered field Ψ(t) = W⁰(−t)(F(t) − F_q̇(t)) and its Cauchy residuals.

use mlsim::harness::{run_perturbed_soliton, ExperimentConfig};

fn main() -> mlsim::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/small.toml");
    let cfg = ExperimentConfig::from_path(path.as_ref())?;
    let r = run_perturbed_soliton(&cfg)?;
    let s = r.scattering.expect("three extraction times inside the run");
    for (i, t) in s.times.iter().enumerate() {
        let next = s.cauchy_residuals.get(i).map(|c| format!("{c:.3e}")).unwrap_or_default();
        println!("t = {t:5.2}  |Psi| = {:.4e}  |Psi(next) - Psi| = {next}", s.norms[i]);
    }
    println!("strictly decreasing: {}", s.strictly_decreasing);
    for (t, rem) in &r.remainder {
        println!("remainder proxy at t = {t:5.2}: {rem:.3e}");
    }
    Ok(())
}
