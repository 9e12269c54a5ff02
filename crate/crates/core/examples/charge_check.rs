//! Transform, neutrality and Wiener scan of the reference profile and of a uniform ball.

use mlsim::charge::{check_neutrality, check_wiener, RadialChargeDensity};

fn main() {
    let rho = RadialChargeDensity::reference();
    println!("reference profile, R = {}", rho.radius());
    for k in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
        println!("  rho_hat({k:4}) = {:+.6e}", rho.rho_hat(k));
    }
    let n = check_neutrality(&rho);
    println!("  neutral: {}, small-k order {:.3?}", n.pass, n.small_k_order);
    let w = check_wiener(&rho, 40.0, 4000);
    println!(
        "  sampled sign changes up to k = 40: {}, first zeros {:.3?}",
        w.sign_changes,
        &w.zeros[..w.zeros.len().min(3)]
    );

    let ball = RadialChargeDensity::ball(1.0, 1.0);
    println!("uniform ball: neutral {}, total charge {:.4}", check_neutrality(&ball).pass, ball.total_charge());
}
