//! Independent reference computations shared by the module tests and the acceptance run.

use mlsim::charge::{RadialChargeDensity, RhoHatTable, FT_NORM};
use mlsim::fields::{project_solenoidal, FieldPair, FourierGrid, SolenoidalField, Vec3, CZERO3};
use mlsim::quad::{adaptive_scalar, gauss_legendre, AdaptiveOptions};
use mlsim::soliton::GridCharge;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;

/// sinc x − (1 − x²/6 + x⁴/120), by its own series where the difference cancels.
pub fn sinc_tail(x: f64) -> f64 {
    if x < 1.0 {
        let mut term = -x.powi(6) / 5040.0;
        let mut sum = 0.0;
        for j in 3..30 {
            sum += term;
            term *= -x * x / ((2 * j + 2) * (2 * j + 3)) as f64;
        }
        sum
    } else {
        x.sin() / x - (1.0 - x * x / 6.0 + x.powi(4) / 120.0)
    }
}

/// ρ̂(k) of a neutral profile by adaptive quadrature of the sinc tail; the r², r⁴, r⁶
/// terms integrate to zero.
pub fn rho_hat_neutral(rho: &RadialChargeDensity, k: f64) -> f64 {
    let opts = AdaptiveOptions { abs_tol: 1e-16, rel_tol: 1e-14, max_intervals: 4000 };
    let r = rho.radius();
    FT_NORM * 4.0 * PI * adaptive_scalar(|s| rho.rho1(s) * s * s * sinc_tail(k * s), 0.0, r, opts).unwrap()
}

/// e₁·P_v for v = ve₁: γv + 2π∫|ρ̂|²dk · ∫₋₁¹ v(1 − c²)/(1 − v²c²) dc.
pub fn momentum_continuum(rho: &RadialChargeDensity, v: f64) -> f64 {
    let kmax = 400.0 / rho.radius();
    let radial = adaptive_scalar(|k| rho.rho_hat(k).powi(2), 0.0, kmax, Default::default()).unwrap();
    let angular = gauss_legendre(64).integrate(-1.0, 1.0, |c| v * (1.0 - c * c) / (1.0 - v * v * c * c));
    v / (1.0 - v * v).sqrt() + 2.0 * PI * radial * angular
}

/// Ω(τ₁, τ₄) at rest: 1 + (2/3)∫|ρ̂|²/k² d³k.
pub fn omega_plus_at_rest(rho: &RadialChargeDensity) -> f64 {
    let kmax = 400.0 / rho.radius();
    let radial = adaptive_scalar(|k| rho.rho_hat(k).powi(2), 0.0, kmax, Default::default()).unwrap();
    1.0 + 2.0 / 3.0 * 4.0 * PI * radial
}

/// Cartesian tensor Gauss–Legendre over |k₁| ≤ B, 0 ≤ k₂, k₃ ≤ B (integrands are even in
/// k₂ and k₃) of f₁₁, c₁₁, c₁₂, c₁₃ at λ for the reference profile and v = 0.3e₁.
pub fn tensor_oracle(lambda: C64) -> [C64; 4] {
    let rho = RadialChargeDensity::reference();
    let table = RhoHatTable::new(&rho, 300.0);
    let (v, nu3) = (0.3f64, (1.0f64 - 0.09).powf(1.5));
    let b = 48.0;
    let gl = gauss_legendre(12);
    let nodes = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
        let panels = ((hi - lo) / 2.0).round() as usize;
        let h = (hi - lo) / panels as f64;
        (0..panels).flat_map(|p| gl.on(lo + p as f64 * h, lo + (p + 1) as f64 * h).collect::<Vec<_>>()).collect()
    };
    let n1 = nodes(-b, b);
    let n23 = nodes(0.0, b);
    let i = C64::new(0.0, 1.0);
    let mut acc = [C64::new(0.0, 0.0); 4];
    for &(k1, w1) in &n1 {
        let mu = lambda + i * (k1 * v);
        for &(k2, w2) in &n23 {
            let mut part = [C64::new(0.0, 0.0); 4];
            for &(k3, w3) in &n23 {
                let kk = k1 * k1 + k2 * k2 + k3 * k3;
                let r = table.eval(kk.sqrt());
                if r == 0.0 {
                    continue;
                }
                let q = w3 * r * r / (kk + mu * mu);
                part[0] += q * nu3 * (k1 * k1 / kk - 1.0) * mu;
                part[1] += q * i * v * k1 * (1.0 - k1 * k1 / kk) * mu;
                part[2] += -q * i * v * k1 * k2 * k2 / kk * mu;
                part[3] += -q * i * v * k1 * k3 * k3 / kk * mu;
            }
            for j in 0..4 {
                acc[j] += part[j] * (4.0 * w1 * w2);
            }
        }
    }
    acc
}

/// ⟨ρ, ∇ ∧ a⟩.
pub fn pair_curl(ch: &GridCharge, a: &SolenoidalField) -> Vec3 {
    let mut s = Vec3::zeros();
    let i = C64::new(0.0, 1.0);
    for ((m, r), c) in ch.grid().modes().iter().zip(ch.rho_hat()).zip(a.coeffs()) {
        let curl = [
            i * (m.k[1] * c[2] - m.k[2] * c[1]),
            i * (m.k[2] * c[0] - m.k[0] * c[2]),
            i * (m.k[0] * c[1] - m.k[1] * c[0]),
        ];
        for j in 0..3 {
            s[j] += r * curl[j].re;
        }
    }
    s * ch.grid().pair_weight()
}

/// ∫₀^T e^{−t}(⟨ρ, e(t)⟩, v ∧ ⟨ρ, ∇ ∧ a(t)⟩) dt along the modified wave group.
pub fn laplace_at_one(ch: &GridCharge, v: &Vec3, f0: &FieldPair, t_end: f64, panels: usize) -> (Vec3, Vec3) {
    let gl = gauss_legendre(16);
    let h = t_end / panels as f64;
    let mut phi = Vec3::zeros();
    let mut psi = Vec3::zeros();
    for p in 0..panels {
        for (t, w) in gl.on(p as f64 * h, (p + 1) as f64 * h) {
            let f = f0.modified_wave_group(v, t);
            let wt = w * (-t).exp();
            phi += ch.pair(&f.e) * wt;
            psi += v.cross(&pair_curl(ch, &f.a)) * wt;
        }
    }
    (phi, psi)
}

/// A single stored mode of `grid`, returned with ‖(1+|x|)f‖ and ‖(1+|x|)f‖ + ‖(1+|x|)∇f‖
/// summed point by point in physical space.
pub fn single_mode_weighted(grid: &Arc<FourierGrid>) -> (SolenoidalField, f64, f64) {
    let idx = grid.modes().iter().position(|m| m.m == [1, 2, 1]).unwrap();
    let m = grid.modes()[idx];
    let mut raw = vec![CZERO3; grid.len()];
    raw[idx] = [C64::new(0.4, -0.2), C64::new(-0.1, 0.3), C64::new(0.2, 0.5)];
    let f = project_solenoidal(grid, &raw);
    let c = f.coeffs()[idx];
    let scale = FT_NORM * grid.dk().powi(3);
    let (mut s0, mut s1) = (0.0, 0.0);
    for i in 0..grid.n() {
        for j in 0..grid.n() {
            for l in 0..grid.n() {
                let x = [grid.coord(i), grid.coord(j), grid.coord(l)];
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let ph = C64::from_polar(1.0, m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2]);
                let w2 = (1.0 + r).powi(2);
                for comp in 0..3 {
                    let val = 2.0 * scale * (c[comp] * ph).re;
                    s0 += w2 * val * val;
                    for d in 0..3 {
                        let dv = 2.0 * scale * (c[comp] * ph * C64::new(0.0, m.k[d])).re;
                        s1 += w2 * dv * dv;
                    }
                }
            }
        }
    }
    let h3 = grid.spacing().powi(3);
    let n0 = (s0 * h3).sqrt();
    (f, n0, n0 + (s1 * h3).sqrt())
}
