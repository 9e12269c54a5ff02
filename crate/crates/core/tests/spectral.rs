mod common;

use std::sync::OnceLock;

use common::oracles::{laplace_at_one, tensor_oracle};
use mlsim::charge::RadialChargeDensity;
use mlsim::error::Error;
use mlsim::fields::{FourierGrid, Vec3};
use mlsim::soliton::{momentum_jacobian, tangent_frame, GridCharge};
use mlsim::spectral::*;
use mlsim::state::PhaseVector;
use mlsim::symplectic::{omega, TransversalProjector};
use num_complex::Complex64 as C64;

fn v03() -> Vec3 {
    Vec3::new(0.3, 0.0, 0.0)
}

fn ctx() -> &'static SpectralContext {
    static CTX: OnceLock<SpectralContext> = OnceLock::new();
    CTX.get_or_init(|| SpectralContext::new(&RadialChargeDensity::reference(), &v03()).unwrap())
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn coefficients_match_cartesian_oracle() {
    let lam = C64::new(1.0, 0.0);
    let c = ctx().coeffs_at(lam).unwrap();
    let [f11, c11, c12, c13] = tensor_oracle(lam);
    assert!(rel(c.f11, f11) < 1e-6, "f11 {} vs {}", c.f11, f11);
    assert!(rel(c.c11, c11) < 1e-6, "c11 {} vs {}", c.c11, c11);
    assert!(rel(c.c12, c12) < 1e-6, "c12 {} vs {}", c.c12, c12);
    assert!(rel(c.c13, c13) < 1e-6);
    assert!((c11 + c12 + c13).norm() < 1e-8 * c11.norm());
    assert!(c.trace_residual() < 1e-10);
}

#[test]
fn coefficients_off_the_real_axis_match_oracle() {
    let lam = C64::new(0.7, 1.3);
    let c = ctx().coeffs_at(lam).unwrap();
    let [f11, c11, ..] = tensor_oracle(lam);
    assert!(rel(c.f11, f11) < 1e-6, "f11 {} vs {}", c.f11, f11);
    assert!(rel(c.c11, c11) < 1e-6, "c11 {} vs {}", c.c11, c11);
}

#[test]
fn velocity_prefactors_vanish_at_rest() {
    let rho = RadialChargeDensity::reference();
    let ctx0 = SpectralContext::new(&rho, &Vec3::zeros()).unwrap();
    let c = ctx0.coeffs_at(C64::new(1.0, 0.0)).unwrap();
    for z in [c.c1, c.c, c.c22, c.f22] {
        assert_eq!(z.norm(), 0.0);
    }
    assert_eq!((c.g1, c.g), (0.0, 0.0));
    let m = ctx0.m_matrix(&c);
    for j in 0..3 {
        assert_eq!(m.matrix[(j, j)], C64::new(1.0, 0.0));
        assert_eq!(m.matrix[(j, j + 3)], C64::new(-1.0, 0.0));
        assert_eq!(m.matrix[(j + 3, j)].norm(), 0.0);
    }
    assert_eq!(m.matrix[(3, 3)], C64::new(1.0, 0.0) - c.f1);
    assert_eq!(m.matrix[(4, 4)], C64::new(1.0, 0.0) - c.f);
    // At rest f₁ and f coincide: the (1 + c²)/2 and (1 − c²) weights average alike.
    assert!(rel(c.f1, c.f) < 1e-12);
}

#[test]
fn determinant_factorizes() {
    for lam in [C64::new(1.0, 0.0), C64::new(0.3, 2.0)] {
        let m = ctx().m_matrix_at(lam).unwrap();
        assert!(m.det_gap < 1e-10, "{lam}: {}", m.det_gap);
    }
    let m = ctx().m_matrix_at(C64::new(0.0, 1.5)).unwrap();
    assert!(m.det_gap < 1e-10);
}

#[test]
fn axis_values_match_off_axis_limit() {
    for w in [1.0, -2.0] {
        let axis = ctx().coeffs_on_axis(w).unwrap();
        let lim = off_axis_limit(ctx(), w, &[1e-2, 1e-3, 1e-4]).unwrap();
        for (a, b) in
            [(axis.c1, lim.c1), (axis.c, lim.c), (axis.f1, lim.f1), (axis.f, lim.f), (axis.d1, lim.d1), (axis.d, lim.d)]
        {
            assert!(rel(b, a) < 1e-5, "omega {w}: {a} vs {b}");
        }
    }
}

#[test]
fn singular_parts_agree_between_routes() {
    for w in [0.5, -1.0, 3.0] {
        let a = ctx().axis_evaluation(w).unwrap();
        assert!(a.route_gap < 1e-10, "omega {w}: {}", a.route_gap);
    }
}

#[test]
fn imaginary_parts_follow_surface_formulas() {
    for w in [0.5, 1.0, 2.0] {
        for s in [1.0, -1.0] {
            let p = ctx().wiener_positivity(s * w).unwrap();
            assert!(p.min_integrand >= 0.0);
            assert!(p.surface_im_d1 > 0.0 && p.surface_im_d > 0.0);
            // Boundary values at −iω are conjugates of those at iω.
            assert!((p.im_d1 - s * p.surface_im_d1).abs() < 1e-10 * p.surface_im_d1, "{p:?}");
            assert!((p.im_d - s * p.surface_im_d).abs() < 1e-10 * p.surface_im_d, "{p:?}");
        }
    }
}

#[test]
fn values_at_zero_match_static_terms() {
    let c = ctx().coeffs_at(C64::new(0.0, 0.0)).unwrap();
    assert!((c.c1 + c.g1).norm() < 1e-10 * c.g1);
    assert!((c.c + c.g).norm() < 1e-10 * c.g);
    assert!(c.f1.norm() < 1e-14 && c.f.norm() < 1e-14);
}

fn extrapolate(h: &[f64], y: &[f64]) -> f64 {
    let ys: Vec<C64> = y.iter().map(|x| C64::from(*x)).collect();
    richardson_limit(h, &ys).re
}

#[test]
fn taylor_closed_forms_match_finite_differences() {
    let t = ctx().taylor_at_zero();
    let hs = [0.04, 0.02, 0.01];
    let samples: Vec<SpectralCoeffs> = hs.iter().map(|h| ctx().coeffs_at(C64::new(*h, 0.0)).unwrap()).collect();
    let fd = |f: &dyn Fn(&SpectralCoeffs, f64) -> f64| {
        let y: Vec<f64> = samples.iter().zip(hs).map(|(s, h)| f(s, h)).collect();
        extrapolate(&hs, &y)
    };
    let j1 = fd(&|s, h| s.f1.re / h);
    let j = fd(&|s, h| s.f.re / h);
    let i1 = fd(&|s, h| (s.c1.re + s.g1) / (h * h));
    let i = fd(&|s, h| (s.c.re + s.g) / (h * h));
    assert!((j1 - t.j1).abs() < 1e-6 * t.j1.abs(), "{j1} vs {}", t.j1);
    assert!((j - t.j).abs() < 1e-6 * t.j.abs(), "{j} vs {}", t.j);
    assert!((i1 - t.i1).abs() < 1e-6 * t.i1.abs(), "{i1} vs {}", t.i1);
    assert!((i - t.i).abs() < 1e-6 * t.i.abs(), "{i} vs {}", t.i);
}

#[test]
fn transverse_denominator_margin_is_positive() {
    let t = ctx().taylor_at_zero();
    let nu = ctx().nu();
    assert!(t.transverse_margin > 0.0);
    assert!((t.transverse_margin - (-t.j + nu * t.i)).abs() < 1e-12 * t.transverse_margin);
    assert!(t.i1 > 0.0 && t.j1 < 0.0);
}

#[test]
fn determinant_scales_like_omega_squared() {
    let t = ctx().taylor_at_zero();
    let b = ctx().b_diag();
    let target1 = -(1.0 - t.j1 + b[0] * t.i1);
    let target = -(1.0 - t.j + b[1] * t.i);
    let mut prev = f64::INFINITY;
    for w in [1e-1, 1e-2] {
        let c = ctx().coeffs_on_axis(w).unwrap();
        let e1 = (c.d1 / (w * w) - target1).norm();
        let e = (c.d / (w * w) - target).norm();
        assert!(e1 < prev);
        prev = e1;
        assert!(e1 < 10.0 * w * w && e < 10.0 * w * w, "omega {w}: {e1} {e}");
    }
}

#[test]
fn static_limit_of_c_is_regular() {
    let mut ratios = Vec::new();
    for w in [1e-1, 1e-2, 1e-3] {
        let c = ctx().coeffs_on_axis(w).unwrap();
        ratios.push(((c.c1 + c.g1) / (w * w)).norm());
    }
    let t = ctx().taylor_at_zero();
    for r in &ratios {
        assert!(*r < 2.0 * t.i1, "{ratios:?}");
    }
    assert!((ratios[2] - t.i1).abs() < 1e-6 * t.i1);
}

#[test]
fn inverse_blocks_and_large_frequency_bound() {
    for w in [5.0, 20.0, 100.0, -50.0] {
        let m = ctx().m_inverse_structure(w).unwrap();
        assert!(m.identity_residual < 1e-8, "{}", m.identity_residual);
        assert!(m.block_gap < 1e-10);
        assert!(m.inverse_residual < 1e-12);
        let s = m.inverse_norm * w.abs();
        assert!(s > 0.5 && s < 2.0, "omega {w}: {s}");
    }
    let m = ctx().m_inverse_structure(0.7).unwrap();
    assert!(m.denominators_at_zero.iter().all(|d| *d > 1.0));
}

#[test]
fn coefficients_are_analytic_off_axis() {
    let z = C64::new(0.5, 1.0);
    let h = 1e-3;
    let at = |l: C64| ctx().coeffs_at(l).unwrap();
    let (xp, xm) = (at(z + h), at(z - h));
    let (yp, ym) = (at(z + C64::new(0.0, h)), at(z - C64::new(0.0, h)));
    for (name, f) in [
        ("c1", (|c: &SpectralCoeffs| c.c1) as fn(&SpectralCoeffs) -> C64),
        ("f", |c: &SpectralCoeffs| c.f),
        ("d1", |c: &SpectralCoeffs| c.d1),
    ] {
        let dx = (f(&xp) - f(&xm)) / (2.0 * h);
        let dy = (f(&yp) - f(&ym)) / (2.0 * h);
        // ∂_y = i ∂_x for an analytic function.
        let res = (dy - C64::new(0.0, 1.0) * dx).norm() / dx.norm();
        assert!(res < 1e-6, "{name}: {res}");
    }
}

#[test]
fn evaluators_reject_bad_points() {
    assert!(matches!(ctx().coeffs_at(C64::new(-0.1, 1.0)), Err(Error::LambdaOutOfRange(_))));
    assert!(matches!(ctx().coeffs_at(C64::new(0.0, 1.0)), Err(Error::LambdaOutOfRange(_))));
    assert!(matches!(ctx().coeffs_on_axis(0.0), Err(Error::ZeroFrequency)));
    let rho = RadialChargeDensity::reference();
    assert!(SpectralContext::new(&rho, &Vec3::new(1.0, 0.0, 0.0)).is_err());
}

/// A resolved grid for comparisons with continuum integrals.
fn resolved() -> GridCharge {
    let grid = FourierGrid::new(64, 3.0).unwrap();
    GridCharge::new(&RadialChargeDensity::reference(), &grid)
}

#[test]
fn grid_static_terms_match_continuum() {
    let ch = resolved();
    let v = v03();
    let t = ctx().taylor_at_zero();
    let b = ctx().b_diag();
    let dm = momentum_jacobian(&ch, &v).unwrap();
    assert!((dm[(0, 0)] - (1.0 - t.j1) / b[0]).abs() < 1e-7);
    assert!((dm[(1, 1)] - (1.0 - t.j) / b[1]).abs() < 1e-7);
    let lin = mlsim::linearized::Linearization::new(&ch, &v, &v).unwrap();
    let g = ctx().g_diag();
    assert!((lin.g[(0, 0)] - g[0]).abs() < 1e-5 * g[0]);
    assert!((lin.g[(2, 2)] - g[2]).abs() < 1e-5 * g[2]);
}

#[test]
fn phi_psi_vanish_on_zero_data() {
    let ch = common::small();
    let z = PhaseVector::zeros(ch.grid());
    let (p, s) = phi_psi(&ch, &v03(), C64::new(1.0, 0.5), &z.fields.e, &z.fields.a).unwrap();
    assert_eq!(p.norm() + s.norm(), 0.0);
    let r = orthogonality_conditions(&ch, &v03(), &z).unwrap();
    assert_eq!(r.first.norm() + r.second.norm(), 0.0);
    assert!(phi_psi(&ch, &v03(), C64::new(0.0, 1.0), &z.fields.e, &z.fields.a).is_err());
}

#[test]
fn phi_psi_are_laplace_transforms_of_the_free_flow() {
    let ch = common::small();
    let v = Vec3::new(0.3, 0.1, 0.0);
    let mut rng = common::rng(21);
    let f0 = common::random_fields(ch.grid(), &mut rng);
    let (phi, psi) = phi_psi(&ch, &v, C64::new(1.0, 0.0), &f0.e, &f0.a).unwrap();
    let (acc_phi, acc_psi) = laplace_at_one(&ch, &v, &f0, 40.0, 200);
    let scale = phi.norm();
    assert!((phi.map(|z| z.re) - acc_phi).amax() < 1e-4 * scale, "{phi:?} vs {acc_phi:?}");
    assert!(phi.map(|z| z.im).amax() < 1e-14 * scale);
    assert!((psi.map(|z| z.re) - acc_psi).amax() < 1e-4 * psi.norm().max(scale), "{psi:?} vs {acc_psi:?}");
}

#[test]
fn orthogonality_residuals_reproduce_symplectic_pairings() {
    let ch = common::small();
    let v = Vec3::new(0.3, -0.2, 0.1);
    let mut rng = common::rng(5);
    for _ in 0..4 {
        let x = common::random_state(ch.grid(), &mut rng);
        let r = orthogonality_conditions(&ch, &v, &x).unwrap();
        let tol = 1e-10 * r.norm;
        assert!((r.first + r.omega_position).amax() < tol, "{r:?}");
        assert!((r.second - r.omega_velocity).amax() < tol, "{r:?}");
    }
}

#[test]
fn projected_states_satisfy_orthogonality_and_tangents_do_not() {
    let ch = common::medium();
    let v = v03();
    let pr = TransversalProjector::new(&ch, &v).unwrap();
    let mut rng = common::rng(8);
    for _ in 0..5 {
        let x = pr.apply(&common::random_state(ch.grid(), &mut rng));
        let r = orthogonality_conditions(&ch, &v, &x).unwrap();
        assert!(!r.flagged(1e-8), "{}", r.relative());
    }
    let frame = tangent_frame(&ch, &v).unwrap();
    // Ω vanishes on pairs within the position block and within the velocity block, so
    // a position tangent violates the second condition only and vice versa.
    let r1 = orthogonality_conditions(&ch, &v, frame.get(0)).unwrap();
    assert!(r1.second.amax() > 1e-3 * r1.norm && r1.first.amax() < 1e-10 * r1.norm);
    let r4 = orthogonality_conditions(&ch, &v, frame.get(3)).unwrap();
    assert!(r4.first.amax() > 1e-3 * r4.norm && r4.second.amax() < 1e-10 * r4.norm);
    assert!(r1.flagged(1e-8) && r4.flagged(1e-8));
    assert!((r4.first[0] + omega(frame.get(3), frame.get(0))).abs() < 1e-10);
}
