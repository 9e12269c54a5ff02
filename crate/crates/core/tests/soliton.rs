mod common;

use mlsim::fields::Vec3;
use mlsim::soliton::*;
use mlsim::symplectic::*;

#[test]
fn stationary_equations_hold_on_the_grid() {
    let ch = common::medium();
    for vx in [0.0, 0.3, 0.6, 0.9] {
        let r = stationary_residual(&ch, &Vec3::new(vx, 0.0, 0.0)).unwrap();
        assert!(r.max() < 1e-12, "v={vx}: {r:?}");
    }
    let r = stationary_residual(&ch, &Vec3::new(0.2, -0.3, 0.4)).unwrap();
    assert!(r.max() < 1e-12, "{r:?}");
}

#[test]
fn velocity_at_light_speed_is_rejected() {
    let ch = common::small();
    assert!(soliton_fields(&ch, &Vec3::new(1.0, 0.0, 0.0)).is_err());
    assert!(SolitonParams::new(Vec3::zeros(), Vec3::new(0.0, 0.8, 0.7)).is_err());
}

#[test]
fn momentum_at_rest_is_zero() {
    let ch = common::small();
    assert_eq!(soliton_momentum(&ch, &Vec3::zeros()).unwrap(), Vec3::zeros());
}

#[test]
fn wrong_fields_give_large_residual() {
    let ch = common::small();
    let v = Vec3::new(0.3, 0.0, 0.0);
    let mut f = soliton_fields(&ch, &v).unwrap();
    f.e.scale(1.1);
    let p = soliton_momentum(&ch, &v).unwrap();
    assert!(stationary_residual_of(&ch, &v, &f, &p).transport > 1e-3);
}

/// Tangent vectors against central differences of σ ↦ S(σ) in the moving frame.
#[test]
fn tangent_frame_matches_finite_differences() {
    let ch = common::small();
    let v = Vec3::new(0.3, 0.1, -0.2);
    let frame = tangent_frame(&ch, &v).unwrap();
    let h = 1e-4;
    for j in 0..6 {
        let mut xp = [0.0, 0.0, 0.0, v[0], v[1], v[2]];
        let mut xm = xp;
        xp[j] += h;
        xm[j] -= h;
        let sp = soliton_state(&ch, &SolitonParams::from_array(&xp)).unwrap();
        let sm = soliton_state(&ch, &SolitonParams::from_array(&xm)).unwrap();
        let fd = sp.sub(&sm).scaled(0.5 / h);
        let err = fd.sub(frame.get(j)).norm_energy();
        let scale = frame.get(j).norm_energy();
        assert!(err < 1e-6 * scale, "j={j}: {err} vs {scale}");
    }
}

#[test]
fn momentum_jacobian_matches_finite_differences() {
    let ch = common::small();
    let v = Vec3::new(-0.4, 0.2, 0.1);
    let d = momentum_jacobian(&ch, &v).unwrap();
    let h = 1e-5;
    for j in 0..3 {
        let mut vp = v;
        let mut vm = v;
        vp[j] += h;
        vm[j] -= h;
        let fd = (soliton_momentum(&ch, &vp).unwrap() - soliton_momentum(&ch, &vm).unwrap()) / (2.0 * h);
        assert!((fd - d.column(j)).norm() < 1e-8, "{fd} vs {}", d.column(j));
    }
}

#[test]
fn omega_matrix_has_block_structure() {
    let ch = common::medium();
    for vx in [0.0, 0.3, 0.6, 0.9] {
        let om = omega_matrix(&ch, &Vec3::new(vx, 0.0, 0.0)).unwrap();
        assert!(om.zero_block_residual < 1e-10, "{}", om.zero_block_residual);
        assert!(om.antisymmetry_residual < 1e-12);
        assert!(om.plus_eigenvalues[0] > 0.0);
        assert!((om.plus - om.plus.transpose()).amax() < 1e-12);
    }
}

#[test]
fn omega_of_particle_pair_is_one() {
    let ch = common::small();
    let g = ch.grid();
    let y1 = mlsim::state::PhaseVector::particle(g, Vec3::x(), Vec3::zeros());
    let y2 = mlsim::state::PhaseVector::particle(g, Vec3::zeros(), Vec3::x());
    assert_eq!(omega(&y1, &y2), 1.0);
    assert_eq!(omega(&y1, &y1), 0.0);
}

/// Ω(τ₁, τ₄) at rest equals 1 + (2/3)∫|ρ̂|²/k² d³k; the integral by radial quadrature.
#[test]
fn omega_plus_at_rest_matches_radial_quadrature() {
    use mlsim::charge::RadialChargeDensity;
    use mlsim::fields::FourierGrid;
    let rho = RadialChargeDensity::reference();
    let grid = FourierGrid::new(64, 3.0).unwrap();
    let ch = GridCharge::new(&rho, &grid);
    let om = omega_matrix(&ch, &Vec3::zeros()).unwrap();
    let expected = common::oracles::omega_plus_at_rest(&rho);
    for j in 0..3 {
        let got = om.plus[(j, j)];
        assert!((got - expected).abs() < 1e-6 * expected, "{got} vs {expected}");
    }
}

/// P_v − γv = ∫|ρ̂|²(v − (k·v)k/k²)/(k² − (k·v)²) d³k; with v = ve₁ and c = cos θ the
/// k² factors cancel, leaving 2π∫|ρ̂|²dk · ∫₋₁¹ v(1 − c²)/(1 − v²c²) dc.
#[test]
fn momentum_matches_continuum_quadrature() {
    use mlsim::charge::RadialChargeDensity;
    use mlsim::fields::FourierGrid;
    let rho = RadialChargeDensity::reference();
    let grid = FourierGrid::new(64, 3.0).unwrap();
    let ch = GridCharge::new(&rho, &grid);
    let v = 0.3;
    let expect = common::oracles::momentum_continuum(&rho, v);
    let p = soliton_momentum(&ch, &Vec3::new(v, 0.0, 0.0)).unwrap();
    assert!((p[0] - expect).abs() < 1e-6 * expect, "{} vs {expect}", p[0]);
    assert!(p[1].abs() < 1e-12 && p[2].abs() < 1e-12);
}
