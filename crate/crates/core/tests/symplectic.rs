mod common;

use mlsim::fields::Vec3;
use mlsim::soliton::*;
use mlsim::state::PhaseVector;
use mlsim::symplectic::*;
use proptest::prelude::*;

fn sigma0() -> SolitonParams {
    SolitonParams::new(Vec3::new(0.4, -0.2, 0.1), Vec3::new(0.3, 0.0, 0.0)).unwrap()
}

#[test]
fn tangent_vectors_project_to_zero() {
    let ch = common::small();
    let v = Vec3::new(0.3, 0.0, 0.0);
    let pr = TransversalProjector::new(&ch, &v).unwrap();
    for j in 0..6 {
        let x = pr.apply(pr.frame.get(j));
        assert!(x.norm_energy() < 1e-10 * pr.frame.get(j).norm_energy(), "j={j}");
    }
}

#[test]
fn projector_output_is_transversal_and_idempotent() {
    let ch = common::small();
    let v = Vec3::new(0.3, 0.2, 0.0);
    let pr = TransversalProjector::new(&ch, &v).unwrap();
    let mut rng = common::rng(3);
    let x = common::random_state(ch.grid(), &mut rng);
    let px = pr.apply(&x);
    let res = pr.pairings(&px).amax();
    assert!(res < 1e-10 * x.norm_energy(), "{res}");
    let ppx = pr.apply(&px);
    assert!(ppx.sub(&px).norm_energy() < 1e-12 * px.norm_energy());
}

#[test]
fn soliton_is_a_fixed_point() {
    let ch = common::small();
    let s = sigma0();
    let y = soliton_state(&ch, &s).unwrap();
    let p = project_to_manifold(&ch, &y).unwrap();
    assert!(p.iterations <= 2);
    assert!((p.sigma.b - s.b).norm() < 1e-10);
    assert!((p.sigma.v - s.v).norm() < 1e-10);
    assert!(p.z.norm_energy() < 1e-9 * y.norm_energy());
}

#[test]
fn projection_recovers_sigma_from_transversal_perturbation() {
    let ch = common::small();
    let s = sigma0();
    let pr = TransversalProjector::new(&ch, &s.v).unwrap();
    let mut rng = common::rng(11);
    let raw = common::random_state(ch.grid(), &mut rng);
    let mut z = pr.apply(&raw);
    z.scale(1e-3 / z.norm_energy());
    let y = from_moving_frame(&soliton_state(&ch, &SolitonParams { b: Vec3::zeros(), v: s.v }).unwrap().add(&z), &s.b);
    let p = project_to_manifold(&ch, &y).unwrap();
    assert!((p.sigma.b - s.b).norm() < 1e-9, "{}", p.sigma.b - s.b);
    assert!((p.sigma.v - s.v).norm() < 1e-9, "{}", p.sigma.v - s.v);
    assert!(p.z.sub(&z).norm_energy() < 1e-8 * z.norm_energy());
    let r = projection_residual(&ch, &y, &p.sigma).unwrap();
    assert!(r.iter().all(|x| x.abs() < 1e-10 * y.norm_energy()));
}

#[test]
fn projection_is_stable_under_reprojection() {
    let ch = common::small();
    let mut rng = common::rng(5);
    let mut y = soliton_state(&ch, &sigma0()).unwrap();
    let mut bump = common::random_state(ch.grid(), &mut rng);
    bump.scale(0.01 / bump.norm_energy());
    y.axpy(1.0, &bump);
    let p1 = project_to_manifold(&ch, &y).unwrap();
    let y2 = from_moving_frame(
        &soliton_state(&ch, &SolitonParams { b: Vec3::zeros(), v: p1.sigma.v }).unwrap().add(&p1.z),
        &p1.sigma.b,
    );
    let p2 = project_to_manifold(&ch, &y2).unwrap();
    assert!((p2.sigma.b - p1.sigma.b).norm() < 1e-9);
    assert!((p2.sigma.v - p1.sigma.v).norm() < 1e-9);
}

#[test]
fn far_state_does_not_converge_silently() {
    let ch = common::small();
    let mut y = PhaseVector::zeros(ch.grid());
    y.p = Vec3::new(1e6, 0.0, 0.0);
    // v(Y) is within 1e-12 of light speed.
    assert!(project_to_manifold(&ch, &y).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn omega_is_antisymmetric(seed in 0u64..1000) {
        let ch = common::small();
        let mut rng = common::rng(seed);
        let a = common::random_state(ch.grid(), &mut rng);
        let b = common::random_state(ch.grid(), &mut rng);
        let s = omega(&a, &b) + omega(&b, &a);
        prop_assert!(s.abs() < 1e-12 * a.norm_l2() * b.norm_l2());
    }

    #[test]
    fn projection_commutes_with_translation(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -1.0f64..1.0, seed in 0u64..1000) {
        let ch = common::small();
        let mut rng = common::rng(seed);
        let mut y = soliton_state(&ch, &sigma0()).unwrap();
        let mut bump = common::random_state(ch.grid(), &mut rng);
        bump.scale(0.01 / bump.norm_energy());
        y.axpy(1.0, &bump);
        let a = Vec3::new(ax, ay, az);
        let shifted = from_moving_frame(&y, &a);
        let p = project_to_manifold(&ch, &y).unwrap();
        let ps = project_to_manifold(&ch, &shifted).unwrap();
        prop_assert!((ps.sigma.b - p.sigma.b - a).norm() < 1e-8);
        prop_assert!((ps.sigma.v - p.sigma.v).norm() < 1e-8);
    }
}
