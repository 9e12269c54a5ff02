mod common;

use mlsim::dynamics::*;
use mlsim::fields::Vec3;
use mlsim::soliton::*;
use mlsim::state::PhaseVector;
use mlsim::symplectic::omega;

#[test]
fn rest_energy_and_free_particle() {
    let ch = common::small();
    let g = ch.grid();
    let y = PhaseVector::zeros(g);
    assert_eq!(hamiltonian(&ch, &y), 1.0);
    let d = rhs(&ch, &y);
    assert_eq!(d.norm_energy(), 0.0);
    let y = PhaseVector::particle(g, Vec3::zeros(), Vec3::x());
    assert!((hamiltonian(&ch, &y) - 2f64.sqrt()).abs() < 1e-15);
}

/// At S(σ) the vector field is the manifold flow: q̇ = v, Ṗ = 0, Ḟ = −(v·∇)F.
#[test]
fn rhs_at_soliton_is_transport() {
    let ch = common::medium();
    let s = SolitonParams::new(Vec3::new(0.5, 0.2, -0.3), Vec3::new(0.3, -0.1, 0.2)).unwrap();
    let y = soliton_state(&ch, &s).unwrap();
    let d = rhs(&ch, &y);
    assert!((d.q - s.v).norm() < 1e-12);
    assert!(d.p.norm() < 1e-12, "{}", d.p);
    let mut expect = y.fields.clone();
    expect.e = y.fields.e.directional_derivative(&-s.v);
    expect.a = y.fields.a.directional_derivative(&-s.v);
    let err = d.fields.sub(&expect).norm_f();
    assert!(err < 1e-10 * expect.norm_f(), "{err}");
}

/// dH(Y)[X] = Ω(Ẏ, X), with dH by central differences.
#[test]
fn rhs_is_the_hamiltonian_vector_field() {
    let ch = common::small();
    let mut rng = common::rng(42);
    for _ in 0..3 {
        let y = common::random_state(ch.grid(), &mut rng);
        let x = common::random_state(ch.grid(), &mut rng);
        let h = 1e-5;
        let mut yp = y.clone();
        yp.axpy(h, &x);
        let mut ym = y.clone();
        ym.axpy(-h, &x);
        let fd = (hamiltonian(&ch, &yp) - hamiltonian(&ch, &ym)) / (2.0 * h);
        let exact = omega(&rhs(&ch, &y), &x);
        assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
    }
}

#[test]
fn evolve_keeps_soliton_and_energy() {
    let ch = common::medium();
    let s = SolitonParams::new(Vec3::zeros(), Vec3::new(0.3, 0.0, 0.0)).unwrap();
    let y0 = soliton_state(&ch, &s).unwrap();
    let t = 2.0;
    let tr = evolve(&ch, &y0, t, 0.01, &EvolveOptions::default()).unwrap();
    let y = &tr.final_state;
    assert!((y.q - s.v * t).norm() < 1e-8);
    let exact = soliton_state(&ch, &SolitonParams { b: s.v * t, v: s.v }).unwrap();
    let err = y.fields.sub(&exact.fields).norm_f();
    assert!(err < 1e-8 * exact.fields.norm_f(), "{err}");
    assert!(tr.max_energy_drift < 1e-10);
    assert!(tr.max_speed < 1.0);
}

#[test]
fn forward_then_backward_returns() {
    let ch = common::small();
    let mut rng = common::rng(7);
    let mut y0 = soliton_state(&ch, &SolitonParams::new(Vec3::zeros(), Vec3::new(0.2, 0.1, 0.0)).unwrap()).unwrap();
    let mut bump = common::random_state(ch.grid(), &mut rng);
    bump.scale(0.05 / bump.norm_energy());
    y0.axpy(1.0, &bump);
    let opts = EvolveOptions::default();
    let fwd = evolve(&ch, &y0, 2.0, 0.01, &opts).unwrap();
    let back = evolve(&ch, &fwd.final_state, -2.0, 0.01, &opts).unwrap();
    let err = back.final_state.sub(&y0).norm_energy();
    assert!(err < 1e-8 * y0.norm_energy(), "{err}");
}

#[test]
fn fourth_order_convergence() {
    let ch = common::small();
    let mut rng = common::rng(9);
    let mut y0 = PhaseVector::particle(ch.grid(), Vec3::zeros(), Vec3::new(0.5, 0.0, 0.2));
    y0.fields = common::random_fields(ch.grid(), &mut rng);
    y0.fields.scale(0.3 / y0.fields.norm_f());
    let opts = EvolveOptions::default();
    let t = 1.0;
    let reference = evolve(&ch, &y0, t, 0.0025, &opts).unwrap().final_state;
    let errs: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&dt| evolve(&ch, &y0, t, dt, &opts).unwrap().final_state.sub(&reference).norm_energy())
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((8.0..32.0).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn wrap_guard_rejects_long_runs() {
    let ch = common::small();
    let y0 = PhaseVector::zeros(ch.grid());
    let err = evolve(&ch, &y0, 100.0, 0.01, &EvolveOptions::default()).unwrap_err();
    assert!(matches!(err, mlsim::Error::WrapGuard { .. }));
}

#[test]
fn huge_step_is_flagged() {
    let ch = common::small();
    let mut rng = common::rng(1);
    let mut y0 = PhaseVector::particle(ch.grid(), Vec3::zeros(), Vec3::new(3.0, 0.0, 0.0));
    y0.fields = common::random_fields(ch.grid(), &mut rng);
    let opts = EvolveOptions { energy_tol: 1e-12, output_stride: 1, ..Default::default() };
    let err = evolve(&ch, &y0, 5.0, 1.0, &opts).unwrap_err();
    assert!(matches!(err, mlsim::Error::StepUnstable { .. }));
}
