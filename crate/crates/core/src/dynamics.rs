//! The nonlinear Maxwell–Lorentz system with spectrally exact particle coupling,
//! its Hamiltonian, and a Lawson RK4 integrator.

use nalgebra::Vector6;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fields::{phase_of, project_mode, FieldPair, FourierGrid, Vec3, WavePropagator};
use crate::soliton::{soliton_state, GridCharge, SolitonParams};
use crate::state::PhaseVector;
use crate::symplectic::{projection_residual, residual_jacobian};

/// Kinetic momentum p = P − A_ρ(q).
pub fn kinetic_momentum(charge: &GridCharge, y: &PhaseVector) -> Vec3 {
    let tables = charge.grid().phase_tables(-y.q);
    y.p - smeared_potential_at(charge, y, &tables)
}

/// q̇ = p/√(1+p²).
pub fn particle_velocity(charge: &GridCharge, y: &PhaseVector) -> Vec3 {
    let p = kinetic_momentum(charge, y);
    p / (1.0 + p.norm_squared()).sqrt()
}

/// ½‖E‖² + ½‖∇A‖² + √(1 + (P − A_ρ(q))²).
pub fn hamiltonian(charge: &GridCharge, y: &PhaseVector) -> f64 {
    let p = kinetic_momentum(charge, y);
    y.fields.energy() + (1.0 + p.norm_squared()).sqrt()
}

/// The coupling part of the vector field: (−Π̂ρ̂e^{−ik·q}q̇, 0, q̇, Ṗ).
pub fn coupling_rhs(charge: &GridCharge, y: &PhaseVector) -> PhaseVector {
    let mut out = PhaseVector::zeros(charge.grid());
    coupling_rhs_into(charge, y, &mut out);
    out
}

/// [`coupling_rhs`] written into `out`, overwriting every component.
pub fn coupling_rhs_into(charge: &GridCharge, y: &PhaseVector, out: &mut PhaseVector) {
    let grid = charge.grid();
    let tables = grid.phase_tables(-y.q);
    let n = grid.n();
    let p = y.p - smeared_potential_at(charge, y, &tables);
    let qdot = p / (1.0 + p.norm_squared()).sqrt();
    let mut pdot = [0.0; 3];
    let src = out.fields.e.coeffs_mut();
    for (i, m) in grid.modes().iter().enumerate() {
        let w = phase_of(&tables, m, n) * charge.rho_hat()[i];
        // Ṗ = Re Σ ρ̂e^{ik·q}(ik)(q̇·Â)
        let a = &y.fields.a.coeffs()[i];
        let va = a[0] * qdot[0] + a[1] * qdot[1] + a[2] * qdot[2];
        let t = w * va * C64::new(0.0, 1.0);
        for j in 0..3 {
            pdot[j] += m.k[j] * t.re;
        }
        let c = -w.conj();
        let raw = [c * qdot[0], c * qdot[1], c * qdot[2]];
        src[i] = project_mode(&m.k, m.k2, &raw);
    }
    for c in out.fields.a.coeffs_mut() {
        *c = [C64::new(0.0, 0.0); 3];
    }
    out.q = qdot;
    out.p = Vec3::from(pdot) * grid.pair_weight();
}

/// A_ρ(q) = Re Σ ρ̂ e^{ik·q} Â.
fn smeared_potential_at(charge: &GridCharge, y: &PhaseVector, tables: &[Vec<C64>; 3]) -> Vec3 {
    let n = charge.grid().n();
    let mut s = [0.0; 3];
    for ((a, r), m) in y.fields.a.coeffs().iter().zip(charge.rho_hat()).zip(charge.grid().modes()) {
        let w = phase_of(tables, m, n) * r;
        for i in 0..3 {
            s[i] += (w * a[i]).re;
        }
    }
    Vec3::from(s) * charge.grid().pair_weight()
}

/// The full vector field: Ė = −ΔA − Π(ρ(x−q)q̇), Ȧ = −E, q̇, Ṗ = [∇(q̇·A)]_ρ(q).
pub fn rhs(charge: &GridCharge, y: &PhaseVector) -> PhaseVector {
    let mut out = coupling_rhs(charge, y);
    let grid = charge.grid().clone();
    let (de, da) = (&mut out.fields.e, &mut out.fields.a);
    let (de, da) = (de.coeffs_mut(), da.coeffs_mut());
    for (i, m) in grid.modes().iter().enumerate() {
        let e = &y.fields.e.coeffs()[i];
        let a = &y.fields.a.coeffs()[i];
        for c in 0..3 {
            de[i][c] += a[c] * m.k2;
            da[i][c] = -e[c];
        }
    }
    out
}

/// The vector field seen in a frame moving with velocity w: rhs plus the transport
/// (w·∇) on the fields and −w on the position.
pub fn rhs_moving(charge: &GridCharge, z: &PhaseVector, w: &Vec3) -> PhaseVector {
    let mut out = rhs(charge, z);
    out.fields
        .axpy(1.0, &FieldPair { e: z.fields.e.directional_derivative(w), a: z.fields.a.directional_derivative(w) });
    out.q -= w;
    out
}

/// σ̇ = (ḃ, v̇) for the projection σ of Y, from differentiating Ω(Y − S(σ), τⱼ(σ)) = 0
/// along the flow. With σ̇ = (v, 0) + δ the equation for δ only involves the
/// moving-frame vector field at Y minus its value at S(σ), which is O(Z); the
/// difference-quotient Jacobian then never multiplies O(1) data.
pub fn modulation_rates(
    charge: &GridCharge,
    y: &PhaseVector,
    sigma: &SolitonParams,
    fd_step: f64,
) -> Result<SolitonParams> {
    let jac = residual_jacobian(charge, y, sigma, fd_step)?;
    let s = soliton_state(charge, sigma)?;
    let dz = rhs_moving(charge, y, &sigma.v).sub(&rhs_moving(charge, &s, &sigma.v));
    // The residual is affine in Y; its linear part applied to dz:
    let r1 = projection_residual(charge, &dz, sigma)?;
    let r0 = projection_residual(charge, &PhaseVector::zeros(charge.grid()), sigma)?;
    let load = -Vector6::from_fn(|j, _| r1[j] - r0[j]);
    let delta = jac.lu().solve(&load).ok_or(Error::NoConvergence { iterations: 0, residual: f64::NAN })?;
    Ok(SolitonParams {
        b: sigma.v + Vec3::new(delta[0], delta[1], delta[2]),
        v: Vec3::new(delta[3], delta[4], delta[5]),
    })
}

/// 0.01·min(1, 2L/(πn)).
pub fn default_dt(grid: &FourierGrid) -> f64 {
    0.01 * (2.0 * grid.half_length() / (std::f64::consts::PI * grid.n() as f64)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub q: Vec3,
    pub p: Vec3,
    pub qdot: Vec3,
    pub energy: f64,
    pub field_energy: f64,
    pub transversality: f64,
}

pub fn diagnostics(charge: &GridCharge, t: f64, y: &PhaseVector) -> Diagnostics {
    let p = kinetic_momentum(charge, y);
    Diagnostics {
        t,
        q: y.q,
        p: y.p,
        qdot: p / (1.0 + p.norm_squared()).sqrt(),
        energy: y.fields.energy() + (1.0 + p.norm_squared()).sqrt(),
        field_energy: y.fields.energy(),
        transversality: y.fields.e.transversality_residual().max(y.fields.a.transversality_residual()),
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Steps between diagnostics samples.
    pub output_stride: usize,
    /// Keep the state at every output time.
    pub keep_states: bool,
    /// Largest admissible |t_final|.
    pub wrap_limit: Option<f64>,
    /// Relative energy drift that aborts the run.
    pub energy_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { output_stride: 10, keep_states: false, wrap_limit: None, energy_tol: 1e-4 }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub diagnostics: Vec<Diagnostics>,
    pub states: Vec<(f64, PhaseVector)>,
    pub final_state: PhaseVector,
    pub max_energy_drift: f64,
    pub max_speed: f64,
}

/// Lawson RK4 for Ẏ = LY + N(Y) with L the free wave generator.
pub struct LawsonStepper<'a> {
    charge: &'a GridCharge,
    dt: f64,
    half: WavePropagator,
    work: LawsonWork,
}

impl<'a> LawsonStepper<'a> {
    pub fn new(charge: &'a GridCharge, dt: f64) -> Self {
        Self {
            charge,
            dt,
            half: WavePropagator::new(charge.grid(), &Vec3::zeros(), 0.5 * dt),
            work: LawsonWork::new(charge.grid()),
        }
    }

    pub fn step(&mut self, y: &mut PhaseVector) {
        let charge = self.charge;
        lawson_rk4_step(y, self.dt, &self.half, &mut self.work, |s, out| coupling_rhs_into(charge, s, out));
    }
}

/// Scratch vectors for [`lawson_rk4_step`], reused across steps.
#[derive(Debug, Clone)]
pub struct LawsonWork {
    yh: PhaseVector,
    k: PhaseVector,
    s: PhaseVector,
}

impl LawsonWork {
    pub fn new(grid: &std::sync::Arc<FourierGrid>) -> Self {
        Self { yh: PhaseVector::zeros(grid), k: PhaseVector::zeros(grid), s: PhaseVector::zeros(grid) }
    }
}

/// One Lawson RK4 step for Ẏ = LY + N(Y), with `half` = e^{Lh/2} acting on the fields
/// (L vanishes on the particle part). `n(y, out)` must overwrite `out`.
pub fn lawson_rk4_step<N>(y: &mut PhaseVector, h: f64, half: &WavePropagator, work: &mut LawsonWork, mut n: N)
where
    N: FnMut(&PhaseVector, &mut PhaseVector),
{
    let LawsonWork { yh, k, s } = work;
    // Y₊ = e^{Lh/2}[e^{Lh/2}Y + h/6(e^{Lh/2}a + 2b + 2c)] + h/6·d
    yh.copy_from(y);
    half.apply(&mut yh.fields);
    n(y, k);
    half.apply(&mut k.fields);
    s.set_axpy(yh, 0.5 * h, k);
    y.set_axpy(yh, h / 6.0, k);
    n(s, k);
    s.set_axpy(yh, 0.5 * h, k);
    y.axpy(h / 3.0, k);
    n(s, k);
    s.set_axpy(yh, h, k);
    y.axpy(h / 3.0, k);
    half.apply(&mut s.fields);
    n(s, k);
    half.apply(&mut y.fields);
    y.axpy(h / 6.0, k);
}

/// Integrates to `t_final` (either sign), calling `observer` at t = 0 and every
/// `output_stride` steps.
pub fn evolve_with<F>(
    charge: &GridCharge,
    y0: &PhaseVector,
    t_final: f64,
    dt: f64,
    opts: &EvolveOptions,
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(&Diagnostics, &PhaseVector) -> Result<()>,
{
    if !(dt > 0.0) || !t_final.is_finite() {
        return Err(Error::Config(format!("invalid time step {dt} or final time {t_final}")));
    }
    let limit = opts.wrap_limit.unwrap_or(charge.grid().half_length());
    if t_final.abs() > limit {
        return Err(Error::WrapGuard { t_final, limit });
    }
    let steps = (t_final.abs() / dt).round().max(1.0) as usize;
    let h = t_final / steps as f64;
    let mut stepper = LawsonStepper::new(charge, h);
    let stride = opts.output_stride.max(1);
    let mut y = y0.clone();
    let d0 = diagnostics(charge, 0.0, &y);
    let mut out = Trajectory {
        diagnostics: vec![d0],
        states: Vec::new(),
        final_state: y0.clone(),
        max_energy_drift: 0.0,
        max_speed: d0.qdot.norm(),
    };
    observer(&d0, &y)?;
    if opts.keep_states {
        out.states.push((0.0, y.clone()));
    }
    for s in 1..=steps {
        stepper.step(&mut y);
        if s % stride == 0 || s == steps {
            let t = s as f64 * h;
            let d = diagnostics(charge, t, &y);
            let drift = ((d.energy - d0.energy) / d0.energy).abs();
            if !drift.is_finite() || drift > opts.energy_tol {
                return Err(Error::StepUnstable { t, drift });
            }
            let speed = d.qdot.norm();
            if speed >= 1.0 {
                return Err(Error::StepUnstable { t, drift });
            }
            out.max_energy_drift = out.max_energy_drift.max(drift);
            out.max_speed = out.max_speed.max(speed);
            out.diagnostics.push(d);
            observer(&d, &y)?;
            if opts.keep_states {
                out.states.push((t, y.clone()));
            }
        }
    }
    out.final_state = y;
    Ok(out)
}

pub fn evolve(
    charge: &GridCharge,
    y0: &PhaseVector,
    t_final: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    evolve_with(charge, y0, t_final, dt, opts, |_, _| Ok(()))
}
