//! The linearization A_{v,w} at a soliton, its quadratic Hamiltonian, and the frozen
//! linear flow Ẋ = A_{v,v}X.

use nalgebra::{Matrix3, Vector6};
use num_complex::Complex64 as C64;

use crate::dynamics::{lawson_rk4_step, LawsonWork};
use crate::error::{Error, Result};
use crate::fields::{project_mode, Vec3, WavePropagator};
use crate::soliton::{b_matrix, check_velocity, tangent_frame, GridCharge, TangentFrame};
use crate::state::PhaseVector;
use crate::symplectic::{omega, TransversalProjector};

/// A_{v,w} with the v-dependent coefficients precomputed.
#[derive(Debug, Clone)]
pub struct Linearization<'a> {
    charge: &'a GridCharge,
    pub v: Vec3,
    pub w: Vec3,
    /// B_v = γ⁻¹(I − v⊗v).
    pub bv: Matrix3<f64>,
    /// The position stiffness from ⟨·∇ρ, ∇(v·A_v)⟩.
    pub g: Matrix3<f64>,
}

impl<'a> Linearization<'a> {
    pub fn new(charge: &'a GridCharge, v: &Vec3, w: &Vec3) -> Result<Self> {
        check_velocity(v)?;
        let grid = charge.grid();
        let v2 = v.norm_squared();
        let mut g = Matrix3::zeros();
        for (m, r) in grid.modes().iter().zip(charge.rho_hat()) {
            let kv = m.k[0] * v[0] + m.k[1] * v[1] + m.k[2] * v[2];
            let d0 = m.k2 - kv * kv;
            let c = r * r * (m.k2 * v2 - kv * kv) / (m.k2 * d0);
            for l in 0..3 {
                for j in 0..3 {
                    g[(l, j)] += c * m.k[l] * m.k[j];
                }
            }
        }
        Ok(Self { charge, v: *v, w: *w, bv: b_matrix(v), g: g * grid.pair_weight() })
    }

    /// The bounded ρ-coupling part of A_{v,w}: everything except the modified wave
    /// generator ((w·∇)e − Δa, −e + (w·∇)a).
    pub fn coupling(&self, x: &PhaseVector) -> PhaseVector {
        let mut out = PhaseVector::zeros(self.charge.grid());
        self.coupling_into(x, &mut out);
        out
    }

    /// [`Self::coupling`] written into `out`, overwriting every component.
    pub fn coupling_into(&self, x: &PhaseVector, out: &mut PhaseVector) {
        let grid = self.charge.grid();
        let s_a = self.charge.pair(&x.fields.a);
        let dq = self.bv * (x.p - s_a);
        let v = self.v;
        for c in out.fields.a.coeffs_mut() {
            *c = [C64::new(0.0, 0.0); 3];
        }
        let mut force = [0.0; 3];
        {
            let de = out.fields.e.coeffs_mut();
            for (i, (m, r)) in grid.modes().iter().zip(self.charge.rho_hat()).enumerate() {
                let a = &x.fields.a.coeffs()[i];
                // ⟨ρ, ∇(v·a)⟩
                let va = a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
                let t = (C64::new(0.0, 1.0) * va).re * r;
                for j in 0..3 {
                    force[j] += m.k[j] * t;
                }
                // Π[−ρ B_v(π − ⟨ρ,a⟩) + i(k·r)ρ v]
                let kr = m.k[0] * x.q[0] + m.k[1] * x.q[1] + m.k[2] * x.q[2];
                let ikr = C64::new(0.0, kr * r);
                let raw = [ikr * v[0] - dq[0] * r, ikr * v[1] - dq[1] * r, ikr * v[2] - dq[2] * r];
                de[i] = project_mode(&m.k, m.k2, &raw);
            }
        }
        out.q = dq;
        out.p = Vec3::from(force) * grid.pair_weight() - self.g * x.q;
    }

    /// A_{v,w}X.
    pub fn apply(&self, x: &PhaseVector) -> PhaseVector {
        let mut out = self.coupling(x);
        let w = self.w;
        let grid = self.charge.grid().clone();
        let de = out.fields.e.coeffs_mut();
        for (i, m) in grid.modes().iter().enumerate() {
            let e = &x.fields.e.coeffs()[i];
            let a = &x.fields.a.coeffs()[i];
            let ikw = C64::new(0.0, m.k[0] * w[0] + m.k[1] * w[1] + m.k[2] * w[2]);
            for c in 0..3 {
                de[i][c] += ikw * e[c] + a[c] * m.k2;
            }
        }
        let da = out.fields.a.coeffs_mut();
        for (i, m) in grid.modes().iter().enumerate() {
            let e = &x.fields.e.coeffs()[i];
            let a = &x.fields.a.coeffs()[i];
            let ikw = C64::new(0.0, m.k[0] * w[0] + m.k[1] * w[1] + m.k[2] * w[2]);
            for c in 0..3 {
                da[i][c] = -e[c] + ikw * a[c];
            }
        }
        out
    }

    /// 𝓗_{v,w}(X).
    pub fn hamiltonian(&self, x: &PhaseVector) -> f64 {
        let f = &x.fields;
        let grid = self.charge.grid();
        let s_a = self.charge.pair(&f.a);
        let mut cross = 0.0;
        for (i, (m, r)) in grid.modes().iter().zip(self.charge.rho_hat()).enumerate() {
            let a = &f.a.coeffs()[i];
            let va = a[0] * self.v[0] + a[1] * self.v[1] + a[2] * self.v[2];
            let kr = m.k[0] * x.q[0] + m.k[1] * x.q[1] + m.k[2] * x.q[2];
            cross += r * kr * va.im;
        }
        cross *= grid.pair_weight();
        let bpi = self.bv * x.p;
        f.energy()
            + f.a.inner(&f.e.directional_derivative(&self.w))
            + 0.5 * s_a.dot(&(self.bv * s_a))
            + 0.5 * x.p.dot(&bpi)
            + cross
            - bpi.dot(&s_a)
            + 0.5 * x.q.dot(&(self.g * x.q))
    }
}

pub fn apply_linearized(charge: &GridCharge, v: &Vec3, w: &Vec3, x: &PhaseVector) -> Result<PhaseVector> {
    Ok(Linearization::new(charge, v, w)?.apply(x))
}

pub fn linearized_hamiltonian(charge: &GridCharge, v: &Vec3, w: &Vec3, x: &PhaseVector) -> Result<f64> {
    Ok(Linearization::new(charge, v, w)?.hamiltonian(x))
}

/// |Ω(AX₁, X₂) + Ω(X₁, AX₂)| / (‖X₁‖‖X₂‖).
pub fn check_skew_symmetry(charge: &GridCharge, v: &Vec3, w: &Vec3, x1: &PhaseVector, x2: &PhaseVector) -> Result<f64> {
    let lin = Linearization::new(charge, v, w)?;
    let s = omega(&lin.apply(x1), x2) + omega(x1, &lin.apply(x2));
    Ok(s.abs() / (x1.norm_l2() * x2.norm_l2()))
}

#[derive(Debug, Clone)]
pub struct FrozenOptions {
    /// δ in the decay norm ‖·‖_{−2−δ}.
    pub delta: f64,
    /// Steps between samples.
    pub sample_stride: usize,
    /// Compute the weighted norm at each sample.
    pub weighted_norms: bool,
    pub wrap_limit: Option<f64>,
    /// Relative 𝓗_{v,v} drift that aborts the run.
    pub energy_tol: f64,
}

impl Default for FrozenOptions {
    fn default() -> Self {
        Self { delta: 0.25, sample_stride: 50, weighted_norms: true, wrap_limit: None, energy_tol: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FrozenSample {
    pub t: f64,
    /// ‖X(t)‖_{−2−δ}; NaN when not requested.
    pub decay_norm: f64,
    pub energy_norm: f64,
    pub hamiltonian: f64,
    /// Ω(τₗ, X(t)).
    pub secular: [f64; 6],
}

#[derive(Debug, Clone)]
pub struct FrozenTrajectory {
    pub samples: Vec<FrozenSample>,
    pub initial_state: PhaseVector,
    pub final_state: PhaseVector,
}

fn secular_content(frame: &TangentFrame, x: &PhaseVector) -> [f64; 6] {
    let c = Vector6::from_fn(|l, _| omega(frame.get(l), x));
    [c[0], c[1], c[2], c[3], c[4], c[5]]
}

/// Integrates Ẋ = A_{v,v}X by Lawson RK4 with the modified wave group as integrating
/// factor; optionally replaces X₀ by P_vX₀ first.
pub fn integrate_frozen_with<F>(
    charge: &GridCharge,
    v: &Vec3,
    x0: &PhaseVector,
    t_final: f64,
    dt: f64,
    project_first: bool,
    opts: &FrozenOptions,
    mut observer: F,
) -> Result<FrozenTrajectory>
where
    F: FnMut(&FrozenSample, &PhaseVector) -> Result<()>,
{
    if !(dt > 0.0) || !(t_final > 0.0) {
        return Err(Error::Config(format!("invalid time step {dt} or final time {t_final}")));
    }
    let limit = opts.wrap_limit.unwrap_or(charge.grid().half_length());
    if t_final > limit {
        return Err(Error::WrapGuard { t_final, limit });
    }
    let lin = Linearization::new(charge, v, v)?;
    let frame = tangent_frame(charge, v)?;
    let mut x = if project_first { TransversalProjector::new(charge, v)?.apply(x0) } else { x0.clone() };
    let initial_state = x.clone();
    let steps = (t_final / dt).round().max(1.0) as usize;
    let h = t_final / steps as f64;
    let half = WavePropagator::new(charge.grid(), v, 0.5 * h);
    let mut work = LawsonWork::new(charge.grid());
    let stride = opts.sample_stride.max(1);
    let h0 = lin.hamiltonian(&x);
    let h_scale = h0.abs().max(1e-12 * x.norm_l2().powi(2));
    let sample = |t: f64, x: &PhaseVector| FrozenSample {
        t,
        decay_norm: if opts.weighted_norms { x.norm_weighted(-2.0 - opts.delta) } else { f64::NAN },
        energy_norm: x.norm_energy(),
        hamiltonian: lin.hamiltonian(x),
        secular: secular_content(&frame, x),
    };
    let mut samples = vec![sample(0.0, &x)];
    observer(&samples[0], &x)?;
    for s in 1..=steps {
        lawson_rk4_step(&mut x, h, &half, &mut work, |y, out| lin.coupling_into(y, out));
        if s % stride == 0 || s == steps {
            let t = s as f64 * h;
            let smp = sample(t, &x);
            let drift = (smp.hamiltonian - h0).abs() / h_scale;
            if !drift.is_finite() || drift > opts.energy_tol {
                return Err(Error::StepUnstable { t, drift });
            }
            observer(&smp, &x)?;
            samples.push(smp);
        }
    }
    Ok(FrozenTrajectory { samples, initial_state, final_state: x })
}

pub fn integrate_frozen(
    charge: &GridCharge,
    v: &Vec3,
    x0: &PhaseVector,
    t_final: f64,
    dt: f64,
    project_first: bool,
    opts: &FrozenOptions,
) -> Result<FrozenTrajectory> {
    integrate_frozen_with(charge, v, x0, t_final, dt, project_first, opts, |_, _| Ok(()))
}
