//! The symplectic form Ω, the 6×6 matrix Ω(τⱼ, τₗ), the transversal projector P_v and
//! the symplectic orthogonal projection onto the solitary manifold.

use nalgebra::{Matrix3, Matrix6, SymmetricEigen, Vector6};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fields::{cdot_re, Vec3};
use crate::soliton::{
    check_velocity, soliton_fields, soliton_momentum, tangent_frame, GridCharge, SolitonParams, TangentFrame,
};
use crate::state::PhaseVector;

/// Ω(Y₁, Y₂) = ⟨E₁, A₂⟩ − ⟨E₂, A₁⟩ + q₁·P₂ − q₂·P₁.
pub fn omega(y1: &PhaseVector, y2: &PhaseVector) -> f64 {
    let f1 = &y1.fields;
    let f2 = &y2.fields;
    let mut s = 0.0;
    for (((e1, a1), e2), a2) in f1.e.coeffs().iter().zip(f1.a.coeffs()).zip(f2.e.coeffs()).zip(f2.a.coeffs()) {
        s += cdot_re(e1, a2) - cdot_re(e2, a1);
    }
    s * y1.grid().pair_weight() + y1.q.dot(&y2.p) - y2.q.dot(&y1.p)
}

/// Ω(τⱼ, τₗ) with its diagnostics.
#[derive(Debug, Clone)]
pub struct OmegaMatrix {
    pub v: Vec3,
    pub matrix: Matrix6<f64>,
    /// Ω⁺ = [Ω(τⱼ, τ_{l+3})].
    pub plus: Matrix3<f64>,
    pub plus_inv: Matrix3<f64>,
    /// Largest entry of the two diagonal 3×3 blocks.
    pub zero_block_residual: f64,
    /// max |Ω + Ωᵀ|.
    pub antisymmetry_residual: f64,
    pub plus_eigenvalues: [f64; 3],
}

pub fn omega_matrix_of(frame: &TangentFrame) -> Result<OmegaMatrix> {
    let mut m = Matrix6::zeros();
    for j in 0..6 {
        for l in 0..6 {
            m[(j, l)] = omega(frame.get(j), frame.get(l));
        }
    }
    let mut zero_block: f64 = 0.0;
    for j in 0..3 {
        for l in 0..3 {
            zero_block = zero_block.max(m[(j, l)].abs()).max(m[(j + 3, l + 3)].abs());
        }
    }
    let antisym = (m + m.transpose()).amax();
    let plus: Matrix3<f64> = m.fixed_view::<3, 3>(0, 3).into_owned();
    let sym = (plus + plus.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let mut ev = [eig[0], eig[1], eig[2]];
    ev.sort_by(f64::total_cmp);
    if ev[0] <= 0.0 {
        return Err(Error::OmegaNotPositive(ev[0]));
    }
    let plus_inv = plus.try_inverse().ok_or(Error::OmegaNotPositive(ev[0]))?;
    Ok(OmegaMatrix {
        v: frame.v,
        matrix: m,
        plus,
        plus_inv,
        zero_block_residual: zero_block,
        antisymmetry_residual: antisym,
        plus_eigenvalues: ev,
    })
}

pub fn omega_matrix(charge: &GridCharge, v: &Vec3) -> Result<OmegaMatrix> {
    omega_matrix_of(&tangent_frame(charge, v)?)
}

/// P_v = I − Π_v with Π_v X = Σ Πⱼₗ τⱼ Ω(τₗ, X).
#[derive(Debug, Clone)]
pub struct TransversalProjector {
    pub frame: TangentFrame,
    pub omega: OmegaMatrix,
    pi: Matrix6<f64>,
}

impl TransversalProjector {
    pub fn new(charge: &GridCharge, v: &Vec3) -> Result<Self> {
        let frame = tangent_frame(charge, v)?;
        let omega = omega_matrix_of(&frame)?;
        // Ω(τₘ, P_v X) = 0 for all m requires Π = W⁻¹ with Wₘⱼ = Ω(τₘ, τⱼ).
        let pi = omega.matrix.try_inverse().ok_or(Error::OmegaNotPositive(omega.plus_eigenvalues[0]))?;
        Ok(Self { frame, omega, pi })
    }

    /// The six pairings Ω(τⱼ, X).
    pub fn pairings(&self, x: &PhaseVector) -> Vector6<f64> {
        Vector6::from_fn(|j, _| omega(self.frame.get(j), x))
    }

    /// Coefficients c with Π_v X = Σ cⱼ τⱼ.
    pub fn tangent_coefficients(&self, x: &PhaseVector) -> Vector6<f64> {
        self.pi * self.pairings(x)
    }

    pub fn apply(&self, x: &PhaseVector) -> PhaseVector {
        let c = self.tangent_coefficients(x);
        let mut out = x.clone();
        for j in 0..6 {
            out.axpy(-c[j], self.frame.get(j));
        }
        out
    }
}

pub fn transversal_projector(charge: &GridCharge, v: &Vec3, x: &PhaseVector) -> Result<PhaseVector> {
    Ok(TransversalProjector::new(charge, v)?.apply(x))
}

/// Shifts a lab-frame state to the frame centered at b: fields f(y + b), q − b.
pub fn to_moving_frame(y: &PhaseVector, b: &Vec3) -> PhaseVector {
    PhaseVector { fields: y.fields.translated(-b), q: y.q - b, p: y.p }
}

/// Inverse of [`to_moving_frame`].
pub fn from_moving_frame(z: &PhaseVector, b: &Vec3) -> PhaseVector {
    PhaseVector { fields: z.fields.translated(*b), q: z.q + b, p: z.p }
}

/// Options for [`project_to_manifold`].
#[derive(Debug, Clone, Copy)]
pub struct ProjectionOptions {
    /// Residual tolerance relative to ‖Y‖.
    pub tol: f64,
    pub max_iterations: usize,
    pub fd_step: f64,
    /// Velocity bound v̄ < 1 for iterates.
    pub v_max: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 50, fd_step: 1e-5, v_max: 1.0 - 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub sigma: SolitonParams,
    /// Y − S(σ) in the moving frame y = x − b.
    pub z: PhaseVector,
    pub iterations: usize,
    /// max |Ω(Z, τⱼ(σ))|.
    pub residual: f64,
}

/// Ω(Y − S(σ), τⱼ(v)), evaluated mode by mode without forming the frame.
pub fn projection_residual(charge: &GridCharge, y: &PhaseVector, sigma: &SolitonParams) -> Result<[f64; 6]> {
    check_velocity(&sigma.v)?;
    let grid = charge.grid();
    let v = sigma.v;
    let tables = grid.phase_tables(-sigma.b);
    let n = grid.n();
    let dp = crate::soliton::momentum_jacobian(charge, &v)?;
    let pv = soliton_momentum(charge, &v)?;
    let mut acc = [0.0; 6];
    for (i, (m, r)) in grid.modes().iter().zip(charge.rho_hat()).enumerate() {
        let ph = crate::fields::phase_of(&tables, m, n);
        let kv = m.k[0] * v[0] + m.k[1] * v[1] + m.k[2] * v[2];
        let d0 = m.k2 - kv * kv;
        let pr = crate::fields::project_real(&m.k, m.k2, &v);
        let ap = [r * pr[0] / d0, r * pr[1] / d0, r * pr[2] / d0];
        let ye = &y.fields.e.coeffs()[i];
        let ya = &y.fields.a.coeffs()[i];
        let mut ze = [C64::new(0.0, 0.0); 3];
        let mut za = [C64::new(0.0, 0.0); 3];
        for c in 0..3 {
            ze[c] = ye[c] * ph - C64::new(0.0, kv * ap[c]);
            za[c] = ya[c] * ph - ap[c];
        }
        for j in 0..3 {
            // τⱼ: e = kⱼ kv Â (real), a = −i kⱼ Â.
            // Ω(z, τ) = ⟨z_e, τ_a⟩ − ⟨τ_e, z_a⟩.
            let mut s = 0.0;
            for c in 0..3 {
                let ta = C64::new(0.0, -m.k[j] * ap[c]);
                let te = C64::new(m.k[j] * kv * ap[c], 0.0);
                s += (ze[c].conj() * ta).re - (te.conj() * za[c]).re;
            }
            acc[j] += s;
            let mut da = [0.0; 3];
            for c in 0..3 {
                let ej = if c == j { 1.0 } else { 0.0 };
                da[c] = r * ((ej - m.k[j] * m.k[c] / m.k2) / d0 + pr[c] * 2.0 * kv * m.k[j] / (d0 * d0));
            }
            let mut s = 0.0;
            for c in 0..3 {
                let ta = C64::new(da[c], 0.0);
                let te = C64::new(0.0, m.k[j] * ap[c] + kv * da[c]);
                s += (ze[c].conj() * ta).re - (te.conj() * za[c]).re;
            }
            acc[j + 3] += s;
        }
    }
    let w = grid.pair_weight();
    let zq = y.q - sigma.b;
    let zp = y.p - pv;
    let mut out = [0.0; 6];
    for j in 0..3 {
        // τⱼ particle part (eⱼ, 0): Ω(z, τⱼ) += z_q·0 − eⱼ·z_p
        out[j] = acc[j] * w - zp[j];
        // τ_{j+3} particle part (0, ∂_{v_j}P): Ω += z_q·∂_{v_j}P
        out[j + 3] = acc[j + 3] * w + zq.dot(&dp.column(j));
    }
    Ok(out)
}

fn max_abs(x: &[f64; 6]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// ∂σ of [`projection_residual`] by central differences.
pub fn residual_jacobian(charge: &GridCharge, y: &PhaseVector, sigma: &SolitonParams, h: f64) -> Result<Matrix6<f64>> {
    let x0 = sigma.as_array();
    let mut jac = Matrix6::zeros();
    for l in 0..6 {
        let mut xp = x0;
        let mut xm = x0;
        xp[l] += h;
        xm[l] -= h;
        let rp = projection_residual(charge, y, &SolitonParams::from_array(&xp))?;
        let rm = projection_residual(charge, y, &SolitonParams::from_array(&xm))?;
        for j in 0..6 {
            jac[(j, l)] = (rp[j] - rm[j]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Initial guess b = q, v = P/√(1+P²).
pub fn initial_guess(y: &PhaseVector) -> SolitonParams {
    SolitonParams { b: y.q, v: y.p / (1.0 + y.p.norm_squared()).sqrt() }
}

/// Damped Newton solve of Ω(Y − S(σ), τⱼ(σ)) = 0, started from `start`
/// (or the momentum-based guess).
pub fn project_to_manifold_from(
    charge: &GridCharge,
    y: &PhaseVector,
    start: Option<SolitonParams>,
    opts: ProjectionOptions,
) -> Result<Projection> {
    let mut sigma = start.unwrap_or_else(|| initial_guess(y));
    if sigma.v.norm() > opts.v_max {
        return Err(Error::VelocityOutOfRange(sigma.v.norm()));
    }
    let scale = y.norm_energy().max(1e-300);
    let target = opts.tol * scale;
    let mut res = projection_residual(charge, y, &sigma)?;
    let mut iterations = 0;
    while max_abs(&res) >= target {
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence { iterations, residual: max_abs(&res) / scale });
        }
        iterations += 1;
        let x0 = sigma.as_array();
        let jac = residual_jacobian(charge, y, &sigma, opts.fd_step)?;
        let rhs = -Vector6::from_row_slice(&res);
        let step = jac.lu().solve(&rhs).ok_or(Error::NoConvergence { iterations, residual: max_abs(&res) / scale })?;
        let mut alpha = 1.0;
        let current = max_abs(&res);
        let mut accepted = false;
        for _ in 0..30 {
            let mut xt = x0;
            for l in 0..6 {
                xt[l] += alpha * step[l];
            }
            let trial = SolitonParams::from_array(&xt);
            if trial.v.norm() <= opts.v_max {
                let rt = projection_residual(charge, y, &trial)?;
                if max_abs(&rt) < current {
                    sigma = trial;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { iterations, residual: current / scale });
        }
    }
    let z = to_moving_frame(y, &sigma.b).sub(&PhaseVector {
        fields: soliton_fields(charge, &sigma.v)?,
        q: Vec3::zeros(),
        p: soliton_momentum(charge, &sigma.v)?,
    });
    Ok(Projection { sigma, z, iterations, residual: max_abs(&res) })
}

pub fn project_to_manifold(charge: &GridCharge, y: &PhaseVector) -> Result<Projection> {
    project_to_manifold_from(charge, y, None, ProjectionOptions::default())
}
