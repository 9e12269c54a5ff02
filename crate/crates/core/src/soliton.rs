//! The soliton family S(b, v), its momentum P_v, the tangent frame τ₁..τ₆ and the
//! stationary-equation residual.
//!
//! In the coefficient convention of [`crate::fields`]:
//! Â_v = ρ̂ Π̂(k)v / D₀, Ê_v = i(k·v)Â_v, D₀ = k² − (k·v)².

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::charge::RadialChargeDensity;
use crate::error::{Error, Result};
use crate::fields::{project_real, CVec3, FieldPair, FourierGrid, SolenoidalField, Vec3, CZERO3};
use crate::state::PhaseVector;

/// A charge density sampled on a grid: ρ̂ at every stored mode.
#[derive(Debug, Clone)]
pub struct GridCharge {
    grid: Arc<FourierGrid>,
    rho: Arc<RadialChargeDensity>,
    rho_hat: Vec<f64>,
}

impl GridCharge {
    pub fn new(rho: &RadialChargeDensity, grid: &Arc<FourierGrid>) -> Self {
        // ρ̂ depends on |m|² only; evaluate once per shell.
        let mut shells: HashMap<i64, f64> = HashMap::new();
        let rho_hat = grid
            .modes()
            .iter()
            .map(|m| {
                let key = m.m.iter().map(|x| (*x as i64) * (*x as i64)).sum::<i64>();
                *shells.entry(key).or_insert_with(|| rho.rho_hat(m.kabs))
            })
            .collect();
        Self { grid: grid.clone(), rho: Arc::new(rho.clone()), rho_hat }
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        &self.grid
    }

    pub fn density(&self) -> &RadialChargeDensity {
        &self.rho
    }

    pub fn rho_hat(&self) -> &[f64] {
        &self.rho_hat
    }

    /// ⟨ρ, a⟩ for a field a in the frame centered on the charge.
    pub fn pair(&self, a: &SolenoidalField) -> Vec3 {
        let mut s = [0.0; 3];
        for (c, r) in a.coeffs().iter().zip(&self.rho_hat) {
            for i in 0..3 {
                s[i] += r * c[i].re;
            }
        }
        Vec3::from(s) * self.grid.pair_weight()
    }

    /// ‖ρ‖² restricted to the grid.
    pub fn l2_norm_sq(&self) -> f64 {
        self.rho_hat.iter().map(|r| r * r).sum::<f64>() * self.grid.pair_weight()
    }
}

/// σ = (b, v).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub b: Vec3,
    pub v: Vec3,
}

impl SolitonParams {
    pub fn new(b: Vec3, v: Vec3) -> Result<Self> {
        check_velocity(&v)?;
        Ok(Self { b, v })
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.b[0], self.b[1], self.b[2], self.v[0], self.v[1], self.v[2]]
    }

    pub fn from_array(x: &[f64; 6]) -> Self {
        Self { b: Vec3::new(x[0], x[1], x[2]), v: Vec3::new(x[3], x[4], x[5]) }
    }
}

pub fn check_velocity(v: &Vec3) -> Result<()> {
    let s = v.norm();
    if !(s <= 1.0 - 1e-9) {
        return Err(Error::VelocityOutOfRange(s));
    }
    Ok(())
}

pub fn gamma(v: &Vec3) -> f64 {
    1.0 / (1.0 - v.norm_squared()).sqrt()
}

/// B_v = ν(I − v⊗v), ν = √(1−v²).
pub fn b_matrix(v: &Vec3) -> Matrix3<f64> {
    let nu = (1.0 - v.norm_squared()).sqrt();
    (Matrix3::identity() - v * v.transpose()) * nu
}

/// B_v⁻¹ = γ(I + γ² v⊗v).
pub fn b_matrix_inv(v: &Vec3) -> Matrix3<f64> {
    let g = gamma(v);
    (Matrix3::identity() + v * v.transpose() * (g * g)) * g
}

#[inline]
fn dot(k: &[f64; 3], v: &Vec3) -> f64 {
    k[0] * v[0] + k[1] * v[1] + k[2] * v[2]
}

/// Real per-mode profile Â_v(k) (the coefficient is real for the centered soliton).
#[inline]
fn a_profile(k: &[f64; 3], k2: f64, rho: f64, v: &Vec3) -> [f64; 3] {
    let kv = dot(k, v);
    let d0 = k2 - kv * kv;
    let p = project_real(k, k2, v);
    [rho * p[0] / d0, rho * p[1] / d0, rho * p[2] / d0]
}

/// ∂_{v_j}Â_v per mode.
#[inline]
fn a_profile_dv(k: &[f64; 3], k2: f64, rho: f64, v: &Vec3, j: usize) -> [f64; 3] {
    let kv = dot(k, v);
    let d0 = k2 - kv * kv;
    let p = project_real(k, k2, v);
    let mut out = [0.0; 3];
    for i in 0..3 {
        let ej = if i == j { 1.0 } else { 0.0 };
        out[i] = rho * ((ej - k[j] * k[i] / k2) / d0 + p[i] * 2.0 * kv * k[j] / (d0 * d0));
    }
    out
}

fn real3(x: [f64; 3]) -> CVec3 {
    [C64::new(x[0], 0.0), C64::new(x[1], 0.0), C64::new(x[2], 0.0)]
}

/// (E_v, A_v) centered at the origin.
pub fn soliton_fields(charge: &GridCharge, v: &Vec3) -> Result<FieldPair> {
    check_velocity(v)?;
    let grid = charge.grid();
    let mut e = Vec::with_capacity(grid.len());
    let mut a = Vec::with_capacity(grid.len());
    for (m, r) in grid.modes().iter().zip(charge.rho_hat()) {
        let ap = a_profile(&m.k, m.k2, *r, v);
        let ikv = C64::new(0.0, dot(&m.k, v));
        let ac = real3(ap);
        e.push([ac[0] * ikv, ac[1] * ikv, ac[2] * ikv]);
        a.push(ac);
    }
    Ok(FieldPair { e: SolenoidalField::from_transversal(grid, e), a: SolenoidalField::from_transversal(grid, a) })
}

/// P_v = γv + ⟨ρ, A_v⟩.
pub fn soliton_momentum(charge: &GridCharge, v: &Vec3) -> Result<Vec3> {
    check_velocity(v)?;
    let grid = charge.grid();
    let mut s = [0.0; 3];
    for (m, r) in grid.modes().iter().zip(charge.rho_hat()) {
        let ap = a_profile(&m.k, m.k2, *r, v);
        for i in 0..3 {
            s[i] += r * ap[i];
        }
    }
    Ok(v * gamma(v) + Vec3::from(s) * grid.pair_weight())
}

/// Matrix D[l][j] = ∂_{v_j} (P_v)_l.
pub fn momentum_jacobian(charge: &GridCharge, v: &Vec3) -> Result<Matrix3<f64>> {
    check_velocity(v)?;
    let grid = charge.grid();
    let mut d = Matrix3::zeros();
    for (m, r) in grid.modes().iter().zip(charge.rho_hat()) {
        for j in 0..3 {
            let da = a_profile_dv(&m.k, m.k2, *r, v, j);
            for l in 0..3 {
                d[(l, j)] += r * da[l];
            }
        }
    }
    Ok(b_matrix_inv(v) + d * grid.pair_weight())
}

/// The soliton state S(σ) = (E_v(x−b), A_v(x−b), b, P_v).
pub fn soliton_state(charge: &GridCharge, sigma: &SolitonParams) -> Result<PhaseVector> {
    let f = soliton_fields(charge, &sigma.v)?;
    Ok(PhaseVector { fields: f.translated(sigma.b), q: sigma.b, p: soliton_momentum(charge, &sigma.v)? })
}

/// τ₁..τ₆ in the moving frame.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub v: Vec3,
    pub tau: Vec<PhaseVector>,
}

impl TangentFrame {
    pub fn get(&self, i: usize) -> &PhaseVector {
        &self.tau[i]
    }
}

pub fn tangent_frame(charge: &GridCharge, v: &Vec3) -> Result<TangentFrame> {
    check_velocity(v)?;
    let grid = charge.grid();
    let dp = momentum_jacobian(charge, v)?;
    let mut e: Vec<Vec<CVec3>> = vec![vec![CZERO3; grid.len()]; 6];
    let mut a: Vec<Vec<CVec3>> = vec![vec![CZERO3; grid.len()]; 6];
    for (idx, (m, r)) in grid.modes().iter().zip(charge.rho_hat()).enumerate() {
        let ap = a_profile(&m.k, m.k2, *r, v);
        let kv = dot(&m.k, v);
        // Â real, Ê = i kv Â.
        for j in 0..3 {
            // −∂ⱼ Â = −i kⱼ Â ;  −∂ⱼ Ê = −i kⱼ (i kv Â) = kⱼ kv Â
            for i in 0..3 {
                a[j][idx][i] = C64::new(0.0, -m.k[j] * ap[i]);
                e[j][idx][i] = C64::new(m.k[j] * kv * ap[i], 0.0);
            }
            let da = a_profile_dv(&m.k, m.k2, *r, v, j);
            // ∂_{v_j}Ê = i kⱼ Â + i kv ∂_{v_j}Â
            for i in 0..3 {
                a[j + 3][idx][i] = C64::new(da[i], 0.0);
                e[j + 3][idx][i] = C64::new(0.0, m.k[j] * ap[i] + kv * da[i]);
            }
        }
    }
    let mut tau = Vec::with_capacity(6);
    for (j, (ej, aj)) in e.into_iter().zip(a).enumerate() {
        let mut q = Vec3::zeros();
        let mut p = Vec3::zeros();
        if j < 3 {
            q[j] = 1.0;
        } else {
            p = dp.column(j - 3).into_owned();
        }
        tau.push(PhaseVector {
            fields: FieldPair {
                e: SolenoidalField::from_transversal(grid, ej),
                a: SolenoidalField::from_transversal(grid, aj),
            },
            q,
            p,
        });
    }
    Ok(TangentFrame { v: *v, tau })
}

/// Per-equation relative residuals of the stationary equations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StationaryResidual {
    /// E_v − v·∇A_v.
    pub transport: f64,
    /// v·∇E_v − ΔA_v − Πₛ(ρv).
    pub field: f64,
    /// v − p/√(1+p²) with p = P_v − ⟨ρ, A_v⟩.
    pub velocity: f64,
    /// ∫ρ (v·∇)A_v.
    pub force: f64,
}

impl StationaryResidual {
    pub fn max(&self) -> f64 {
        self.transport.max(self.field).max(self.velocity).max(self.force)
    }
}

fn rel(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Residuals for arbitrary (E, A, P) at velocity v, centered at the origin.
pub fn stationary_residual_of(
    charge: &GridCharge,
    v: &Vec3,
    fields: &FieldPair,
    momentum: &Vec3,
) -> StationaryResidual {
    let grid = charge.grid();
    let (mut t_num, mut t_den, mut f_num, mut f_den) = (0.0, 0.0, 0.0, 0.0);
    let mut force = [0.0; 3];
    let (mut force_den_a, mut force_den_r) = (0.0, 0.0);
    for (i, (m, r)) in grid.modes().iter().zip(charge.rho_hat()).enumerate() {
        let e = &fields.e.coeffs()[i];
        let a = &fields.a.coeffs()[i];
        let ikv = C64::new(0.0, dot(&m.k, v));
        let src = project_real(&m.k, m.k2, v);
        for c in 0..3 {
            let va = ikv * a[c];
            t_num += (e[c] - va).norm_sqr();
            t_den += e[c].norm_sqr().max(va.norm_sqr());
            let lhs = ikv * e[c];
            let rhs = -a[c] * m.k2 + src[c] * r;
            f_num += (lhs - rhs).norm_sqr();
            f_den += lhs.norm_sqr().max(rhs.norm_sqr());
            force[c] += r * va.re;
            force_den_a += va.norm_sqr();
        }
        force_den_r += r * r;
    }
    let w = grid.pair_weight();
    let p = momentum - charge.pair(&fields.a);
    let vel = p / (1.0 + p.norm_squared()).sqrt();
    let force_norm = Vec3::from(force).norm() * w;
    StationaryResidual {
        transport: rel(t_num.sqrt(), t_den.sqrt()),
        field: rel(f_num.sqrt(), f_den.sqrt()),
        velocity: rel((vel - v).norm(), v.norm()),
        force: rel(force_norm, (force_den_a * force_den_r).sqrt() * w),
    }
}

pub fn stationary_residual(charge: &GridCharge, v: &Vec3) -> Result<StationaryResidual> {
    let f = soliton_fields(charge, v)?;
    let p = soliton_momentum(charge, v)?;
    Ok(stationary_residual_of(charge, v, &f, &p))
}
