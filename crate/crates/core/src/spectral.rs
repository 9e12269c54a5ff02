//! Resolvent-side objects of the linearization at a soliton: the coefficient integrals
//! c, f, g, the matrix M(λ) and its determinant, boundary values on the imaginary axis,
//! the block structure of M⁻¹(iω), and the orthogonality functionals Φ, Ψ.
//!
//! The coefficient integrals use coordinates with v = |v|e₁ and the symbol
//! D̂(λ, k) = k² + (λ + ik₁|v|)². In spherical coordinates (κ, c = cos θ) the azimuthal
//! integral is done analytically, so every integral becomes 2π∫dc∫κ²dκ.
//! Φ and Ψ act on grid data and follow the grid convention f̂ ∝ ∫e^{−ik·x}f.

use nalgebra::{Matrix3, Matrix6, Vector3};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::charge::{RadialChargeDensity, RhoHatTable};
use crate::error::{Error, Result};
use crate::fields::{CVec3, SolenoidalField, Vec3};
use crate::quad::{adaptive, gauss_legendre, AdaptiveOptions};
use crate::soliton::{check_velocity, momentum_jacobian, tangent_frame, GridCharge};
use crate::state::PhaseVector;
use crate::symplectic::omega;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const PI: f64 = std::f64::consts::PI;
const I: C64 = C64::new(0.0, 1.0);

/// Number of independent integrands: c₁₁, c₁₂, f₁₁, f₁₂, c₂₂, f₂₂.
const NCOEF: usize = 6;

/// The coefficient integrals at one spectral point, with the derived combinations.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralCoeffs {
    pub lambda: C64,
    pub c11: C64,
    pub c12: C64,
    pub c13: C64,
    pub f11: C64,
    pub f12: C64,
    pub f13: C64,
    pub c22: C64,
    pub f22: C64,
    /// c₁ = c₁₁.
    pub c1: C64,
    /// c = c₁₂ + c₂₂.
    pub c: C64,
    pub f1: C64,
    /// f = f₁₂ + f₂₂.
    pub f: C64,
    pub g1: f64,
    pub g: f64,
    /// d₁ = λ² − λf₁ + ν³(c₁ + g₁).
    pub d1: C64,
    /// d = λ² − λf + ν(c + g).
    pub d: C64,
}

impl SpectralCoeffs {
    fn assemble(lambda: C64, raw: [C64; NCOEF], g1: f64, g: f64, nu: f64) -> Self {
        let [c11, c12, f11, f12, c22, f22] = raw;
        let c1 = c11;
        let c = c12 + c22;
        let f1 = f11;
        let f = f12 + f22;
        Self {
            lambda,
            c11,
            c12,
            c13: c12,
            f11,
            f12,
            f13: f12,
            c22,
            f22,
            c1,
            c,
            f1,
            f,
            g1,
            g,
            d1: lambda * lambda - lambda * f1 + nu.powi(3) * (c1 + g1),
            d: lambda * lambda - lambda * f + nu * (c + g),
        }
    }

    /// |c₁₁ + c₁₂ + c₁₃| relative to |c₁₁|.
    pub fn trace_residual(&self) -> f64 {
        (self.c11 + self.c12 + self.c13).norm() / self.c11.norm().max(f64::MIN_POSITIVE)
    }

    fn raw(&self) -> [C64; NCOEF] {
        [self.c11, self.c12, self.f11, self.f12, self.c22, self.f22]
    }
}

/// Quadrature settings.
#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    /// Radial (inner) integrals.
    pub radial: AdaptiveOptions,
    /// Polar (outer) and surface integrals.
    pub outer: AdaptiveOptions,
    /// Equal panels the polar interval is split into before adaptation.
    pub polar_panels: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            radial: AdaptiveOptions { abs_tol: 1e-17, rel_tol: 1e-13, max_intervals: 20_000 },
            outer: AdaptiveOptions { abs_tol: 1e-16, rel_tol: 1e-12, max_intervals: 4000 },
            polar_panels: 8,
        }
    }
}

/// Frequency-independent data of the coefficient integrals for one (ρ, |v|).
#[derive(Debug, Clone)]
pub struct SpectralContext {
    table: RhoHatTable,
    speed: f64,
    nu: f64,
    k_max: f64,
    g1: f64,
    g: f64,
    /// ∫₀^∞ ρ̂² dκ.
    r0: f64,
    opts: SpectralOptions,
}

impl SpectralContext {
    pub fn new(rho: &RadialChargeDensity, v: &Vec3) -> Result<Self> {
        Self::with_options(rho, v, SpectralOptions::default())
    }

    /// Only |v| matters: results refer to the frame where v points along e₁.
    pub fn with_options(rho: &RadialChargeDensity, v: &Vec3, opts: SpectralOptions) -> Result<Self> {
        check_velocity(v)?;
        let k_max = rho.k_cutoff();
        let table = RhoHatTable::new(rho, k_max);
        let speed = v.norm();
        let nu = (1.0 - speed * speed).sqrt();
        let breaks = oscillation_breaks(rho.radius(), k_max);
        let radial = adaptive(
            |k, out| {
                let r2 = table.eval(k).powi(2);
                out[0] = r2;
                out[1] = k * k * r2;
            },
            0.0,
            k_max,
            &breaks,
            2,
            opts.radial,
        )?;
        let (r0, rk2) = (radial.value[0], radial.value[1]);
        let v2 = speed * speed;
        let gl = gauss_legendre(64);
        let ang1 = gl.integrate(-1.0, 1.0, |c| c * c * (1.0 - c * c) / (1.0 - c * c * v2));
        let ang = gl.integrate(-1.0, 1.0, |c| (1.0 - c * c).powi(2) / (2.0 * (1.0 - c * c * v2)));
        Ok(Self { table, speed, nu, k_max, g1: TWO_PI * rk2 * v2 * ang1, g: TWO_PI * rk2 * v2 * ang, r0, opts })
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Radial cutoff of the integrals.
    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    /// diag(ν³, ν, ν).
    pub fn b_diag(&self) -> [f64; 3] {
        [self.nu.powi(3), self.nu, self.nu]
    }

    pub fn g_diag(&self) -> [f64; 3] {
        [self.g1, self.g, self.g]
    }

    /// Integrand numerators at (κ, c) for μ = λ + iκc|v|, including the radial
    /// Jacobian κ² but not 1/D̂.
    fn numerators(&self, kappa: f64, c: f64, mu: C64) -> [C64; NCOEF] {
        let v = self.speed;
        let nu = self.nu;
        let w = kappa * kappa * self.table.eval(kappa).powi(2);
        let s2 = 1.0 - c * c;
        let kc = kappa * c;
        let c11 = I * (v * kc * s2 * w) * mu;
        [
            c11,
            -0.5 * c11,
            mu * (nu.powi(3) * (c * c - 1.0) * w),
            mu * (-0.5 * nu * (1.0 + c * c) * w),
            C64::from(-0.5 * v * v * kappa * kappa * s2 * w),
            I * (nu * v * kc * w),
        ]
    }

    fn polar_breaks(&self) -> Vec<f64> {
        let n = self.opts.polar_panels.max(1);
        (1..n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect()
    }

    /// 2π∫dc of a six-component radial integral.
    fn polar_integral<F>(&self, mut radial: F) -> Result<[C64; NCOEF]>
    where
        F: FnMut(f64) -> Result<[C64; NCOEF]>,
    {
        let mut failure = None;
        let r = adaptive(
            |c, out| match radial(c) {
                Ok(vals) => unpack(&vals, out),
                Err(e) => {
                    failure.get_or_insert(e);
                    out.iter_mut().for_each(|x| *x = 0.0);
                }
            },
            -1.0,
            1.0,
            &self.polar_breaks(),
            2 * NCOEF,
            self.opts.outer,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        let mut out = pack(&r.value);
        out.iter_mut().for_each(|x| *x *= TWO_PI);
        Ok(out)
    }

    fn radial_integral<F>(&self, f: F, a: f64, b: f64, breaks: &[f64]) -> Result<[C64; NCOEF]>
    where
        F: Fn(f64) -> [C64; NCOEF],
    {
        if b <= a {
            return Ok([C64::new(0.0, 0.0); NCOEF]);
        }
        let mut all = oscillation_breaks_in(self.k_max, a, b);
        all.extend_from_slice(breaks);
        let r = adaptive(|k, out| unpack(&f(k), out), a, b, &all, 2 * NCOEF, self.opts.radial)?;
        Ok(pack(&r.value))
    }

    /// Coefficients at a point with Re λ > 0, or at λ = 0.
    pub fn coeffs_at(&self, lambda: C64) -> Result<SpectralCoeffs> {
        if !(lambda.re > 0.0 || lambda == C64::new(0.0, 0.0)) || !lambda.is_finite() {
            return Err(Error::LambdaOutOfRange(format!(
                "{lambda} (need Re λ > 0 or λ = 0; use the axis evaluator on iℝ)"
            )));
        }
        let v = self.speed;
        let raw = self.polar_integral(|c| {
            let breaks = near_pole_breaks(lambda, c * v);
            self.radial_integral(
                |k| {
                    let mu = lambda + I * (k * c * v);
                    let d = k * k + mu * mu;
                    let n = self.numerators(k, c, mu);
                    n.map(|x| x / d)
                },
                0.0,
                self.k_max,
                &breaks,
            )
        })?;
        Ok(SpectralCoeffs::assemble(lambda, raw, self.g1, self.g, self.nu))
    }

    /// Boundary values at λ = iω + 0, split into principal-value and singular parts.
    pub fn axis_evaluation(&self, omega: f64) -> Result<AxisEvaluation> {
        if omega == 0.0 || !omega.is_finite() {
            return Err(Error::ZeroFrequency);
        }
        let v = self.speed;
        let s = omega.signum();
        let lambda = C64::new(0.0, omega);
        let kk = self.k_max;
        // D̂(iω) = (1 − c²v²)(κ − κ*)(κ − κ₋) in factored form, so that the offset from
        // the root enters exactly.
        let roots = |c: f64| (omega.abs() / (1.0 - s * c * v), -omega.abs() / (1.0 + s * c * v));
        let h = |k: f64, off: f64, c: f64, km: f64| {
            let dr = (1.0 - c * c * v * v) * off * (k - km);
            self.numerators(k, c, C64::new(0.0, omega + k * c * v)).map(|x| x / dr)
        };
        let pv = self.polar_integral(|c| {
            let (ks, km) = roots(c);
            let plain = |k: f64| h(k, k - ks, c, km);
            if ks >= kk {
                return self.radial_integral(plain, 0.0, kk, &[]);
            }
            let delta = ks.min(kk - ks);
            let paired = self.radial_integral(
                |u| {
                    let a = h(ks + u, u, c, km);
                    let b = h(ks - u, -u, c, km);
                    std::array::from_fn(|j| a[j] + b[j])
                },
                0.0,
                delta,
                &[],
            )?;
            let rest = if ks - delta > 0.0 {
                self.radial_integral(plain, 0.0, ks - delta, &[])?
            } else {
                self.radial_integral(plain, ks + delta, kk, &[])?
            };
            Ok(std::array::from_fn(|j| paired[j] + rest[j]))
        })?;
        // Singular part, radial route: −iπ sgn(ω) N(κ*)/|∂_κ D̂| with |∂_κ D̂| = 2|ω|.
        let radial_delta = self.polar_integral(|c| {
            let (ks, _) = roots(c);
            if ks >= kk {
                return Ok([C64::new(0.0, 0.0); NCOEF]);
            }
            let n = self.numerators(ks, c, C64::new(0.0, s * ks));
            Ok(n.map(|x| x * C64::new(0.0, -PI * s / (2.0 * omega.abs()))))
        })?;
        // Singular part, surface route over the ellipsoid D̂(iω, k) = 0.
        let surf = self.surface_integral(omega, 2 * NCOEF, |k1, kp, out| {
            let kappa = (k1 * k1 + kp * kp).sqrt();
            let n = self.numerators(kappa, k1 / kappa, C64::new(0.0, s * kappa));
            let n = n.map(|x| x * C64::new(0.0, -PI * s) / (kappa * kappa));
            unpack(&n, out);
        })?;
        let surface = pack(&surf);
        let scale = surface.iter().chain(pv.iter()).fold(0.0f64, |m, x| m.max(x.norm()));
        let route_gap = surface.iter().zip(&radial_delta).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
            / scale.max(f64::MIN_POSITIVE);
        let raw = std::array::from_fn(|j| pv[j] + surface[j]);
        Ok(AxisEvaluation {
            omega,
            coeffs: SpectralCoeffs::assemble(lambda, raw, self.g1, self.g, self.nu),
            principal_value: pv,
            singular_surface: surface,
            singular_radial: radial_delta,
            route_gap,
        })
    }

    pub fn coeffs_on_axis(&self, omega: f64) -> Result<SpectralCoeffs> {
        Ok(self.axis_evaluation(omega)?.coeffs)
    }

    /// ∫_{T_ω} F dS/|∇D̂| with F given in (k₁, |k_⊥|), on the ellipsoid
    /// centered at ωvγ²e₁ with semi-axes |ω|γ² and |ω|γ.
    fn surface_integral<F>(&self, omega: f64, dim: usize, mut f: F) -> Result<Vec<f64>>
    where
        F: FnMut(f64, f64, &mut [f64]),
    {
        let v = self.speed;
        let g2 = 1.0 / (1.0 - v * v);
        let g = g2.sqrt();
        let center = omega * v * g2;
        let (ax, bx) = (omega.abs() * g2, omega.abs() * g);
        let breaks: Vec<f64> = (1..16).map(|i| PI * i as f64 / 16.0).collect();
        let r = adaptive(
            |th, out| {
                let (sn, cs) = th.sin_cos();
                let k1 = center + ax * cs;
                let kp = bx * sn;
                let grad = 2.0 * ((k1 * (1.0 - v * v) - omega * v).powi(2) + kp * kp).sqrt();
                let ds = TWO_PI * kp * (ax * ax * sn * sn + bx * bx * cs * cs).sqrt();
                f(k1, kp, out);
                let wgt = if grad > 0.0 { ds / grad } else { 0.0 };
                out.iter_mut().for_each(|x| *x *= wgt);
            },
            0.0,
            PI,
            &breaks,
            dim,
            self.opts.outer,
        )?;
        Ok(r.value)
    }

    /// Im d₁ and Im d from their surface representations, whose integrands are
    /// manifestly nonnegative, along with the smallest integrand value seen.
    pub fn wiener_positivity(&self, omega: f64) -> Result<PositivityReport> {
        let axis = self.axis_evaluation(omega)?;
        let v = self.speed;
        let nu = self.nu;
        let mut min_integrand = f64::INFINITY;
        let vals = self.surface_integral(omega, 2, |k1, kp, out| {
            let k2 = k1 * k1 + kp * kp;
            let r2 = self.table.eval(k2.sqrt()).powi(2);
            out[0] = nu.powi(3) * PI * (omega + k1 * v).powi(2) * r2 * (1.0 - k1 * k1 / k2);
            out[1] = 0.5 * PI * nu * r2 * ((k1 * (v * v - 1.0) + omega * v).powi(2) + omega * omega);
            min_integrand = min_integrand.min(out[0]).min(out[1]);
        })?;
        Ok(PositivityReport {
            omega,
            im_d1: axis.coeffs.d1.im,
            im_d: axis.coeffs.d.im,
            surface_im_d1: vals[0],
            surface_im_d: vals[1],
            min_integrand,
            route_gap: axis.route_gap,
        })
    }

    /// I₁(0), I(0), J₁(0), J(0) from their closed forms. Each integrand is κ⁻² times an
    /// angular factor, so the radial part is ∫ρ̂²dκ.
    pub fn taylor_at_zero(&self) -> TaylorData {
        let v2 = self.speed * self.speed;
        let nu = self.nu;
        let gl = gauss_legendre(96);
        let ang = |f: &dyn Fn(f64) -> f64| TWO_PI * self.r0 * gl.integrate(-1.0, 1.0, f);
        let i1 = 0.5
            * ang(&|c| {
                let q = 1.0 - c * c * v2;
                2.0 * v2 * c * c * (1.0 - c * c) * (3.0 + c * c * v2) / q.powi(3)
            });
        let i = 0.5
            * ang(&|c| {
                let q = 1.0 - c * c * v2;
                v2 * (1.0 - c * c) * ((1.0 + 3.0 * c * c * v2) - c * c * (3.0 + c * c * v2)) / q.powi(3)
            });
        let j1 = ang(&|c| {
            let q = 1.0 - c * c * v2;
            nu.powi(3) * (c * c - 1.0) * (1.0 + c * c * v2) / q.powi(2)
        });
        let j = ang(&|c| {
            let q = 1.0 - c * c * v2;
            0.5 * nu * (3.0 * c * c * v2 - c.powi(4) * v2 - 1.0 - c * c) / q.powi(2)
        });
        // The same combination −J(0) + νI(0) written as one nonnegative integrand.
        let direct = ang(&|c| {
            let q = 1.0 - c * c * v2;
            0.5 * nu * ((1.0 + v2) + c * c * (1.0 + 3.0 * v2 * v2 - 8.0 * v2) + c.powi(4) * v2 * (3.0 - v2)) / q.powi(3)
        });
        TaylorData { i1, i, j1, j, transverse_margin: direct }
    }

    /// M(λ) = [[λE, −B_v], [C(λ) + G, λE − F(λ)]] and its determinant both ways.
    pub fn m_matrix(&self, coeffs: &SpectralCoeffs) -> MMatrix {
        let lam = coeffs.lambda;
        let b = self.b_diag();
        let cd = [coeffs.c1, coeffs.c, coeffs.c];
        let fd = [coeffs.f1, coeffs.f, coeffs.f];
        let gd = self.g_diag();
        let mut m = Matrix6::<C64>::zeros();
        for j in 0..3 {
            m[(j, j)] = lam;
            m[(j, j + 3)] = C64::from(-b[j]);
            m[(j + 3, j)] = cd[j] + gd[j];
            m[(j + 3, j + 3)] = lam - fd[j];
        }
        let det_direct = m.determinant();
        let det_factored = coeffs.d1 * coeffs.d * coeffs.d;
        MMatrix {
            lambda: lam,
            matrix: m,
            det_direct,
            det_factored,
            det_gap: (det_direct - det_factored).norm() / det_factored.norm().max(f64::MIN_POSITIVE),
        }
    }

    /// M at λ (on the axis when Re λ = 0, λ ≠ 0).
    pub fn m_matrix_at(&self, lambda: C64) -> Result<MMatrix> {
        let coeffs = if lambda.re == 0.0 && lambda.im != 0.0 {
            self.coeffs_on_axis(lambda.im)?
        } else {
            self.coeffs_at(lambda)?
        };
        Ok(self.m_matrix(&coeffs))
    }

    /// The block structure of M⁻¹(iω + 0).
    pub fn m_inverse_structure(&self, omega: f64) -> Result<MblockInverse> {
        let taylor = self.taylor_at_zero();
        let b = self.b_diag();
        let den0 = [1.0 - taylor.j1 + b[0] * taylor.i1, 1.0 - taylor.j + b[1] * taylor.i];
        for (name, d) in ["1 - J1(0) + nu^3 I1(0)", "1 - J(0) + nu I(0)"].iter().zip(den0) {
            if !(d.abs() > 1e-12) {
                return Err(Error::DenominatorVanishes(format!("{name} = {d:e}")));
            }
        }
        let coeffs = self.coeffs_on_axis(omega)?;
        let mm = self.m_matrix(&coeffs);
        let w = omega;
        let iw = C64::new(0.0, w);
        let g = self.g_diag();
        let cd = [coeffs.c1, coeffs.c, coeffs.c];
        let fd = [coeffs.f1, coeffs.f, coeffs.f];
        let dd = [coeffs.d1, coeffs.d, coeffs.d];
        let diag = |f: &dyn Fn(usize) -> C64| Vector3::from_fn(|j, _| f(j));
        let l11 = diag(&|j| (iw - fd[j]) / dd[j]);
        let l12 = diag(&|j| C64::from(b[j]) / dd[j]);
        let l21 = diag(&|j| -(cd[j] + g[j]) / dd[j]);
        let l22 = diag(&|j| iw / dd[j]);
        let i_w = diag(&|j| -(cd[j] + g[j]) / (w * w));
        let j_w = diag(&|j| fd[j] / iw);
        let den = diag(&|j| 1.0 - j_w[j] + b[j] * i_w[j]);
        let s11 = diag(&|j| I * (j_w[j] - 1.0) / den[j]);
        let s12 = diag(&|j| -b[j] / den[j]);
        let s21 = diag(&|j| -i_w[j] / den[j]);
        let s22 = diag(&|j| -I / den[j]);
        let s3 = diag(&|j| j_w[j] / den[j]);

        let inv = mm.matrix.try_inverse().ok_or_else(|| Error::DenominatorVanishes(format!("M(i{w}) is singular")))?;
        let eye = Matrix6::<C64>::identity();
        let inverse_residual = (mm.matrix * inv - eye).norm();
        let mut block_gap: f64 = 0.0;
        let mut identity_residual: f64 = 0.0;
        for j in 0..3 {
            let n11 = inv[(j, j)];
            let n12 = inv[(j, j + 3)];
            let n21 = inv[(j + 3, j)];
            let n22 = inv[(j + 3, j + 3)];
            for (a, f) in [(n11, l11[j]), (n12, l12[j]), (n21, l21[j]), (n22, l22[j])] {
                block_gap = block_gap.max((a - f).norm() / f.norm().max(f64::MIN_POSITIVE));
            }
            // ℒ₁₁ = iℒ₁₂B_v⁻¹ + iℒ₃ with ℒ₁₁, ℒ₁₂ read off the numerical inverse.
            let cal11 = n11 * w;
            let cal12 = n12 * (w * w);
            let rhs = I * cal12 / b[j] + I * s3[j];
            identity_residual = identity_residual.max((cal11 - rhs).norm() / cal11.norm().max(1e-300));
        }
        let off_block: f64 = (0..6)
            .flat_map(|r| (0..6).map(move |c| (r, c)))
            .filter(|(r, c)| r % 3 != c % 3)
            .map(|(r, c)| inv[(r, c)].norm())
            .fold(0.0, f64::max);
        let norm = inv.svd(false, false).singular_values.max();
        Ok(MblockInverse {
            omega,
            coeffs,
            l11,
            l12,
            l21,
            l22,
            cal11: s11,
            cal12: s12,
            cal21: s21,
            cal22: s22,
            cal3: s3,
            taylor,
            denominators_at_zero: den0,
            inverse_norm: norm,
            inverse_residual,
            block_gap: block_gap.max(off_block),
            identity_residual,
        })
    }
}

/// Extra breakpoints at the oscillation scale of ρ̂.
fn oscillation_breaks(radius: f64, k_max: f64) -> Vec<f64> {
    let step = 2.0 / radius;
    let n = (k_max / step) as usize;
    (1..=n).map(|i| i as f64 * step).collect()
}

fn oscillation_breaks_in(k_max: f64, a: f64, b: f64) -> Vec<f64> {
    let n = 64;
    (1..n).map(|i| k_max * i as f64 / n as f64).filter(|x| *x > a && *x < b).collect()
}

/// Positive roots of Re D̂ = κ²(1 − c²v²) − 2ω(cv)κ + ε² − ω² for λ = ε + iω, where
/// D̂ is nearly singular when ε is small.
fn near_pole_breaks(lambda: C64, cv: f64) -> Vec<f64> {
    let (eps, w) = (lambda.re, lambda.im);
    let a = 1.0 - cv * cv;
    let b = -2.0 * w * cv;
    let c = eps * eps - w * w;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    [(-b + sq) / (2.0 * a), (-b - sq) / (2.0 * a)].into_iter().filter(|x| *x > 0.0).collect()
}

fn unpack(vals: &[C64; NCOEF], out: &mut [f64]) {
    for (j, z) in vals.iter().enumerate() {
        out[2 * j] = z.re;
        out[2 * j + 1] = z.im;
    }
}

fn pack(raw: &[f64]) -> [C64; NCOEF] {
    std::array::from_fn(|j| C64::new(raw[2 * j], raw[2 * j + 1]))
}

/// Axis boundary values with both routes to the singular part.
#[derive(Debug, Clone, Serialize)]
pub struct AxisEvaluation {
    pub omega: f64,
    pub coeffs: SpectralCoeffs,
    /// Order: c₁₁, c₁₂, f₁₁, f₁₂, c₂₂, f₂₂.
    pub principal_value: [C64; NCOEF],
    pub singular_surface: [C64; NCOEF],
    pub singular_radial: [C64; NCOEF],
    /// max |surface − radial| over the largest component.
    pub route_gap: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PositivityReport {
    pub omega: f64,
    /// Im d₁(iω + 0) from the coefficients.
    pub im_d1: f64,
    pub im_d: f64,
    /// The nonnegative surface representations.
    pub surface_im_d1: f64,
    pub surface_im_d: f64,
    pub min_integrand: f64,
    pub route_gap: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TaylorData {
    pub i1: f64,
    pub i: f64,
    pub j1: f64,
    pub j: f64,
    /// −J(0) + νI(0) from its single-integrand form.
    pub transverse_margin: f64,
}

#[derive(Debug, Clone)]
pub struct MMatrix {
    pub lambda: C64,
    pub matrix: Matrix6<C64>,
    pub det_direct: C64,
    pub det_factored: C64,
    pub det_gap: f64,
}

/// M⁻¹(iω) = [[L₁₁, L₁₂], [L₂₁, L₂₂]] = [[ℒ₁₁/ω, ℒ₁₂/ω²], [ℒ₂₁, ℒ₂₂/ω]]; all blocks
/// diagonal and stored as their diagonals.
#[derive(Debug, Clone)]
pub struct MblockInverse {
    pub omega: f64,
    pub coeffs: SpectralCoeffs,
    pub l11: Vector3<C64>,
    pub l12: Vector3<C64>,
    pub l21: Vector3<C64>,
    pub l22: Vector3<C64>,
    pub cal11: Vector3<C64>,
    pub cal12: Vector3<C64>,
    pub cal21: Vector3<C64>,
    pub cal22: Vector3<C64>,
    pub cal3: Vector3<C64>,
    pub taylor: TaylorData,
    /// 1 − J₁(0) + ν³I₁(0) and 1 − J(0) + νI(0).
    pub denominators_at_zero: [f64; 2],
    /// Spectral norm of M⁻¹(iω).
    pub inverse_norm: f64,
    pub inverse_residual: f64,
    /// Largest relative gap between the formula blocks and the numerical inverse.
    pub block_gap: f64,
    /// Relative residual of ℒ₁₁ = iℒ₁₂B_v⁻¹ + iℒ₃.
    pub identity_residual: f64,
}

pub fn coeffs_at(rho: &RadialChargeDensity, v: &Vec3, lambda: C64) -> Result<SpectralCoeffs> {
    SpectralContext::new(rho, v)?.coeffs_at(lambda)
}

pub fn coeffs_on_axis(rho: &RadialChargeDensity, v: &Vec3, omega: f64) -> Result<SpectralCoeffs> {
    SpectralContext::new(rho, v)?.coeffs_on_axis(omega)
}

pub fn m_matrix(rho: &RadialChargeDensity, v: &Vec3, lambda: C64) -> Result<MMatrix> {
    SpectralContext::new(rho, v)?.m_matrix_at(lambda)
}

pub fn m_inverse_structure(rho: &RadialChargeDensity, v: &Vec3, omega: f64) -> Result<MblockInverse> {
    SpectralContext::new(rho, v)?.m_inverse_structure(omega)
}

/// Polynomial extrapolation to ε = 0 of samples (εᵢ, yᵢ) by Neville's scheme.
pub fn richardson_limit(eps: &[f64], ys: &[C64]) -> C64 {
    assert_eq!(eps.len(), ys.len());
    let mut p = ys.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i + 1] * eps[i] - p[i] * eps[i + m]) / (eps[i] - eps[i + m]);
        }
    }
    p[0]
}

/// The ε → 0⁺ limit of coeffs_at(iω + ε) extrapolated from the given ε values.
pub fn off_axis_limit(ctx: &SpectralContext, omega: f64, eps: &[f64]) -> Result<SpectralCoeffs> {
    let samples = eps.iter().map(|e| ctx.coeffs_at(C64::new(*e, omega))).collect::<Result<Vec<_>>>()?;
    let raw: [C64; NCOEF] = std::array::from_fn(|j| {
        let ys: Vec<C64> = samples.iter().map(|s| s.raw()[j]).collect();
        richardson_limit(eps, &ys)
    });
    Ok(SpectralCoeffs::assemble(C64::new(0.0, omega), raw, ctx.g1, ctx.g, ctx.nu))
}

fn cross(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn complexify(x: &[f64; 3]) -> CVec3 {
    [C64::from(x[0]), C64::from(x[1]), C64::from(x[2])]
}

/// Per-mode summands of Φ and Ψ at λ.
fn phi_psi_term(k: &[f64; 3], k2: f64, r: f64, v: &CVec3, lambda: C64, e: &CVec3, a: &CVec3) -> (CVec3, CVec3) {
    let kv = k[0] * v[0].re + k[1] * v[1].re + k[2] * v[2].re;
    let mu = lambda - I * kv;
    let d = k2 + mu * mu;
    let phi = std::array::from_fn(|j| r * (k2 * a[j] + mu * e[j]) / d);
    let at: CVec3 = std::array::from_fn(|j| (mu * a[j] - e[j]) / d);
    let ik = complexify(k).map(|x| I * x);
    let psi = cross(v, &cross(&ik, &at)).map(|x| x * r);
    (phi, psi)
}

/// λ-derivatives of the summands at λ = 0.
fn phi_psi_term_prime(k: &[f64; 3], k2: f64, r: f64, v: &CVec3, e: &CVec3, a: &CVec3) -> (CVec3, CVec3) {
    let kv = k[0] * v[0].re + k[1] * v[1].re + k[2] * v[2].re;
    let mu = C64::new(0.0, -kv);
    let d = k2 + mu * mu;
    let phi = std::array::from_fn(|j| r * (e[j] / d - (k2 * a[j] + mu * e[j]) * 2.0 * mu / (d * d)));
    let at: CVec3 = std::array::from_fn(|j| a[j] / d - (mu * a[j] - e[j]) * 2.0 * mu / (d * d));
    let ik = complexify(k).map(|x| I * x);
    let psi = cross(v, &cross(&ik, &at)).map(|x| x * r);
    (phi, psi)
}

/// Φ(λ) = ⟨ρ, ê(λ)⟩ and Ψ(λ) = ⟨ρ, v ∧ (∇ ∧ â(λ))⟩ for the free resolvent applied to
/// (e₀, a₀), as grid sums. Supported for Re λ > 0 and λ = 0; on the rest of the
/// imaginary axis the grid symbol can vanish on lattice points.
pub fn phi_psi(
    charge: &GridCharge,
    v: &Vec3,
    lambda: C64,
    e0: &SolenoidalField,
    a0: &SolenoidalField,
) -> Result<(Vector3<C64>, Vector3<C64>)> {
    check_velocity(v)?;
    if !(lambda.re > 0.0 || lambda == C64::new(0.0, 0.0)) || !lambda.is_finite() {
        return Err(Error::LambdaOutOfRange(format!("{lambda} (grid sums need Re λ > 0 or λ = 0)")));
    }
    let grid = charge.grid();
    e0.check_grid(a0)?;
    let vc = complexify(&[v[0], v[1], v[2]]);
    let mut phi = [C64::new(0.0, 0.0); 3];
    let mut psi = [C64::new(0.0, 0.0); 3];
    let lc = lambda.conj();
    for (((m, r), e), a) in grid.modes().iter().zip(charge.rho_hat()).zip(e0.coeffs()).zip(a0.coeffs()) {
        // The mode −k contributes the conjugate of the k-summand at conj(λ).
        let (p1, s1) = phi_psi_term(&m.k, m.k2, *r, &vc, lambda, e, a);
        let (p2, s2) = phi_psi_term(&m.k, m.k2, *r, &vc, lc, e, a);
        for j in 0..3 {
            phi[j] += p1[j] + p2[j].conj();
            psi[j] += s1[j] + s2[j].conj();
        }
    }
    let w = 0.5 * grid.pair_weight();
    let w = C64::from(w);
    Ok((Vector3::from(phi) * w, Vector3::from(psi) * w))
}

/// Φ′(0) and Ψ′(0) (real).
pub fn phi_psi_prime_at_zero(
    charge: &GridCharge,
    v: &Vec3,
    e0: &SolenoidalField,
    a0: &SolenoidalField,
) -> Result<(Vec3, Vec3)> {
    check_velocity(v)?;
    e0.check_grid(a0)?;
    let grid = charge.grid();
    let vc = complexify(&[v[0], v[1], v[2]]);
    let mut phi = Vec3::zeros();
    let mut psi = Vec3::zeros();
    for (((m, r), e), a) in grid.modes().iter().zip(charge.rho_hat()).zip(e0.coeffs()).zip(a0.coeffs()) {
        let (p, s) = phi_psi_term_prime(&m.k, m.k2, *r, &vc, e, a);
        for j in 0..3 {
            phi[j] += p[j].re;
            psi[j] += s[j].re;
        }
    }
    let w = grid.pair_weight();
    Ok((phi * w, psi * w))
}

/// The two vector conditions equivalent to Ω(X₀, τⱼ) = 0, j = 1..6.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrthogonalityResiduals {
    /// φ₀ + Φ(0) + Ψ(0), φ₀ = π₀ − ⟨ρ, a₀⟩.
    pub first: Vec3,
    /// Dᵀr₀ + Φ′(0) + Ψ′(0), with D = ∂_v P_v the momentum Jacobian.
    pub second: Vec3,
    /// Ω(X₀, τⱼ), j = 1..3.
    pub omega_position: Vec3,
    /// Ω(X₀, τⱼ), j = 4..6.
    pub omega_velocity: Vec3,
    /// ‖X₀‖ (L² on all components).
    pub norm: f64,
}

impl OrthogonalityResiduals {
    /// Largest residual relative to ‖X₀‖.
    pub fn relative(&self) -> f64 {
        self.first.amax().max(self.second.amax()) / self.norm.max(f64::MIN_POSITIVE)
    }

    /// True when the conditions fail at tolerance `tol`·‖X₀‖.
    pub fn flagged(&self, tol: f64) -> bool {
        self.relative() > tol
    }
}

pub fn orthogonality_conditions(charge: &GridCharge, v: &Vec3, x0: &PhaseVector) -> Result<OrthogonalityResiduals> {
    let f = &x0.fields;
    let (phi, psi) = phi_psi(charge, v, C64::new(0.0, 0.0), &f.e, &f.a)?;
    let (dphi, dpsi) = phi_psi_prime_at_zero(charge, v, &f.e, &f.a)?;
    let phi0 = x0.p - charge.pair(&f.a);
    let dm: Matrix3<f64> = momentum_jacobian(charge, v)?;
    let frame = tangent_frame(charge, v)?;
    Ok(OrthogonalityResiduals {
        first: phi0 + phi.map(|z| z.re) + psi.map(|z| z.re),
        // Dᵀ: on a cubic lattice D is only symmetric up to aliasing when v is off-axis.
        second: dm.transpose() * x0.q + dphi + dpsi,
        omega_position: Vec3::from_fn(|j, _| omega(x0, frame.get(j))),
        omega_velocity: Vec3::from_fn(|j, _| omega(x0, frame.get(j + 3))),
        norm: x0.norm_l2(),
    })
}
