//! Spherically symmetric, compactly supported charge densities and their
//! Fourier transforms, plus the neutrality and Wiener diagnostics.

use serde::{Deserialize, Serialize};

use crate::quad::{self, gauss_legendre, AdaptiveOptions};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// (2π)^{-3/2}
pub const FT_NORM: f64 = 0.063_493_635_934_240_97;

/// Radial profile shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    /// ρ₁(r) = Σ cᵢ r²ⁱ · (1 − (r/R)²)⁴ for r < R.
    PolyCutoff { coeffs: Vec<f64> },
    /// ρ₁(r) = h for r < R.
    Ball { height: f64 },
}

/// A radial density ρ(x) = ρ₁(|x|) supported in the ball of radius R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialChargeDensity {
    profile: Profile,
    radius: f64,
    /// Radial moments mₚ = ∫₀^R rᵖ ρ₁ dr for even p = 2, 4, ..., used by the small-k series.
    moments: Vec<f64>,
    /// The r², r⁴, r⁶ moments vanish to tolerance; the series then starts at k⁶.
    #[serde(default)]
    neutral: bool,
}

const SERIES_TERMS: usize = 24;

/// kR below which ρ̂ is summed from its moment series.
const SERIES_SWITCH: f64 = 6.0;

impl RadialChargeDensity {
    pub fn new(profile: Profile, radius: f64) -> Self {
        assert!(radius > 0.0 && radius.is_finite(), "support radius must be positive");
        let mut rho = Self { profile, radius, moments: Vec::new(), neutral: false };
        rho.moments = (0..SERIES_TERMS).map(|j| rho.moment(2 * j + 2)).collect();
        rho.neutral = (0..3).all(|j| rho.moments[j].abs() <= 1e-10 * rho.abs_moment(2 * j + 2));
        rho
    }

    /// The reference neutral profile: a cubic polynomial in r² times the quartic
    /// cutoff, with the r², r⁴, r⁶ moments removed and ‖ρ‖_{L²} = 1.
    pub fn reference() -> Self {
        Self::reference_with_radius(1.0)
    }

    pub fn reference_with_radius(radius: f64) -> Self {
        // Moment matrix M[j][i] = ∫ r^{2+2j} r^{2i} w(r) dr on the unit ball, j = 0..3, i = 0..4.
        let gl = gauss_legendre(64);
        let mom = |p: i32| gl.integrate(0.0, 1.0, |r| r.powi(p) * (1.0 - r * r).powi(4));
        let m = nalgebra::Matrix3::from_fn(|j, i| mom(2 + 2 * j as i32 + 2 * (i as i32 + 1)));
        let rhs = nalgebra::Vector3::from_fn(|j, _| -mom(2 + 2 * j as i32));
        let tail = m.lu().solve(&rhs).expect("moment system of the reference profile is regular");
        let mut coeffs = vec![1.0, tail[0], tail[1], tail[2]];
        let unit = Self::new(Profile::PolyCutoff { coeffs: coeffs.clone() }, 1.0);
        let norm = unit.l2_norm();
        for c in coeffs.iter_mut() {
            *c /= norm;
        }
        Self::new(Profile::PolyCutoff { coeffs }, 1.0).scaled(radius)
    }

    /// Constant density on the ball, normalized to total charge `charge`.
    pub fn ball(radius: f64, charge: f64) -> Self {
        let height = charge / (FOUR_PI / 3.0 * radius.powi(3));
        Self::new(Profile::Ball { height }, radius)
    }

    pub fn zero(radius: f64) -> Self {
        Self::new(Profile::PolyCutoff { coeffs: vec![0.0] }, radius)
    }

    /// ρ_s(x) = s^{-3/2} ρ(x/s) with s = new_radius / R; keeps the L² norm.
    pub fn scaled(&self, new_radius: f64) -> Self {
        let s = new_radius / self.radius;
        let amp = s.powf(-1.5);
        let profile = match &self.profile {
            Profile::PolyCutoff { coeffs } => Profile::PolyCutoff {
                coeffs: coeffs.iter().enumerate().map(|(i, c)| c * amp * s.powi(-2 * i as i32)).collect(),
            },
            Profile::Ball { height } => Profile::Ball { height: height * amp },
        };
        Self::new(profile, new_radius)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn is_neutral(&self) -> bool {
        self.neutral
    }

    /// ρ₁(r).
    pub fn rho1(&self, r: f64) -> f64 {
        if r >= self.radius || r < 0.0 {
            return 0.0;
        }
        match &self.profile {
            Profile::PolyCutoff { coeffs } => {
                let r2 = r * r;
                let poly = coeffs.iter().rev().fold(0.0, |acc, c| acc * r2 + c);
                let w = 1.0 - r2 / (self.radius * self.radius);
                poly * w.powi(4)
            }
            Profile::Ball { height } => *height,
        }
    }

    /// Radial moment ∫₀^R rᵖ ρ₁(r) dr, exact for the polynomial family.
    pub fn moment(&self, p: usize) -> f64 {
        match &self.profile {
            Profile::Ball { height } => height * self.radius.powi(p as i32 + 1) / (p as f64 + 1.0),
            Profile::PolyCutoff { .. } => {
                let gl = gauss_legendre(64);
                gl.integrate(0.0, self.radius, |r| r.powi(p as i32) * self.rho1(r))
            }
        }
    }

    fn abs_moment(&self, p: usize) -> f64 {
        let gl = gauss_legendre(64);
        gl.integrate_composite(0.0, self.radius, 8, |r| r.powi(p as i32) * self.rho1(r).abs())
    }

    /// Total charge ∫ρ d³x.
    pub fn total_charge(&self) -> f64 {
        FOUR_PI * self.moment(2)
    }

    /// ‖ρ‖_{L²(ℝ³)}.
    pub fn l2_norm(&self) -> f64 {
        let gl = gauss_legendre(64);
        (FOUR_PI * gl.integrate(0.0, self.radius, |r| r * r * self.rho1(r).powi(2))).sqrt()
    }

    /// ρ̂(k) = (2π)^{-3/2}·4π ∫₀^R ρ₁(r) r² sinc(kr) dr, a function of |k| only.
    ///
    /// For small kR the transform of a neutral profile is O(k⁶) while the sinc integrand
    /// is O(1), so the series is used there with the vanishing moments dropped.
    pub fn rho_hat(&self, k_mag: f64) -> f64 {
        let k = k_mag.abs();
        let x = k * self.radius;
        if x < SERIES_SWITCH {
            return FT_NORM * FOUR_PI * self.series(k, if self.neutral { 3 } else { 0 });
        }
        if let Profile::Ball { height } = self.profile {
            let r = self.radius;
            return FT_NORM * FOUR_PI * height * ((k * r).sin() - k * r * (k * r).cos()) / k.powi(3);
        }
        let panels = (x / 4.0).ceil() as usize + 1;
        let gl = gauss_legendre(32);
        FT_NORM
            * FOUR_PI
            * gl.integrate_composite(0.0, self.radius, panels, |r| {
                let kr = k * r;
                self.rho1(r) * r * r * kr.sin() / kr
            })
    }

    /// Σ_{j ≥ from} (−1)ʲ k²ʲ m_{2j+2}/(2j+1)!
    fn series(&self, k: f64, from: usize) -> f64 {
        let mut sum = 0.0;
        let k2 = k * k;
        let mut pow = k2.powi(from as i32);
        let mut fact: f64 = (1..=(2 * from + 1)).map(|i| i as f64).product();
        for j in from..SERIES_TERMS {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * pow * self.moments[j] / fact;
            pow *= k2;
            fact *= ((2 * j + 2) * (2 * j + 3)) as f64;
        }
        sum
    }

    /// Contribution of the three lowest moments to ρ̂(k); nonzero only through roundoff
    /// for a neutral profile.
    fn low_moment_part(&self, k: f64) -> f64 {
        let k2 = k * k;
        FT_NORM * FOUR_PI * (self.moments[0] - k2 * self.moments[1] / 6.0 + k2 * k2 * self.moments[2] / 120.0)
    }

    /// Wavenumber of the largest |ρ̂| on a scan of (0, 40/R].
    pub fn peak(&self) -> (f64, f64) {
        let mut best = (0.0, 0.0);
        let n = 4000;
        for i in 1..=n {
            let k = 40.0 / self.radius * i as f64 / n as f64;
            let v = self.rho_hat(k).abs();
            if v > best.1 {
                best = (k, v);
            }
        }
        best
    }

    /// Radius beyond which |ρ̂|² stays below 1e-16 of its peak value on a scan.
    pub fn k_cutoff(&self) -> f64 {
        let (kp, vp) = self.peak();
        if vp == 0.0 {
            return 1.0 / self.radius;
        }
        let step = 0.25 / self.radius;
        let mut last = kp;
        let mut k = kp;
        let limit = 2000.0 / self.radius;
        // The envelope decays monotonically past the peak; stop once it has stayed
        // below threshold over a stretch as long as the retained range.
        while k < limit && k < 2.0 * last + 20.0 / self.radius {
            k += step;
            if self.rho_hat(k).abs() >= 1e-8 * vp {
                last = k;
            }
        }
        last + step
    }
}

/// Piecewise Chebyshev interpolant of ρ̂ on [0, k_max], zero beyond. Used where ρ̂ is
/// needed at many arbitrary wavenumbers (the coefficient integrals).
#[derive(Debug, Clone)]
pub struct RhoHatTable {
    width: f64,
    k_max: f64,
    /// Chebyshev coefficients, one row of `TABLE_DEGREE + 1` per panel.
    coeffs: Vec<[f64; TABLE_DEGREE + 1]>,
}

const TABLE_DEGREE: usize = 20;

impl RhoHatTable {
    pub fn new(rho: &RadialChargeDensity, k_max: f64) -> Self {
        let width = 0.5 / rho.radius();
        let panels = (k_max / width).ceil().max(1.0) as usize;
        let n = TABLE_DEGREE + 1;
        let nodes: Vec<f64> = (0..n).map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos()).collect();
        let coeffs = (0..panels)
            .map(|p| {
                let lo = p as f64 * width;
                let vals: Vec<f64> = nodes.iter().map(|x| rho.rho_hat(lo + 0.5 * width * (x + 1.0))).collect();
                let mut c = [0.0; TABLE_DEGREE + 1];
                for (m, cm) in c.iter_mut().enumerate() {
                    let s: f64 = (0..n)
                        .map(|j| vals[j] * (std::f64::consts::PI * m as f64 * (j as f64 + 0.5) / n as f64).cos())
                        .sum();
                    *cm = 2.0 * s / n as f64;
                }
                c[0] *= 0.5;
                c
            })
            .collect();
        Self { width, k_max: panels as f64 * width, coeffs }
    }

    /// Upper end of the tabulated range.
    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn eval(&self, k: f64) -> f64 {
        let k = k.abs();
        if k >= self.k_max {
            return 0.0;
        }
        let p = ((k / self.width) as usize).min(self.coeffs.len() - 1);
        let x = 2.0 * (k - p as f64 * self.width) / self.width - 1.0;
        let c = &self.coeffs[p];
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for cm in c[1..].iter().rev() {
            let b0 = cm + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        c[0] + x * b1 - b2
    }
}

/// Neutrality diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeutralityReport {
    /// ∫r²ρ₁, ∫r⁴ρ₁, ∫r⁶ρ₁.
    pub moment_residuals: [f64; 3],
    /// ∫rᵖ|ρ₁| used as the scale of each residual.
    pub moment_scales: [f64; 3],
    /// Fitted exponent of |ρ̂(k)| ~ kⁿ at small k, if enough samples clear the roundoff floor.
    pub small_k_order: Option<f64>,
    pub pass: bool,
}

pub fn check_neutrality(rho: &RadialChargeDensity) -> NeutralityReport {
    let residuals = [rho.moment(2), rho.moment(4), rho.moment(6)];
    let scales = [rho.abs_moment(2), rho.abs_moment(4), rho.abs_moment(6)];
    let pass = residuals.iter().zip(&scales).all(|(r, s)| r.abs() <= 1e-10 * s);

    // Small-k order over k ∈ [1e-3, 1e-1]/R, skipping samples where the residual low
    // moments (roundoff for a neutral profile) contribute more than 1% of ρ̂.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let n = 41;
    for i in 0..n {
        let k = 1e-3 * 100f64.powf(i as f64 / (n - 1) as f64) / rho.radius;
        let v = rho.rho_hat(k);
        if v != 0.0 && rho.low_moment_part(k).abs() < 1e-2 * v.abs() {
            xs.push(k.ln());
            ys.push(v.abs().ln());
        }
    }
    let small_k_order = if xs.len() >= 4 { Some(crate::harness::fit::ols(&xs, &ys).0) } else { None };
    NeutralityReport { moment_residuals: residuals, moment_scales: scales, small_k_order, pass }
}

/// Sampled Wiener-condition scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WienerReport {
    pub min_abs: f64,
    pub argmin: f64,
    pub sign_changes: usize,
    /// Wavenumbers bracketing each detected sign change (midpoints).
    pub zeros: Vec<f64>,
    /// ρ̂ vanishes on every sample.
    pub degenerate: bool,
}

pub fn check_wiener(rho: &RadialChargeDensity, k_max: f64, n_samples: usize) -> WienerReport {
    assert!(k_max > 0.0 && n_samples >= 2);
    let k_min = k_max * 1e-4;
    let mut min_abs = f64::INFINITY;
    let mut argmin = k_min;
    let mut zeros = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut any_nonzero = false;
    for i in 0..n_samples {
        let k = k_min * (k_max / k_min).powf(i as f64 / (n_samples - 1) as f64);
        let v = rho.rho_hat(k);
        any_nonzero |= v != 0.0;
        if v.abs() < min_abs {
            min_abs = v.abs();
            argmin = k;
        }
        if let Some((kp, vp)) = prev {
            if vp * v < 0.0 {
                zeros.push(0.5 * (kp + k));
            }
        }
        prev = Some((k, v));
    }
    WienerReport { min_abs, argmin, sign_changes: zeros.len(), zeros, degenerate: !any_nonzero }
}

/// Parseval pair (∫|ρ|² d³x, ∫|ρ̂|² d³k), both computed radially.
pub fn parseval_pair(rho: &RadialChargeDensity) -> crate::error::Result<(f64, f64)> {
    let x_side = rho.l2_norm().powi(2);
    let kmax = 400.0 / rho.radius();
    let (kp, _) = rho.peak();
    let breaks: Vec<f64> = (1..40).map(|i| kp * i as f64 * 0.5).collect();
    let k_side = quad::adaptive(
        |k, out| out[0] = FOUR_PI * k * k * rho.rho_hat(k).powi(2),
        0.0,
        kmax,
        &breaks,
        1,
        AdaptiveOptions { abs_tol: 1e-14, rel_tol: 1e-11, max_intervals: 20000 },
    )?;
    Ok((x_side, k_side.value[0]))
}
