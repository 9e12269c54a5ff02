//! Truncated Fourier representation of solenoidal vector fields on the periodic
//! box [−L, L)³, the solenoidal projection, weighted norms and the exact free and
//! modified wave groups.
//!
//! Coefficients follow f̂(k) = (2π)^{-3/2} ∫ e^{−ik·x} f(x) dx, so ∂ⱼ acts as ikⱼ and
//! a translation f(x − b) multiplies coefficients by e^{−ik·b}. Fields are real, so
//! only one mode of each ±k pair is stored; the k = 0 mode and the unpaired
//! Nyquist planes are not represented (fields have zero mean).

use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::charge::FT_NORM;
use crate::error::{Error, Result};

pub type CVec3 = [C64; 3];
pub type Vec3 = Vector3<f64>;

pub const CZERO3: CVec3 = [C64::new(0.0, 0.0); 3];

/// One stored wavevector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub m: [i32; 3],
    pub k: [f64; 3],
    pub k2: f64,
    pub kabs: f64,
    /// Flat index of +k and −k in the n³ FFT layout.
    pub idx: usize,
    pub conj: usize,
}

/// Wavevector lattice k ∈ (π/L)ℤ³ with |mᵢ| < n/2.
#[derive(Debug, Clone)]
pub struct FourierGrid {
    n: usize,
    l: f64,
    modes: Vec<Mode>,
}

/// Grid parameters as they appear in configs and snapshot headers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub l: f64,
}

impl FourierGrid {
    pub fn new(n: usize, l: f64) -> Result<Arc<Self>> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n = {n} must be even and at least 4")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidGrid(format!("L = {l} must be positive")));
        }
        let h = n as i32 / 2;
        let dk = std::f64::consts::PI / l;
        let wrap = |m: i32| m.rem_euclid(n as i32) as usize;
        let mut modes = Vec::with_capacity(((n - 1).pow(3) - 1) / 2);
        for mx in (-h + 1)..h {
            for my in (-h + 1)..h {
                for mz in 0..h {
                    let upper = mz > 0 || my > 0 || (my == 0 && mx > 0);
                    if !upper {
                        continue;
                    }
                    let k = [mx as f64 * dk, my as f64 * dk, mz as f64 * dk];
                    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                    let idx = (wrap(mx) * n + wrap(my)) * n + wrap(mz);
                    let conj = (wrap(-mx) * n + wrap(-my)) * n + wrap(-mz);
                    modes.push(Mode { m: [mx, my, mz], k, k2, kabs: k2.sqrt(), idx, conj });
                }
            }
        }
        Ok(Arc::new(Self { n, l, modes }))
    }

    pub fn from_spec(spec: GridSpec) -> Result<Arc<Self>> {
        Self::new(spec.n, spec.l)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { n: self.n, l: self.l }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.l
    }

    /// Physical grid spacing 2L/n.
    pub fn spacing(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    /// Lattice spacing π/L in k.
    pub fn dk(&self) -> f64 {
        std::f64::consts::PI / self.l
    }

    /// Weight of one stored mode in a sum over all of ℤ³: the mode and its conjugate.
    pub fn pair_weight(&self) -> f64 {
        2.0 * self.dk().powi(3)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest retained |kᵢ|.
    pub fn k_max(&self) -> f64 {
        (self.n as f64 / 2.0 - 1.0) * self.dk()
    }

    pub fn same_as(&self, other: &FourierGrid) -> bool {
        self.n == other.n && self.l == other.l
    }

    /// Physical coordinate of grid index j along an axis.
    pub fn coord(&self, j: usize) -> f64 {
        -self.l + j as f64 * self.spacing()
    }

    /// Per-axis tables of e^{−i kₘ s} for m = −n/2+1..n/2−1, indexed by m + n/2.
    pub fn phase_tables(&self, s: Vec3) -> [Vec<C64>; 3] {
        let h = self.n as i32 / 2;
        let dk = self.dk();
        let make = |x: f64| {
            (0..self.n as i32)
                .map(|i| {
                    let m = i - h;
                    C64::from_polar(1.0, -(m as f64) * dk * x)
                })
                .collect::<Vec<_>>()
        };
        [make(s[0]), make(s[1]), make(s[2])]
    }
}

/// e^{−ik·s} assembled from the per-axis tables.
#[inline]
pub fn phase_of(tables: &[Vec<C64>; 3], mode: &Mode, n: usize) -> C64 {
    let h = n as i32 / 2;
    tables[0][(mode.m[0] + h) as usize] * tables[1][(mode.m[1] + h) as usize] * tables[2][(mode.m[2] + h) as usize]
}

#[inline]
pub fn cdot_re(a: &CVec3, b: &CVec3) -> f64 {
    (a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]).re
}

#[inline]
pub fn k_dot(k: &[f64; 3], c: &CVec3) -> C64 {
    c[0] * k[0] + c[1] * k[1] + c[2] * k[2]
}

#[inline]
pub fn norm2(c: &CVec3) -> f64 {
    c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr()
}

/// Π̂ₛ(k)c = c − (c·k)k/k².
#[inline]
pub fn project_mode(k: &[f64; 3], k2: f64, c: &CVec3) -> CVec3 {
    let s = k_dot(k, c) / k2;
    [c[0] - s * k[0], c[1] - s * k[1], c[2] - s * k[2]]
}

/// Π̂ₛ(k)u for a real vector u.
#[inline]
pub fn project_real(k: &[f64; 3], k2: f64, u: &Vec3) -> [f64; 3] {
    let s = (k[0] * u[0] + k[1] * u[1] + k[2] * u[2]) / k2;
    [u[0] - s * k[0], u[1] - s * k[1], u[2] - s * k[2]]
}

/// A real, divergence-free vector field.
#[derive(Debug, Clone)]
pub struct SolenoidalField {
    grid: Arc<FourierGrid>,
    coeffs: Vec<CVec3>,
}

impl SolenoidalField {
    pub fn zeros(grid: &Arc<FourierGrid>) -> Self {
        Self { grid: grid.clone(), coeffs: vec![CZERO3; grid.len()] }
    }

    /// Wraps coefficients that are already transversal.
    pub fn from_transversal(grid: &Arc<FourierGrid>, coeffs: Vec<CVec3>) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count does not match grid");
        Self { grid: grid.clone(), coeffs }
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[CVec3] {
        &self.coeffs
    }

    /// Direct coefficient access; callers keep the transversality invariant.
    pub fn coeffs_mut(&mut self) -> &mut [CVec3] {
        &mut self.coeffs
    }

    pub fn check_grid(&self, other: &SolenoidalField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "n={} L={} vs n={} L={}",
                self.grid.n, self.grid.l, other.grid.n, other.grid.l
            )))
        }
    }

    /// ⟨f, g⟩ = ∫ f·g dx via Parseval.
    pub fn inner(&self, other: &SolenoidalField) -> f64 {
        let s: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| cdot_re(a, b)).sum();
        s * self.grid.pair_weight()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// ‖∇f‖_{L²}.
    pub fn grad_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().zip(self.grid.modes()).map(|(c, m)| m.k2 * norm2(c)).sum();
        (s * self.grid.pair_weight()).sqrt()
    }

    /// Largest |k·c(k)|/|c(k)| over the stored modes.
    pub fn transversality_residual(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.grid.modes())
            .map(|(c, m)| {
                let n = norm2(c).sqrt();
                if n == 0.0 {
                    0.0
                } else {
                    k_dot(&m.k, c).norm() / (m.kabs * n)
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn scale(&mut self, s: f64) {
        for c in self.coeffs.iter_mut() {
            for x in c.iter_mut() {
                *x *= s;
            }
        }
    }

    /// self += s·other
    pub fn axpy(&mut self, s: f64, other: &SolenoidalField) {
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for i in 0..3 {
                c[i] += o[i] * s;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn sub(&self, other: &SolenoidalField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Multiplies coefficients by e^{−ik·b}: the field translated by b.
    pub fn translated(&self, b: Vec3) -> Self {
        let tables = self.grid.phase_tables(b);
        let n = self.grid.n;
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.grid.modes())
            .map(|(c, m)| {
                let p = phase_of(&tables, m, n);
                [c[0] * p, c[1] * p, c[2] * p]
            })
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// (w·∇)f, spectrally.
    pub fn directional_derivative(&self, w: &Vec3) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.grid.modes())
            .map(|(c, m)| {
                let f = C64::new(0.0, m.k[0] * w[0] + m.k[1] * w[1] + m.k[2] * w[2]);
                [c[0] * f, c[1] * f, c[2] * f]
            })
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// Real physical-space samples of the three components on the n³ grid.
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let per_mode: Vec<CVec3> = self.coeffs.clone();
        let grid = &self.grid;
        let mut out: [Vec<f64>; 3] = Default::default();
        for (comp, slot) in out.iter_mut().enumerate() {
            *slot = synthesize(grid, per_mode.iter().map(|c| c[comp]));
        }
        out
    }

    /// Weighted norm ‖(1+|x|)^α f‖_{L²}, plus ‖(1+|x|)^α ∇f‖ when `order == 1`.
    pub fn norm_weighted(&self, alpha: f64, order: u8) -> f64 {
        let grid = &self.grid;
        let weight = physical_weight(grid, alpha);
        let h3 = grid.spacing().powi(3);
        let weighted =
            |samples: &[f64]| -> f64 { samples.iter().zip(&weight).map(|(s, w)| (s * w).powi(2)).sum::<f64>() };
        let mut total0 = 0.0;
        for comp in 0..3 {
            let s = synthesize(grid, self.coeffs.iter().map(|c| c[comp]));
            total0 += weighted(&s);
        }
        let mut norm = (total0 * h3).sqrt();
        if order >= 1 {
            let mut total1 = 0.0;
            for comp in 0..3 {
                for dir in 0..3 {
                    let s = synthesize(
                        grid,
                        self.coeffs.iter().zip(grid.modes()).map(|(c, m)| c[comp] * C64::new(0.0, m.k[dir])),
                    );
                    total1 += weighted(&s);
                }
            }
            norm += (total1 * h3).sqrt();
        }
        norm
    }
}

/// Projects raw per-mode vectors onto transversal fields.
pub fn project_solenoidal(grid: &Arc<FourierGrid>, raw: &[CVec3]) -> SolenoidalField {
    assert_eq!(raw.len(), grid.len());
    let coeffs = raw.iter().zip(grid.modes()).map(|(c, m)| project_mode(&m.k, m.k2, c)).collect();
    SolenoidalField { grid: grid.clone(), coeffs }
}

/// Builds a field from real physical samples (component-major, n³ each) by forward
/// transform, discarding the mean and Nyquist planes, then projects it.
pub fn from_physical(grid: &Arc<FourierGrid>, samples: &[Vec<f64>; 3]) -> SolenoidalField {
    let n = grid.n;
    let mut raw = vec![CZERO3; grid.len()];
    let scale = FT_NORM * grid.spacing().powi(3);
    for comp in 0..3 {
        let mut data: Vec<C64> = samples[comp].iter().map(|x| C64::new(*x, 0.0)).collect();
        fft3(&mut data, n, false);
        for (r, m) in raw.iter_mut().zip(grid.modes()) {
            let sign = if (m.m[0] + m.m[1] + m.m[2]).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            r[comp] = data[m.idx] * (scale * sign);
        }
    }
    project_solenoidal(grid, &raw)
}

/// Inverse transform of one scalar component given per stored mode.
pub fn synthesize<I: Iterator<Item = C64>>(grid: &FourierGrid, values: I) -> Vec<f64> {
    let n = grid.n;
    let mut data = vec![C64::new(0.0, 0.0); n * n * n];
    let scale = FT_NORM * grid.dk().powi(3);
    for (v, m) in values.zip(grid.modes()) {
        let sign = if (m.m[0] + m.m[1] + m.m[2]).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let c = v * (scale * sign);
        data[m.idx] = c;
        data[m.conj] = c.conj();
    }
    fft3(&mut data, n, true);
    data.into_iter().map(|c| c.re).collect()
}

/// (1+|x|)^α on the physical grid.
pub fn physical_weight(grid: &FourierGrid, alpha: f64) -> Vec<f64> {
    let n = grid.n;
    let mut w = Vec::with_capacity(n * n * n);
    for i in 0..n {
        let x = grid.coord(i);
        for j in 0..n {
            let y = grid.coord(j);
            for l in 0..n {
                let z = grid.coord(l);
                w.push((1.0 + (x * x + y * y + z * z).sqrt()).powf(alpha));
            }
        }
    }
    w
}

/// Unnormalized 3-D FFT in place on an n³ row-major array (z fastest).
/// `inverse` uses the e^{+} kernel.
pub fn fft3(data: &mut [C64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    // z lines are contiguous.
    for line in data.chunks_mut(n) {
        fft.process(line);
    }
    let mut buf = vec![C64::new(0.0, 0.0); n];
    // y lines.
    for i in 0..n {
        for l in 0..n {
            for j in 0..n {
                buf[j] = data[(i * n + j) * n + l];
            }
            fft.process(&mut buf);
            for j in 0..n {
                data[(i * n + j) * n + l] = buf[j];
            }
        }
    }
    // x lines.
    for j in 0..n {
        for l in 0..n {
            for i in 0..n {
                buf[i] = data[(i * n + j) * n + l];
            }
            fft.process(&mut buf);
            for i in 0..n {
                data[(i * n + j) * n + l] = buf[i];
            }
        }
    }
}

/// Electric field and vector potential on a common grid.
#[derive(Debug, Clone)]
pub struct FieldPair {
    pub e: SolenoidalField,
    pub a: SolenoidalField,
}

impl FieldPair {
    pub fn new(e: SolenoidalField, a: SolenoidalField) -> Result<Self> {
        e.check_grid(&a)?;
        Ok(Self { e, a })
    }

    pub fn zeros(grid: &Arc<FourierGrid>) -> Self {
        Self { e: SolenoidalField::zeros(grid), a: SolenoidalField::zeros(grid) }
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        self.e.grid()
    }

    /// ½(‖E‖² + ‖∇A‖²).
    pub fn energy(&self) -> f64 {
        0.5 * (self.e.inner(&self.e) + self.a.grad_norm().powi(2))
    }

    /// ‖E‖ + ‖∇A‖.
    pub fn norm_f(&self) -> f64 {
        self.e.l2_norm() + self.a.grad_norm()
    }

    /// ‖E‖_{0,α+1} + ‖A‖_{1,α}.
    pub fn norm_weighted(&self, alpha: f64) -> f64 {
        self.e.norm_weighted(alpha + 1.0, 0) + self.a.norm_weighted(alpha, 1)
    }

    pub fn axpy(&mut self, s: f64, other: &FieldPair) {
        self.e.axpy(s, &other.e);
        self.a.axpy(s, &other.a);
    }

    pub fn scale(&mut self, s: f64) {
        self.e.scale(s);
        self.a.scale(s);
    }

    pub fn sub(&self, other: &FieldPair) -> FieldPair {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn translated(&self, b: Vec3) -> FieldPair {
        FieldPair { e: self.e.translated(b), a: self.a.translated(b) }
    }

    /// W⁰(t): exact free Maxwell evolution in the transverse gauge.
    pub fn free_wave_group(&self, t: f64) -> FieldPair {
        self.modified_wave_group(&Vec3::zeros(), t)
    }

    /// W(t) for Ḟ = ((v·∇)e − Δa, −e + (v·∇)a): per mode e^{μt} times the free rotation,
    /// μ = ik·v.
    pub fn modified_wave_group(&self, v: &Vec3, t: f64) -> FieldPair {
        let mut out = self.clone();
        let grid = self.grid().clone();
        let (e_out, a_out) = (&mut out.e.coeffs, &mut out.a.coeffs);
        for (i, m) in grid.modes().iter().enumerate() {
            let r = WaveRotation::new(m, v, t);
            let (e, a) = r.apply(&e_out[i], &a_out[i]);
            e_out[i] = e;
            a_out[i] = a;
        }
        out
    }
}

/// The per-mode 2×2 propagator of the modified wave generator.
#[derive(Debug, Clone, Copy)]
pub struct WaveRotation {
    pub ee: C64,
    pub ea: C64,
    pub ae: C64,
    pub aa: C64,
}

impl WaveRotation {
    #[inline]
    pub fn new(m: &Mode, v: &Vec3, t: f64) -> Self {
        let kv = m.k[0] * v[0] + m.k[1] * v[1] + m.k[2] * v[2];
        let ph = C64::from_polar(1.0, kv * t);
        let (s, c) = (m.kabs * t).sin_cos();
        Self { ee: ph * c, ea: ph * (m.kabs * s), ae: ph * (-s / m.kabs), aa: ph * c }
    }

    #[inline]
    pub fn apply(&self, e: &CVec3, a: &CVec3) -> (CVec3, CVec3) {
        let mut eo = CZERO3;
        let mut ao = CZERO3;
        for i in 0..3 {
            eo[i] = self.ee * e[i] + self.ea * a[i];
            ao[i] = self.ae * e[i] + self.aa * a[i];
        }
        (eo, ao)
    }
}

/// Cached [`WaveRotation`]s for a fixed step, applied in place.
#[derive(Debug, Clone)]
pub struct WavePropagator {
    rot: Vec<WaveRotation>,
}

impl WavePropagator {
    pub fn new(grid: &FourierGrid, v: &Vec3, t: f64) -> Self {
        Self { rot: grid.modes().iter().map(|m| WaveRotation::new(m, v, t)).collect() }
    }

    pub fn apply(&self, f: &mut FieldPair) {
        let (e, a) = (&mut f.e.coeffs, &mut f.a.coeffs);
        for ((r, ei), ai) in self.rot.iter().zip(e.iter_mut()).zip(a.iter_mut()) {
            let (en, an) = r.apply(ei, ai);
            *ei = en;
            *ai = an;
        }
    }
}

/// curl of c·g(x − x₀) with g the Gaussian of width s: a smooth, rapidly decaying
/// solenoidal field. Coefficients: ik × c · s³ e^{−k²s²/2} e^{−ik·x₀}.
pub fn curl_gaussian(grid: &Arc<FourierGrid>, center: Vec3, width: f64, c: Vec3) -> SolenoidalField {
    let tables = grid.phase_tables(center);
    let n = grid.n;
    let coeffs = grid
        .modes()
        .iter()
        .map(|m| {
            let g = width.powi(3) * (-0.5 * m.k2 * width * width).exp();
            let p = phase_of(&tables, m, n) * C64::new(0.0, g);
            let k = m.k;
            [p * (k[1] * c[2] - k[2] * c[1]), p * (k[2] * c[0] - k[0] * c[2]), p * (k[0] * c[1] - k[1] * c[0])]
        })
        .collect();
    SolenoidalField { grid: grid.clone(), coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_count_and_pairing() {
        let g = FourierGrid::new(8, 2.0).unwrap();
        assert_eq!(g.len(), (7 * 7 * 7 - 1) / 2);
        for m in g.modes() {
            assert_ne!(m.idx, m.conj);
            assert!(m.k2 > 0.0);
        }
    }

    #[test]
    fn physical_round_trip() {
        let g = FourierGrid::new(16, 3.0).unwrap();
        let f = curl_gaussian(&g, Vec3::new(0.2, -0.1, 0.3), 0.6, Vec3::new(1.0, 0.5, -0.2));
        let phys = f.to_physical();
        let back = from_physical(&g, &phys);
        let diff = f.sub(&back).l2_norm();
        assert!(diff < 1e-12 * f.l2_norm(), "{diff}");
    }
}
