//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::charge::{Profile, RadialChargeDensity};
use crate::dynamics::default_dt;
use crate::error::{Error, Result};
use crate::fields::{FourierGrid, Vec3};
use crate::soliton::{check_velocity, SolitonParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChargeSpec {
    /// The neutral reference profile scaled to `radius`.
    Reference { radius: f64 },
    /// Uniform ball with total charge `charge`.
    Ball { radius: f64, charge: f64 },
    /// Σ cᵢ r²ⁱ (1 − r²/R²)⁴ with the given coefficients.
    Poly { radius: f64, coeffs: Vec<f64> },
}

impl ChargeSpec {
    pub fn radius(&self) -> f64 {
        match self {
            ChargeSpec::Reference { radius } | ChargeSpec::Ball { radius, .. } | ChargeSpec::Poly { radius, .. } => {
                *radius
            }
        }
    }

    pub fn build(&self) -> Result<RadialChargeDensity> {
        let r = self.radius();
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Config(format!("charge radius must be positive, got {r}")));
        }
        Ok(match self {
            ChargeSpec::Reference { radius } => RadialChargeDensity::reference_with_radius(*radius),
            ChargeSpec::Ball { radius, charge } => RadialChargeDensity::ball(*radius, *charge),
            ChargeSpec::Poly { radius, coeffs } => {
                RadialChargeDensity::new(Profile::PolyCutoff { coeffs: coeffs.clone() }, *radius)
            }
        })
    }
}

impl Default for ChargeSpec {
    fn default() -> Self {
        ChargeSpec::Reference { radius: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    /// Half side: the box is [−l, l)³.
    pub l: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 64, l: 32.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    #[default]
    None,
    /// Curl-Gaussian bumps in e and a.
    Bump,
    /// Momentum kick δP.
    Kick,
    /// Position offset δq.
    Offset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    /// Energy norm ‖e‖ + ‖∇a‖ + |r| + |π| after projection.
    pub amplitude: f64,
    /// Bump center relative to the charge.
    pub center: [f64; 3],
    pub width: f64,
    /// Drawn from the seed when absent.
    pub direction: Option<[f64; 3]>,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self { kind: PerturbationKind::None, amplitude: 1e-2, center: [0.0; 3], width: 1.5, direction: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    pub b: [f64; 3],
    pub v: [f64; 3],
    pub perturbation: PerturbationSpec,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self { b: [0.0; 3], v: [0.3, 0.0, 0.0], perturbation: PerturbationSpec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSpec {
    /// Defaults to 0.01·min(1, 2L/(πn)).
    pub dt: Option<f64>,
    /// Defaults to 0.8 of the wrap time.
    pub t_final: Option<f64>,
    pub output_stride: usize,
    pub energy_tol: f64,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self { dt: None, t_final: None, output_stride: 50, energy_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSpec {
    /// β = 4 + δ.
    pub delta: f64,
    /// Defaults to [5, 0.8·T_wrap].
    pub fit_window: Option<[f64; 2]>,
    /// ‖Z‖_{−β} above this is a lost projection.
    pub neighborhood_radius: f64,
    /// Largest admissible max |Ω(Z, τⱼ)|.
    pub projection_tol: f64,
    /// Defaults to four times spread over the fit window.
    pub extraction_times: Option<Vec<f64>>,
    /// Number of times in the fit window at which ‖Ψ(t) − Ψ(t_last)‖ is sampled.
    pub remainder_points: usize,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            delta: 0.25,
            fit_window: None,
            neighborhood_radius: 0.1,
            projection_tol: 1e-9,
            extraction_times: None,
            remainder_points: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub prefix: String,
    /// Write field snapshots at the extraction times.
    pub snapshots: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), prefix: "run".into(), snapshots: false }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub charge: ChargeSpec,
    pub grid: GridConfig,
    pub initial: InitialSpec,
    pub integrator: IntegratorSpec,
    pub analysis: AnalysisSpec,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn beta(&self) -> f64 {
        4.0 + self.analysis.delta
    }

    pub fn density(&self) -> Result<RadialChargeDensity> {
        self.charge.build()
    }

    pub fn grid(&self) -> Result<Arc<FourierGrid>> {
        FourierGrid::new(self.grid.n, self.grid.l)
    }

    pub fn sigma0(&self) -> Result<SolitonParams> {
        SolitonParams::new(Vec3::from(self.initial.b), Vec3::from(self.initial.v))
    }

    pub fn dt(&self) -> Result<f64> {
        match self.integrator.dt {
            Some(dt) => Ok(dt),
            None => Ok(default_dt(&*self.grid()?)),
        }
    }

    /// Radius around the charge that holds the initial data.
    pub fn support_radius(&self) -> f64 {
        let r = self.charge.radius();
        let p = &self.initial.perturbation;
        match p.kind {
            PerturbationKind::Bump => r.max(Vec3::from(p.center).norm() + 4.0 * p.width),
            _ => r,
        }
    }

    /// T_wrap = (L − s)/(1 + |v|) with s the diameter of the data support.
    pub fn wrap_time(&self) -> f64 {
        let s = 2.0 * self.support_radius();
        (self.grid.l - s) / (1.0 + Vec3::from(self.initial.v).norm())
    }

    pub fn t_final(&self) -> f64 {
        self.integrator.t_final.unwrap_or(0.8 * self.wrap_time())
    }

    pub fn fit_window(&self) -> (f64, f64) {
        match self.analysis.fit_window {
            Some([a, b]) => (a, b),
            None => (5.0, 0.8 * self.wrap_time()),
        }
    }

    pub fn extraction_times(&self) -> Vec<f64> {
        match &self.analysis.extraction_times {
            Some(t) => t.clone(),
            None => {
                let (a, b) = self.fit_window();
                Self::spread(a, b.min(self.t_final()), 4)
            }
        }
    }

    /// Times at which the scattering remainder is sampled.
    pub fn remainder_times(&self) -> Vec<f64> {
        let (a, b) = self.fit_window();
        Self::spread(a, b.min(self.t_final()), self.analysis.remainder_points)
    }

    fn spread(a: f64, b: f64, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![b],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let d = self.analysis.delta;
        if !(d > 0.0 && d < 0.5) {
            return bad(format!("delta must lie in (0, 1/2), got {d}"));
        }
        self.charge.build()?;
        self.grid()?;
        check_velocity(&Vec3::from(self.initial.v))?;
        let p = &self.initial.perturbation;
        if !(p.amplitude >= 0.0 && p.amplitude.is_finite()) {
            return bad(format!("perturbation amplitude must be non-negative, got {}", p.amplitude));
        }
        if p.kind == PerturbationKind::Bump && !(p.width > 0.0) {
            return bad(format!("bump width must be positive, got {}", p.width));
        }
        if let Some(dir) = p.direction {
            if Vec3::from(dir).norm() == 0.0 {
                return bad("perturbation direction must be nonzero".into());
            }
        }
        if let Some(dt) = self.integrator.dt {
            if !(dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        let wrap = self.wrap_time();
        if !(wrap > 0.0) {
            return bad(format!("box half side {} is too small for the data support", self.grid.l));
        }
        let t = self.t_final();
        if !(t > 0.0) {
            return bad(format!("t_final must be positive, got {t}"));
        }
        if t > wrap {
            return Err(Error::WrapGuard { t_final: t, limit: wrap });
        }
        let (a, b) = self.fit_window();
        if !(a > 0.0 && b > a) {
            return bad(format!("fit window [{a}, {b}] is empty"));
        }
        if self.integrator.output_stride == 0 {
            return bad("output_stride must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            seed = 7
            [charge]
            family = "ball"
            radius = 2.0
            charge = 1.0
            [initial.perturbation]
            kind = "kick"
            amplitude = 1e-3
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.grid.n, 64);
        assert_eq!(cfg.initial.perturbation.kind, PerturbationKind::Kick);
    }

    #[test]
    fn rejects_bad_values() {
        let e = ExperimentConfig::from_toml_str("[analysis]\ndelta = 0.7").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        let e = ExperimentConfig::from_toml_str("[integrator]\nt_final = 500.0").unwrap_err();
        assert!(matches!(e, Error::WrapGuard { .. }));
        let e = ExperimentConfig::from_toml_str("[grid]\nn = 64\nl = 32.0\nfoo = 1").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }
}
