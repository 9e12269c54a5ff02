//! Experiment drivers, fitting and I/O.

pub mod config;
pub mod decay;
pub mod fit;
pub mod io;
pub mod perturb;
pub mod run;
pub mod scatter;

pub use config::{ExperimentConfig, PerturbationKind};
pub use decay::{frozen_decay, local_energy, wave_group_decay, FrozenDecayReport, WaveDecayReport};
pub use fit::{fit_decay, DecayFit};
pub use perturb::{build_perturbation, initial_state};
pub use run::{
    envelope, run_perturbed_soliton, run_perturbed_soliton_on, DecayReport, Estimate, FitOutcome, RunSample,
};
pub use scatter::{extract_scattered_field, scattered_field_at, ScatteringReport};
