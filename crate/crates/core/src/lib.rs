//! Maxwell–Lorentz soliton simulation and spectral toolkit.
//!
//! Fields live on a periodic Fourier grid; the particle is a rigid radial charge
//! coupled through its form factor ρ̂.

pub mod charge;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod harness;
pub mod linearized;
pub mod quad;
pub mod soliton;
pub mod spectral;
pub mod state;
pub mod symplectic;

pub use error::{Error, Result};
