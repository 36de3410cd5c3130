//! Electron-positron pair production from vacuum in frequency-modulated,
//! spatially homogeneous electric fields.
//!
//! The crate solves the quantum Vlasov equation per canonical-momentum mode
//! for a Gaussian pulse whose carrier phase is sinusoidally modulated,
//!
//! ```text
//! E(t) = E0 exp(-t^2 / 2 tau^2) cos(omega t + b sin(omega_m t)),
//! ```
//!
//! and builds the derived observables on top of the per-mode solver:
//! momentum spectra with multiphoton peak assignments, pair number
//! densities, complex-time turning-point (WKB) analysis, and parameter
//! sweeps over the modulation plane.
//!
//! Everything is expressed in natural units (`hbar = c = 1`, electron mass
//! `m = 1`) with field strengths in units of the critical field, so `e` and
//! `m` drop out of every formula. Core math is generic over the scalar via
//! [`Real`]; `f64` is what the headline numbers and default tolerances
//! assume, with concrete aliases at the crate root.

pub mod error;
pub mod field;
pub mod ode;
pub mod qve;
pub mod real;
pub mod semiclassical;
pub mod spectrum;
pub mod sweep;

pub use error::{Error, Result};
pub use field::{FieldConfig, FieldSpectrum, ModulationConstraint, SpectralPeak};
pub use field::potential::PotentialCache;
pub use qve::{KineticState, ModeSolution, Momentum, QveSolver, Tolerances};
pub use real::Real;
pub use semiclassical::{SearchBox, TurningPoint, TurningPointSet};
pub use spectrum::{GridSpec, MomentumSpectrum, PeakInfo, PhotonAssignment};
pub use sweep::{AxesSpec, RegionClass, RegionExtrema, SweepGrid};

/// Concrete `f64` aliases for the commonly used types.
pub type FieldConfig64 = FieldConfig<f64>;
pub type PotentialCache64 = PotentialCache<f64>;
pub type Momentum64 = Momentum<f64>;
pub type QveSolver64 = QveSolver<f64>;
pub type MomentumSpectrum64 = MomentumSpectrum<f64>;
pub type TurningPointSet64 = TurningPointSet<f64>;
pub type SweepGrid64 = SweepGrid<f64>;

/// Concrete `f32` aliases; quick scans only, the default tolerances
/// assume `f64`.
pub type FieldConfig32 = FieldConfig<f32>;
pub type Momentum32 = Momentum<f32>;
