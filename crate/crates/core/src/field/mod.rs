//! The frequency-modulated electric field, its vector potential, its
//! frequency spectrum, and the modulation-constraint bookkeeping.
//!
//! The field is spatially homogeneous and linearly polarized,
//!
//! ```text
//! E(t) = E0 exp(-t^2 / 2 tau^2) cos(omega t + b sin(omega_m t)),
//! ```
//!
//! with `E0` in units of the critical field and all frequencies/times in
//! electron-mass units. The expression is entire in `t`, which is what the
//! complex-time turning-point machinery relies on.

pub mod bessel;
pub mod potential;
pub mod spectrum;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;

pub use bessel::sideband_theory;
pub use spectrum::{field_spectrum, field_spectrum_with_floor, FieldSpectrum, SpectralPeak};

/// Envelope value below which the integration window is considered closed.
const EDGE_ENVELOPE_BOUND: f64 = 1e-13;

/// The five field parameters plus the numerical time window.
///
/// Single source of physical truth for a run; everything else derives from
/// it. Constructed through [`FieldConfig::new`], which enforces the
/// parameter-range invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig<T> {
    e0: T,
    omega: T,
    tau: T,
    omega_m: T,
    b: T,
    t_span: T,
}

impl<T: Real> FieldConfig<T> {
    /// Build a validated configuration with the default window
    /// `t_span = 8 tau`.
    pub fn new(e0: T, omega: T, tau: T, omega_m: T, b: T) -> Result<Self> {
        Self::with_t_span(e0, omega, tau, omega_m, b, T::of(8.0) * tau, false)
    }

    /// Like [`FieldConfig::new`] but accepting modulation frequencies at or
    /// above the carrier. The slow-modulation regime `omega_m << omega` is
    /// the one of physical interest; this is an explicit override.
    pub fn new_unchecked_modulation(e0: T, omega: T, tau: T, omega_m: T, b: T) -> Result<Self> {
        Self::with_t_span(e0, omega, tau, omega_m, b, T::of(8.0) * tau, true)
    }

    /// Full constructor with an explicit window half-width.
    pub fn with_t_span(
        e0: T,
        omega: T,
        tau: T,
        omega_m: T,
        b: T,
        t_span: T,
        allow_fast_modulation: bool,
    ) -> Result<Self> {
        let zero = T::zero();
        if !(e0 >= zero) || !e0.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "E0 must be finite and >= 0, got {e0}"
            )));
        }
        if !(omega > zero) || !omega.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "omega must be finite and > 0, got {omega}"
            )));
        }
        if !(tau > zero) || !tau.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "tau must be finite and > 0, got {tau}"
            )));
        }
        if !(omega_m >= zero) || !omega_m.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "omega_m must be finite and >= 0, got {omega_m}"
            )));
        }
        if !(b >= zero) || !b.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "b must be finite and >= 0, got {b}"
            )));
        }
        if !allow_fast_modulation && omega_m >= omega {
            return Err(Error::InvalidConfig(format!(
                "omega_m = {omega_m} must be below the carrier omega = {omega} \
                 (use new_unchecked_modulation to override)"
            )));
        }
        if !(t_span > zero) {
            return Err(Error::InvalidConfig(format!(
                "t_span must be > 0, got {t_span}"
            )));
        }
        let edge = (-t_span * t_span / (T::of(2.0) * tau * tau)).exp();
        if edge >= T::of(EDGE_ENVELOPE_BOUND) {
            return Err(Error::InvalidConfig(format!(
                "envelope at the window edge is {edge:e}, above the {EDGE_ENVELOPE_BOUND:e} \
                 bound; increase t_span (>= ~7.74 tau)"
            )));
        }
        Ok(Self {
            e0,
            omega,
            tau,
            omega_m,
            b,
            t_span,
        })
    }

    pub fn e0(&self) -> T {
        self.e0
    }
    pub fn omega(&self) -> T {
        self.omega
    }
    pub fn tau(&self) -> T {
        self.tau
    }
    pub fn omega_m(&self) -> T {
        self.omega_m
    }
    pub fn modulation_depth(&self) -> T {
        self.b
    }
    pub fn t_span(&self) -> T {
        self.t_span
    }

    /// Carrier phase `omega t + b sin(omega_m t)` at complex time.
    #[inline]
    pub fn phase(&self, t: Complex<T>) -> Complex<T> {
        let carrier = t * self.omega;
        if self.b == T::zero() || self.omega_m == T::zero() {
            carrier
        } else {
            carrier + (t * self.omega_m).sin() * self.b
        }
    }

    /// E(t) at complex time. Entire in `t`; real inputs give real outputs.
    #[inline]
    pub fn eval(&self, t: Complex<T>) -> Complex<T> {
        let two = T::of(2.0);
        let env = (-t * t / (two * self.tau * self.tau)).exp();
        env * self.phase(t).cos() * self.e0
    }

    /// E(t) on the real axis. Hot path of the ODE right-hand side.
    #[inline]
    pub fn eval_real(&self, t: T) -> T {
        let env = (-t * t / (T::of(2.0) * self.tau * self.tau)).exp();
        let phase = if self.b == T::zero() || self.omega_m == T::zero() {
            self.omega * t
        } else {
            self.omega * t + self.b * (self.omega_m * t).sin()
        };
        self.e0 * env * phase.cos()
    }

    /// Keldysh adiabaticity parameter `gamma = omega / E0` (natural units).
    pub fn adiabaticity(&self) -> Result<T> {
        if self.e0 == T::zero() {
            return Err(Error::ZeroFieldStrength);
        }
        Ok(self.omega / self.e0)
    }

    /// Time-dependent effective frequency `omega + b sin(omega_m t) / t`,
    /// with the limit value `omega + b omega_m` at `t = 0`.
    pub fn effective_frequency(&self, t: T) -> T {
        self.omega + self.b * self.omega_m * sinc(self.omega_m * t)
    }
}

/// sin(x)/x with the removable singularity filled in.
#[inline]
fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::of(1e-7) {
        // two-term series keeps full accuracy through the crossover
        T::one() - x * x / T::of(6.0)
    } else {
        x.sin() / x
    }
}

/// One level of the modulation constraint `b omega_m <= alpha omega`.
///
/// `alpha < 1` bounds the effective frequency excursion to a fraction of the
/// carrier; the `alpha = 1` line is kept for plotting the boundary of the
/// physically meaningful region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationConstraint<T> {
    alpha: T,
}

impl<T: Real> ModulationConstraint<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::InvalidConfig(format!(
                "constraint level alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Does the point `(omega_m, b)` satisfy this level for carrier `omega`?
    pub fn satisfied(&self, omega_m: T, b: T, omega: T) -> bool {
        b * omega_m <= self.alpha * omega
    }

    /// The dividing curve `b = alpha omega / omega_m`.
    pub fn curve_b(&self, omega_m: T, omega: T) -> T {
        self.alpha * omega / omega_m
    }
}
