//! Error types shared across the crate.
//!
//! Diagnostics are carried as `f64` regardless of the working scalar so the
//! error type stays non-generic.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("quadrature did not converge on [{a}, {b}]: error {err:.3e} > tol {tol:.3e}")]
    Quadrature { a: f64, b: f64, err: f64, tol: f64 },

    #[error("ODE step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("mode integration failed at p_par = {p_par}: {source}")]
    AtMomentum {
        p_par: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "momentum grid too narrow for density: edge f = ({left:.3e}, {right:.3e}) \
         exceeds {limit:.3e} of max"
    )]
    DomainTooNarrow { left: f64, right: f64, limit: f64 },

    #[error("time {t} outside potential cache (|Re t| <= {t_span}, |Im t| <= {height})")]
    OutsideCache { t: String, t_span: f64, height: f64 },

    #[error("square-root branch tracking lost continuity near t = {at}")]
    BranchTracking { at: String },

    #[error("adiabaticity undefined for E0 = 0")]
    ZeroFieldStrength,

    #[error("region band {0} contains no valid sweep cells")]
    EmptyRegion(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_momentum(p_par: f64, source: Error) -> Self {
        Error::AtMomentum {
            p_par,
            source: Box::new(source),
        }
    }
}
