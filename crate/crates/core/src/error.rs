// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;
use alloc::vec::Vec;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parameter,
    Instability,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("reflected output phase is undefined (2*kappa1 = kappa at zero detuning)")]
    UndefinedPhase,

    #[error("feedback loop is singular: 1 + 2 sqrt(eta) g cos(theta) vanishes at omega = {omega}")]
    SingularLoop { omega: f64 },

    #[error("loop gain has no real-axis crossing in [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("gain {gain} lies outside the stability window ({lower}, {upper})")]
    OutsideWindow { gain: f64, lower: f64, upper: f64 },

    #[error("feedback loop is unstable: {0}")]
    Unstable(String),

    #[error("effective cavity damping is not positive ({kappa}) at omega = {omega}")]
    NonPositiveDamping { omega: f64, kappa: f64 },

    #[error("net optical damping {gamma} is not positive; the loop heats the resonator")]
    Heating { gamma: f64 },

    #[error("radiation-pressure fixed point is multistable: branches {branches:?}")]
    Multistable { branches: Vec<f64> },

    #[error("step {step} exceeds the limit {limit} set by the delay")]
    StepTooLarge { step: f64, limit: f64 },

    #[error("quadrature budget exhausted: estimate {estimate}, error {error} after {subdivisions} subdivisions")]
    Quadrature { estimate: f64, error: f64, subdivisions: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("singular linear system at omega = {omega}")]
    SingularSystem { omega: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. }
            | Error::UndefinedPhase
            | Error::OutsideWindow { .. }
            | Error::Multistable { .. }
            | Error::StepTooLarge { .. } => ErrorKind::Parameter,
            Error::SingularLoop { .. } | Error::Unstable(_) | Error::NonPositiveDamping { .. } | Error::Heating { .. } => {
                ErrorKind::Instability
            }
            Error::NoCrossing { .. } | Error::Quadrature { .. } | Error::NonFinite(_) | Error::SingularSystem { .. } => {
                ErrorKind::Numerical
            }
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

/// Rejects NaN, infinities and (optionally) negative values.
pub(crate) fn check_finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, "must be finite"))
    }
}

pub(crate) fn check_nonneg(name: &'static str, x: f64) -> Result<()> {
    check_finite(name, x)?;
    if x < 0.0 {
        return Err(Error::param(name, "must be non-negative"));
    }
    Ok(())
}

pub(crate) fn check_positive(name: &'static str, x: f64) -> Result<()> {
    check_finite(name, x)?;
    if x <= 0.0 {
        return Err(Error::param(name, "must be positive"));
    }
    Ok(())
}
