// SPDX-License-Identifier: Apache-2.0

//! A mechanical resonator coupled by radiation pressure to a cavity that sits
//! inside the feedback loop.
//!
//! The linearised coupling is `G (a + a^dag)(b + b^dag)`. Position is
//! `q = (b + b^dag)/sqrt(2)` and the intracavity amplitude quadrature
//! `a + a^dag` drives it.

mod cooling;
mod drive;
pub mod oracle;
mod pulse;
mod response;
mod squeeze;

pub use cooling::{antisquash_optimum, antisquash_phonons, AntiSquashOptimum, CoolingMode, ScatteringRates, Suppression};
pub use drive::{linearize_drive, DriveSolution};
pub use oracle::{oracle_spectra, Observable, Oracle, OracleSpectra};
pub use pulse::{PulseMode, PulseSpec, PulseTrace};
pub use squeeze::{OpenLoopOutputs, OutputRelations, SqueezeOptimization, SqueezeResult};

pub use response::{OmResponses, PositionPsd, ThermalModel};

use crate::cavity::CavityLoop;
use crate::error::{check_finite, check_nonneg, check_positive, Result};
use crate::spectral::{FilterFunction, FlatFilter};

/// Mechanical mode and its linearised coupling to the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalParams {
    pub omega_m: f64,
    pub gamma: f64,
    pub n_th: f64,
    /// Single-photon coupling, when known.
    pub g0: Option<f64>,
    /// Linearised coupling `G = g0 alpha_c`.
    pub coupling: f64,
}

impl MechanicalParams {
    pub fn new(omega_m: f64, gamma: f64, n_th: f64, coupling: f64) -> Result<Self> {
        let m = Self { omega_m, gamma, n_th, g0: None, coupling };
        m.validate()?;
        Ok(m)
    }

    pub fn with_g0(self, g0: f64) -> Result<Self> {
        check_finite("g0", g0)?;
        Ok(Self { g0: Some(g0), ..self })
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("omega_m", self.omega_m)?;
        check_nonneg("gamma", self.gamma)?;
        check_nonneg("n_th", self.n_th)?;
        check_finite("coupling", self.coupling)?;
        if self.gamma >= 0.01 * self.omega_m {
            log::warn!("gamma/omega_m = {:.3e}: the high-Q approximations degrade", self.gamma / self.omega_m);
        }
        Ok(())
    }

    pub fn with_coupling(self, coupling: f64) -> Self {
        Self { coupling, ..self }
    }
}

/// Feedback loop with a mechanical resonator inside the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmLoop<F = FlatFilter> {
    pub lp: CavityLoop<F>,
    pub mech: MechanicalParams,
}

impl<F: FilterFunction> OmLoop<F> {
    pub fn new(lp: CavityLoop<F>, mech: MechanicalParams) -> Result<Self> {
        mech.validate()?;
        Ok(Self { lp, mech })
    }

    pub fn with_gain(&self, gain: f64) -> Self {
        Self { lp: self.lp.with_gain(gain), mech: self.mech }
    }

    pub fn with_coupling(&self, coupling: f64) -> Self
    where
        F: Clone,
    {
        Self { lp: self.lp.clone(), mech: self.mech.with_coupling(coupling) }
    }

    /// `theta_bar_fb - phi_c`: detection angle relative to the intracavity carrier.
    pub(crate) fn theta_rel(&self) -> Result<f64> {
        Ok(self.lp.theta_bar()? - self.lp.cavity.phase())
    }
}
