// SPDX-License-Identifier: Apache-2.0

//! Feedback from a cavity output back onto its input mirror.
//!
//! The photocurrent from the detected port is filtered and imprinted on the
//! amplitude of the drive entering mirror 1. Detecting in reflection means the
//! detector also sees the modulation directly, which renormalises the filter:
//! `h = g / (1 + 2 sqrt(eta) g cos(theta_bar))`.

mod correlations;
mod effective;
mod stability;

pub use correlations::CorrelationMatrix;
pub use effective::{EffectiveBranch, EffectiveCavity, EffectiveNoise};
pub use stability::{Crossing, StabilityWindow, WindowSpec};

use num_traits::Float;

use crate::error::{Error, Result};
use crate::laser::LaserLoop;
use crate::spectral::{c, CavityParams, FilterFunction, FlatFilter, Port, C64};

const SINGULAR: f64 = 1e-12;

/// Feedback loop around a cavity. `port` is where the feedback detector sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityLoop<F = FlatFilter> {
    pub cavity: CavityParams,
    pub laser: LaserLoop<F>,
    pub port: Port,
}

impl<F: FilterFunction> CavityLoop<F> {
    pub fn new(cavity: CavityParams, laser: LaserLoop<F>, port: Port) -> Result<Self> {
        cavity.validate()?;
        if cavity.kappa1 <= 0.0 {
            return Err(Error::param("kappa1", "feedback mirror must couple to the cavity"));
        }
        if cavity.port_rate(port) <= 0.0 {
            return Err(Error::param("port", "detected port has zero coupling"));
        }
        Ok(Self { cavity, laser, port })
    }

    pub fn with_gain(&self, gain: f64) -> Self {
        Self { laser: LaserLoop::new(self.laser.filter.with_gain(gain), self.laser.detector), ..*self }
    }

    pub fn eta(&self) -> f64 {
        self.laser.detector.eta
    }

    pub fn kappa_fb(&self) -> f64 {
        self.cavity.port_rate(self.port)
    }

    pub fn unused_port(&self) -> Port {
        self.port.other()
    }

    /// Detection phase referred to the drive, `theta_fb + output phase`.
    pub fn theta_bar(&self) -> Result<f64> {
        Ok(self.laser.detector.theta_fb + self.cavity.output_phase(self.port)?)
    }

    /// Response of the `theta_bar` quadrature leaving `port` to the amplitude
    /// quadrature entering mirror 1.
    pub fn port_zeta(&self, port: Port, omega: f64, theta_bar: f64) -> C64 {
        let k = self.cavity.port_rate(port);
        let cav = 2.0 * (k * self.cavity.kappa1).sqrt() * self.cavity.zeta(omega, theta_bar);
        match port {
            Port::Transmission => cav,
            Port::Reflection => cav - theta_bar.cos(),
        }
    }

    pub fn zeta_fb(&self, omega: f64) -> Result<C64> {
        Ok(self.port_zeta(self.port, omega, self.theta_bar()?))
    }

    /// `h / g`.
    pub fn h_ratio(&self, omega: f64) -> Result<C64> {
        match self.port {
            Port::Transmission => Ok(c(1.0)),
            Port::Reflection => {
                let d = c(1.0) + 2.0 * self.eta().sqrt() * self.theta_bar()?.cos() * self.laser.filter.response(omega);
                if d.norm() < SINGULAR {
                    return Err(Error::SingularLoop { omega });
                }
                Ok(d.inv())
            }
        }
    }

    /// Filter renormalised by the direct path to the detector.
    pub fn h(&self, omega: f64) -> Result<C64> {
        Ok(self.laser.filter.response(omega) * self.h_ratio(omega)?)
    }

    fn mu_scale(&self) -> f64 {
        2.0 * (self.kappa_fb() * self.cavity.kappa1 * self.eta()).sqrt()
    }

    /// `mu = 2 sqrt(kappa_fb kappa1 eta) h`: feedback rate fed into the cavity.
    pub fn mu(&self, omega: f64) -> Result<C64> {
        Ok(self.mu_scale() * self.h(omega)?)
    }

    /// `d mu / d omega`.
    pub fn mu_derivative(&self, omega: f64) -> Result<C64> {
        let dg = self.laser.filter.derivative(omega);
        let r = self.h_ratio(omega)?;
        Ok(self.mu_scale() * dg * r * r)
    }

    /// Cavity squashing factor `1 / (1 - 2 mu zeta_c^{theta_bar})`.
    pub fn lambda(&self, omega: f64) -> Result<C64> {
        let tb = self.theta_bar()?;
        let d = c(1.0) - 2.0 * self.mu(omega)? * self.cavity.zeta(omega, tb);
        if d.norm() < SINGULAR {
            return Err(Error::SingularLoop { omega });
        }
        Ok(d.inv())
    }

    /// Open-loop gain; the photocurrent spectrum is `|1 - G|^-2`.
    pub fn loop_gain(&self, omega: f64) -> Result<C64> {
        let tb = self.theta_bar()?;
        let inv_ratio = self.h_ratio(omega)?.inv();
        Ok(c(1.0) - inv_ratio * (c(1.0) - 2.0 * self.mu(omega)? * self.cavity.zeta(omega, tb)))
    }

    /// In-loop photocurrent spectrum, shot-noise units.
    pub fn photocurrent_psd(&self, omega: f64) -> Result<f64> {
        Ok((self.h_ratio(omega)? * self.lambda(omega)?).norm_sqr())
    }

    /// Out-of-loop spectrum of the unused port, quadrature `theta_un` relative
    /// to that port's carrier.
    pub fn outofloop_psd(&self, omega: f64, theta_un: f64) -> Result<f64> {
        let tb = theta_un + self.cavity.output_phase(self.unused_port())?;
        self.outofloop_psd_referenced(omega, tb)
    }

    /// As [`Self::outofloop_psd`] with the quadrature angle referred to the drive.
    pub fn outofloop_psd_referenced(&self, omega: f64, theta_bar_un: f64) -> Result<f64> {
        let z = self.port_zeta(self.unused_port(), omega, theta_bar_un);
        Ok(1.0 + (2.0 * z * self.h(omega)? * self.lambda(omega)?).norm_sqr())
    }

    /// Photocurrent power at the frequency of a weak coherent probe tone of
    /// amplitude `alpha_s` added to the drive at offset `nu`, vacuum noise
    /// neglected.
    pub fn probe_response(&self, nu: f64, alpha_s: f64) -> Result<f64> {
        let direct = match self.port {
            Port::Transmission => 0.0,
            Port::Reflection => 1.0,
        };
        let path = 2.0 * (self.kappa_fb() * self.cavity.kappa1).sqrt() * self.cavity.chi(nu) - direct;
        let loop_ = self.h_ratio(nu)? * self.lambda(nu)?;
        Ok(self.eta() * alpha_s * alpha_s * (loop_ * path).norm_sqr())
    }

    /// `chi_c lambda`: the susceptibility of the cavity inside the loop.
    pub fn effective_susceptibility(&self, omega: f64) -> Result<C64> {
        Ok(self.cavity.chi(omega) * self.lambda(omega)?)
    }
}
