// SPDX-License-Identifier: Apache-2.0

//! Cavity and mechanical susceptibilities, feedback filters, and the
//! quadrature-projected responses built from them.
//!
//! Fourier convention: `x(omega) = (2 pi)^(-1/2) \int dt e^{i omega t} x(t)`, so a
//! field oscillating as `e^{-i w t}` lives at positive frequency `w`. All rates
//! are angular and share one unit; the library never assumes which.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{check_nonneg, check_positive, Error, Result};

pub type C64 = Complex64;

#[inline]
pub(crate) fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Phase reduced to `(-pi, pi]`.
pub(crate) fn wrap_phase(x: f64) -> f64 {
    let tau = 2.0 * core::f64::consts::PI;
    let y = x - tau * ((x + 0.5 * tau) / tau).floor();
    if y <= -0.5 * tau {
        y + tau
    } else {
        y
    }
}

/// Decay rates of a two-port cavity with extra loss, and the drive detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Coupling through mirror 1 (the port that receives the feedback).
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa_loss: f64,
    pub detuning: f64,
}

/// Output port of a two-port cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    /// Light leaving through mirror 1, mixed with the promptly reflected drive.
    Reflection,
    /// Light leaving through mirror 2.
    Transmission,
}

impl Port {
    pub fn other(self) -> Port {
        match self {
            Port::Reflection => Port::Transmission,
            Port::Transmission => Port::Reflection,
        }
    }
}

impl CavityParams {
    pub fn new(kappa1: f64, kappa2: f64, kappa_loss: f64, detuning: f64) -> Result<Self> {
        let p = Self { kappa1, kappa2, kappa_loss, detuning };
        p.validate()?;
        Ok(p)
    }

    /// One-sided cavity: all decay through mirror 1.
    pub fn single_sided(kappa: f64, detuning: f64) -> Result<Self> {
        Self::new(kappa, 0.0, 0.0, detuning)
    }

    pub fn validate(&self) -> Result<()> {
        check_nonneg("kappa1", self.kappa1)?;
        check_nonneg("kappa2", self.kappa2)?;
        check_nonneg("kappa_loss", self.kappa_loss)?;
        check_positive("kappa", self.kappa())?;
        if !self.detuning.is_finite() {
            return Err(Error::param("detuning", "must be finite"));
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa1 + self.kappa2 + self.kappa_loss
    }

    pub fn port_rate(&self, port: Port) -> f64 {
        match port {
            Port::Reflection => self.kappa1,
            Port::Transmission => self.kappa2,
        }
    }

    /// `chi_c(omega) = 1 / (kappa + i(Delta - omega))`.
    pub fn chi(&self, omega: f64) -> C64 {
        C64::new(self.kappa(), self.detuning - omega).inv()
    }

    /// `(e^{-i theta} chi_c(omega) + e^{i theta} chi_c(-omega)^*) / 2`: the
    /// response of the `theta` quadrature of the intracavity field.
    pub fn zeta(&self, omega: f64, theta: f64) -> C64 {
        0.5 * (cis(-theta) * self.chi(omega) + cis(theta) * self.chi(-omega).conj())
    }

    /// Phase of the transmitted field relative to the drive, `arg(kappa - i Delta)`.
    pub fn phase(&self) -> f64 {
        (-self.detuning).atan2(self.kappa())
    }

    /// Extra phase of the reflected field, `arg(2 kappa1 - kappa - i Delta)`.
    ///
    /// Undefined for an impedance-matched cavity on resonance, where the
    /// reflected carrier vanishes.
    pub fn reflection_phase(&self) -> Result<f64> {
        let x = 2.0 * self.kappa1 - self.kappa();
        if x == 0.0 && self.detuning == 0.0 {
            return Err(Error::UndefinedPhase);
        }
        Ok((-self.detuning).atan2(x))
    }

    /// Carrier phase of the light leaving `port`.
    pub fn output_phase(&self, port: Port) -> Result<f64> {
        match port {
            Port::Transmission => Ok(self.phase()),
            Port::Reflection => Ok(self.phase() + self.reflection_phase()?),
        }
    }
}

/// `chi_m(omega) = 1 / (gamma/2 + i(omega_m - omega))`.
pub fn chi_m(omega: f64, omega_m: f64, gamma: f64) -> C64 {
    C64::new(0.5 * gamma, omega_m - omega).inv()
}

/// Position response `i (chi_m(omega) - chi_m(-omega)^*) / 2`.
pub fn zeta_m(omega: f64, omega_m: f64, gamma: f64) -> C64 {
    C64::i() * 0.5 * (chi_m(omega, omega_m, gamma) - chi_m(-omega, omega_m, gamma).conj())
}

/// High-Q form `omega_m / (omega_m^2 - omega^2 - i omega gamma)`.
pub fn zeta_m_high_q(omega: f64, omega_m: f64, gamma: f64) -> C64 {
    c(omega_m) / C64::new(omega_m * omega_m - omega * omega, -omega * gamma)
}

/// A linear feedback filter `g(omega)` acting on the photocurrent.
pub trait FilterFunction {
    fn response(&self, omega: f64) -> C64;

    /// Overall gain prefactor; the response is linear in it.
    fn gain(&self) -> f64;

    /// Same filter with a different gain prefactor.
    fn with_gain(&self, gain: f64) -> Self
    where
        Self: Sized;

    /// Pure transport delay contained in the response, if any.
    fn delay(&self) -> f64 {
        0.0
    }

    /// `d g / d omega`. The default is a central difference.
    fn derivative(&self, omega: f64) -> C64 {
        let h = 1e-6 * (1.0 + omega.abs());
        (self.response(omega + h) - self.response(omega - h)) / (2.0 * h)
    }

    /// No response before the input arrives.
    fn is_causal(&self) -> bool;

    /// `g(-omega)^* = g(omega)`: maps real signals to real signals.
    fn is_conjugate_symmetric(&self) -> bool;
}

/// Flat gain with a delay and a constant phase offset,
/// `g(omega) = gain * e^{i(omega tau + phi sign(omega))}` with `sign(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatFilter {
    pub gain: f64,
    pub delay: f64,
    pub phase_offset: f64,
}

impl FlatFilter {
    pub fn new(gain: f64, delay: f64, phase_offset: f64) -> Result<Self> {
        if !gain.is_finite() {
            return Err(Error::param("gain", "must be finite"));
        }
        check_nonneg("delay", delay)?;
        if !phase_offset.is_finite() {
            return Err(Error::param("phase_offset", "must be finite"));
        }
        Ok(Self { gain, delay, phase_offset })
    }

    fn sign(omega: f64) -> f64 {
        if omega > 0.0 {
            1.0
        } else if omega < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

impl FilterFunction for FlatFilter {
    fn response(&self, omega: f64) -> C64 {
        self.gain * cis(omega * self.delay + self.phase_offset * Self::sign(omega))
    }

    fn gain(&self) -> f64 {
        self.gain
    }

    fn with_gain(&self, gain: f64) -> Self {
        Self { gain, ..*self }
    }

    fn delay(&self) -> f64 {
        self.delay
    }

    fn derivative(&self, omega: f64) -> C64 {
        C64::i() * self.delay * self.response(omega)
    }

    fn is_causal(&self) -> bool {
        self.phase_offset == 0.0
    }

    fn is_conjugate_symmetric(&self) -> bool {
        true
    }
}

/// Delay followed by a single-pole low-pass,
/// `g(omega) = gain * e^{i omega tau} / (1 - i omega / omega_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayedLowPass {
    pub gain: f64,
    pub delay: f64,
    pub cutoff: f64,
}

impl DelayedLowPass {
    pub fn new(gain: f64, delay: f64, cutoff: f64) -> Result<Self> {
        if !gain.is_finite() {
            return Err(Error::param("gain", "must be finite"));
        }
        check_nonneg("delay", delay)?;
        check_positive("cutoff", cutoff)?;
        Ok(Self { gain, delay, cutoff })
    }
}

impl FilterFunction for DelayedLowPass {
    fn response(&self, omega: f64) -> C64 {
        self.gain * cis(omega * self.delay) / C64::new(1.0, -omega / self.cutoff)
    }

    fn gain(&self) -> f64 {
        self.gain
    }

    fn with_gain(&self, gain: f64) -> Self {
        Self { gain, ..*self }
    }

    fn delay(&self) -> f64 {
        self.delay
    }

    fn derivative(&self, omega: f64) -> C64 {
        let d = C64::new(1.0, -omega / self.cutoff);
        let g = self.response(omega);
        g * (C64::i() * self.delay + C64::i() / (self.cutoff * d))
    }

    fn is_causal(&self) -> bool {
        true
    }

    fn is_conjugate_symmetric(&self) -> bool {
        true
    }
}

/// Complex samples on a frequency grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexSpectrum {
    pub omega: Vec<f64>,
    pub values: Vec<C64>,
}

impl ComplexSpectrum {
    pub fn sample<F: FnMut(f64) -> C64>(omega: &[f64], mut f: F) -> Self {
        Self { omega: omega.to_vec(), values: omega.iter().map(|&w| f(w)).collect() }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn norm_sqr(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}
