// SPDX-License-Identifier: Apache-2.0

//! Amplitude feedback on a laser beam: homodyne detection of part of the beam
//! drives a modulator upstream of the beam splitter.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{check_finite, Error, Result};
use crate::spectral::{c, cis, FilterFunction, FlatFilter, C64};

/// Detection efficiency and the homodyne phase of the feedback detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Overall efficiency, including the electronic-noise penalty.
    pub eta: f64,
    pub theta_fb: f64,
    /// Bare detector efficiency, when `eta` was derived from it.
    pub eta_d: Option<f64>,
    /// Electronic noise relative to shot noise, when `eta` was derived from it.
    pub noise_ratio: Option<f64>,
}

impl DetectorParams {
    pub fn new(eta: f64, theta_fb: f64) -> Result<Self> {
        check_finite("eta", eta)?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::param("eta", "must lie in [0, 1]"));
        }
        check_finite("theta_fb", theta_fb)?;
        Ok(Self { eta, theta_fb, eta_d: None, noise_ratio: None })
    }

    /// Electronic noise `noise_ratio` times shot noise acts like a further
    /// beam splitter: `eta = eta_d / (1 + noise_ratio)`.
    pub fn with_electronic_noise(eta_d: f64, noise_ratio: f64, theta_fb: f64) -> Result<Self> {
        check_finite("noise_ratio", noise_ratio)?;
        if noise_ratio < 0.0 {
            return Err(Error::param("noise_ratio", "must be non-negative"));
        }
        let mut d = Self::new(eta_d / (1.0 + noise_ratio), theta_fb)?;
        d.eta_d = Some(eta_d);
        d.noise_ratio = Some(noise_ratio);
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
    /// Zero effective gain: the spectrum is flat.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub n: u32,
    pub omega: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserStability {
    pub stable: bool,
    /// `1/(2 sqrt(eta)) - |gain cos(theta)|`; negative when unstable.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserLoop<F = FlatFilter> {
    pub filter: F,
    pub detector: DetectorParams,
}

impl<F: FilterFunction> LaserLoop<F> {
    pub fn new(filter: F, detector: DetectorParams) -> Self {
        Self { filter, detector }
    }

    fn loop_factor(&self) -> f64 {
        2.0 * self.detector.eta.sqrt() * self.detector.theta_fb.cos()
    }

    /// `lambda(omega) = 1 / (1 - 2 sqrt(eta) g(omega) cos(theta))`.
    pub fn squash_factor(&self, omega: f64) -> C64 {
        (c(1.0) - self.loop_factor() * self.filter.response(omega)).inv()
    }

    /// In-loop photocurrent spectrum in shot-noise units, `|lambda|^2`.
    pub fn photocurrent_psd(&self, omega: f64) -> f64 {
        self.squash_factor(omega).norm_sqr()
    }

    /// Spectrum of the in-loop quadrature at angle `quadrature` relative to
    /// the carrier, including the vacuum entering at the beam splitter.
    pub fn inloop_quadrature_psd(&self, omega: f64, quadrature: f64) -> f64 {
        let eta = self.detector.eta;
        let g = self.filter.response(omega);
        let lam = self.squash_factor(omega);
        let cp = quadrature.cos();
        let direct = c(1.0) + 2.0 * eta.sqrt() * cp * g * lam * cis(quadrature - self.detector.theta_fb);
        direct.norm_sqr() + 4.0 * (1.0 - eta) * cp * cp * (g * lam).norm_sqr()
    }

    /// The loop runs away once `|gain cos(theta)|` reaches `1/(2 sqrt(eta))`.
    pub fn stability(&self) -> LaserStability {
        let eta = self.detector.eta;
        let drive = (self.filter.gain() * self.detector.theta_fb.cos()).abs();
        let limit = if eta > 0.0 { 0.5 / eta.sqrt() } else { f64::INFINITY };
        LaserStability { stable: drive < limit, margin: limit - drive }
    }
}

impl LaserLoop<FlatFilter> {
    /// The flat-filter spectrum written out in real form.
    pub fn photocurrent_psd_closed_form(&self, omega: f64) -> f64 {
        let f = &self.filter;
        let eta = self.detector.eta;
        let ct = self.detector.theta_fb.cos();
        let sgn = if omega > 0.0 {
            1.0
        } else if omega < 0.0 {
            -1.0
        } else {
            0.0
        };
        let phase = omega * f.delay + f.phase_offset * sgn;
        1.0 / (1.0 - 4.0 * eta.sqrt() * ct * f.gain * phase.cos() + 4.0 * eta * f.gain * f.gain * ct * ct)
    }

    /// Spectral extrema `omega_n = +-(n pi - phi)/tau` for `n <= n_max`, with
    /// the value `1/(1 - (-1)^n 2 sqrt(eta) gain cos(theta))^2` at each.
    pub fn extrema(&self, n_max: u32) -> Result<Vec<Extremum>> {
        let f = &self.filter;
        if f.delay <= 0.0 {
            return Err(Error::param("delay", "extrema need a positive delay"));
        }
        let a = self.loop_factor() * f.gain;
        let mut out = Vec::new();
        for n in 0..=n_max {
            let arg = n as f64 * PI - f.phase_offset;
            if arg < 0.0 {
                continue;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let value = 1.0 / (1.0 - sign * a).powi(2);
            let kind = if a == 0.0 {
                ExtremumKind::Flat
            } else if (sign * a) > 0.0 {
                ExtremumKind::Maximum
            } else {
                ExtremumKind::Minimum
            };
            let w = arg / f.delay;
            out.push(Extremum { n, omega: w, value, kind });
            if w > 0.0 {
                out.push(Extremum { n, omega: -w, value, kind });
            }
        }
        out.sort_by(|x, y| x.omega.total_cmp(&y.omega));
        Ok(out)
    }
}
