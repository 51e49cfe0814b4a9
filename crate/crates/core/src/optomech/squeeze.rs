// SPDX-License-Identifier: Apache-2.0

//! Ponderomotive squeezing at the unused port, reshaped by the loop.
//!
//! With the loop closed, the unused-port quadrature is
//! `X_un = X_un^o + k (X_fb^o + sqrt((1 - eta)/eta) X_v)`, where the `^o`
//! quantities are open-loop outputs and `k = K e^{i phi_K}` collects the loop.
//! Minimising over `k` gives closed forms for the best achievable spectrum.
//! Quadrature angles are referred to the drive.

use core::f64::consts::PI;

use num_traits::Float;

use super::oracle::{Observable, Oracle};
use super::OmLoop;
use crate::error::{Error, Result};
use crate::numerics::{minimize, OptimizerSpec};
use crate::spectral::{c, wrap_phase, FilterFunction, FlatFilter, Port, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqueezeOptimization {
    /// Evaluate at the configured filter.
    None,
    /// Keep `K` from the configured filter and choose the best `phi_K`.
    PhaseOnly,
    /// Choose both `K` and `phi_K`.
    PhaseAndGain,
}

/// Open-loop output spectra at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenLoopOutputs {
    pub s_un: f64,
    pub s_fb: f64,
    /// `<X_fb^o(omega) X_un^o(-omega)>`.
    pub cross: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeResult {
    pub omega: f64,
    /// Angle relative to the unused port's carrier, when that is defined.
    pub theta_un: Option<f64>,
    pub theta_bar_un: f64,
    pub k: f64,
    pub phi_k: f64,
    pub psd: f64,
    /// Unused port with the loop open.
    pub baseline_psd: f64,
    /// All light leaving through the unused port, no loop.
    pub single_sided_psd: f64,
    /// Filter value `g(omega)` that realises `k`, when one exists.
    pub filter_response: Option<C64>,
}

/// Residuals of the identities linking the two open-loop outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputRelations {
    pub fb_residual: f64,
    pub cross_residual: f64,
}

impl<F: FilterFunction> OmLoop<F> {
    pub fn open_loop_outputs(&self, omega: f64, theta_bar_un: f64) -> Result<OpenLoopOutputs> {
        let o = Oracle::new(self, false)?;
        let fb = Observable::Output { port: self.lp.port, theta_bar: self.lp.theta_bar()? };
        let un = Observable::Output { port: self.lp.unused_port(), theta_bar: theta_bar_un };
        Ok(OpenLoopOutputs { s_un: o.spectrum(un, omega)?, s_fb: o.spectrum(fb, omega)?, cross: o.cross_spectrum(fb, un, omega)? })
    }

    fn check_unused(&self) -> Result<f64> {
        let k_un = self.lp.cavity.port_rate(self.lp.unused_port());
        if k_un <= 0.0 {
            return Err(Error::param("port", "the unused port has zero coupling"));
        }
        Ok(k_un)
    }

    /// `k / sqrt(eta)`, finite as `eta -> 0`.
    fn k_reduced(&self, omega: f64, theta_bar_un: f64) -> Result<C64> {
        let z_un = self.port_zeta_om(self.lp.unused_port(), omega, theta_bar_un);
        Ok(2.0 * z_un * self.lp.h(omega)? * self.lambda_om(omega)?)
    }

    /// `K e^{i phi_K}` of the configured loop.
    pub fn squeeze_k(&self, omega: f64, theta_bar_un: f64) -> Result<C64> {
        Ok(self.lp.eta().sqrt() * self.k_reduced(omega, theta_bar_un)?)
    }

    /// Filter value `g(omega)` giving the loop coefficient `k`.
    pub fn filter_for_k(&self, omega: f64, theta_bar_un: f64, k: C64) -> Result<C64> {
        let eta = self.lp.eta();
        let cav = &self.lp.cavity;
        let z_un = self.port_zeta_om(self.lp.unused_port(), omega, theta_bar_un);
        if eta <= 0.0 || z_un.norm() == 0.0 {
            return Err(Error::param("k", "the loop cannot reach the unused port"));
        }
        let tb = self.lp.theta_bar()?;
        let t = k / (2.0 * eta.sqrt() * z_un);
        let cc = 4.0 * (self.lp.kappa_fb() * cav.kappa1 * eta).sqrt() * self.zeta_om(omega, tb);
        let h = t / (c(1.0) + cc * t);
        match self.lp.port {
            Port::Transmission => Ok(h),
            Port::Reflection => Ok(h / (c(1.0) - 2.0 * eta.sqrt() * tb.cos() * h)),
        }
    }

    pub fn single_sided_psd(&self, s_un_open: f64) -> Result<f64> {
        let k_un = self.check_unused()?;
        Ok(1.0 + self.lp.cavity.kappa() / k_un * (s_un_open - 1.0))
    }

    pub fn squeeze_spectrum(&self, omega: f64, theta_bar_un: f64, opt: SqueezeOptimization) -> Result<SqueezeResult> {
        self.check_unused()?;
        let eta = self.lp.eta();
        let open = self.open_loop_outputs(omega, theta_bar_un)?;
        let kr = self.k_reduced(omega, theta_bar_un)?;
        let k_now = eta.sqrt() * kr;
        let sx = open.cross;

        let (k, psd) = match opt {
            // |k|^2 (1 - eta)/eta is written as |k_reduced|^2 (1 - eta).
            SqueezeOptimization::None => {
                let psd = open.s_un + k_now.norm_sqr() * open.s_fb + kr.norm_sqr() * (1.0 - eta) + 2.0 * (k_now * sx).re;
                (k_now, psd)
            }
            SqueezeOptimization::PhaseOnly => {
                let kk = k_now.norm();
                let k = C64::from_polar(kk, PI - sx.arg());
                let psd = open.s_un + kk * kk * open.s_fb + kr.norm_sqr() * (1.0 - eta) - 2.0 * kk * sx.norm();
                (k, psd)
            }
            SqueezeOptimization::PhaseAndGain => {
                if eta <= 0.0 {
                    (c(0.0), open.s_un)
                } else {
                    let w = open.s_fb + (1.0 - eta) / eta;
                    let kk = sx.norm() / w;
                    (C64::from_polar(kk, PI - sx.arg()), open.s_un - sx.norm_sqr() / w)
                }
            }
        };
        let filter_response = match opt {
            SqueezeOptimization::None => Some(self.lp.laser.filter.response(omega)),
            _ => self.filter_for_k(omega, theta_bar_un, k).ok(),
        };
        let theta_un = self.lp.cavity.output_phase(self.lp.unused_port()).ok().map(|p| wrap_phase(theta_bar_un - p));
        Ok(SqueezeResult {
            omega,
            theta_un,
            theta_bar_un,
            k: k.norm(),
            phi_k: if k.norm() == 0.0 { 0.0 } else { k.arg() },
            psd,
            baseline_psd: open.s_un,
            single_sided_psd: self.single_sided_psd(open.s_un)?,
            filter_response,
        })
    }

    /// Spectrum at an arbitrary `k`, for checking the closed-form optima.
    pub fn squeeze_psd_at(&self, omega: f64, theta_bar_un: f64, k: C64) -> Result<f64> {
        let eta = self.lp.eta();
        if eta <= 0.0 {
            return Err(Error::param("eta", "no detected signal to feed back"));
        }
        let open = self.open_loop_outputs(omega, theta_bar_un)?;
        Ok(open.s_un + k.norm_sqr() * (open.s_fb + (1.0 - eta) / eta) + 2.0 * (k * open.cross).re)
    }

    /// Residuals of `S_fb = 1 + (kappa_fb/kappa_un)(S_un - 1)` at angle
    /// `theta_bar` and of the cross-spectrum identity
    /// `<X_fb^theta X_un^theta'> = sqrt(kappa_fb/kappa_un) (<X_un^theta X_un^theta'> - e^{-i(theta - theta')})`.
    pub fn output_relations_check(&self, omega: f64, theta_bar: f64, theta_bar_prime: f64) -> Result<OutputRelations> {
        let k_un = self.check_unused()?;
        let r = self.lp.kappa_fb() / k_un;
        let o = Oracle::new(self, false)?;
        let fb = |t: f64| Observable::Output { port: self.lp.port, theta_bar: t };
        let un = |t: f64| Observable::Output { port: self.lp.unused_port(), theta_bar: t };
        let s_fb = o.spectrum(fb(theta_bar), omega)?;
        let s_un = o.spectrum(un(theta_bar), omega)?;
        let fb_residual = (s_fb - (1.0 + r * (s_un - 1.0))).abs() / s_fb.abs().max(1.0);
        let lhs = o.cross_spectrum(fb(theta_bar), un(theta_bar_prime), omega)?;
        let uu = o.cross_spectrum(un(theta_bar), un(theta_bar_prime), omega)?;
        let rhs = r.sqrt() * (uu - C64::from_polar(1.0, -(theta_bar - theta_bar_prime)));
        let cross_residual = (lhs - rhs).norm() / lhs.norm().max(1.0);
        Ok(OutputRelations { fb_residual, cross_residual })
    }
}

impl OmLoop<FlatFilter> {
    /// Flat filter matching `g(omega)` at one frequency (gain and phase offset;
    /// the delay is kept).
    pub fn flat_filter_for(&self, omega: f64, response: C64) -> Result<FlatFilter> {
        let f = self.lp.laser.filter;
        let sign = if omega > 0.0 {
            1.0
        } else if omega < 0.0 {
            -1.0
        } else {
            0.0
        };
        if sign == 0.0 && response.im.abs() > 1e-12 * response.norm() {
            return Err(Error::param("omega", "a complex response at zero frequency needs a non-flat filter"));
        }
        let g = response.norm();
        let phase = if sign == 0.0 { 0.0 } else { wrap_phase(sign * (response.arg() - omega * f.delay)) };
        let gain = if sign == 0.0 { response.re } else { g };
        FlatFilter::new(gain, f.delay, phase)
    }

    /// Best squeezing at `omega` over both detection angles, each point using
    /// the optimal loop coefficient.
    pub fn best_squeezing(&self, omega: f64, spec: &OptimizerSpec) -> Result<(SqueezeResult, f64)> {
        let base = *self;
        let phase_fb = base.lp.cavity.output_phase(base.lp.port)?;
        let eval = |x: &[f64; 2]| {
            let mut om = base;
            om.lp.laser.detector.theta_fb = x[0] - phase_fb;
            om.squeeze_spectrum(omega, x[1], SqueezeOptimization::PhaseAndGain).map(|r| r.psd).unwrap_or(f64::INFINITY)
        };
        let m = minimize(eval, [(-PI / 2.0, PI / 2.0), (-PI / 2.0, PI / 2.0)], spec)?;
        let mut om = base;
        om.lp.laser.detector.theta_fb = m.x[0] - phase_fb;
        Ok((om.squeeze_spectrum(omega, m.x[1], SqueezeOptimization::PhaseAndGain)?, m.x[0]))
    }
}
