// SPDX-License-Identifier: Apache-2.0

//! Single-mode description of the cavity inside the loop: a shifted and
//! re-damped resonance driven by a correlated effective input.

use num_traits::Float;

use super::CavityLoop;
use crate::error::{Error, Result};
use crate::spectral::{c, cis, FilterFunction, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveBranch {
    /// Pole of the linearised inverse susceptibility, including the filter slope.
    Full,
    /// `kappa - Re[e^{-i theta_bar} mu(Delta)]`, `Delta - Im[...]`, `u = 1`.
    Simplified,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCavity {
    pub kappa_eff: f64,
    pub delta_eff: f64,
    /// Residue factor: `chi_eff ~ i / (u (omega - delta_eff + i kappa_eff))`.
    pub u: C64,
}

/// Statistics of the effective input noise at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveNoise {
    pub n_in: f64,
    pub m_in: C64,
    /// `kappa_tilde(omega)` and `kappa_tilde(-omega)`.
    pub kappa_plus: f64,
    pub kappa_minus: f64,
}

impl<F: FilterFunction> CavityLoop<F> {
    /// Frequency-resolved damping `kappa - Re[e^{-i theta_bar} mu(omega)]`.
    pub fn kappa_tilde(&self, omega: f64) -> Result<f64> {
        Ok(self.cavity.kappa() - (cis(-self.theta_bar()?) * self.mu(omega)?).re)
    }

    /// Frequency-resolved detuning `Delta - Im[e^{-i theta_bar} mu(omega)]`.
    pub fn delta_tilde(&self, omega: f64) -> Result<f64> {
        Ok(self.cavity.detuning - (cis(-self.theta_bar()?) * self.mu(omega)?).im)
    }

    pub fn effective_params(&self, branch: EffectiveBranch) -> Result<EffectiveCavity> {
        let k = self.cavity.kappa();
        let d = self.cavity.detuning;
        let tau = self.laser.filter.delay();
        if k * tau > 0.1 {
            log::warn!("kappa*tau = {:.3}: effective parameters assume a short loop delay", k * tau);
        }
        let tb = self.theta_bar()?;
        let mu = self.mu(d)?;
        match branch {
            EffectiveBranch::Simplified => {
                let z = cis(-tb) * mu;
                Ok(EffectiveCavity { kappa_eff: k - z.re, delta_eff: d - z.im, u: c(1.0) })
            }
            EffectiveBranch::Full => {
                let dmu = self.mu_derivative(d)?;
                let q = C64::new(k, -2.0 * d);
                let e = cis(-tb) + k * cis(tb) / q;
                let u = c(1.0) + C64::i() * 2.0 * d * cis(tb) * mu / (q * q) - C64::i() * e * dmu;
                if u.norm() < 1e-12 {
                    return Err(Error::SingularLoop { omega: d });
                }
                let nu = c(d) - C64::i() / u * (c(k) - e * mu);
                Ok(EffectiveCavity { kappa_eff: -nu.im, delta_eff: nu.re, u })
            }
        }
    }

    /// Occupation `n_in` and squeezing `m_in` of the effective input noise.
    pub fn effective_noise_stats(&self, omega: f64) -> Result<EffectiveNoise> {
        let kp = self.kappa_tilde(omega)?;
        let km = self.kappa_tilde(-omega)?;
        for (w, kk) in [(omega, kp), (-omega, km)] {
            if kk <= 0.0 {
                return Err(Error::NonPositiveDamping { omega: w, kappa: kk });
            }
        }
        let tb = self.theta_bar()?;
        let mu = self.mu(omega)?;
        // |mu|^2 / (kappa_fb eta) written without the division.
        let fed = 4.0 * self.cavity.kappa1 * self.h(omega)?.norm_sqr();
        let n_in = fed / (4.0 * kp);
        let m_in = (c(0.5 * fed) - mu.conj() * cis(tb)) / (2.0 * (kp * km).sqrt());
        Ok(EffectiveNoise { n_in, m_in, kappa_plus: kp, kappa_minus: km })
    }

    /// Drift matrix of `(a, a^dag)` at frequency `omega`, in the convention
    /// `d/dt (a, a^dag) = -M (a, a^dag) + noise`.
    pub fn drift_matrix(&self, omega: f64) -> Result<[[C64; 2]; 2]> {
        let tb = self.theta_bar()?;
        let phi = self.cavity.phase();
        let mu = self.mu(omega)?;
        let k = self.cavity.kappa();
        let d = self.cavity.detuning;
        let z = cis(-tb) * mu;
        // kappa_tilde(-omega) - i delta_tilde(-omega), using mu(-omega)^* = mu(omega).
        let zm = cis(tb) * mu;
        Ok([[C64::new(k, d) - z, -mu * cis(tb - 2.0 * phi)], [-mu * cis(-(tb - 2.0 * phi)), C64::new(k, -d) - zm]])
    }
}
