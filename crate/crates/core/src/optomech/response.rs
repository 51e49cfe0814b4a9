// SPDX-License-Identifier: Apache-2.0

//! Closed-form response functions and spectra of the loop with mechanics.

use num_traits::Float;

use super::oracle::{Observable, Oracle};
use super::OmLoop;
use crate::cavity::EffectiveBranch;
use crate::error::{Error, Result};
use crate::spectral::{c, chi_m, cis, zeta_m, FilterFunction, Port, C64};

use core::f64::consts::FRAC_PI_2;

/// Thermal force spectrum entering the position spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThermalModel {
    /// `gamma (2 n_th + 1)`, valid near resonance for a high-Q mode.
    #[default]
    Flat,
    /// Full symmetrised spectrum of the bath term divided by `|zeta_m|^2`.
    Exact,
}

/// Response functions at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmResponses {
    /// Mechanical response dressed by the optical spring, no feedback.
    pub zeta_m_g: C64,
    /// Cavity response of the detected quadrature dressed by the mechanics.
    pub zeta_om: C64,
    /// Response of `a + a^dag` to the position with the loop closed.
    pub zeta_c_fb: C64,
    /// Mechanical response with optical spring and feedback.
    pub zeta_m_fb_g: C64,
    /// Squashing factor with mechanics.
    pub lambda_om: C64,
}

/// Symmetrised position spectrum split into thermal and radiation-pressure
/// parts; `total = prefactor * (thermal + rp0 + rp1 + rp2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionPsd {
    pub total: f64,
    pub prefactor: f64,
    pub thermal: f64,
    pub rp0: f64,
    pub rp1: f64,
    pub rp2: f64,
}

impl<F: FilterFunction> OmLoop<F> {
    fn zeta_m(&self, omega: f64) -> C64 {
        zeta_m(omega, self.mech.omega_m, self.mech.gamma)
    }

    pub fn zeta_m_g(&self, omega: f64) -> C64 {
        let g = self.mech.coupling;
        let zm = self.zeta_m(omega);
        zm / (c(1.0) - 4.0 * g * g * zm * self.lp.cavity.zeta(omega, -FRAC_PI_2))
    }

    /// Cavity response of the quadrature at `theta_bar` (drive-referenced),
    /// including the mechanically mediated path.
    pub fn zeta_om(&self, omega: f64, theta_bar: f64) -> C64 {
        let cav = &self.lp.cavity;
        let g = self.mech.coupling;
        let phi = cav.phase();
        let mixed = cav.chi(omega) * cav.chi(-omega).conj() * phi.cos() * (theta_bar - phi).sin();
        self.zeta_m_g(omega) * (cav.zeta(omega, theta_bar) / self.zeta_m(omega) + 4.0 * g * g * mixed)
    }

    /// `zeta_om` as seen at `port`, adding the directly reflected drive.
    pub fn port_zeta_om(&self, port: Port, omega: f64, theta_bar: f64) -> C64 {
        let cav = &self.lp.cavity;
        let z = 2.0 * (cav.port_rate(port) * cav.kappa1).sqrt() * self.zeta_om(omega, theta_bar);
        match port {
            Port::Transmission => z,
            Port::Reflection => z - theta_bar.cos(),
        }
    }

    pub fn zeta_c_fb(&self, omega: f64) -> Result<C64> {
        let cav = &self.lp.cavity;
        let phi = cav.phase();
        let tp = self.theta_rel()?;
        let mixed = cav.chi(omega) * cav.chi(-omega).conj() * phi.cos() * tp.sin();
        Ok(self.lp.lambda(omega)? * (cav.zeta(omega, -FRAC_PI_2) + 2.0 * self.lp.mu(omega)? * mixed))
    }

    pub fn zeta_m_fb_g(&self, omega: f64) -> Result<C64> {
        let g = self.mech.coupling;
        let zm = self.zeta_m(omega);
        let d = c(1.0) - 4.0 * g * g * zm * self.zeta_c_fb(omega)?;
        if d.norm() < 1e-300 {
            return Err(Error::SingularSystem { omega });
        }
        Ok(zm / d)
    }

    pub fn lambda_om(&self, omega: f64) -> Result<C64> {
        let tb = self.lp.theta_bar()?;
        let d = c(1.0) - 2.0 * self.lp.mu(omega)? * self.zeta_om(omega, tb);
        if d.norm() < 1e-12 {
            return Err(Error::SingularLoop { omega });
        }
        Ok(d.inv())
    }

    pub fn om_responses(&self, omega: f64) -> Result<OmResponses> {
        Ok(OmResponses {
            zeta_m_g: self.zeta_m_g(omega),
            zeta_om: self.zeta_om(omega, self.lp.theta_bar()?),
            zeta_c_fb: self.zeta_c_fb(omega)?,
            zeta_m_fb_g: self.zeta_m_fb_g(omega)?,
            lambda_om: self.lambda_om(omega)?,
        })
    }

    /// Thermal force spectrum in position-normalised units.
    pub fn thermal_psd(&self, omega: f64, model: ThermalModel) -> f64 {
        let m = &self.mech;
        let flat = m.gamma * (2.0 * m.n_th + 1.0);
        match model {
            ThermalModel::Flat => flat,
            ThermalModel::Exact => {
                let s = chi_m(omega, m.omega_m, m.gamma).norm_sqr() + chi_m(-omega, m.omega_m, m.gamma).norm_sqr();
                flat * s / (4.0 * self.zeta_m(omega).norm_sqr())
            }
        }
    }

    /// Unsymmetrised spectrum of the amplitude quadrature `a + a^dag` with
    /// the loop closed and the mechanics decoupled.
    pub fn amplitude_noise_psd(&self, omega: f64) -> Result<f64> {
        let cav = &self.lp.cavity;
        let k = cav.kappa();
        let phi = cav.phase();
        let tp = self.theta_rel()?;
        let chi = cav.chi(omega);
        let lz = self.lp.lambda(omega)? * cav.zeta(omega, phi);
        let fed = 8.0 * cav.kappa1 * (self.lp.h(omega)? * lz).norm_sqr();
        let cross = 4.0 * (cis(-tp) * chi * self.lp.mu(omega)? * lz).re;
        Ok(2.0 * k * chi.norm_sqr() + fed + cross)
    }

    /// Symmetrised position spectrum, split into thermal and the three
    /// radiation-pressure contributions.
    pub fn position_psd(&self, omega: f64, thermal: ThermalModel) -> Result<PositionPsd> {
        let cav = &self.lp.cavity;
        let g2 = self.mech.coupling * self.mech.coupling;
        let k = cav.kappa();
        let phi = cav.phase();
        let tb = self.lp.theta_bar()?;
        let tp = tb - phi;

        let lam = self.lp.lambda(omega)?;
        let mu = self.lp.mu(omega)?;
        let chi_p = cav.chi(omega);
        let chi_m = cav.chi(-omega);
        let cc = chi_p * chi_m.conj();
        let z_phi = cav.zeta(omega, phi);

        let rp0 = 2.0 * g2 * k * ((chi_p * lam).norm_sqr() + (chi_m * lam.conj()).norm_sqr());

        // mu^2 / (kappa_fb eta), finite as eta -> 0.
        let fed = 4.0 * cav.kappa1 * self.lp.h(omega)?.norm_sqr();
        let rp1 = 4.0 * g2 * fed * (lam * z_phi).norm_sqr() - 8.0 * g2 * lam.norm_sqr() * (mu * z_phi * cav.zeta(omega, -tp).conj()).re;

        let s = tp.sin();
        let rp2 = 16.0 * k * g2 * (mu * lam * cc).norm_sqr() * s * s
            + 16.0 * k * g2 * lam.norm_sqr() * (mu * cc * cav.zeta(omega, phi - FRAC_PI_2).conj()).re * s
            - 16.0 * g2 * (mu * lam).norm_sqr() * (cc * z_phi.conj()).re * tb.sin() * s;

        let prefactor = self.zeta_m_fb_g(omega)?.norm_sqr();
        let th = self.thermal_psd(omega, thermal);
        Ok(PositionPsd { total: prefactor * (th + rp0 + rp1 + rp2), prefactor, thermal: th, rp0, rp1, rp2 })
    }

    /// Position spectrum with the radiation-pressure part replaced by a single
    /// effective Lorentzian weighted by `Z = kappa + Z_I + Z_II`, for a cavity
    /// with `kappa << Delta` and a short loop delay.
    pub fn position_psd_approx(&self, omega: f64, thermal: ThermalModel) -> Result<f64> {
        let cav = &self.lp.cavity;
        let g2 = self.mech.coupling * self.mech.coupling;
        let k = cav.kappa();
        let d = cav.detuning;
        let phi = cav.phase();
        let tb = self.lp.theta_bar()?;
        let s = (tb - phi).sin();
        let mu = self.lp.mu(d)?;
        let fed = 4.0 * cav.kappa1 * self.lp.h(d)?.norm_sqr();
        let q = C64::new(k, -2.0 * d);

        let z1 = 0.5 * fed - (mu * cis(-tb)).re;
        let z2 = 8.0 * k * mu.norm_sqr() * s * s / (k * k + 4.0 * d * d) + 4.0 * k * s * (-C64::i() * mu * cis(phi) / q).re
            - 4.0 * mu.norm_sqr() * tb.sin() * s * (cis(phi) / q).re;
        let z = k + z1 + z2;

        let eff = self.lp.effective_params(EffectiveBranch::Simplified)?;
        let lor = |w: f64| C64::new(eff.kappa_eff, eff.delta_eff - w).inv().norm_sqr();
        let prefactor = self.zeta_m_fb_g(omega)?.norm_sqr();
        Ok(prefactor * (self.thermal_psd(omega, thermal) + 2.0 * g2 * z * (lor(omega) + lor(-omega))))
    }

    /// Feedback photocurrent spectrum, `|h/g lambda_om|^2 (1 + eta (S_open - 1))`,
    /// with the open-loop output spectrum taken from the linear-response solver.
    pub fn photocurrent_psd(&self, omega: f64) -> Result<f64> {
        let tb = self.lp.theta_bar()?;
        let open = Oracle::new(self, false)?.spectrum(Observable::Output { port: self.lp.port, theta_bar: tb }, omega)?;
        let pre = (self.lp.h_ratio(omega)? * self.lambda_om(omega)?).norm_sqr();
        Ok(pre * (1.0 + self.lp.eta() * (open - 1.0)))
    }
}
