// SPDX-License-Identifier: Apache-2.0

//! Sideband cooling with the loop: scattering rates, anti-Stokes suppression,
//! and steady-state phonon numbers.
//!
//! The rates are `A_+- = G^2 S_F(-+omega_m)`, with `S_F` the closed-loop
//! amplitude-quadrature spectrum of the cavity. The feedback enters through
//! `Lambda(omega) = mu lambda zeta_c^{phi_c} / kappa`.

use core::f64::consts::{PI, TAU};

use num_traits::Float;

use super::OmLoop;
use crate::cavity::{EffectiveBranch, WindowSpec};
use crate::error::{Error, Result};
use crate::spectral::{c, cis, wrap_phase, FilterFunction, FlatFilter, Port, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringRates {
    /// Stokes rate (heating).
    pub a_plus: f64,
    /// Anti-Stokes rate (cooling).
    pub a_minus: f64,
    /// Net optical damping `A_- - A_+`.
    pub gamma_opt: f64,
    /// Back-action limit `A_+ / (A_- - A_+)`, defined when the damping is positive.
    pub n_o: Option<f64>,
}

impl ScatteringRates {
    fn new(a_plus: f64, a_minus: f64) -> Self {
        let gamma_opt = a_minus - a_plus;
        let n_o = (gamma_opt > 0.0).then(|| a_plus / gamma_opt);
        Self { a_plus, a_minus, gamma_opt, n_o }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoolingMode {
    /// `(gamma n_th + A_+) / (gamma + A_- - A_+)` at the configured feedback.
    Generic,
    /// Closed form at the feedback that cancels the anti-Stokes term of `A_+`.
    SuppressionOptimal,
    /// Narrowed-linewidth regime at the loop's own effective linewidth.
    AntiSquash,
}

/// Feedback settings that cancel the Stokes interference term.
#[derive(Debug, Clone, PartialEq)]
pub struct Suppression {
    pub om: OmLoop<FlatFilter>,
    pub gain: f64,
    pub phase_offset: f64,
    pub theta_fb: f64,
    pub rates: ScatteringRates,
}

/// Optimum of the anti-squash phonon number over the effective linewidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiSquashOptimum {
    pub n_sc: f64,
    pub kappa_eff: f64,
    pub n_min: f64,
}

/// Phonon number at effective linewidth `kappa_eff` in the anti-squash regime,
/// given the sideband-cooling value `n_sc`.
pub fn antisquash_phonons(n_sc: f64, kappa: f64, kappa_eff: f64, eta_kappa_fb: f64) -> f64 {
    n_sc * kappa_eff / kappa + (kappa - kappa_eff).powi(2) / (4.0 * eta_kappa_fb * kappa_eff)
}

pub fn antisquash_optimum(n_sc: f64, kappa: f64, eta_kappa_fb: f64) -> AntiSquashOptimum {
    let s = (1.0 + 4.0 * eta_kappa_fb * n_sc / kappa).sqrt();
    AntiSquashOptimum { n_sc, kappa_eff: kappa / s, n_min: 2.0 * n_sc / (1.0 + s) }
}

impl<F: FilterFunction> OmLoop<F> {
    /// `Lambda(omega)`.
    pub fn feedback_coefficient(&self, omega: f64) -> Result<C64> {
        let cav = &self.lp.cavity;
        Ok(self.lp.mu(omega)? * self.lp.lambda(omega)? * cav.zeta(omega, cav.phase()) / cav.kappa())
    }

    fn warn_weak_coupling(&self) {
        if let Ok(eff) = self.lp.effective_params(EffectiveBranch::Simplified) {
            if eff.kappa_eff <= self.mech.coupling.abs() {
                log::warn!("kappa_eff = {:.3e} <= G: rate equations assume weak coupling", eff.kappa_eff);
            }
        }
    }

    fn rate(&self, sign: f64) -> Result<f64> {
        let cav = &self.lp.cavity;
        let k = cav.kappa();
        let g2 = self.mech.coupling * self.mech.coupling;
        let wm = self.mech.omega_m;
        let lam = self.feedback_coefficient(sign * wm)?;
        let tp = self.theta_rel()?;
        // kappa |Lambda|^2 / (eta kappa_fb), written without dividing by eta.
        let fed = 4.0 * cav.kappa1 * (self.lp.h(sign * wm)? * self.lp.lambda(sign * wm)? * cav.zeta(sign * wm, cav.phase())).norm_sqr() / k;
        Ok(2.0 * g2 * k * ((cav.chi(-sign * wm) + lam * cis(tp)).norm_sqr() + fed - lam.norm_sqr()))
    }

    pub fn scattering_rates(&self) -> Result<ScatteringRates> {
        self.warn_weak_coupling();
        Ok(ScatteringRates::new(self.rate(1.0)?, self.rate(-1.0)?))
    }

    pub fn phonon_steady(&self, mode: CoolingMode) -> Result<f64> {
        let m = &self.mech;
        let thermal = m.gamma * m.n_th;
        match mode {
            CoolingMode::Generic => {
                let r = self.scattering_rates()?;
                if r.gamma_opt <= 0.0 {
                    return Err(Error::Heating { gamma: r.gamma_opt });
                }
                Ok((thermal + r.a_plus) / (m.gamma + r.gamma_opt))
            }
            CoolingMode::SuppressionOptimal => {
                self.warn_weak_coupling();
                let cav = &self.lp.cavity;
                let g2 = m.coupling * m.coupling;
                let k = cav.kappa();
                let a_minus0 = 2.0 * g2 * k * cav.chi(m.omega_m).norm_sqr();
                let a_plus0 = 2.0 * g2 * k * cav.chi(-m.omega_m).norm_sqr();
                let ekfb = self.lp.eta() * self.lp.kappa_fb();
                if ekfb <= 0.0 {
                    return Err(Error::param("eta", "suppression needs a detected signal"));
                }
                let damping = (a_minus0.sqrt() + a_plus0.sqrt()).powi(2);
                if damping <= 0.0 {
                    return Err(Error::Heating { gamma: damping });
                }
                Ok((thermal + (k / ekfb - 1.0) * a_plus0) / (m.gamma + damping))
            }
            CoolingMode::AntiSquash => {
                let cav = &self.lp.cavity;
                let k = cav.kappa();
                let eff = self.lp.effective_params(EffectiveBranch::Simplified)?;
                if eff.kappa_eff <= 0.0 {
                    return Err(Error::NonPositiveDamping { omega: cav.detuning, kappa: eff.kappa_eff });
                }
                Ok(antisquash_phonons(self.n_sideband(), k, eff.kappa_eff, self.lp.eta() * self.lp.kappa_fb()))
            }
        }
    }

    /// Sideband-cooling phonon number `gamma n_th kappa / (2 G^2)` of the
    /// resolved, resonant case.
    pub fn n_sideband(&self) -> f64 {
        let m = &self.mech;
        m.gamma * m.n_th * self.lp.cavity.kappa() / (2.0 * m.coupling * m.coupling)
    }

    pub fn antisquash_optimum(&self) -> AntiSquashOptimum {
        antisquash_optimum(self.n_sideband(), self.lp.cavity.kappa(), self.lp.eta() * self.lp.kappa_fb())
    }

    /// Optical damping and frequency shift of the mechanics from the drift
    /// matrix of the effective cavity model.
    pub fn adiabatic_mech_params(&self) -> Result<(f64, f64)> {
        let wm = self.mech.omega_m;
        let g2 = self.mech.coupling * self.mech.coupling;
        let m = self.lp.drift_matrix(wm)?;
        let a = m[0][0] - C64::new(0.0, wm);
        let d = m[1][1] - C64::new(0.0, wm);
        let det = a * d - m[0][1] * m[1][0];
        if det.norm() < 1e-14 * (a.norm() * d.norm()).max(1e-300) {
            return Err(Error::SingularSystem { omega: wm });
        }
        // (1, 1) adj(M') (1, -1)^T / det.
        let r = (d - m[1][0] + m[0][1] - a) / det;
        Ok((2.0 * g2 * r.re, g2 * r.im))
    }
}

impl OmLoop<FlatFilter> {
    /// Chooses gain and phase offset so that the Stokes amplitude interferes
    /// destructively with the feedback contribution. With `optimize_phase`
    /// the detection phase is also moved to the value maximising `A_-`.
    pub fn suppress_antistokes(&self, optimize_phase: bool) -> Result<Suppression> {
        let cav = &self.lp.cavity;
        let k = cav.kappa();
        let d = cav.detuning;
        let wm = self.mech.omega_m;
        let phi = cav.phase();
        let eta = self.lp.eta();
        if eta <= 0.0 {
            return Err(Error::param("eta", "suppression needs a detected signal"));
        }

        let mut om = *self;
        if optimize_phase {
            let z = -cis(2.0 * phi) * C64::new(k, -(d - wm)) * C64::new(k, -(d + wm));
            let tb = 0.5 * z.arg();
            om.lp.laser.detector.theta_fb = tb - cav.output_phase(self.lp.port)?;
        }
        let tb = om.lp.theta_bar()?;
        let tp = tb - phi;

        let t = -k * cav.chi(-wm) * cis(-tp);
        let den = cav.zeta(wm, phi) + 2.0 * t * cav.zeta(wm, tb);
        if den.norm() < 1e-300 {
            return Err(Error::SingularSystem { omega: wm });
        }
        let mu = t / den;
        let h = mu / (2.0 * (self.lp.kappa_fb() * cav.kappa1 * eta).sqrt());
        let g = match self.lp.port {
            Port::Transmission => h,
            Port::Reflection => {
                let r = c(1.0) - 2.0 * eta.sqrt() * tb.cos() * h;
                if r.norm() < 1e-300 {
                    return Err(Error::SingularLoop { omega: wm });
                }
                h / r
            }
        };
        let filter = om.lp.laser.filter;
        let gain = g.norm();
        let phase_offset = wrap_phase(g.arg() - wm * filter.delay());
        om.lp.laser.filter = FlatFilter::new(gain, filter.delay(), phase_offset)?;

        let window = match om.lp.stability_window(&WindowSpec::default()) {
            Ok(w) => Some(w),
            Err(Error::NoCrossing { .. }) => None,
            Err(e) => return Err(e),
        };
        if let Some(w) = window {
            if !w.contains(gain) {
                return Err(Error::OutsideWindow { gain, lower: w.lower, upper: w.upper });
            }
        }
        let rates = om.scattering_rates()?;
        let theta_fb = om.lp.laser.detector.theta_fb;
        Ok(Suppression { om, gain, phase_offset, theta_fb, rates })
    }
}

#[cfg(test)]
mod tests {
    use super::super::oracle::{Observable, Oracle};
    use super::super::MechanicalParams;
    use super::*;
    use crate::cavity::CavityLoop;
    use crate::laser::{DetectorParams, LaserLoop};
    use crate::spectral::CavityParams;

    fn make(port: Port, gain: f64, tau: f64, coupling: f64) -> OmLoop {
        let cav = CavityParams::new(0.6, 0.4, 0.0, 1.0).unwrap();
        let laser = LaserLoop::new(FlatFilter::new(gain, tau, 0.3).unwrap(), DetectorParams::new(0.8, 0.4).unwrap());
        let lp = CavityLoop::new(cav, laser, port).unwrap();
        OmLoop::new(lp, MechanicalParams::new(1.0, 1e-4, 100.0, coupling).unwrap()).unwrap()
    }

    #[test]
    fn rates_without_feedback() {
        let cav = CavityParams::single_sided(1.0, 1.0).unwrap();
        let laser = LaserLoop::new(FlatFilter::new(0.0, 0.1, 0.0).unwrap(), DetectorParams::new(1.0, 0.0).unwrap());
        let lp = CavityLoop::new(cav, laser, Port::Reflection).unwrap();
        let om = OmLoop::new(lp, MechanicalParams::new(1.0, 1e-4, 10.0, 0.2).unwrap()).unwrap();
        let r = om.scattering_rates().unwrap();
        assert!((r.a_minus - 0.08).abs() < 1e-15);
        assert!((r.a_plus - 0.016).abs() < 1e-15);
    }

    #[test]
    fn rates_are_amplitude_noise_at_sidebands() {
        for port in [Port::Transmission, Port::Reflection] {
            let om = make(port, 0.2, 0.7, 0.1);
            let r = om.scattering_rates().unwrap();
            let free = om.with_coupling(0.0);
            let o = Oracle::new(&free, true).unwrap();
            let sp = 0.01 * o.spectrum(Observable::Amplitude, -1.0).unwrap();
            let sm = 0.01 * o.spectrum(Observable::Amplitude, 1.0).unwrap();
            assert!((r.a_plus - sp).abs() < 1e-10 * sp, "{port:?}");
            assert!((r.a_minus - sm).abs() < 1e-10 * sm, "{port:?}");
        }
    }

    #[test]
    fn suppression_cancels_stokes_for_ideal_detection() {
        for tau in [0.1, 5.0] {
            let cav = CavityParams::single_sided(1.0, 1.0).unwrap();
            let laser = LaserLoop::new(FlatFilter::new(0.0, tau, 0.0).unwrap(), DetectorParams::new(1.0, 0.3).unwrap());
            let lp = CavityLoop::new(cav, laser, Port::Reflection).unwrap();
            let om = OmLoop::new(lp, MechanicalParams::new(1.0, 1e-4, 10.0, 0.1).unwrap()).unwrap();
            let s = om.suppress_antistokes(true).unwrap();
            assert!(s.rates.a_plus <= 1e-12 * s.rates.a_minus, "{:?}", s.rates);
            let r0 = om.scattering_rates().unwrap();
            let expect = (r0.a_minus.sqrt() + r0.a_plus.sqrt()).powi(2);
            assert!((s.rates.a_minus - expect).abs() < 1e-10 * expect);
        }
    }

    #[test]
    fn suppressed_rates_match_closed_form() {
        let om = make(Port::Transmission, 0.0, 0.1, 0.1);
        let s = om.suppress_antistokes(true).unwrap();
        let cav = om.lp.cavity;
        let g2k = 2.0 * 0.01 * cav.kappa();
        let extra = cav.kappa() / (0.8 * cav.kappa2) - 1.0;
        let a_plus = g2k * extra * cav.chi(-1.0).norm_sqr();
        let a_minus = g2k * (cav.chi(1.0).norm() + cav.chi(-1.0).norm()).powi(2) + a_plus;
        assert!((s.rates.a_plus - a_plus).abs() < 1e-10 * a_plus);
        assert!((s.rates.a_minus - a_minus).abs() < 1e-10 * a_minus);
    }

    #[test]
    fn adiabatic_damping_is_rate_difference() {
        for port in [Port::Transmission, Port::Reflection] {
            for gain in [0.0, 0.1, 0.3] {
                let om = make(port, gain, 0.05, 0.05);
                let r = om.scattering_rates().unwrap();
                let (g, _) = om.adiabatic_mech_params().unwrap();
                assert!((g - r.gamma_opt).abs() < 1e-9 * r.gamma_opt.abs(), "{port:?} {gain}: {g} {}", r.gamma_opt);
            }
        }
    }

    #[test]
    fn decoupled_mechanics_has_no_optical_damping() {
        let (g, d) = make(Port::Transmission, 0.2, 0.05, 0.0).adiabatic_mech_params().unwrap();
        assert_eq!((g, d), (0.0, 0.0));
    }

    #[test]
    fn antisquash_numbers() {
        let o = antisquash_optimum(100.0, 1.0, 1.0);
        assert!((o.n_min - 200.0 / (1.0 + 401f64.sqrt())).abs() < 1e-12);
        let at = antisquash_phonons(100.0, 1.0, o.kappa_eff, 1.0);
        assert!((at - o.n_min).abs() < 1e-10);
        for k in [0.5 * o.kappa_eff, 2.0 * o.kappa_eff] {
            assert!(antisquash_phonons(100.0, 1.0, k, 1.0) > o.n_min);
        }
    }

    #[test]
    fn heating_is_reported() {
        let cav = CavityParams::single_sided(1.0, -1.0).unwrap();
        let laser = LaserLoop::new(FlatFilter::new(0.0, 0.1, 0.0).unwrap(), DetectorParams::new(1.0, 0.0).unwrap());
        let lp = CavityLoop::new(cav, laser, Port::Reflection).unwrap();
        let om = OmLoop::new(lp, MechanicalParams::new(1.0, 1e-4, 10.0, 0.1).unwrap()).unwrap();
        assert!(matches!(om.phonon_steady(CoolingMode::Generic), Err(Error::Heating { .. })));
    }
}
