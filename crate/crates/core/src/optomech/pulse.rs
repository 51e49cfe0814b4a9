// SPDX-License-Identifier: Apache-2.0

//! Response to a short drive pulse: coherent exchange between the cavity and
//! the mechanical mode in a frame rotating at `omega_m`.
//!
//! The pulse is represented by its effect, a jump of the slow cavity amplitude
//! to `2 sqrt(pi kappa1) alpha_p e^{-i phi_c}` at `t = 0+`. Before that both
//! amplitudes vanish. A phase offset of the flat filter is applied in the
//! narrowband sense: `e^{i phi}` on the component near `+omega_m` and
//! `e^{-i phi}` on its mirror image.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use super::OmLoop;
use crate::error::{check_positive, Error, Result};
use crate::numerics::{integrate_dde, DdeSpec};
use crate::spectral::{cis, FilterFunction, FlatFilter, Port, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseMode {
    /// Delayed equations with the counter-rotating `e^{2 i omega_m t}` terms.
    FullDde,
    /// Resonant terms only, delay absorbed into `kappa_eff` and `delta_eff`.
    Effective,
    /// Undamped-mechanics, zero-detuning solution of the effective equations.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub horizon: f64,
    /// Defaults to `min(tau / 10, 1 / (50 omega_m))`.
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrace {
    pub times: Vec<f64>,
    pub alpha_bar: Vec<C64>,
    pub beta_bar: Vec<C64>,
    pub alpha_p: C64,
    pub mode: PulseMode,
    pub kappa_eff: f64,
    pub delta_eff: f64,
}

impl PulseTrace {
    pub fn is_effective(&self) -> bool {
        self.mode != PulseMode::FullDde
    }
}

fn pack(a: C64, b: C64) -> [f64; 4] {
    [a.re, a.im, b.re, b.im]
}

fn unpack(y: &[f64; 4]) -> (C64, C64) {
    (C64::new(y[0], y[1]), C64::new(y[2], y[3]))
}

impl OmLoop<FlatFilter> {
    /// Effective damping and detuning (rotating frame) of the cavity at the
    /// mechanical frequency.
    pub fn pulse_effective(&self) -> Result<(f64, f64)> {
        let wm = self.mech.omega_m;
        Ok((self.lp.kappa_tilde(wm)?, self.lp.delta_tilde(wm)? - wm))
    }

    pub fn pulse_response(&self, alpha_p: C64, mode: PulseMode, spec: &PulseSpec) -> Result<PulseTrace> {
        check_positive("horizon", spec.horizon)?;
        let cav = &self.lp.cavity;
        let phi_c = cav.phase();
        let wm = self.mech.omega_m;
        let g = self.mech.coupling;
        let tau = self.lp.laser.filter.delay;
        let step = match spec.step {
            Some(s) => s,
            None if tau > 0.0 => (tau / 10.0).min(1.0 / (50.0 * wm)),
            None => 1.0 / (50.0 * wm),
        };
        let a0 = 2.0 * (PI * cav.kappa1).sqrt() * alpha_p * cis(-phi_c);
        let (kappa_eff, delta_eff) = self.pulse_effective()?;
        if kappa_eff <= 0.0 {
            return Err(Error::Unstable(alloc::format!("effective cavity damping {kappa_eff} is not positive")));
        }
        let i = C64::i();
        let half_gamma = 0.5 * self.mech.gamma;

        let (times, alpha_bar, beta_bar) = match mode {
            PulseMode::FullDde => {
                if self.lp.port == Port::Reflection {
                    return Err(Error::param("port", "the delayed pulse equations need transmission detection"));
                }
                let tb = self.lp.theta_bar()?;
                let f = self.lp.laser.filter;
                let mu = 2.0 * (self.lp.kappa_fb() * cav.kappa1 * self.lp.eta()).sqrt() * f.gain;
                let delta = cav.detuning - wm;
                let res = mu * cis(f.phase_offset - tb + wm * tau);
                let anti = mu * cis(-f.phase_offset + tb - 2.0 * phi_c - wm * tau);
                let rhs = |t: f64, y: &[f64; 4], yd: &[f64; 4]| {
                    let (a, b) = unpack(y);
                    let (ad, _) = unpack(yd);
                    let rot = cis(2.0 * wm * t);
                    let da = -C64::new(cav.kappa(), delta) * a + i * g * (b + b.conj() * rot) + res * ad + anti * rot * ad.conj();
                    let db = -half_gamma * b + i * g * (a + a.conj() * rot);
                    pack(da, db)
                };
                let sol =
                    integrate_dde(rhs, |_| [0.0; 4], pack(a0, C64::new(0.0, 0.0)), &DdeSpec { step, horizon: spec.horizon, delay: tau })?;
                let (a, b): (Vec<C64>, Vec<C64>) = sol.states.iter().map(unpack).unzip();
                (sol.times, a, b)
            }
            PulseMode::Effective => {
                let rhs = |_t: f64, y: &[f64; 4], _yd: &[f64; 4]| {
                    let (a, b) = unpack(y);
                    pack(-C64::new(kappa_eff, delta_eff) * a + i * g * b, -half_gamma * b + i * g * a)
                };
                let sol =
                    integrate_dde(rhs, |_| [0.0; 4], pack(a0, C64::new(0.0, 0.0)), &DdeSpec { step, horizon: spec.horizon, delay: 0.0 })?;
                let (a, b): (Vec<C64>, Vec<C64>) = sol.states.iter().map(unpack).unzip();
                (sol.times, a, b)
            }
            PulseMode::ClosedForm => {
                let n = (spec.horizon / step).ceil() as usize;
                let times: Vec<f64> = (0..=n).map(|k| (k as f64 * step).min(spec.horizon.max(n as f64 * step))).collect();
                let env = |t: f64| (-0.5 * kappa_eff * t).exp();
                let a = times.iter().map(|&t| a0 * (g * t).cos() * env(t)).collect();
                let b = times.iter().map(|&t| i * a0 * (g * t).sin() * env(t)).collect();
                (times, a, b)
            }
        };
        Ok(PulseTrace { times, alpha_bar, beta_bar, alpha_p, mode, kappa_eff, delta_eff })
    }
}

#[cfg(test)]
mod tests {
    use super::super::MechanicalParams;
    use super::*;
    use crate::cavity::CavityLoop;
    use crate::laser::{DetectorParams, LaserLoop};
    use crate::spectral::CavityParams;

    fn make(gain: f64, coupling: f64) -> OmLoop {
        let cav = CavityParams::new(0.1, 0.1, 0.0, 1.0).unwrap();
        let laser = LaserLoop::new(FlatFilter::new(gain, 0.025, 0.0).unwrap(), DetectorParams::new(1.0, 0.0).unwrap());
        let lp = CavityLoop::new(cav, laser, Port::Transmission).unwrap();
        OmLoop::new(lp, MechanicalParams::new(1.0, 1e-6, 0.0, coupling).unwrap()).unwrap()
    }

    #[test]
    fn decoupled_cavity_decays_at_effective_rate() {
        let om = make(0.3, 0.0);
        let spec = PulseSpec { horizon: 5.0, step: None };
        let tr = om.pulse_response(C64::new(1.0, 0.0), PulseMode::Effective, &spec).unwrap();
        assert!(tr.beta_bar.iter().all(|b| b.norm() == 0.0));
        let last = tr.alpha_bar.len() - 1;
        let rate = -(tr.alpha_bar[last].norm() / tr.alpha_bar[0].norm()).ln() / tr.times[last];
        assert!((rate - tr.kappa_eff).abs() < 1e-8 * tr.kappa_eff);
    }

    #[test]
    fn full_tracks_effective_far_from_counter_rotation() {
        // Narrow cavity, detection phase aligned so the loop halves the linewidth.
        let cav = CavityParams::new(0.004, 0.004, 0.0, 1.0).unwrap();
        let tau = 0.025;
        let laser = LaserLoop::new(FlatFilter::new(0.5, tau, 0.0).unwrap(), DetectorParams::new(1.0, tau - cav.phase()).unwrap());
        let lp = CavityLoop::new(cav, laser, Port::Transmission).unwrap();
        let om = OmLoop::new(lp, MechanicalParams::new(1.0, 1e-6, 0.0, 0.02).unwrap()).unwrap();
        let spec = PulseSpec { horizon: 300.0, step: None };
        let full = om.pulse_response(C64::new(1.0, 0.0), PulseMode::FullDde, &spec).unwrap();
        let eff = om.pulse_response(C64::new(1.0, 0.0), PulseMode::Effective, &spec).unwrap();
        assert_eq!(full.times.len(), eff.times.len());
        let peak = eff.beta_bar.iter().map(|b| b.norm()).fold(0.0, f64::max);
        let dev = full.beta_bar.iter().zip(&eff.beta_bar).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(dev < 0.05 * peak, "{dev} vs {peak}");
    }

    #[test]
    fn step_above_limit_is_refused() {
        let om = make(0.3, 0.02);
        let spec = PulseSpec { horizon: 1.0, step: Some(0.01) };
        assert!(matches!(om.pulse_response(C64::new(1.0, 0.0), PulseMode::FullDde, &spec), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn nothing_before_the_pulse() {
        let om = make(0.3, 0.02);
        let tr = om.pulse_response(C64::new(0.5, 0.0), PulseMode::ClosedForm, &PulseSpec { horizon: 1.0, step: None }).unwrap();
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(tr.beta_bar[0].norm(), 0.0);
    }
}
