// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use inloop_core::cavity::{CavityLoop, WindowSpec};
use inloop_core::laser::{DetectorParams, LaserLoop};
use inloop_core::optomech::oracle::Oracle;
use inloop_core::optomech::Observable;
use inloop_core::optomech::{oracle_spectra, MechanicalParams, OmLoop, PulseMode, PulseSpec, SqueezeOptimization, ThermalModel};
use inloop_core::spectral::{CavityParams, FlatFilter, Port, C64};
use inloop_core::Error;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn om(cav: CavityParams, port: Port, filter: FlatFilter, eta: f64, theta: f64, mech: MechanicalParams) -> OmLoop {
    let laser = LaserLoop::new(filter, DetectorParams::new(eta, theta).unwrap());
    OmLoop::new(CavityLoop::new(cav, laser, port).unwrap(), mech).unwrap()
}

/// Cavity gain inside the window and net positive mechanical damping.
fn is_stable(o: &OmLoop) -> bool {
    let in_window = match o.lp.stability_window(&WindowSpec::default()) {
        Ok(w) => w.contains(o.lp.laser.filter.gain),
        Err(Error::NoCrossing { .. }) => true,
        Err(_) => false,
    };
    in_window && o.scattering_rates().map(|r| o.mech.gamma + r.gamma_opt > 0.0).unwrap_or(false)
}

prop_compose! {
    fn stable_om()(k1 in 0.1..1.5f64, k2 in 0.1..1.5f64, kl in 0.0..0.3f64, d in -2.0..2.0f64,
                   gain in -0.4..0.4f64, tau in 0.0..0.5f64, phi in -PI..PI, eta in 0.1..1.0f64, th in -PI..PI,
                   refl in any::<bool>(), g in 0.0..0.3f64, n_th in 0.0..50.0f64)
                   -> OmLoop {
        let port = if refl { Port::Reflection } else { Port::Transmission };
        om(CavityParams::new(k1, k2, kl, d).unwrap(), port, FlatFilter::new(gain, tau, phi).unwrap(), eta, th,
           MechanicalParams::new(1.0, 1e-3, n_th, g).unwrap())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn closed_forms_match_oracle(o in stable_om(), w in -3.0..3.0f64, tb in -PI..PI) {
        prop_assume!(is_stable(&o));
        let s = oracle_spectra(&o, w, tb).unwrap();
        prop_assert!(rel(o.photocurrent_psd(w).unwrap(), s.photocurrent) < 1e-8);
        prop_assert!(rel(o.position_psd(w, ThermalModel::Exact).unwrap().total, s.position) < 1e-8);
        let q = o.squeeze_spectrum(w, tb, SqueezeOptimization::None).unwrap();
        prop_assert!(rel(q.psd, s.out_un) < 1e-8);
        // The amplitude noise that drives the mirror is defined with it decoupled.
        let bare = o.with_coupling(0.0);
        let amp = Oracle::new(&bare, true).unwrap().spectrum(Observable::Amplitude, w).unwrap();
        prop_assert!(rel(bare.amplitude_noise_psd(w).unwrap(), amp) < 1e-8);
    }

    #[test]
    fn squeezing_spectrum_is_even_and_positive(o in stable_om(), w in 0.0..3.0f64, tb in -PI..PI) {
        prop_assume!(is_stable(&o));
        for opt in [SqueezeOptimization::None, SqueezeOptimization::PhaseOnly, SqueezeOptimization::PhaseAndGain] {
            let a = o.squeeze_spectrum(w, tb, opt).unwrap().psd;
            let b = o.squeeze_spectrum(-w, tb, opt).unwrap().psd;
            prop_assert!(a >= 0.0);
            prop_assert!(rel(a, b) < 1e-9, "{:?}: {} vs {}", opt, a, b);
        }
    }

    #[test]
    fn optimised_squeezing_is_bracketed(o in stable_om(), w in -3.0..3.0f64, tb in -PI..PI) {
        prop_assume!(is_stable(&o));
        let r = o.squeeze_spectrum(w, tb, SqueezeOptimization::PhaseAndGain).unwrap();
        let phase = o.squeeze_spectrum(w, tb, SqueezeOptimization::PhaseOnly).unwrap();
        let fixed = o.squeeze_spectrum(w, tb, SqueezeOptimization::None).unwrap();
        prop_assert!(r.psd <= r.baseline_psd * (1.0 + 1e-12));
        prop_assert!(r.psd <= phase.psd * (1.0 + 1e-12));
        prop_assert!(phase.psd <= fixed.psd * (1.0 + 1e-12));
    }

    #[test]
    fn squeezed_quadrature_cannot_beat_single_sided(o in stable_om(), w in -3.0..3.0f64, tb in -PI..PI) {
        // Detect the fed-back port at the same drive-referenced angle.
        let mut o = o;
        let out = o.lp.cavity.output_phase(o.lp.port).unwrap();
        o.lp.laser.detector.theta_fb = tb - out;
        prop_assume!(is_stable(&o));
        let r = o.squeeze_spectrum(w, tb, SqueezeOptimization::PhaseAndGain).unwrap();
        prop_assume!(r.baseline_psd < 1.0);
        prop_assert!(r.psd >= r.single_sided_psd - 1e-12, "{} < {}", r.psd, r.single_sided_psd);
    }
}

#[test]
fn suppression_minimises_stokes_rate() {
    // Ideal detection of all the light leaving a single-sided cavity.
    let mut rng = StdRng::seed_from_u64(7);
    let cav = CavityParams::single_sided(1.0, 1.0).unwrap();
    let mech = MechanicalParams::new(1.0, 1e-4, 100.0, 0.05).unwrap();
    let tau = 0.1;
    let base = om(cav, Port::Reflection, FlatFilter::new(0.0, tau, 0.0).unwrap(), 1.0, 0.3, mech);
    let best = base.suppress_antistokes(true).unwrap().rates.a_plus;
    let mut trials = 0;
    while trials < 1000 {
        let f = FlatFilter::new(rng.random_range(-2.0..2.0), tau, rng.random_range(-PI..PI)).unwrap();
        let o = om(cav, Port::Reflection, f, 1.0, rng.random_range(-PI..PI), mech);
        if !is_stable(&o) {
            continue;
        }
        trials += 1;
        let r = o.scattering_rates().unwrap();
        assert!(r.a_plus >= 0.0 && r.a_minus >= 0.0);
        assert!(best <= r.a_plus + 1e-14, "suppressed {best} above random {}", r.a_plus);
    }
}

fn pulse_loop(g: f64) -> OmLoop {
    // Narrow cavity on the red sideband, detection aligned with the carrier.
    let cav = CavityParams::new(0.004, 0.004, 0.0, 1.0).unwrap();
    let tau = 0.025;
    let f = FlatFilter::new(0.5, tau, 0.0).unwrap();
    om(cav, Port::Transmission, f, 1.0, tau - cav.phase(), MechanicalParams::new(1.0, 1e-6, 0.0, g).unwrap())
}

fn max_dev(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.norm() - y.norm()).abs()).fold(0.0, f64::max)
}

#[test]
fn pulse_models_are_ordered() {
    let o = pulse_loop(0.02);
    let spec = PulseSpec { horizon: 300.0, step: None };
    let a = C64::new(1.0, 0.0);
    let closed = o.pulse_response(a, PulseMode::ClosedForm, &spec).unwrap();
    let eff = o.pulse_response(a, PulseMode::Effective, &spec).unwrap();
    let full = o.pulse_response(a, PulseMode::FullDde, &spec).unwrap();
    assert_eq!(closed.times.len(), full.times.len());
    assert_eq!(eff.times.len(), full.times.len());
    let ce = max_dev(&closed.beta_bar, &eff.beta_bar);
    let cf = max_dev(&closed.beta_bar, &full.beta_bar);
    assert!(ce <= cf, "closed-effective {ce} exceeds closed-full {cf}");
}

#[test]
fn uncoupled_pulse_leaves_mechanics_at_rest() {
    let o = pulse_loop(0.0);
    let spec = PulseSpec { horizon: 50.0, step: None };
    for mode in [PulseMode::ClosedForm, PulseMode::Effective, PulseMode::FullDde] {
        let t = o.pulse_response(C64::new(1.0, 0.0), mode, &spec).unwrap();
        assert!(t.beta_bar.iter().all(|b| b.norm() == 0.0), "{mode:?}");
    }
}
