// SPDX-License-Identifier: Apache-2.0

//! Sideband cooling through the loop: scattering rates and phonon numbers
//! over the cavity parameters or the gain, and the amplitude-noise spectrum
//! that sets the rates.

use inloop_core::laser::DetectorParams;
use inloop_core::optomech::{CoolingMode, OmLoop};
use inloop_core::spectral::CavityParams;
use serde_json::json;

use super::{gain_label, par_map};
use crate::config::{cavity_window, CoolingModeName, CoolingOptions, CoolingSweep, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::table::{num, OutputTable};

pub fn run(cfg: &ScenarioConfig) -> CliResult<OutputTable> {
    let opts = cfg.cooling.clone().unwrap_or_default();
    let base = cfg.om_loop()?;
    let mut t = match opts.sweep {
        CoolingSweep::Omega => spectrum(cfg, &opts, base)?,
        CoolingSweep::KappaDetuning => map(&opts, base)?,
        CoolingSweep::Gain => gains(cfg, base)?,
    };
    t.meta("n_sideband", num(base.n_sideband()));
    Ok(t)
}

fn core_mode(m: CoolingModeName) -> CoolingMode {
    match m {
        CoolingModeName::Generic => CoolingMode::Generic,
        CoolingModeName::Suppression => CoolingMode::SuppressionOptimal,
        CoolingModeName::Antisquash => CoolingMode::AntiSquash,
    }
}

/// Standard sideband cooling: the same cavity with the loop open.
fn sideband_baseline(om: &OmLoop) -> f64 {
    om.with_gain(0.0).phonon_steady(CoolingMode::Generic).unwrap_or(f64::NAN)
}

/// Amplitude-noise spectrum with the loop set for Stokes suppression, one
/// column per detection efficiency, and the open-loop spectrum.
fn spectrum(cfg: &ScenarioConfig, opts: &CoolingOptions, base: OmLoop) -> CliResult<OutputTable> {
    let grid = cfg.grid()?;
    let etas = opts.etas.clone().unwrap_or_else(|| vec![base.lp.eta()]);
    let mut tuned = Vec::new();
    let mut settings = Vec::new();
    for &eta in &etas {
        let mut om = base;
        om.lp.laser.detector = DetectorParams::new(eta, base.lp.laser.detector.theta_fb)?;
        let s = om.suppress_antistokes(true)?;
        let wm = s.om.mech.omega_m;
        settings.push(json!({
            "eta": num(eta), "gain": num(s.gain), "phase_offset": num(s.phase_offset), "theta_fb": num(s.theta_fb),
            "A_plus": num(s.rates.a_plus), "A_minus": num(s.rates.a_minus),
            "S_F_plus_omega_m": num(s.om.amplitude_noise_psd(wm)?), "S_F_minus_omega_m": num(s.om.amplitude_noise_psd(-wm)?),
        }));
        tuned.push(s.om);
    }
    let open = base.with_gain(0.0);

    let mut t = OutputTable::default();
    t.column("omega", "rad/s");
    for &eta in &etas {
        t.column(format!("S_F eta={eta}"), "s");
    }
    t.column("S_F open", "s");
    let rows = par_map(&grid, |&w| {
        let mut row = vec![w];
        for om in &tuned {
            row.push(om.amplitude_noise_psd(w)?);
        }
        row.push(open.amplitude_noise_psd(w)?);
        Ok(row)
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    t.meta("suppression", settings);
    Ok(t)
}

/// Phonon number over total linewidth and detuning. Mirror and loss rates
/// keep their ratios as the linewidth changes.
fn map(opts: &CoolingOptions, base: OmLoop) -> CliResult<OutputTable> {
    let kappas =
        opts.kappa.as_ref().ok_or_else(|| CliError::config("the kappa_detuning sweep needs `cooling.kappa`"))?.rates("cooling.kappa")?;
    let detunings = opts
        .detuning
        .as_ref()
        .ok_or_else(|| CliError::config("the kappa_detuning sweep needs `cooling.detuning`"))?
        .rates("cooling.detuning")?;
    let mode = core_mode(opts.mode);
    let cav = base.lp.cavity;
    let k0 = cav.kappa();
    let points: Vec<(f64, f64)> = kappas.iter().flat_map(|&k| detunings.iter().map(move |&d| (k, d))).collect();

    let mut t = OutputTable::default();
    for (name, unit) in [
        ("kappa", "rad/s"),
        ("detuning", "rad/s"),
        ("A_plus", "rad/s"),
        ("A_minus", "rad/s"),
        ("Gamma_opt", "rad/s"),
        ("n_o", ""),
        ("n_m", ""),
        ("n_sideband_cooling", ""),
        ("realisable", ""),
    ] {
        t.column(name, unit);
    }
    let rows = par_map(&points, |&(k, d)| {
        let s = k / k0;
        let mut om = base;
        om.lp.cavity = CavityParams::new(cav.kappa1 * s, cav.kappa2 * s, cav.kappa_loss * s, d)?;
        let baseline = sideband_baseline(&om);
        let (rates, n_m, realisable) = match mode {
            CoolingMode::SuppressionOptimal => {
                let n_m = om.phonon_steady(mode).unwrap_or(f64::NAN);
                match om.suppress_antistokes(true) {
                    Ok(sup) => (Some(sup.rates), n_m, 1.0),
                    Err(_) => (None, n_m, 0.0),
                }
            }
            _ => {
                let r = om.scattering_rates().ok();
                (r, om.phonon_steady(mode).unwrap_or(f64::NAN), f64::NAN)
            }
        };
        let (ap, am, go, no) = match rates {
            Some(r) => (r.a_plus, r.a_minus, r.gamma_opt, r.n_o.unwrap_or(f64::NAN)),
            None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        Ok(vec![k, d, ap, am, go, no, n_m, baseline, realisable])
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// Rates and phonon number at each configured gain.
fn gains(cfg: &ScenarioConfig, base: OmLoop) -> CliResult<OutputTable> {
    let (lower, upper) = cavity_window(&base.lp)?;
    let gains = cfg.gains(|| Ok((lower, upper)))?;
    let mode = core_mode(cfg.cooling.as_ref().map(|c| c.mode).unwrap_or_default());
    let mut t = OutputTable::default();
    for (name, unit) in
        [("gain", ""), ("stable", ""), ("A_plus", "rad/s"), ("A_minus", "rad/s"), ("Gamma_opt", "rad/s"), ("n_o", ""), ("n_m", "")]
    {
        t.column(name, unit);
    }
    let rows = par_map(&gains, |&g| {
        let om = base.with_gain(g);
        let stable = g > lower && g < upper;
        if !stable {
            log::warn!("{} is outside the stability window ({lower}, {upper})", gain_label(g));
        }
        let r = om.scattering_rates()?;
        let n_m = if stable { om.phonon_steady(mode).unwrap_or(f64::NAN) } else { f64::NAN };
        Ok(vec![g, if stable { 1.0 } else { 0.0 }, r.a_plus, r.a_minus, r.gamma_opt, r.n_o.unwrap_or(f64::NAN), n_m])
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    t.meta("window_lower", num(lower));
    t.meta("window_upper", num(upper));
    t.meta("sideband_cooling", num(sideband_baseline(&base)));
    Ok(t)
}
