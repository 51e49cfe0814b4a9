// SPDX-License-Identifier: Apache-2.0

//! Ponderomotive squeezing at the unused port.
//!
//! Four curves per sweep: the loop optimised once at a reference point and
//! then held fixed, the loop re-optimised at every point, the best quadrature
//! with no feedback, and a single-sided cavity of the same total linewidth.

use std::f64::consts::FRAC_PI_2;

use inloop_core::laser::DetectorParams;
use inloop_core::numerics::{minimize, OptimizerSpec};
use inloop_core::optomech::{OmLoop, SqueezeOptimization};
use inloop_core::spectral::{CavityParams, FlatFilter};
use serde_json::json;

use super::par_map;
use crate::config::{cavity_window, Quantity, ScenarioConfig, SqueezeOptions, SqueezeSweep};
use crate::error::{CliError, CliResult};
use crate::table::{num, OutputTable};

/// Loop settings found by the optimiser, with both detection angles
/// referenced to the drive.
#[derive(Debug, Clone, Copy)]
struct Setting {
    theta_bar_fb: f64,
    theta_bar_un: f64,
    filter: FlatFilter,
}

impl Setting {
    fn apply(&self, om: &OmLoop) -> CliResult<OmLoop> {
        let mut o = *om;
        o.lp.laser.detector.theta_fb = self.theta_bar_fb - o.lp.cavity.output_phase(o.lp.port)?;
        o.lp.laser.filter = self.filter;
        Ok(o)
    }
}

struct Point {
    best: f64,
    setting: Option<Setting>,
}

fn optimise(om: &OmLoop, w: f64, spec: &OptimizerSpec) -> CliResult<Point> {
    let (r, theta_bar_fb) = om.best_squeezing(w, spec)?;
    let setting = match r.filter_response {
        Some(g) => {
            let mut o = *om;
            o.lp.laser.detector.theta_fb = theta_bar_fb - o.lp.cavity.output_phase(o.lp.port)?;
            o.flat_filter_for(w, g).ok().map(|filter| Setting { theta_bar_fb, theta_bar_un: r.theta_bar_un, filter })
        }
        None => None,
    };
    Ok(Point { best: r.psd, setting })
}

/// Open-loop spectrum at the best unused-port quadrature, and the single-sided
/// cavity spectrum it maps to.
fn without_feedback(om: &OmLoop, w: f64, spec: &OptimizerSpec) -> CliResult<(f64, f64)> {
    let m =
        minimize(|x: &[f64; 1]| om.open_loop_outputs(w, x[0]).map(|o| o.s_un).unwrap_or(f64::INFINITY), [(-FRAC_PI_2, FRAC_PI_2)], spec)?;
    Ok((m.value, om.single_sided_psd(m.value)?))
}

/// Whether the empty-cavity loop is stable with these settings. The mechanics
/// is not part of this check.
fn in_window(setting: Option<&Setting>, om: &OmLoop) -> CliResult<f64> {
    let Some(s) = setting else { return Ok(f64::NAN) };
    let o = s.apply(om)?;
    let (lo, hi) = cavity_window(&o.lp)?;
    Ok(if s.filter.gain > lo && s.filter.gain < hi { 1.0 } else { 0.0 })
}

fn fixed(setting: &Setting, om: &OmLoop, w: f64) -> CliResult<f64> {
    Ok(setting.apply(om)?.squeeze_spectrum(w, setting.theta_bar_un, SqueezeOptimization::None)?.psd)
}

pub fn run(cfg: &ScenarioConfig) -> CliResult<OutputTable> {
    let opts = cfg.squeeze.clone().unwrap_or_default();
    let base = cfg.om_loop()?;
    let spec = OptimizerSpec { grid_points: opts.optimizer_grid, ..OptimizerSpec::default() };
    let mut t = match opts.sweep {
        SqueezeSweep::Omega => omega_sweep(cfg, &opts, &base, &spec)?,
        _ => parameter_sweep(cfg, &opts, &base, &spec)?,
    };
    t.meta("sweep", serde_json::to_value(opts.sweep).expect("enum serialises"));
    Ok(t)
}

fn columns(t: &mut OutputTable, name: &str, unit: &str) {
    t.column(name, unit);
    t.column("S_fixed", "");
    t.column("S_optimised", "");
    t.column("S_no_feedback", "");
    t.column("S_single_sided", "");
    t.column("fixed_stable", "");
    t.column("optimised_stable", "");
}

fn describe(t: &mut OutputTable, s: &Setting, omega: f64) {
    t.meta(
        "fixed_setting",
        json!({
            "omega": num(omega),
            "theta_bar_fb": num(s.theta_bar_fb),
            "theta_bar_un": num(s.theta_bar_un),
            "gain": num(s.filter.gain),
            "phase_offset": num(s.filter.phase_offset),
            "delay": num(s.filter.delay),
        }),
    );
}

fn unrealisable(omega: f64) -> CliError {
    CliError::Numerical(format!("the optimum at omega = {omega} has no flat-filter realisation"))
}

fn omega_sweep(cfg: &ScenarioConfig, opts: &SqueezeOptions, base: &OmLoop, spec: &OptimizerSpec) -> CliResult<OutputTable> {
    let grid = cfg.grid()?;
    let points = par_map(&grid, |&w| optimise(base, w, spec))?;
    let (w0, setting) = match opts.omega.as_ref().or(opts.reference.as_ref()) {
        Some(q) => {
            let w0 = q.rate("squeeze.omega")?;
            (w0, optimise(base, w0, spec)?.setting.ok_or_else(|| unrealisable(w0))?)
        }
        None => {
            let i = argmin(points.iter().map(|p| p.best));
            (grid[i], points[i].setting.ok_or_else(|| unrealisable(grid[i]))?)
        }
    };
    let mut t = OutputTable::default();
    columns(&mut t, "omega", "rad/s");
    let rows = par_map(&grid.iter().zip(&points).collect::<Vec<_>>(), |&(&w, p)| {
        let (s_open, s_single) = without_feedback(base, w, spec)?;
        let stable = in_window(Some(&setting), base)?;
        Ok(vec![w, fixed(&setting, base, w)?, p.best, s_open, s_single, stable, in_window(p.setting.as_ref(), base)?])
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    describe(&mut t, &setting, w0);
    t.meta("omega_ref", num(w0));
    Ok(t)
}

fn argmin(xs: impl Iterator<Item = f64>) -> usize {
    xs.enumerate().fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) }).0
}

/// The loop with the swept parameter set to `x`.
fn with_param(base: &OmLoop, sweep: SqueezeSweep, x: f64) -> CliResult<OmLoop> {
    let mut o = *base;
    match sweep {
        SqueezeSweep::Eta => o.lp.laser.detector = DetectorParams::new(x, base.lp.laser.detector.theta_fb)?,
        SqueezeSweep::Coupling => o = o.with_coupling(x),
        SqueezeSweep::Kappa1 => {
            let c = base.lp.cavity;
            let k2 = c.kappa() - c.kappa_loss - x;
            if !(x > 0.0 && k2 > 0.0) {
                return Err(CliError::config(format!("kappa1 = {x} leaves no room for the second mirror at constant kappa")));
            }
            o.lp.cavity = CavityParams::new(x, k2, c.kappa_loss, c.detuning)?;
        }
        SqueezeSweep::Omega => unreachable!("handled by the omega sweep"),
    }
    o.mech.validate()?;
    Ok(o)
}

fn parameter_sweep(cfg: &ScenarioConfig, opts: &SqueezeOptions, base: &OmLoop, spec: &OptimizerSpec) -> CliResult<OutputTable> {
    let range = opts.range.as_ref().ok_or_else(|| CliError::config("this sweep needs `squeeze.range`"))?;
    let (name, unit, xs, configured) = match opts.sweep {
        SqueezeSweep::Eta => ("eta", "", range.plain("squeeze.range")?, base.lp.eta()),
        SqueezeSweep::Coupling => ("coupling", "rad/s", range.rates("squeeze.range")?, base.mech.coupling),
        SqueezeSweep::Kappa1 => ("kappa1", "rad/s", range.rates("squeeze.range")?, base.lp.cavity.kappa1),
        SqueezeSweep::Omega => unreachable!("handled by the omega sweep"),
    };
    let w0 = match &opts.omega {
        Some(q) => q.rate("squeeze.omega")?,
        None => {
            let grid = cfg.grid().map_err(|_| CliError::config("give `squeeze.omega` or a `[grid]` to search"))?;
            let best = par_map(&grid, |&w| Ok(optimise(base, w, spec)?.best))?;
            grid[argmin(best.into_iter())]
        }
    };
    let x0 = match &opts.reference {
        Some(Quantity::Value(v)) => *v,
        Some(q) if unit.is_empty() => return Err(CliError::config(format!("`squeeze.reference` {q:?} must be a plain number"))),
        Some(q) => q.rate("squeeze.reference")?,
        None => configured,
    };
    let setting = optimise(&with_param(base, opts.sweep, x0)?, w0, spec)?.setting.ok_or_else(|| unrealisable(w0))?;

    let mut t = OutputTable::default();
    columns(&mut t, name, unit);
    let rows = par_map(&xs, |&x| {
        let om = with_param(base, opts.sweep, x)?;
        let p = optimise(&om, w0, spec)?;
        let (s_open, s_single) = without_feedback(&om, w0, spec)?;
        let stable = in_window(Some(&setting), &om)?;
        Ok(vec![x, fixed(&setting, &om, w0)?, p.best, s_open, s_single, stable, in_window(p.setting.as_ref(), &om)?])
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    describe(&mut t, &setting, w0);
    t.meta("omega_ref", num(w0));
    t.meta("reference", num(x0));
    Ok(t)
}
