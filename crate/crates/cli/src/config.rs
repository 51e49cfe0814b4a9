// SPDX-License-Identifier: Apache-2.0

//! Scenario files (TOML, schema version 1).
//!
//! Rates are angular frequencies. A bare number is rad/s; a string may carry
//! a unit, `"rad/s"`, `"Hz"`, `"kHz"`, `"MHz"` or `"GHz"`, and the cyclic
//! units are multiplied by `2 pi` (`"10 MHz"` is `2 pi 1e7` rad/s). Times are
//! seconds, or strings in `s`, `ms`, `us`, `ns` or `ps`. Angles are radians.
//! Unknown keys are rejected.

use std::f64::consts::PI;

use inloop_core::cavity::{CavityLoop, WindowSpec};
use inloop_core::laser::{DetectorParams, LaserLoop};
use inloop_core::optomech::{MechanicalParams, OmLoop};
use inloop_core::spectral::{linspace, CavityParams, DelayedLowPass, FilterFunction, FlatFilter, Port};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

const RATE_UNITS: &[(&str, f64)] =
    &[("rad/s", 1.0), ("Hz", 2.0 * PI), ("kHz", 2.0 * PI * 1e3), ("MHz", 2.0 * PI * 1e6), ("GHz", 2.0 * PI * 1e9)];

const TIME_UNITS: &[(&str, f64)] = &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9), ("ps", 1e-12)];

/// A number, or a number followed by a unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Value(f64),
    Text(String),
}

impl From<f64> for Quantity {
    fn from(x: f64) -> Self {
        Quantity::Value(x)
    }
}

impl Quantity {
    fn convert(&self, field: &str, units: &[(&str, f64)]) -> CliResult<f64> {
        let text = match self {
            Quantity::Value(x) => return finite(field, *x),
            Quantity::Text(t) => t.trim(),
        };
        let split = text.find(|c: char| c.is_whitespace() || (c.is_ascii_alphabetic() && c != 'e' && c != 'E'));
        let (num, unit) = match split {
            Some(i) => (text[..i].trim(), text[i..].trim()),
            None => (text, ""),
        };
        let x: f64 = num.parse().map_err(|_| CliError::config(format!("`{field}`: cannot read a number from {text:?}")))?;
        let scale = if unit.is_empty() {
            1.0
        } else {
            units.iter().find(|(u, _)| *u == unit).map(|(_, s)| *s).ok_or_else(|| {
                let known: Vec<&str> = units.iter().map(|(u, _)| *u).collect();
                CliError::config(format!("`{field}`: unknown unit {unit:?} (expected one of {known:?})"))
            })?
        };
        finite(field, x * scale)
    }

    pub fn rate(&self, field: &str) -> CliResult<f64> {
        self.convert(field, RATE_UNITS)
    }

    pub fn time(&self, field: &str) -> CliResult<f64> {
        self.convert(field, TIME_UNITS)
    }
}

fn finite(field: &str, x: f64) -> CliResult<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::config(format!("`{field}` must be finite")))
    }
}

fn zero() -> Quantity {
    Quantity::Value(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortName {
    #[default]
    Transmission,
    Reflection,
}

impl From<PortName> for Port {
    fn from(p: PortName) -> Port {
        match p {
            PortName::Transmission => Port::Transmission,
            PortName::Reflection => Port::Reflection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub kappa1: Quantity,
    #[serde(default = "zero")]
    pub kappa2: Quantity,
    #[serde(default = "zero")]
    pub kappa_loss: Quantity,
    #[serde(default = "zero")]
    pub detuning: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanicsSection {
    pub omega_m: Quantity,
    pub gamma: Quantity,
    #[serde(default)]
    pub n_th: f64,
    /// Linearised coupling `G`, a rate.
    pub coupling: Quantity,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Bare efficiency; with `noise_ratio` replaces `eta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_ratio: Option<f64>,
    #[serde(default)]
    pub theta_fb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    #[default]
    Flat,
    LowPass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    #[serde(default)]
    pub kind: FilterKind,
    #[serde(default)]
    pub gain: f64,
    #[serde(default = "zero")]
    pub delay: Quantity,
    /// Flat filter only.
    #[serde(default)]
    pub phase_offset: f64,
    /// Low-pass only, a rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<Quantity>,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self { kind: FilterKind::Flat, gain: 0.0, delay: zero(), phase_offset: 0.0, cutoff: None }
    }
}

/// Evenly spaced samples, both ends included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: Quantity,
    pub stop: Quantity,
    pub points: usize,
}

impl Range {
    fn check(&self, field: &str, lo: f64, hi: f64) -> CliResult<Vec<f64>> {
        if self.points < 2 {
            return Err(CliError::config(format!("`{field}.points` must be at least 2")));
        }
        if hi <= lo {
            return Err(CliError::config(format!("`{field}`: stop must exceed start")));
        }
        Ok(linspace(lo, hi, self.points))
    }

    pub fn rates(&self, field: &str) -> CliResult<Vec<f64>> {
        self.check(field, self.start.rate(field)?, self.stop.rate(field)?)
    }

    /// Dimensionless samples; unit suffixes are refused.
    pub fn plain(&self, field: &str) -> CliResult<Vec<f64>> {
        let get = |q: &Quantity| match q {
            Quantity::Value(x) => finite(field, *x),
            Quantity::Text(_) => Err(CliError::config(format!("`{field}` is dimensionless"))),
        };
        self.check(field, get(&self.start)?, get(&self.stop)?)
    }
}

/// Filter gains to evaluate: explicit values, or fractions of the stability
/// window (`f > 0` scales the upper edge, `f < 0` the lower one).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_fractions: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumOptions {
    /// In-loop quadrature angles `phi`, relative to the carrier.
    #[serde(default)]
    pub quadratures: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityOptions {
    /// Drive-referenced detection angle at the unused port. Defaults to the
    /// feedback detector's drive-referenced angle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_bar_un: Option<f64>,
    /// Also integrate the stationary intracavity moments.
    #[serde(default)]
    pub correlations: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoolingModeName {
    #[default]
    Generic,
    Suppression,
    Antisquash,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoolingSweep {
    /// Cavity amplitude noise over the frequency grid.
    Omega,
    /// Map over total linewidth and detuning; mirror rates keep their ratios.
    #[default]
    KappaDetuning,
    /// The gains of the `[gains]` section.
    Gain,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolingOptions {
    #[serde(default)]
    pub mode: CoolingModeName,
    #[serde(default)]
    pub sweep: CoolingSweep,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<Range>,
    /// Detection efficiencies for the `omega` sweep; defaults to the detector's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseModeName {
    ClosedForm,
    Effective,
    FullDde,
}

fn all_pulse_modes() -> Vec<PulseModeName> {
    vec![PulseModeName::ClosedForm, PulseModeName::Effective, PulseModeName::FullDde]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseOptions {
    pub horizon: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<Quantity>,
    /// Real amplitude of the seed pulse.
    #[serde(default = "one")]
    pub alpha_p: f64,
    #[serde(default = "all_pulse_modes")]
    pub modes: Vec<PulseModeName>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezeSweep {
    #[default]
    Omega,
    Eta,
    Coupling,
    /// First-mirror rate at constant total linewidth.
    Kappa1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeOptions {
    #[serde(default)]
    pub sweep: SqueezeSweep,
    /// Swept values for every sweep other than `omega`, which uses `[grid]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<Range>,
    /// Frequency of the non-omega sweeps and of the fixed-parameter
    /// optimisation. Defaults to the best point on `[grid]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Quantity>,
    /// Value of the swept parameter at which the fixed-parameter curve is
    /// optimised. Defaults to the configured value (for `omega`, to `omega`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Quantity>,
    /// Seed grid per angle of the optimiser.
    #[serde(default = "optimizer_grid")]
    pub optimizer_grid: usize,
}

fn optimizer_grid() -> usize {
    16
}

impl Default for SqueezeOptions {
    fn default() -> Self {
        Self { sweep: SqueezeSweep::Omega, range: None, omega: None, reference: None, optimizer_grid: optimizer_grid() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    #[serde(default)]
    pub port: PortName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanics: Option<MechanicsSection>,
    #[serde(default)]
    pub detector: DetectorSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<GainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity_run: Option<CavityOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooling: Option<CoolingOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeeze: Option<SqueezeOptions>,
}

/// Filter built from the `[filter]` section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Filter {
    Flat(FlatFilter),
    LowPass(DelayedLowPass),
}

impl ScenarioConfig {
    pub fn new() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            port: PortName::Transmission,
            cavity: None,
            mechanics: None,
            detector: DetectorSection::default(),
            filter: FilterSection::default(),
            grid: None,
            gains: None,
            spectrum: None,
            cavity_run: None,
            cooling: None,
            pulse: None,
            squeeze: None,
        }
    }

    #[cfg(test)]
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.check_schema()?;
        Ok(cfg)
    }

    pub fn check_schema(&self) -> CliResult<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::config(format!("schema {} is not supported (this build reads {SCHEMA_VERSION})", self.schema)));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn detector(&self) -> CliResult<DetectorParams> {
        let d = &self.detector;
        let p = match (d.eta, d.eta_d, d.noise_ratio) {
            (Some(eta), None, None) => DetectorParams::new(eta, d.theta_fb)?,
            (None, Some(eta_d), r) => DetectorParams::with_electronic_noise(eta_d, r.unwrap_or(0.0), d.theta_fb)?,
            (None, None, None) => DetectorParams::new(1.0, d.theta_fb)?,
            _ => return Err(CliError::config("give either `detector.eta` or `detector.eta_d` (with `noise_ratio`), not both")),
        };
        Ok(p)
    }

    pub fn filter(&self) -> CliResult<Filter> {
        let f = &self.filter;
        let delay = f.delay.time("filter.delay")?;
        match f.kind {
            FilterKind::Flat => {
                if f.cutoff.is_some() {
                    return Err(CliError::config("`filter.cutoff` applies to the low_pass filter only"));
                }
                Ok(Filter::Flat(FlatFilter::new(f.gain, delay, f.phase_offset)?))
            }
            FilterKind::LowPass => {
                if f.phase_offset != 0.0 {
                    return Err(CliError::config("`filter.phase_offset` applies to the flat filter only"));
                }
                let cutoff = f.cutoff.as_ref().ok_or_else(|| CliError::config("the low_pass filter needs `filter.cutoff`"))?;
                Ok(Filter::LowPass(DelayedLowPass::new(f.gain, delay, cutoff.rate("filter.cutoff")?)?))
            }
        }
    }

    pub fn flat_filter(&self) -> CliResult<FlatFilter> {
        match self.filter()? {
            Filter::Flat(f) => Ok(f),
            Filter::LowPass(_) => Err(CliError::config("this command needs the flat filter")),
        }
    }

    pub fn cavity_params(&self) -> CliResult<CavityParams> {
        let c = self.cavity.as_ref().ok_or_else(|| CliError::config("missing `[cavity]` section"))?;
        Ok(CavityParams::new(
            c.kappa1.rate("cavity.kappa1")?,
            c.kappa2.rate("cavity.kappa2")?,
            c.kappa_loss.rate("cavity.kappa_loss")?,
            c.detuning.rate("cavity.detuning")?,
        )?)
    }

    pub fn cavity_loop<F: FilterFunction>(&self, filter: F) -> CliResult<CavityLoop<F>> {
        let laser = LaserLoop::new(filter, self.detector()?);
        Ok(CavityLoop::new(self.cavity_params()?, laser, self.port.into())?)
    }

    pub fn mechanics(&self) -> CliResult<MechanicalParams> {
        let m = self.mechanics.as_ref().ok_or_else(|| CliError::config("missing `[mechanics]` section"))?;
        if !m.n_th.is_finite() {
            return Err(CliError::config("`mechanics.n_th` must be finite"));
        }
        Ok(MechanicalParams::new(
            m.omega_m.rate("mechanics.omega_m")?,
            m.gamma.rate("mechanics.gamma")?,
            m.n_th,
            m.coupling.rate("mechanics.coupling")?,
        )?)
    }

    pub fn om_loop(&self) -> CliResult<OmLoop> {
        Ok(OmLoop::new(self.cavity_loop(self.flat_filter()?)?, self.mechanics()?)?)
    }

    pub fn grid(&self) -> CliResult<Vec<f64>> {
        self.grid.as_ref().ok_or_else(|| CliError::config("missing `[grid]` section"))?.rates("grid")
    }

    /// Gains to evaluate. `window` gives the open stability interval used by
    /// `window_fractions`.
    pub fn gains(&self, window: impl FnOnce() -> CliResult<(f64, f64)>) -> CliResult<Vec<f64>> {
        let Some(g) = &self.gains else {
            return Ok(vec![self.filter.gain]);
        };
        match (&g.values, &g.window_fractions) {
            (Some(v), None) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(CliError::config("`gains.values` must be a non-empty list of finite numbers"));
                }
                Ok(v.clone())
            }
            (None, Some(fr)) => {
                if fr.is_empty() || fr.iter().any(|f| !(-1.0 < *f && *f < 1.0)) {
                    return Err(CliError::config("`gains.window_fractions` must lie strictly between -1 and 1"));
                }
                let (lo, hi) = window()?;
                fr.iter()
                    .map(|&f| {
                        let edge = if f >= 0.0 { hi } else { -lo };
                        if f != 0.0 && !edge.is_finite() {
                            return Err(CliError::config("the stability window is unbounded on that side; give `gains.values`"));
                        }
                        Ok(if f == 0.0 { 0.0 } else { f * edge })
                    })
                    .collect()
            }
            _ => Err(CliError::config("give exactly one of `gains.values` and `gains.window_fractions`")),
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::new()
    }
}

/// Open stability interval of a cavity loop's filter gain. Without any
/// real-axis crossing the loop is stable at every gain.
pub fn cavity_window<F: FilterFunction>(lp: &CavityLoop<F>) -> CliResult<(f64, f64)> {
    match lp.stability_window(&WindowSpec::default()) {
        Ok(w) => Ok((w.lower, w.upper)),
        Err(inloop_core::Error::NoCrossing { .. }) => Ok((f64::NEG_INFINITY, f64::INFINITY)),
        Err(e) => Err(e.into()),
    }
}

/// Keys that are alternatives to one another. Setting any of them in an
/// override drops the others from the base.
const EXCLUSIVE: &[(&str, &[&[&str]])] =
    &[("gains", &[&["values"], &["window_fractions"]]), ("detector", &[&["eta"], &["eta_d", "noise_ratio"]])];

/// Layers `over` on top of `base`: tables merge key by key, other values are
/// replaced, and alternatives listed in `EXCLUSIVE` displace each other.
pub fn merge(base: &mut toml::Value, over: toml::Value) {
    if let (toml::Value::Table(b), toml::Value::Table(o)) = (&mut *base, &over) {
        for (section, groups) in EXCLUSIVE {
            let (Some(toml::Value::Table(bs)), Some(toml::Value::Table(os))) = (b.get_mut(*section), o.get(*section)) else {
                continue;
            };
            for group in groups.iter() {
                if group.iter().any(|k| os.contains_key(*k)) {
                    for other in groups.iter().filter(|g| *g != group) {
                        for k in other.iter() {
                            bs.remove(*k);
                        }
                    }
                }
            }
        }
    }
    merge_tables(base, over);
}

fn merge_tables(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_tables(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
