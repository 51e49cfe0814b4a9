// SPDX-License-Identifier: Apache-2.0

//! Gain window of the cavity loop from the real-axis crossings of the
//! open-loop gain.
//!
//! `G(omega)` is linear in the filter gain for either detection port, so the
//! crossings of `G` at unit gain fix the whole window: the loop is stable while
//! `gain * Re G(omega_i) < 1` at every crossing `omega_i`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use super::CavityLoop;
use crate::error::{Error, Result};
use crate::numerics::find_roots_bracketed;
use crate::spectral::{FilterFunction, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub grid: usize,
    /// Half-width of the scanned band; derived from the loop when `None`.
    pub band: Option<f64>,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { grid: 2048, band: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub omega: f64,
    /// `Re G(omega)` at unit filter gain.
    pub re_gain: f64,
}

/// Open interval `(lower, upper)` of stable filter gains. Unbounded sides are
/// infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityWindow {
    pub lower: f64,
    pub upper: f64,
    pub g_max: f64,
    pub g_min: f64,
    pub crossings: Vec<Crossing>,
}

impl StabilityWindow {
    pub fn contains(&self, gain: f64) -> bool {
        gain > self.lower && gain < self.upper
    }
}

impl<F: FilterFunction> CavityLoop<F> {
    fn band(&self, spec: &WindowSpec) -> f64 {
        spec.band.unwrap_or_else(|| {
            let k = self.cavity.kappa();
            let tau = self.laser.filter.delay();
            let by_delay = if tau > 0.0 { 4.0 * PI / tau } else { 0.0 };
            (20.0 * k).max(self.cavity.detuning.abs() + 20.0 * k).max(by_delay)
        })
    }

    /// Loop gain with the filter gain set to one.
    pub fn unit_loop_gain(&self, omega: f64) -> Result<C64> {
        let g1 = self.laser.filter.with_gain(1.0).response(omega);
        Ok(2.0 * self.eta().sqrt() * g1 * self.zeta_fb(omega)?)
    }

    /// Crossings of the real axis by `G(omega)` at unit gain.
    pub fn crossings(&self, spec: &WindowSpec) -> Result<Vec<Crossing>> {
        // Surface a bad detection phase before scanning.
        self.theta_bar()?;
        let w = self.band(spec);
        let im = |om: f64| self.unit_loop_gain(om).map(|g| g.im).unwrap_or(f64::NAN);
        let roots = find_roots_bracketed(im, -w, w, spec.grid);
        if roots.is_empty() {
            return Err(Error::NoCrossing { lo: -w, hi: w });
        }
        roots.into_iter().map(|om| Ok(Crossing { omega: om, re_gain: self.unit_loop_gain(om)?.re })).collect()
    }

    pub fn stability_window(&self, spec: &WindowSpec) -> Result<StabilityWindow> {
        let crossings = self.crossings(spec)?;
        let g_max = crossings.iter().map(|x| x.re_gain).fold(f64::NEG_INFINITY, f64::max);
        let g_min = crossings.iter().map(|x| x.re_gain).fold(f64::INFINITY, f64::min);
        let upper = if g_max > 0.0 { 1.0 / g_max } else { f64::INFINITY };
        let lower = if g_min < 0.0 { 1.0 / g_min } else { f64::NEG_INFINITY };
        Ok(StabilityWindow { lower, upper, g_max, g_min, crossings })
    }

    /// Stability verdict at the configured gain, evaluating the full loop
    /// gain at each crossing.
    pub fn is_stable(&self, spec: &WindowSpec) -> Result<bool> {
        let crossings = self.crossings(spec)?;
        for x in crossings {
            if self.loop_gain(x.omega)?.re >= 1.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laser::{DetectorParams, LaserLoop};
    use crate::spectral::{CavityParams, DelayedLowPass, FlatFilter, Port};

    #[test]
    fn window_brackets_zero_gain() {
        let cav = CavityParams::new(0.5, 0.5, 0.0, 10.0).unwrap();
        let laser = LaserLoop::new(FlatFilter::new(1.0, 1.0, 0.0).unwrap(), DetectorParams::new(1.0, 0.0).unwrap());
        let l = CavityLoop::new(cav, laser, Port::Transmission).unwrap();
        let w = l.stability_window(&WindowSpec::default()).unwrap();
        assert!(w.contains(0.0));
        assert!(w.lower < 0.0 && w.upper > 0.0);
        assert!(l.with_gain(0.99 * w.upper).is_stable(&WindowSpec::default()).unwrap());
        assert!(!l.with_gain(1.01 * w.upper).is_stable(&WindowSpec::default()).unwrap());
    }

    #[test]
    fn general_filter_verdict() {
        let cav = CavityParams::new(0.5, 0.5, 0.0, 0.0).unwrap();
        let laser = LaserLoop::new(DelayedLowPass::new(0.2, 0.5, 2.0).unwrap(), DetectorParams::new(0.9, 0.0).unwrap());
        let l = CavityLoop::new(cav, laser, Port::Transmission).unwrap();
        assert!(l.is_stable(&WindowSpec::default()).unwrap());
        let w = l.stability_window(&WindowSpec::default()).unwrap();
        assert!(w.contains(0.2));
    }
}
