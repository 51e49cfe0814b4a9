// SPDX-License-Identifier: Apache-2.0

//! In-loop photocurrent and quadrature spectra of the bare laser loop.

use inloop_core::laser::{DetectorParams, LaserLoop};
use inloop_core::spectral::FilterFunction;

use super::{gain_label, par_map, unstable};
use crate::config::{Filter, ScenarioConfig};
use crate::error::CliResult;
use crate::table::{num, OutputTable};

pub fn run(cfg: &ScenarioConfig) -> CliResult<OutputTable> {
    match cfg.filter()? {
        Filter::Flat(f) => build(cfg, f),
        Filter::LowPass(f) => build(cfg, f),
    }
}

fn build<F: FilterFunction + Copy + Send + Sync>(cfg: &ScenarioConfig, filter: F) -> CliResult<OutputTable> {
    let det = cfg.detector()?;
    let grid = cfg.grid()?;
    let quads = cfg.spectrum.as_ref().map(|s| s.quadratures.clone()).unwrap_or_default();
    let bound = gain_bound(&det);
    let gains = cfg.gains(|| Ok((-bound, bound)))?;

    let loops: Vec<LaserLoop<F>> = gains.iter().map(|&g| LaserLoop::new(filter.with_gain(g), det)).collect();
    for (lp, &g) in loops.iter().zip(&gains) {
        if !lp.stability().stable {
            return Err(unstable(g, -bound, bound));
        }
    }

    let mut t = OutputTable::default();
    t.column("omega", "rad/s");
    for &g in &gains {
        t.column(format!("S_i {}", gain_label(g)), "");
    }
    for &phi in &quads {
        for &g in &gains {
            t.column(format!("S_X phi={phi} {}", gain_label(g)), "");
        }
    }
    let rows = par_map(&grid, |&w| {
        let mut row = vec![w];
        row.extend(loops.iter().map(|lp| lp.photocurrent_psd(w)));
        for &phi in &quads {
            row.extend(loops.iter().map(|lp| lp.inloop_quadrature_psd(w, phi)));
        }
        Ok(row)
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    t.meta("window_lower", num(-bound));
    t.meta("window_upper", num(bound));
    t.meta("gains", gains);
    Ok(t)
}

/// `1 / (2 sqrt(eta) |cos theta|)`: the exact limit for the flat filter and a
/// sufficient one for filters whose magnitude never exceeds the gain.
fn gain_bound(det: &DetectorParams) -> f64 {
    let d = 2.0 * det.eta.sqrt() * det.theta_fb.cos().abs();
    if d > 0.0 {
        1.0 / d
    } else {
        f64::INFINITY
    }
}
