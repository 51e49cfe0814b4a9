// SPDX-License-Identifier: Apache-2.0

//! Feedback around an empty cavity: in-loop and out-of-loop spectra, the
//! open-loop gain, the effective susceptibility and the stationary moments.

use inloop_core::cavity::{CavityLoop, EffectiveBranch};
use inloop_core::spectral::FilterFunction;
use serde_json::{json, Value};

use super::{gain_label, par_map, unstable};
use crate::config::{cavity_window, Filter, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::table::{num, OutputTable};

/// Slack for rounding in the out-of-loop self-check.
const SHOT_NOISE_SLACK: f64 = 1e-10;

pub fn run(cfg: &ScenarioConfig) -> CliResult<OutputTable> {
    match cfg.filter()? {
        Filter::Flat(f) => build(cfg, cfg.cavity_loop(f)?),
        Filter::LowPass(f) => build(cfg, cfg.cavity_loop(f)?),
    }
}

fn build<F: FilterFunction + Copy + Send + Sync>(cfg: &ScenarioConfig, base: CavityLoop<F>) -> CliResult<OutputTable> {
    let grid = cfg.grid()?;
    let opts = cfg.cavity_run.clone().unwrap_or_default();
    let (lower, upper) = cavity_window(&base)?;
    let gains = cfg.gains(|| Ok((lower, upper)))?;
    for &g in &gains {
        if !(g > lower && g < upper) {
            return Err(unstable(g, lower, upper));
        }
    }
    let loops: Vec<CavityLoop<F>> = gains.iter().map(|&g| base.with_gain(g)).collect();
    let theta_un = match opts.theta_bar_un {
        Some(t) => t,
        None => base.theta_bar()?,
    };
    let has_un = base.cavity.port_rate(base.unused_port()) > 0.0;

    let mut t = OutputTable::default();
    t.column("omega", "rad/s");
    t.column("Re G unit", "");
    t.column("Im G unit", "");
    t.column("Re chi_c", "s");
    t.column("Im chi_c", "s");
    for &g in &gains {
        let l = gain_label(g);
        t.column(format!("S_i {l}"), "");
        if has_un {
            t.column(format!("S_out_un {l}"), "");
        }
        t.column(format!("Re chi_eff {l}"), "s");
        t.column(format!("Im chi_eff {l}"), "s");
    }

    let rows = par_map(&grid, |&w| {
        let gu = base.unit_loop_gain(w)?;
        let chi = base.cavity.chi(w);
        let mut row = vec![w, gu.re, gu.im, chi.re, chi.im];
        for lp in &loops {
            row.push(lp.photocurrent_psd(w)?);
            if has_un {
                row.push(lp.outofloop_psd_referenced(w, theta_un)?);
            }
            let x = lp.effective_susceptibility(w)?;
            row.push(x.re);
            row.push(x.im);
        }
        Ok(row)
    })?;
    rows.into_iter().for_each(|r| t.push(r));

    if has_un {
        for &g in &gains {
            let col = t.values(&format!("S_out_un {}", gain_label(g))).expect("column declared above");
            if let Some(s) = col.iter().find(|s| s.is_nan() || **s < 1.0 - SHOT_NOISE_SLACK) {
                return Err(CliError::Numerical(format!("out-of-loop spectrum {s} fell below shot noise at gain {g}")));
            }
        }
        t.meta("outofloop_check", "passed");
        t.meta("theta_bar_un", num(theta_un));
    }

    let effective: Vec<Value> = loops
        .iter()
        .zip(&gains)
        .map(|(lp, &g)| match lp.effective_params(EffectiveBranch::Full) {
            Ok(e) => json!({"gain": num(g), "kappa_eff": num(e.kappa_eff), "delta_eff": num(e.delta_eff), "u_re": num(e.u.re), "u_im": num(e.u.im)}),
            Err(err) => json!({"gain": num(g), "error": err.to_string()}),
        })
        .collect();
    t.meta("effective", effective);

    if opts.correlations {
        let moments = par_map(&loops, |lp| Ok(lp.steady_correlations(None)?))?;
        let moments: Vec<Value> = moments
            .iter()
            .zip(&gains)
            .map(|(c, &g)| json!({"gain": num(g), "n_st": num(c.n_st), "m_st_re": num(c.m_st.re), "m_st_im": num(c.m_st.im), "error": num(c.error)}))
            .collect();
        t.meta("correlations", moments);
    }
    t.meta("window_lower", num(lower));
    t.meta("window_upper", num(upper));
    t.meta("gains", gains.iter().map(|&g| num(g)).collect::<Vec<_>>());
    Ok(t)
}
