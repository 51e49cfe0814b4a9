// SPDX-License-Identifier: Apache-2.0

//! Response of the cavity and the mechanics to a short seed pulse.

use inloop_core::optomech::{PulseMode, PulseSpec, PulseTrace};
use inloop_core::spectral::C64;

use crate::config::{PulseModeName, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::table::{num, OutputTable};

fn label(m: PulseModeName) -> &'static str {
    match m {
        PulseModeName::ClosedForm => "closed_form",
        PulseModeName::Effective => "effective",
        PulseModeName::FullDde => "full_dde",
    }
}

pub fn run(cfg: &ScenarioConfig) -> CliResult<OutputTable> {
    let opts = cfg.pulse.as_ref().ok_or_else(|| CliError::config("missing `[pulse]` section"))?;
    if opts.modes.is_empty() {
        return Err(CliError::config("`pulse.modes` is empty"));
    }
    let om = cfg.om_loop()?;
    let spec =
        PulseSpec { horizon: opts.horizon.time("pulse.horizon")?, step: opts.step.as_ref().map(|s| s.time("pulse.step")).transpose()? };
    let alpha_p = C64::new(opts.alpha_p, 0.0);
    let traces: Vec<PulseTrace> = opts
        .modes
        .iter()
        .map(|&m| {
            let mode = match m {
                PulseModeName::ClosedForm => PulseMode::ClosedForm,
                PulseModeName::Effective => PulseMode::Effective,
                PulseModeName::FullDde => PulseMode::FullDde,
            };
            om.pulse_response(alpha_p, mode, &spec)
        })
        .collect::<Result<_, _>>()?;

    // Every mode steps on the same grid.
    let times = &traces[0].times;
    if let Some(tr) = traces.iter().find(|tr| tr.times.len() != times.len()) {
        return Err(CliError::Numerical(format!("{:?} returned {} samples against {}", tr.mode, tr.times.len(), times.len())));
    }

    let mut t = OutputTable::default();
    t.column("t", "s");
    for &m in &opts.modes {
        t.column(format!("|alpha| {}", label(m)), "");
        t.column(format!("|beta| {}", label(m)), "");
    }
    for (i, &time) in times.iter().enumerate() {
        let mut row = vec![time];
        for tr in &traces {
            row.push(tr.alpha_bar[i].norm());
            row.push(tr.beta_bar[i].norm());
        }
        t.push(row);
    }
    t.meta("kappa_eff", num(traces[0].kappa_eff));
    t.meta("delta_eff", num(traces[0].delta_eff));
    t.meta("coupling", num(om.mech.coupling));
    Ok(t)
}
