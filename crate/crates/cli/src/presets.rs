// SPDX-License-Identifier: Apache-2.0

//! Built-in scenarios, one per figure panel. A bare `figN` selects panel (a).
//!
//! The loop-only and empty-cavity scenarios (fig2 to fig7) are in units of
//! the feedback delay: `tau = 1 s`, so rates read as multiples of `1/tau`.
//! fig8 is in units of the mechanical frequency. fig9 to fig13 use physical
//! units with `omega_m = 10 MHz` (cyclic), so `0.1 / omega_m` is about
//! 1.59 ns.

use crate::commands::Command;
use crate::error::{CliError, CliResult};

const LOOP: &str = r#"
schema = 1

[detector]
eta = 1.0
theta_fb = 0.0

[filter]
kind = "flat"
delay = 1.0
phase_offset = 0.0

[grid]
start = -10.0
stop = 10.0
points = 1001

[gains]
window_fractions = [-0.99, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 0.99]
"#;

const FIG3: &str = r#"
[spectrum]
quadratures = [0.0, -1.0471975511965976]
"#;

const CAVITY: &str = r#"
schema = 1
port = "transmission"

[cavity]
kappa1 = 0.5
kappa2 = 0.5
detuning = 10.0

[detector]
eta = 1.0
theta_fb = 0.0

[filter]
kind = "flat"
delay = 1.0
phase_offset = 0.0

[grid]
start = -20.0
stop = 20.0
points = 801

[gains]
window_fractions = [-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9]
"#;

const REFLECTION: &str = "port = \"reflection\"\n";

const UNIT_GAIN: &str = r#"
[gains]
values = [0.0]
"#;

const CORRELATIONS: &str = r#"
[cavity_run]
correlations = true
"#;

const FIG8: &str = r#"
schema = 1
port = "reflection"

[cavity]
kappa1 = 1.0
detuning = 1.0

[mechanics]
omega_m = 1.0
gamma = 1e-4
n_th = 131.0
coupling = 0.1

[detector]
eta = 1.0

[filter]
kind = "flat"
delay = 0.1

[grid]
start = -3.0
stop = 3.0
points = 601

[cooling]
sweep = "omega"
mode = "suppression"
etas = [1.0, 0.7]
"#;

const LONG_DELAY: &str = "[filter]\ndelay = 5.0\n";

const FIG9: &str = r#"
schema = 1
port = "reflection"

[cavity]
kappa1 = "10 MHz"
detuning = "10 MHz"

[mechanics]
omega_m = "10 MHz"
gamma = "1 kHz"
n_th = 131.0
coupling = "2 MHz"

[detector]
eta = 1.0

[filter]
kind = "flat"
delay = 1.5915494309189535e-9

[cooling]
sweep = "kappa_detuning"
mode = "suppression"

[cooling.kappa]
start = "1 MHz"
stop = "20 MHz"
points = 20

[cooling.detuning]
start = "0 MHz"
stop = "20 MHz"
points = 21
"#;

const LOW_EFFICIENCY: &str = "[detector]\neta = 0.7\n";

const SIDEBAND_ONLY: &str = "[cooling]\nmode = \"generic\"\n";

const SQUEEZE: &str = r#"
schema = 1
port = "transmission"

[cavity]
kappa1 = "5 MHz"
kappa2 = "5 MHz"
detuning = 0.0

[mechanics]
omega_m = "10 MHz"
gamma = "1 kHz"
n_th = 131.0
coupling = "5 MHz"

[detector]
eta = 1.0

[filter]
kind = "flat"
delay = 1.5915494309189535e-9

[grid]
start = "0.5 MHz"
stop = "20 MHz"
points = 40

[squeeze]
sweep = "omega"
"#;

const FIG11: &str = r#"
[squeeze]
sweep = "eta"

[squeeze.range]
start = 0.05
stop = 1.0
points = 20
"#;

const FIG12: &str = r#"
[squeeze]
sweep = "coupling"

[squeeze.range]
start = "0.5 MHz"
stop = "10 MHz"
points = 20
"#;

const FIG13: &str = r#"
[squeeze]
sweep = "kappa1"

[squeeze.range]
start = "0.5 MHz"
stop = "9.5 MHz"
points = 19
"#;

pub const NAMES: &[&str] = &[
    "fig2", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig6a", "fig6b", "fig7", "fig8a", "fig8b", "fig9a", "fig9b", "fig9c", "fig10",
    "fig11", "fig12", "fig13",
];

/// The command a preset is meant for, and its layers, merged in order.
pub fn lookup(name: &str) -> CliResult<(Command, Vec<&'static str>)> {
    let full = match name {
        "fig4" | "fig5" | "fig6" | "fig8" | "fig9" => format!("{name}a"),
        _ => name.to_owned(),
    };
    let found = match full.as_str() {
        "fig2" => (Command::Spectrum, vec![LOOP]),
        "fig3" => (Command::Spectrum, vec![LOOP, FIG3]),
        "fig4a" | "fig6a" => (Command::Cavity, vec![CAVITY]),
        "fig4b" | "fig6b" => (Command::Cavity, vec![CAVITY, REFLECTION]),
        "fig5a" => (Command::Cavity, vec![CAVITY, UNIT_GAIN]),
        "fig5b" => (Command::Cavity, vec![CAVITY, REFLECTION, UNIT_GAIN]),
        "fig7" => (Command::Cavity, vec![CAVITY, CORRELATIONS]),
        "fig8a" => (Command::Cooling, vec![FIG8]),
        "fig8b" => (Command::Cooling, vec![FIG8, LONG_DELAY]),
        "fig9a" => (Command::Cooling, vec![FIG9]),
        "fig9b" => (Command::Cooling, vec![FIG9, LOW_EFFICIENCY]),
        "fig9c" => (Command::Cooling, vec![FIG9, SIDEBAND_ONLY]),
        "fig10" => (Command::Squeeze, vec![SQUEEZE]),
        "fig11" => (Command::Squeeze, vec![SQUEEZE, FIG11]),
        "fig12" => (Command::Squeeze, vec![SQUEEZE, FIG12]),
        "fig13" => (Command::Squeeze, vec![SQUEEZE, FIG13]),
        _ => return Err(CliError::config(format!("unknown preset {name:?}; known presets: {}", NAMES.join(", ")))),
    };
    Ok(found)
}

/// The preset's layers merged into one TOML table.
pub fn resolve(name: &str) -> CliResult<(Command, toml::Value)> {
    let (cmd, layers) = lookup(name)?;
    let mut value = toml::Value::Table(Default::default());
    for layer in layers {
        let v: toml::Value = toml::from_str(layer).expect("built-in presets parse");
        crate::config::merge(&mut value, v);
    }
    Ok((cmd, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    #[test]
    fn every_preset_validates() {
        for name in NAMES {
            let (_, v) = resolve(name).unwrap();
            let cfg = ScenarioConfig::from_toml(&toml::to_string(&v).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            cfg.detector().unwrap();
            cfg.filter().unwrap();
        }
    }

    #[test]
    fn bare_names_pick_panel_a() {
        assert_eq!(resolve("fig9").unwrap().1, resolve("fig9a").unwrap().1);
        assert!(resolve("fig1").is_err());
    }

    #[test]
    fn long_delay_panel_only_changes_the_delay() {
        let a = ScenarioConfig::from_toml(&toml::to_string(&resolve("fig8a").unwrap().1).unwrap()).unwrap();
        let mut b = ScenarioConfig::from_toml(&toml::to_string(&resolve("fig8b").unwrap().1).unwrap()).unwrap();
        assert_eq!(b.filter.delay, 5.0.into());
        b.filter.delay = a.filter.delay.clone();
        assert_eq!(a, b);
    }
}
