// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};
use crate::table::OutputTable;

pub mod cavity;
pub mod cooling;
pub mod pulse;
pub mod spectrum;
pub mod squeeze;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Spectrum,
    Cavity,
    Cooling,
    Pulse,
    Squeeze,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Cavity => "cavity",
            Command::Cooling => "cooling",
            Command::Pulse => "pulse",
            Command::Squeeze => "squeeze",
        }
    }

    pub fn run(self, cfg: &ScenarioConfig) -> CliResult<OutputTable> {
        match self {
            Command::Spectrum => spectrum::run(cfg),
            Command::Cavity => cavity::run(cfg),
            Command::Cooling => cooling::run(cfg),
            Command::Pulse => pulse::run(cfg),
            Command::Squeeze => squeeze::run(cfg),
        }
    }
}

/// Evaluates `f` over `xs` in parallel, keeping the input order.
pub(crate) fn par_map<T, R, F>(xs: &[T], f: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> CliResult<R> + Sync + Send,
{
    xs.par_iter().map(f).collect()
}

pub(crate) fn gain_label(g: f64) -> String {
    format!("g={g}")
}

pub(crate) fn unstable(gain: f64, lower: f64, upper: f64) -> CliError {
    CliError::Unstable(format!("gain {gain} lies outside the stability window\nwindow_lower = {lower}\nwindow_upper = {upper}"))
}
