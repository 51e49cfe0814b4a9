// SPDX-License-Identifier: Apache-2.0

//! Classical steady state of the driven optomechanical cavity.
//!
//! The static displacement shifts the detuning, which in turn sets the
//! intracavity amplitude: `Delta = Delta_0 - 2 g0^2 alpha_c^2 / omega_m` with
//! `alpha_c^2 = 2 kappa1 alpha_in^2 / (kappa^2 + Delta^2)`. Clearing the
//! denominator gives a cubic in `Delta` with one or three real roots.

use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{check_finite, check_positive, Error, Result};
use crate::numerics::find_roots_bracketed;
use crate::spectral::CavityParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSolution {
    pub alpha_c: f64,
    /// Linearised coupling `G = g0 alpha_c`.
    pub coupling: f64,
    /// Detuning including the radiation-pressure shift.
    pub detuning: f64,
    /// Static displacement `q = sqrt(2) g0 alpha_c^2 / omega_m`.
    pub displacement: f64,
}

/// Self-consistent linearisation point for a drive of amplitude `alpha_in`
/// (photon flux `alpha_in^2`) at bare detuning `cav.detuning`.
pub fn linearize_drive(g0: f64, alpha_in: f64, omega_m: f64, cav: &CavityParams) -> Result<DriveSolution> {
    check_finite("g0", g0)?;
    check_finite("alpha_in", alpha_in)?;
    check_positive("omega_m", omega_m)?;
    cav.validate()?;
    let k = cav.kappa();
    let d0 = cav.detuning;
    let strength = 4.0 * g0 * g0 * cav.kappa1 * alpha_in * alpha_in / omega_m;
    let f = |d: f64| (d - d0) * (k * k + d * d) + strength;

    // Every root lies in [d0 - span, d0]; solve for x = (Delta - d0) / span.
    let span = strength / (k * k);
    let roots: Vec<f64> = if strength == 0.0 {
        alloc::vec![d0]
    } else {
        let g = |x: f64| f(d0 + span * x) / strength;
        let mut r = find_roots_bracketed(g, -1.0 - 1e-9, 1e-9, 4096);
        for x in r.iter_mut() {
            let mut d = d0 + span * *x;
            // Polish with Newton on the cubic.
            for _ in 0..3 {
                let df = (k * k + d * d) + 2.0 * d * (d - d0);
                if df != 0.0 {
                    d -= f(d) / df;
                }
            }
            *x = d;
        }
        r
    };
    match roots.as_slice() {
        [d] => {
            let alpha_c = (2.0 * cav.kappa1).sqrt() * alpha_in.abs() / (k * k + d * d).sqrt();
            Ok(DriveSolution {
                alpha_c,
                coupling: g0 * alpha_c,
                detuning: *d,
                displacement: core::f64::consts::SQRT_2 * g0 * alpha_c * alpha_c / omega_m,
            })
        }
        [] => Err(Error::NonFinite("drive fixed point")),
        _ => Err(Error::Multistable { branches: roots }),
    }
}
