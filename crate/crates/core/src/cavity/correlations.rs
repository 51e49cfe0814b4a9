// SPDX-License-Identifier: Apache-2.0

//! Steady-state second moments of the intracavity field under feedback.

use core::f64::consts::PI;
use num_traits::Float;

use super::CavityLoop;
use crate::error::Result;
use crate::numerics::{integrate_line, Integral, QuadratureSpec};
use crate::spectral::{cis, FilterFunction, C64};

/// `n_st = <a^dag a>` and `m_st = <a a>` in the stationary state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMatrix {
    pub n_st: f64,
    pub m_st: C64,
    /// Combined quadrature error estimate.
    pub error: f64,
    /// `(2 kappa / 2 pi) \int |chi_c|^2`, which should be one.
    pub susceptibility_norm: f64,
}

impl<F: FilterFunction> CavityLoop<F> {
    /// Quadrature settings suited to this loop's integrands.
    pub fn default_quadrature(&self) -> QuadratureSpec {
        let k = self.cavity.kappa();
        let d = self.cavity.detuning;
        // A delayed loop leaves slowly decaying ripples in the tails, which
        // take many panels to resolve.
        let mut spec = QuadratureSpec::tangent(0.0, k + d.abs());
        spec.max_subdivisions = 50_000;
        spec.with_breakpoints(&[-d - 3.0 * k, -d - k, -d, -d + k, -d + 3.0 * k, d - 3.0 * k, d - k, d, d + k, d + 3.0 * k])
    }

    pub fn steady_correlations(&self, spec: Option<&QuadratureSpec>) -> Result<CorrelationMatrix> {
        let own;
        let spec = match spec {
            Some(s) => s,
            None => {
                own = self.default_quadrature();
                &own
            }
        };
        let cav = &self.cavity;
        let pref = 2.0 * cav.kappa1 / (2.0 * PI);

        let mut failure = None;
        let n: Integral<f64> = integrate_line(
            |w| match self.h(w).and_then(|h| Ok(h * self.lambda(w)?)) {
                Ok(hl) => (hl * cav.chi(w)).norm_sqr(),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            spec,
        )?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let m: Integral<C64> = integrate_line(
            |w| match self.h(w).and_then(|h| Ok(h * self.lambda(w)?)) {
                Ok(hl) => hl.norm_sqr() * cav.chi(w) * cav.chi(-w),
                Err(e) => {
                    failure.get_or_insert(e);
                    C64::new(0.0, 0.0)
                }
            },
            spec,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        let norm: Integral<f64> = integrate_line(|w| cav.chi(w).norm_sqr(), spec)?;

        Ok(CorrelationMatrix {
            n_st: pref * n.value,
            m_st: pref * cis(-2.0 * cav.phase()) * m.value,
            error: pref * (n.error + m.error),
            susceptibility_norm: 2.0 * cav.kappa() / (2.0 * PI) * norm.value,
        })
    }
}
