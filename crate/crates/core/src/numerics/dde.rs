// SPDX-License-Identifier: Apache-2.0

//! Classical RK4 for systems with a single constant delay.
//!
//! The step is shrunk so the delay is an integer number of steps; every
//! delayed stage then falls inside one stored step and is read off a cubic
//! Hermite interpolant built from the step's end values and end slopes.
//! Slopes are stored one-sided, so a jump in the history at `t = 0` (an
//! impulsive kick, say) does not smear into neighbouring steps.

use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{check_nonneg, check_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdeSpec {
    /// Requested step; the integrator may shorten it to divide the delay.
    pub step: f64,
    pub horizon: f64,
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdeSolution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub step: f64,
}

impl DdeSpec {
    /// Largest step accepted for a given delay.
    pub fn step_limit(&self) -> f64 {
        if self.delay > 0.0 {
            self.delay / 10.0
        } else {
            f64::INFINITY
        }
    }

    fn effective_step(&self) -> Result<f64> {
        check_positive("step", self.step)?;
        check_positive("horizon", self.horizon)?;
        check_nonneg("delay", self.delay)?;
        let limit = self.step_limit();
        if self.step > limit * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { step: self.step, limit });
        }
        if self.delay > 0.0 {
            let k = (self.delay / self.step - 1e-9).ceil().max(1.0);
            Ok(self.delay / k)
        } else {
            Ok(self.step)
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, x: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * x[i];
    }
    out
}

fn hermite<const N: usize>(y0: &[f64; N], y1: &[f64; N], d0: &[f64; N], d1: &[f64; N], h: f64, s: f64) -> [f64; N] {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = h00 * y0[i] + h * h10 * d0[i] + h01 * y1[i] + h * h11 * d1[i];
    }
    out
}

/// Integrate `y'(t) = rhs(t, y(t), y(t - delay))` from `y(0) = y0`.
///
/// `history(t)` supplies the state for `t < 0`. With zero delay the current
/// state is passed as the delayed argument.
pub fn integrate_dde<const N: usize, F, H>(mut rhs: F, history: H, y0: [f64; N], spec: &DdeSpec) -> Result<DdeSolution<N>>
where
    F: FnMut(f64, &[f64; N], &[f64; N]) -> [f64; N],
    H: Fn(f64) -> [f64; N],
{
    let h = spec.effective_step()?;
    let steps = (spec.horizon / h).ceil() as usize;
    let lag = if spec.delay > 0.0 { (spec.delay / h).round() as usize } else { 0 };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    // Slopes at the left and right ends of each completed step.
    let mut left: Vec<[f64; N]> = Vec::with_capacity(steps);
    let mut right: Vec<[f64; N]> = Vec::with_capacity(steps);
    times.push(0.0);
    states.push(y0);

    for n in 0..steps {
        let t = n as f64 * h;
        let y = states[n];
        let delayed = |s: f64, states: &Vec<[f64; N]>, left: &Vec<[f64; N]>, right: &Vec<[f64; N]>, y_now: &[f64; N]| -> [f64; N] {
            if lag == 0 {
                return *y_now;
            }
            if n < lag {
                return history(t + s * h - spec.delay);
            }
            let j = n - lag;
            hermite(&states[j], &states[j + 1], &left[j], &right[j], h, s)
        };
        let d1 = delayed(0.0, &states, &left, &right, &y);
        let k1 = rhs(t, &y, &d1);
        let y2 = axpy(&y, 0.5 * h, &k1);
        let dm = delayed(0.5, &states, &left, &right, &y2);
        let k2 = rhs(t + 0.5 * h, &y2, &dm);
        let y3 = axpy(&y, 0.5 * h, &k2);
        let dm3 = if lag == 0 { y3 } else { dm };
        let k3 = rhs(t + 0.5 * h, &y3, &dm3);
        let y4 = axpy(&y, h, &k3);
        let d4 = delayed(1.0, &states, &left, &right, &y4);
        let k4 = rhs(t + h, &y4, &d4);
        let mut next = y;
        for i in 0..N {
            next[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("delay integrator"));
        }
        let d_end = if lag == 0 { next } else { d4 };
        let slope_end = rhs(t + h, &next, &d_end);
        left.push(k1);
        right.push(slope_end);
        times.push(t + h);
        states.push(next);
    }
    Ok(DdeSolution { times, states, step: h })
}

#[cfg(test)]
mod tests {
    use super::*;

    // y' = lam * y(t - tau) with lam = s exp(s tau) has y = exp(s t) for all t.
    fn exp_case(h: f64) -> f64 {
        let (s, tau) = (-0.5f64, 1.0);
        let lam = s * (s * tau).exp();
        let spec = DdeSpec { step: h, horizon: 4.0, delay: tau };
        let sol = integrate_dde(|_, _, yd: &[f64; 1]| [lam * yd[0]], |t| [(s * t).exp()], [1.0], &spec).unwrap();
        let (t, y) = (sol.times.last().copied().unwrap(), sol.states.last().unwrap()[0]);
        (y - (s * t).exp()).abs()
    }

    #[test]
    fn fourth_order_on_smooth_problem() {
        let e1 = exp_case(0.1);
        let e2 = exp_case(0.05);
        let e3 = exp_case(0.025);
        let p1 = (e1 / e2).log2();
        let p2 = (e2 / e3).log2();
        assert!(p1 > 3.5 && p2 > 3.5, "orders {p1} {p2}");
    }

    #[test]
    fn zero_delay_is_plain_rk4() {
        let spec = DdeSpec { step: 0.01, horizon: 1.0, delay: 0.0 };
        let sol = integrate_dde(|_, y: &[f64; 1], _| [-y[0]], |_| [1.0], [1.0], &spec).unwrap();
        assert!((sol.states.last().unwrap()[0] - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn oversized_step_refused() {
        let spec = DdeSpec { step: 0.2, horizon: 1.0, delay: 1.0 };
        let r = integrate_dde(|_, _, yd: &[f64; 1]| [-yd[0]], |_| [1.0], [1.0], &spec);
        assert!(matches!(r, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn step_divides_delay() {
        let spec = DdeSpec { step: 0.03, horizon: 0.5, delay: 1.0 };
        assert!((spec.effective_step().unwrap() * 34.0 - 1.0).abs() < 1e-12);
    }
}
