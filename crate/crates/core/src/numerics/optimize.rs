// SPDX-License-Identifier: Apache-2.0

//! Deterministic box-constrained minimisation: exhaustive grid, then local
//! golden-section refinement.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    /// One golden-section line search per coordinate around the best grid node.
    GoldenSection,
    /// Repeated cyclic golden-section sweeps with a shrinking bracket.
    CoordinateDescent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSpec {
    pub grid_points: usize,
    pub refinement: Refinement,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        Self { grid_points: 16, refinement: Refinement::CoordinateDescent, max_iter: 60, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<const D: usize> {
    pub x: [f64; D],
    pub value: f64,
    /// Best value seen on the seed grid, before refinement.
    pub grid_value: f64,
    pub evaluations: usize,
}

fn golden<F: FnMut(f64) -> f64>(f: &mut F, mut a: f64, mut b: f64, tol: f64, evals: &mut usize) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    *evals += 2;
    while (b - a).abs() > tol * (1.0 + c.abs() + d.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        *evals += 1;
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimise `f` over the box `bounds`.
///
/// The returned value never exceeds the best grid sample: refinement steps are
/// only accepted when they improve on it.
pub fn minimize<const D: usize, F>(mut f: F, bounds: [(f64, f64); D], spec: &OptimizerSpec) -> Result<Minimum<D>>
where
    F: FnMut(&[f64; D]) -> f64,
{
    if spec.grid_points < 8 {
        return Err(Error::param("grid_points", "at least 8 points per dimension"));
    }
    if D == 0 {
        return Err(Error::param("bounds", "need at least one dimension"));
    }
    for &(lo, hi) in bounds.iter() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::param("bounds", "each interval needs finite lo < hi"));
        }
    }
    let n = spec.grid_points;
    let cell: [f64; D] = core::array::from_fn(|i| (bounds[i].1 - bounds[i].0) / (n - 1) as f64);

    let mut evaluations = 0usize;
    let mut best_x = [0.0; D];
    let mut best = f64::INFINITY;
    let total = n.checked_pow(D as u32).ok_or_else(|| Error::param("grid_points", "grid too large"))?;
    for idx in 0..total {
        let mut rem = idx;
        let mut x = [0.0; D];
        for i in 0..D {
            x[i] = bounds[i].0 + (rem % n) as f64 * cell[i];
            rem /= n;
        }
        let v = f(&x);
        evaluations += 1;
        if v < best {
            best = v;
            best_x = x;
        }
    }
    if !best.is_finite() {
        return Err(Error::NonFinite("objective on the seed grid"));
    }
    let grid_value = best;

    let sweeps = match spec.refinement {
        Refinement::GoldenSection => 1,
        Refinement::CoordinateDescent => spec.max_iter.max(1),
    };
    let mut width = cell;
    for _ in 0..sweeps {
        let before = best;
        for i in 0..D {
            let lo = (best_x[i] - width[i]).max(bounds[i].0);
            let hi = (best_x[i] + width[i]).min(bounds[i].1);
            if hi <= lo {
                continue;
            }
            let mut line = |s: f64| {
                let mut x = best_x;
                x[i] = s;
                f(&x)
            };
            let (s, v) = golden(&mut line, lo, hi, spec.tol, &mut evaluations);
            if v < best {
                best = v;
                best_x[i] = s;
            }
        }
        for w in width.iter_mut() {
            *w *= 0.5;
        }
        if spec.refinement == Refinement::CoordinateDescent
            && (before - best).abs() <= spec.tol * (1.0 + best.abs())
            && width.iter().zip(cell.iter()).all(|(w, c)| *w < 1e-3 * c)
        {
            break;
        }
    }
    Ok(Minimum { x: best_x, value: best, grid_value, evaluations })
}
