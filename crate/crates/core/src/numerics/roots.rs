// SPDX-License-Identifier: Apache-2.0

//! Grid-bracketed root finding.

use alloc::vec::Vec;

const REL_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 400;

/// All sign changes of `f` on a uniform grid of `grid` cells over `[lo, hi]`,
/// each refined by bisection to `1e-10` relative width.
///
/// Grid points where `f` is exactly zero are returned as-is. Brackets that
/// straddle a jump rather than a zero (the refined point leaves `|f|` above
/// `1e-8` of the largest sample) are discarded. The result is sorted and free
/// of duplicates.
pub fn find_roots_bracketed<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, grid: usize) -> Vec<f64> {
    let n = grid.max(1);
    let step = (hi - lo) / n as f64;
    let xs: Vec<f64> = (0..=n).map(|k| if k == n { hi } else { lo + k as f64 * step }).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let scale = ys.iter().fold(0.0f64, |m, y| if y.is_finite() { m.max(y.abs()) } else { m });
    let accept = 1e-8 * scale.max(f64::MIN_POSITIVE);

    let mut roots = Vec::new();
    for k in 0..=n {
        if ys[k] == 0.0 {
            roots.push(xs[k]);
            continue;
        }
        if k == n || ys[k + 1] == 0.0 {
            continue;
        }
        if !(ys[k].is_finite() && ys[k + 1].is_finite()) || ys[k].signum() == ys[k + 1].signum() {
            continue;
        }
        let r = bisect(&mut f, xs[k], xs[k + 1], ys[k]);
        if f(r).abs() <= accept {
            roots.push(r);
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    let span_tol = REL_TOL * (hi - lo).abs();
    roots.dedup_by(|a, b| (*a - *b).abs() <= span_tol.max(REL_TOL * a.abs().max(b.abs())));
    roots
}

fn bisect<F: FnMut(f64) -> f64>(f: &mut F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= REL_TOL * a.abs().max(b.abs()) || m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    // Pick the better endpoint of the final bracket.
    let (ya, yb) = (f(a).abs(), f(b).abs());
    if ya <= yb {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_roots() {
        let r = find_roots_bracketed(|x| x.sin(), 0.5, 10.0, 64);
        assert_eq!(r.len(), 3);
        for (k, x) in r.iter().enumerate() {
            let exact = (k + 1) as f64 * core::f64::consts::PI;
            assert!((x - exact).abs() <= 1e-10 * exact);
        }
    }

    #[test]
    fn grid_zero_not_duplicated() {
        let r = find_roots_bracketed(|x| x, -1.0, 1.0, 4);
        assert_eq!(r, alloc::vec![0.0]);
    }

    #[test]
    fn jumps_are_not_roots() {
        let r = find_roots_bracketed(|x| if x < 0.3 { -1.0 } else { 1.0 }, 0.0, 1.0, 10);
        assert!(r.is_empty());
    }
}
