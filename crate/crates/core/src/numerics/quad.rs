// SPDX-License-Identifier: Apache-2.0

//! Adaptive Gauss–Kronrod quadrature on finite intervals and on the real line.
//!
//! Infinite ranges are folded onto `(-pi/2, pi/2)` through `omega = c + s tan t`.
//! A Lorentzian of half-width `s` centred on `c` maps to a constant, so the
//! cavity susceptibilities that dominate the integrands here converge in a
//! handful of panels.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::FRAC_PI_2;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_635,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// How an integral over the whole real line is reduced to a finite one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Compactification {
    /// `omega = center + scale * tan(t)`.
    TangentMap { center: f64, scale: f64 },
    /// Ignore everything outside `[lo, hi]`.
    TruncateAt { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub compactification: Compactification,
    /// Points where the integrand has structure (peaks, kinks). They seed the
    /// initial partition.
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
            compactification: Compactification::TangentMap { center: 0.0, scale: 1.0 },
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn tangent(center: f64, scale: f64) -> Self {
        Self { compactification: Compactification::TangentMap { center, scale }, ..Self::default() }
    }

    pub fn with_breakpoints(mut self, points: &[f64]) -> Self {
        self.breakpoints.extend_from_slice(points);
        self
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub subdivisions: usize,
}

/// Values that can be accumulated by the quadrature rule.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[10];
    let mut g = T::zero();
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let value = k * h;
    let error = ((k - g) * h).magnitude();
    (value, error)
}

/// Adaptive integration of `f` over `[a, b]` with the given interior breakpoints.
pub fn integrate_interval<T, F>(mut f: F, a: f64, b: f64, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<Integral<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::param("interval", "needs finite a < b"));
    }
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    for w in cuts.windows(2) {
        let (v, e) = kronrod(&mut f, w[0], w[1]);
        total = total + v;
        total_err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    let mut subdivisions = 0;
    loop {
        if !total.is_finite_value() {
            return Err(Error::NonFinite("quadrature"));
        }
        let target = spec.abs_tol.max(spec.rel_tol * total.magnitude());
        if total_err <= target {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Quadrature { estimate: total.magnitude(), error: total_err, subdivisions });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split further in floating point.
            return Err(Error::Quadrature { estimate: total.magnitude(), error: total_err, subdivisions });
        }
        let (v1, e1) = kronrod(&mut f, worst.a, mid);
        let (v2, e2) = kronrod(&mut f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        subdivisions += 1;
    }
    // Re-sum to shed the drift of incremental updates.
    let mut value = T::zero();
    let mut error = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        error += p.error;
    }
    Ok(Integral { value, error, subdivisions })
}

/// Integral of `f` over the real line, compactified as `spec` dictates.
pub fn integrate_line<T, F>(mut f: F, spec: &QuadratureSpec) -> Result<Integral<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    match spec.compactification {
        Compactification::TruncateAt { lo, hi } => integrate_interval(f, lo, hi, &spec.breakpoints, spec),
        Compactification::TangentMap { center, scale } => {
            if !(scale > 0.0 && scale.is_finite() && center.is_finite()) {
                return Err(Error::param("scale", "tangent map needs a finite positive scale"));
            }
            let mut cuts: Vec<f64> = spec.breakpoints.iter().map(|&w| ((w - center) / scale).atan()).collect();
            // A uniform seed partition keeps the tails from hiding features.
            for k in 1..8 {
                cuts.push(-FRAC_PI_2 + k as f64 * FRAC_PI_2 / 4.0);
            }
            let mapped = |t: f64| {
                let c = t.cos();
                let jac = scale / (c * c);
                f(center + scale * t.tan()) * jac
            };
            integrate_interval(mapped, -FRAC_PI_2, FRAC_PI_2, &cuts, spec)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn kronrod_rule_is_exact_for_degree_31() {
        let mut f = |x: f64| x.powi(30) + x.powi(31);
        let (v, _) = kronrod(&mut f, -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn lorentzian_over_the_line() {
        let (k, d) = (0.3, 2.0);
        let spec = QuadratureSpec::tangent(d, k);
        let r: Integral<f64> = integrate_line(|w| k / (k * k + (w - d) * (w - d)), &spec).unwrap();
        assert!((r.value - PI).abs() < 1e-12);
    }

    #[test]
    fn off_centre_map_still_converges() {
        // Two peaks, map centred between them.
        let spec = QuadratureSpec::tangent(0.0, 1.0).with_breakpoints(&[-5.0, 5.0]);
        let f = |w: f64| 1.0 / (0.01 + (w - 5.0).powi(2)) + 1.0 / (0.01 + (w + 5.0).powi(2));
        let r: Integral<f64> = integrate_line(f, &spec).unwrap();
        assert!((r.value - 20.0 * PI).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn oscillating_tail() {
        // int cos(w)/(1+w^2)^2 dw = pi/e
        let spec = QuadratureSpec::tangent(0.0, 1.0);
        let r: Integral<f64> = integrate_line(|w| w.cos() / (1.0 + w * w).powi(2), &spec).unwrap();
        assert!((r.value - PI / 1f64.exp()).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn complex_valued() {
        let spec = QuadratureSpec::tangent(0.0, 1.0);
        let f = |w: f64| Complex64::new(1.0, w) / Complex64::new(1.0 + w * w, 0.0).powi(2);
        let r: Integral<Complex64> = integrate_line(f, &spec).unwrap();
        assert!((r.value.re - PI / 2.0).abs() < 1e-10);
        assert!(r.value.im.abs() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let spec = QuadratureSpec { max_subdivisions: 3, ..QuadratureSpec::tangent(0.0, 1.0) };
        let r: Result<Integral<f64>> = integrate_line(|w| (50.0 * w).sin().abs() / (1.0 + w * w), &spec);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn truncation() {
        let spec = QuadratureSpec { compactification: Compactification::TruncateAt { lo: 0.0, hi: 1.0 }, ..QuadratureSpec::default() };
        let r: Integral<f64> = integrate_line(|x| x.sqrt(), &spec).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-9);
    }
}
