//! Gauss–Kronrod quadrature: a 21-point rule, a globally adaptive driver for
//! finite intervals, and a half-line driver that maps `[x0, ∞)` onto `(0, 1]`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Values a quadrature rule can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

// Kronrod abscissae; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One 21-point Gauss–Kronrod estimate on `[a, b]`: `(kronrod, |kronrod - gauss|)`.
pub fn gk21<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = V::zero();
    for j in 0..10 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let k = kron * h;
    let g = gauss * h;
    (k, (k - g).magnitude())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<V> {
    pub value: V,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection on `[a, b]` until the summed error estimate is
/// below `max(abs_tol, rel_tol * |value|)` or `max_intervals` is reached.
pub fn adaptive<V: QuadValue, F: Fn(f64) -> V>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult<V> {
    let (value, error) = gk21(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        let target = abs_tol.max(rel_tol * total.magnitude());
        if total_err <= target {
            break;
        }
        if heap.len() >= max_intervals {
            return QuadResult {
                value: total,
                error: total_err,
                intervals: heap.len(),
                converged: false,
            };
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further in floating point
            heap.push(Segment { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = gk21(f, worst.a, mid);
        let (v2, e2) = gk21(f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // re-sum to shed accumulated rounding from the running updates
    let mut value = V::zero();
    let mut error = 0.0;
    let intervals = heap.len();
    for s in heap {
        value = value + s.value;
        error += s.error;
    }
    QuadResult {
        value,
        error,
        intervals,
        converged: true,
    }
}

/// `∫_{x0}^∞ f(x) dx` via `x = x0 + s (1 - u)/u`, integrated over `u ∈ (0, 1]`.
/// Suits integrands that decay at least like `1/x²`.
pub fn half_line<F: Fn(f64) -> f64>(
    f: &F,
    x0: f64,
    scale: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult<f64> {
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let x = x0 + scale * (1.0 - u) / u;
        let v = f(x) * scale / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adaptive(&g, 0.0, 1.0, abs_tol, rel_tol, max_intervals)
}

/// Integrate over `[a, b]` split at the given breakpoints.
pub fn piecewise<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult<f64> {
    let pieces = breaks.len().saturating_sub(1).max(1);
    let mut out = QuadResult {
        value: 0.0,
        error: 0.0,
        intervals: 0,
        converged: true,
    };
    for w in breaks.windows(2) {
        let r = adaptive(f, w[0], w[1], abs_tol / pieces as f64, rel_tol, max_intervals);
        out.value += r.value;
        out.error += r.error;
        out.intervals += r.intervals;
        out.converged &= r.converged;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        // the Kronrod rule integrates degree-31 polynomials exactly
        let (v, _) = gk21(&|x: f64| x.powi(20) + 3.0 * x.powi(7), 0.0, 1.0);
        assert_relative_eq!(v, 1.0 / 21.0 + 3.0 / 8.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let f = |x: f64| 1.0 / (1e-4 + (x - 0.3).powi(2));
        let r = adaptive(&f, 0.0, 1.0, 1e-10, 1e-12, 1000);
        let exact = ((0.7f64 / 1e-2).atan() + (0.3f64 / 1e-2).atan()) / 1e-2;
        assert!(r.converged);
        assert_relative_eq!(r.value, exact, max_relative = 1e-11);
    }

    #[test]
    fn complex_oscillatory() {
        let f = |x: f64| Complex64::new(0.0, -5.0 * x).exp();
        let r = adaptive(&f, 0.0, PI, 1e-13, 0.0, 100);
        let exact = (Complex64::new(0.0, -5.0 * PI).exp() - 1.0) / Complex64::new(0.0, -5.0);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn half_line_lorentzian() {
        let r = half_line(&|x: f64| 1.0 / (PI * (1.0 + x * x)), 0.0, 1.0, 1e-13, 1e-13, 500);
        assert_relative_eq!(r.value, 0.5, max_relative = 1e-12);
        let r = half_line(&|x: f64| (-x).exp(), 2.0, 1.0, 1e-14, 1e-14, 500);
        assert_relative_eq!(r.value, (-2.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = |x: f64| (1.0 / x).sin();
        let r = adaptive(&f, 1e-9, 1.0, 1e-15, 0.0, 8);
        assert!(!r.converged);
    }
}
