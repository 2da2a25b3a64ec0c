//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol * |result|)`. Callers supply
//! breakpoints at known kinks so that piecewise-smooth integrands converge
//! without deep subdivision.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub const DEFAULT_ABS_TOL: f64 = 1e-8;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { abs_tol: DEFAULT_ABS_TOL, rel_tol: 0.0, max_segments: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    Segment { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

impl Quadrature {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<Integral> {
        self.integrate_with_breaks(f, a, b, &[])
    }

    /// Integrate over `[a, b]`, starting from the partition induced by `breaks`
    /// (points outside `(a, b)` are ignored).
    pub fn integrate_with_breaks(
        &self,
        f: impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<Integral> {
        assert!(a.is_finite() && b.is_finite(), "integration limits must be finite");
        if a == b {
            return Ok(Integral { value: 0.0, error_estimate: 0.0, evaluations: 0 });
        }
        if a > b {
            let r = self.integrate_with_breaks(f, b, a, breaks)?;
            return Ok(Integral { value: -r.value, ..r });
        }
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut nodes = Vec::with_capacity(cuts.len() + 2);
        nodes.push(a);
        nodes.extend(cuts);
        nodes.push(b);

        let mut heap: BinaryHeap<Segment> =
            nodes.windows(2).map(|w| kronrod15(&f, w[0], w[1])).collect();
        let mut evaluations = 15 * heap.len();
        loop {
            let value: f64 = heap.iter().map(|s| s.value).sum();
            let error: f64 = heap.iter().map(|s| s.error).sum();
            if error <= self.abs_tol.max(self.rel_tol * value.abs()) {
                return Ok(Integral { value, error_estimate: error, evaluations });
            }
            if heap.len() >= self.max_segments {
                return Err(Error::Quadrature { a, b, estimate: value, error_estimate: error, evaluations });
            }
            let worst = heap.pop().expect("nonempty heap");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                return Err(Error::Quadrature { a, b, estimate: value, error_estimate: error, evaluations });
            }
            heap.push(kronrod15(&f, worst.a, mid));
            heap.push(kronrod15(&f, mid, worst.b));
            evaluations += 30;
        }
    }
}
