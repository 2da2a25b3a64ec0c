use serde::Serialize;

/// Closed interval `[lo, hi]` of the real line; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Evenly spaced probe points from `lo` to `hi` inclusive.
    pub fn grid(&self, step: f64) -> Vec<f64> {
        assert!(self.is_bounded() && step > 0.0);
        let count = ((self.hi - self.lo) / step + 1e-9).floor() as usize;
        let mut pts: Vec<f64> = (0..=count).map(|k| self.lo + k as f64 * step).collect();
        if let Some(last) = pts.last_mut() {
            if (self.hi - *last).abs() < 1e-9 * step {
                *last = self.hi;
            } else {
                pts.push(self.hi);
            }
        }
        pts
    }
}
