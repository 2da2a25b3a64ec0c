use rand::Rng;

use super::{Kernel, TargetDensity};
use crate::error::{Error, Result};

/// Three points in the unit square, flattened as `[x1, y1, x2, y2, x3, y3]`.
pub type PointProcessState = [f64; 6];

/// Independence Metropolis sampler for three interacting points in `[0, 1]^2`
/// with unnormalized density
/// `exp(-C sum_i |x_i| - D sum_{i<j} 1 / |x_i - x_j|)`.
///
/// Proposals are uniform on `[0, 1]^6`, so the transition density at `y` is
/// just the acceptance probability and rejections leave an atom at `x`.
/// Configurations with coincident points have zero density and are never
/// accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointProcess {
    pub c: f64,
    pub d: f64,
}

fn point(x: &PointProcessState, i: usize) -> (f64, f64) {
    (x[2 * i], x[2 * i + 1])
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

impl PointProcess {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        if !(c > 0.0 && d > 0.0 && c.is_finite() && d.is_finite()) {
            return Err(Error::OutOfRange(format!("C and D must be positive, got C = {c}, D = {d}")));
        }
        Ok(Self { c, d })
    }

    pub fn check_state(&self, x: &PointProcessState) -> Result<()> {
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::OutOfRange(format!("state {x:?} outside [0, 1]^6")));
        }
        if !self.log_unnormalized(x).is_finite() {
            return Err(Error::OutOfRange(format!("state {x:?} has coincident points")));
        }
        Ok(())
    }

    pub fn acceptance(&self, x: &PointProcessState, y: &PointProcessState) -> f64 {
        let ly = self.log_unnormalized(y);
        if ly == f64::NEG_INFINITY {
            return 0.0;
        }
        (ly - self.log_unnormalized(x)).exp().min(1.0)
    }

    /// Density of the absolutely continuous part of `P(x, .)` w.r.t. Lebesgue measure on `[0,1]^6`.
    pub fn density(&self, x: &PointProcessState, y: &PointProcessState) -> f64 {
        if y.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return 0.0;
        }
        self.acceptance(x, y)
    }

    pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R) -> PointProcessState {
        std::array::from_fn(|_| rng.random::<f64>())
    }

    /// Exact draw from the normalized target by rejection from the uniform
    /// proposal: the unnormalized density never exceeds 1, so accept `y` with
    /// probability `pi~(y)`.
    pub fn sample_target<R: Rng + ?Sized>(&self, rng: &mut R) -> PointProcessState {
        loop {
            let y = Self::sample_uniform(rng);
            if rng.random::<f64>() < self.log_unnormalized(&y).exp() {
                return y;
            }
        }
    }
}

impl Kernel for PointProcess {
    type State = PointProcessState;

    fn step<R: Rng + ?Sized>(&self, x: &PointProcessState, rng: &mut R) -> PointProcessState {
        let y = Self::sample_uniform(rng);
        let u: f64 = rng.random();
        if u < self.acceptance(x, &y) {
            y
        } else {
            *x
        }
    }
}

impl TargetDensity for PointProcess {
    type State = PointProcessState;

    fn log_unnormalized(&self, x: &PointProcessState) -> f64 {
        let mut attraction = 0.0;
        for i in 0..3 {
            let (a, b) = point(x, i);
            attraction += a.hypot(b);
        }
        let mut repulsion = 0.0;
        for (i, j) in PAIRS {
            let (a1, b1) = point(x, i);
            let (a2, b2) = point(x, j);
            let dist = (a1 - a2).hypot(b1 - b2);
            if dist == 0.0 {
                return f64::NEG_INFINITY;
            }
            repulsion += 1.0 / dist;
        }
        -self.c * attraction - self.d * repulsion
    }
}

/// Reference uniform minorization constant for the point-process sampler,
/// `0.48 exp(-4.25 C - 9.88 D)`.
pub fn point_process_epsilon(c: f64, d: f64) -> Result<f64> {
    if !(c > 0.0 && d > 0.0) {
        return Err(Error::OutOfRange(format!("C and D must be positive, got C = {c}, D = {d}")));
    }
    Ok(0.48 * (-4.25 * c - 9.88 * d).exp())
}
