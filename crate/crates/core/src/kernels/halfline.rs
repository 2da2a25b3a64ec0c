use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{exp_inverse_cdf, DensityKernel, Kernel};
use crate::interval::Interval;

/// Chain on `[0, inf)` moving to an equal mixture of Exponential(2) and a
/// half-normal with scale `x + 1`:
/// `P(x, dy) = (e^{-2y} + exp(-y^2 / (2 (x+1)^2)) / (sqrt(2 pi) (x+1))) dy`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HalflineMixture;

impl HalflineMixture {
    pub fn new() -> Self {
        Self
    }

    /// The half-normal component alone, i.e. `density - e^{-2y}`.
    pub fn half_normal_part(&self, x: f64, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        let s = x + 1.0;
        (-(y * y) / (2.0 * s * s)).exp() / ((2.0 * PI).sqrt() * s)
    }
}

impl Kernel for HalflineMixture {
    type State = f64;

    fn step<R: Rng + ?Sized>(&self, x: &f64, rng: &mut R) -> f64 {
        if rng.random::<f64>() < 0.5 {
            exp_inverse_cdf(rng, 2.0)
        } else {
            let z: f64 = rng.sample(StandardNormal);
            z.abs() * (x + 1.0)
        }
    }
}

impl DensityKernel for HalflineMixture {
    fn density(&self, x: f64, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        (-2.0 * y).exp() + self.half_normal_part(x, y)
    }

    fn atom(&self, _x: f64) -> f64 {
        0.0
    }

    fn support(&self, x: f64) -> Interval {
        // Exponential tail mass e^{-2Y}/2 and half-normal tail beyond 7.5 sd are both < 1e-12.
        Interval::new(0.0, 14.0f64.max(7.5 * (x + 1.0)))
    }

    fn state_space(&self) -> Interval {
        Interval::new(0.0, f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Quadrature;

    #[test]
    fn density_dominates_exponential_part() {
        let k = HalflineMixture::new();
        for x in [0.0, 0.5, 3.0, 40.0] {
            for y in [0.0, 0.1, 1.0, 7.0, 30.0] {
                assert!(k.density(x, y) >= (-2.0 * y).exp());
            }
        }
    }

    #[test]
    fn density_at_zero() {
        let k = HalflineMixture::new();
        for x in [0.0, 1.0, 4.5] {
            let expect = 1.0 + 1.0 / ((2.0 * PI).sqrt() * (x + 1.0));
            assert!((k.density(x, 0.0) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let k = HalflineMixture::new();
        for x in [0.0, 2.0, 25.0] {
            let s = k.support(x);
            let r = Quadrature::default().integrate(|y| k.density(x, y), s.lo, s.hi).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "x={x}: {}", r.value);
        }
    }

    #[test]
    fn negative_state_rejected() {
        assert!(HalflineMixture::new().check_state(-0.1).is_err());
        assert!(HalflineMixture::new().check_state(0.0).is_ok());
    }
}
