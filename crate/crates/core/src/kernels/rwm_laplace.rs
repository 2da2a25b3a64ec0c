use rand::Rng;

use super::{exp_inverse_cdf, DensityKernel, Kernel, TargetDensity};
use crate::interval::Interval;

/// Random-walk Metropolis on the real line for the Laplace target
/// `pi~(x) = e^{-|x|}`, proposing uniformly on `[x - 2, x + 2]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RwmLaplace;

pub const HALF_WIDTH: f64 = 2.0;

impl RwmLaplace {
    pub fn new() -> Self {
        Self
    }

    pub fn acceptance(&self, x: f64, y: f64) -> f64 {
        (x.abs() - y.abs()).exp().min(1.0)
    }

    /// Exact draw from the normalized target (standard Laplace).
    pub fn sample_target<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e = exp_inverse_cdf(rng, 1.0);
        if rng.random::<bool>() {
            e
        } else {
            -e
        }
    }

    /// Target CDF of the standard Laplace law.
    pub fn target_cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.5 * x.exp()
        } else {
            1.0 - 0.5 * (-x).exp()
        }
    }
}

impl Kernel for RwmLaplace {
    type State = f64;

    fn step<R: Rng + ?Sized>(&self, x: &f64, rng: &mut R) -> f64 {
        let y = rng.random_range((x - HALF_WIDTH)..(x + HALF_WIDTH));
        let u: f64 = rng.random();
        if u < self.acceptance(*x, y) {
            y
        } else {
            *x
        }
    }
}

impl TargetDensity for RwmLaplace {
    type State = f64;

    fn log_unnormalized(&self, x: &f64) -> f64 {
        -x.abs()
    }
}

impl DensityKernel for RwmLaplace {
    fn density(&self, x: f64, y: f64) -> f64 {
        if (y - x).abs() > HALF_WIDTH {
            return 0.0;
        }
        0.25 * self.acceptance(x, y)
    }

    /// Rejection probability in closed form. With `a = |x|`, proposals beyond
    /// `a` on the far side always contribute `1 + e^{-2}`, and for `a < 1`
    /// the near side adds `1 - 2a + e^{2a - 2}`.
    fn atom(&self, x: f64) -> f64 {
        let a = x.abs();
        let far = 1.0 + (-2.0f64).exp();
        let near = if a < 1.0 { 1.0 - 2.0 * a + (2.0 * a - 2.0).exp() } else { 0.0 };
        0.25 * (far + near)
    }

    fn support(&self, x: f64) -> Interval {
        Interval::new(x - HALF_WIDTH, x + HALF_WIDTH)
    }

    fn breakpoints(&self, x: f64) -> Vec<f64> {
        vec![-x.abs(), 0.0, x.abs()]
    }

    fn state_space(&self) -> Interval {
        Interval::REAL_LINE
    }

    fn reverse_support(&self, y: f64) -> Interval {
        Interval::new(y - HALF_WIDTH, y + HALF_WIDTH)
    }

    fn reverse_breakpoints(&self, y: f64) -> Vec<f64> {
        vec![-y.abs(), 0.0, y.abs()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Quadrature;

    #[test]
    fn acceptance_values() {
        let k = RwmLaplace::new();
        assert!((k.acceptance(0.0, 1.0) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(k.acceptance(3.0, 1.0), 1.0);
        assert_eq!(k.acceptance(-2.0, 2.0), 1.0);
    }

    #[test]
    fn mass_balances_with_quadrature() {
        let k = RwmLaplace::new();
        for x in [-3.0, -0.4, 0.0, 0.7, 1.0, 5.0] {
            let s = k.support(x);
            let r = Quadrature::default()
                .integrate_with_breaks(|y| k.density(x, y), s.lo, s.hi, &k.breakpoints(x))
                .unwrap();
            assert!((r.value + k.atom(x) - 1.0).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn detailed_balance() {
        let k = RwmLaplace::new();
        for &(x, y) in &[(0.0, 1.5), (-1.2, 0.3), (2.5, 4.0), (-3.0, -1.1), (0.4, -0.4)] {
            let lhs = (-f64::abs(x)).exp() * k.density(x, y);
            let rhs = (-f64::abs(y)).exp() * k.density(y, x);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}
