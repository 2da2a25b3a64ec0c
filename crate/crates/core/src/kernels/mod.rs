//! General-state-space Markov kernels and numerical checks of drift and
//! minorization conditions.

mod halfline;
mod point_process;
mod rwm_laplace;
mod verify;

pub use halfline::HalflineMixture;
pub use point_process::{point_process_epsilon, PointProcess, PointProcessState};
pub use rwm_laplace::RwmLaplace;
pub use verify::{
    mass_outside, n_step_density, transition_expectation, two_step_density, verify_minorization_numeric,
    verify_univariate_drift, DriftVerificationReport, MinorizationVerificationReport, VerifyOptions,
};

use rand::Rng;

use crate::error::Result;
use crate::interval::Interval;

/// A Markov transition kernel that can be sampled.
pub trait Kernel: Send + Sync {
    type State: Clone + PartialEq + Send + Sync + std::fmt::Debug;

    fn step<R: Rng + ?Sized>(&self, x: &Self::State, rng: &mut R) -> Self::State;
}

/// Unnormalized target density of a Metropolis kernel.
pub trait TargetDensity {
    type State;

    /// `log pi~(x)`; `-inf` where the density vanishes.
    fn log_unnormalized(&self, x: &Self::State) -> f64;
}

/// A kernel on the real line whose transition law is an absolutely continuous
/// part with density `density(x, .)` plus an atom of mass `atom(x)` at `x`.
pub trait DensityKernel: Kernel<State = f64> {
    fn density(&self, x: f64, y: f64) -> f64;

    fn atom(&self, x: f64) -> f64;

    /// Interval carrying all but a negligible (< 1e-12) part of `density(x, .)`.
    fn support(&self, x: f64) -> Interval;

    /// Points where `density(x, .)` is not smooth.
    fn breakpoints(&self, _x: f64) -> Vec<f64> {
        Vec::new()
    }

    fn state_space(&self) -> Interval;

    /// Interval of current states `z` from which `y` is reachable, i.e. where
    /// `density(., y)` may be nonzero.
    fn reverse_support(&self, _y: f64) -> Interval {
        self.state_space()
    }

    /// Points where `density(., y)` is not smooth.
    fn reverse_breakpoints(&self, _y: f64) -> Vec<f64> {
        Vec::new()
    }

    fn check_state(&self, x: f64) -> Result<()> {
        if self.state_space().contains(x) {
            Ok(())
        } else {
            Err(crate::error::Error::OutOfRange(format!(
                "state {x} outside state space {:?}",
                self.state_space()
            )))
        }
    }
}

/// A probability density on the real line that can be sampled, used as the
/// overlap measure of a minorization condition.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum OverlapMeasure {
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl OverlapMeasure {
    pub fn density(&self, y: f64) -> f64 {
        match *self {
            OverlapMeasure::Exponential { rate } => {
                if y >= 0.0 {
                    rate * (-rate * y).exp()
                } else {
                    0.0
                }
            }
            OverlapMeasure::Uniform { lo, hi } => {
                if (lo..=hi).contains(&y) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            OverlapMeasure::Exponential { rate } => exp_inverse_cdf(rng, rate),
            OverlapMeasure::Uniform { lo, hi } => rng.random_range(lo..hi),
        }
    }

    pub fn support(&self) -> Interval {
        match *self {
            OverlapMeasure::Exponential { .. } => Interval::new(0.0, f64::INFINITY),
            OverlapMeasure::Uniform { lo, hi } => Interval::new(lo, hi),
        }
    }
}

/// Exponential variate by inversion: `-ln(U) / rate` with `U` in `(0, 1]`.
pub(crate) fn exp_inverse_cdf<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    -u.ln() / rate
}
