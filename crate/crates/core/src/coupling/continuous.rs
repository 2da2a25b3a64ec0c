use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::CouplingModel;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::kernels::{n_step_density, DensityKernel, OverlapMeasure};
use crate::quadrature::Quadrature;

/// Rejection attempts allowed for a single residual draw.
const MAX_RESIDUAL_ATTEMPTS: u64 = 1_000_000;
/// Slack on `eps nu(z) <= p^n0(x, z)` before a certificate is declared invalid.
const RESIDUAL_SLACK: f64 = 1e-12;

pub type Sampler = Arc<dyn Fn(&mut ChaCha8Rng) -> f64 + Send + Sync>;

/// How `X'_0` is drawn.
#[derive(Clone)]
pub enum StationaryStart {
    /// An exact sampler for the stationary law.
    Exact(Sampler),
    /// Run the kernel this many steps from the given point. Approximate.
    BurnIn { from: f64, steps: u64 },
}

impl std::fmt::Debug for StationaryStart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StationaryStart::Exact(_) => f.write_str("Exact"),
            StationaryStart::BurnIn { from, steps } => write!(f, "BurnIn {{ from: {from}, steps: {steps} }}"),
        }
    }
}

/// Coupling of a kernel on the real line under a minorization
/// `P^n0(x, .) >= eps nu(.)` for `x` in a small interval.
///
/// Residual draws use rejection against `P^n0(x, .)`: a proposal `z != x` is
/// kept with probability `1 - eps nu(z) / p^n0(x, z)`, and a proposal on the
/// atom at `x` is always kept since `nu` has no atoms.
pub struct ContinuousCoupling<K: DensityKernel> {
    kernel: K,
    n0: u64,
    epsilon: f64,
    nu: OverlapMeasure,
    small_set: Interval,
    initial: f64,
    start: StationaryStart,
    lyapunov: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    quadrature: Quadrature,
}

impl<K: DensityKernel> ContinuousCoupling<K> {
    pub fn new(
        kernel: K,
        n0: u64,
        epsilon: f64,
        nu: OverlapMeasure,
        small_set: Interval,
        initial: f64,
        start: StationaryStart,
    ) -> Result<Self> {
        if !(1..=2).contains(&n0) {
            return Err(Error::Unsupported(format!("{n0}-step coupling (only n0 = 1 or 2)")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidCertificate(format!("epsilon {epsilon} outside (0, 1]")));
        }
        kernel.check_state(initial)?;
        Ok(Self {
            kernel,
            n0,
            epsilon,
            nu,
            small_set,
            initial,
            start,
            lyapunov: None,
            quadrature: Quadrature::with_abs_tol(1e-11),
        })
    }

    /// Attach a drift function so that `E[V(X_n)]` is tracked.
    pub fn with_lyapunov(mut self, v: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Self {
        self.lyapunov = Some(v);
        self
    }

    pub fn kernel(&self) -> &K {
        &self.kernel
    }

    pub fn small_set(&self) -> Interval {
        self.small_set
    }
}

impl<K: DensityKernel> CouplingModel for ContinuousCoupling<K> {
    type State = f64;

    fn n0(&self) -> u64 {
        self.n0
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn in_small_set(&self, x: &f64) -> bool {
        self.small_set.contains(*x)
    }

    fn step_block(&self, x: &f64, rng: &mut ChaCha8Rng) -> f64 {
        (0..self.n0).fold(*x, |s, _| self.kernel.step(&s, rng))
    }

    fn sample_overlap(&self, _x: &f64, _y: &f64, rng: &mut ChaCha8Rng) -> f64 {
        self.nu.sample(rng)
    }

    fn sample_residual(&self, x: &f64, _y: &f64, rng: &mut ChaCha8Rng) -> Result<f64> {
        for _ in 0..MAX_RESIDUAL_ATTEMPTS {
            let z = self.step_block(x, rng);
            if z == *x {
                return Ok(z);
            }
            let floor = self.epsilon * self.nu.density(z);
            if floor == 0.0 {
                return Ok(z);
            }
            let p = n_step_density(&self.kernel, self.n0, *x, z, &self.quadrature)?;
            if floor > p + RESIDUAL_SLACK {
                return Err(Error::InvalidCertificate(format!(
                    "eps nu({z}) = {floor} exceeds the {}-step density {p} from {x}",
                    self.n0
                )));
            }
            if rng.random::<f64>() >= floor / p {
                return Ok(z);
            }
        }
        Err(Error::InvalidCertificate(format!(
            "residual rejection from {x} failed {MAX_RESIDUAL_ATTEMPTS} times"
        )))
    }

    fn sample_initial(&self, _rng: &mut ChaCha8Rng) -> f64 {
        self.initial
    }

    fn sample_stationary(&self, rng: &mut ChaCha8Rng) -> f64 {
        match &self.start {
            StationaryStart::Exact(s) => s(rng),
            StationaryStart::BurnIn { from, steps } => (0..*steps).fold(*from, |s, _| self.kernel.step(&s, rng)),
        }
    }

    fn lyapunov(&self, x: &f64) -> Option<f64> {
        self.lyapunov.as_ref().map(|v| v(*x))
    }

    fn describe(&self, x: &f64) -> String {
        format!("{x:.17e}")
    }
}
