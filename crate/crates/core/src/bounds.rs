//! Closed-form convergence bounds from minorization and drift certificates.
//!
//! Geometric terms such as `alpha^-n` with `n` in the hundreds of thousands
//! underflow `f64`, so the drift bound is assembled in log space and only
//! exponentiated at the end.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::report::{BoundReport, CurvePoint, Crossing, Source};

pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

/// Mass allowed outside the containment set before the `R h` shortcut is refused.
pub const CONTAINMENT_TOL: f64 = 1e-12;

pub type DriftFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::OutOfRange(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    Ok(())
}

/// `(1 - eps)^floor(n / n0)`.
pub fn minorization_bound(epsilon: f64, n0: u64, n: u64) -> Result<f64> {
    let log = minorization_log_bound(epsilon, n0, n)?;
    Ok(if epsilon == 1.0 { log.exp() } else { (1.0 - epsilon).powf((n / n0) as f64) })
}

pub fn minorization_log_bound(epsilon: f64, n0: u64, n: u64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if n0 == 0 {
        return Err(Error::OutOfRange("n0 must be positive".into()));
    }
    let blocks = n / n0;
    if blocks == 0 {
        return Ok(0.0);
    }
    Ok(blocks as f64 * (-epsilon).ln_1p())
}

/// Smallest `n >= 0` with `bound(n) < delta`, for a bound that is non-increasing in `n`.
pub fn steps_to_threshold(bound: impl Fn(u64) -> f64, delta: f64, cap: u64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange(format!("delta must lie in (0, 1), got {delta}")));
    }
    if bound(0) < delta {
        return Ok(0);
    }
    let mut lo = 0; // bound(lo) >= delta
    let mut hi = 1;
    while bound(hi) >= delta {
        if hi >= cap {
            return Err(Error::Unreachable { delta, cap });
        }
        lo = hi;
        hi = hi.saturating_mul(2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid) < delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `PV(x) <= lambda V(x) + b 1_C(x)`.
#[derive(Clone)]
pub struct UnivariateDrift {
    pub v: DriftFn,
    pub small_set: Interval,
    pub lambda: f64,
    pub b: f64,
}

impl UnivariateDrift {
    pub fn new(v: DriftFn, small_set: Interval, lambda: f64, b: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::OutOfRange(format!("lambda must lie in (0, 1), got {lambda}")));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::OutOfRange(format!("b must be finite and >= 0, got {b}")));
        }
        Ok(Self { v, small_set, lambda, b })
    }
}

impl fmt::Debug for UnivariateDrift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnivariateDrift")
            .field("small_set", &self.small_set)
            .field("lambda", &self.lambda)
            .field("b", &self.b)
            .finish_non_exhaustive()
    }
}

/// `P h(x, y) <= h(x, y) / alpha` off `C x C`, with `h(x, y) = (V(x) + V(y)) / 2`.
#[derive(Clone)]
pub struct BivariateDrift {
    pub v: DriftFn,
    pub small_set: Interval,
    pub alpha: f64,
}

impl BivariateDrift {
    pub fn h(&self, x: f64, y: f64) -> f64 {
        0.5 * ((self.v)(x) + (self.v)(y))
    }
}

impl fmt::Debug for BivariateDrift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BivariateDrift")
            .field("small_set", &self.small_set)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

/// Convert a univariate drift condition into a bivariate one.
/// `d` is `inf V` outside the small set and must exceed `b / (1 - lambda) - 1`.
pub fn bivariate_from_univariate(uni: &UnivariateDrift, d: f64) -> Result<BivariateDrift> {
    let threshold = conversion_threshold(uni.lambda, uni.b);
    if d <= threshold {
        return Err(Error::SmallSetTooSmall { d, threshold });
    }
    let alpha_inv = uni.lambda + uni.b / (d + 1.0);
    // Follows from d > b/(1-lambda) - 1.
    assert!(alpha_inv < 1.0, "alpha^-1 = {alpha_inv} not below 1");
    Ok(BivariateDrift { v: uni.v.clone(), small_set: uni.small_set, alpha: 1.0 / alpha_inv })
}

/// `b / (1 - lambda) - 1`, the lower limit on `d` for the drift conversion.
pub fn conversion_threshold(lambda: f64, b: f64) -> f64 {
    b / (1.0 - lambda) - 1.0
}

/// `E_pi V <= b / (1 - lambda)`.
pub fn stationary_moment_bound(lambda: f64, b: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::OutOfRange(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    Ok(b / (1.0 - lambda))
}

/// `E_{Z~pi} h(x, Z) <= V(x)/2 + b / (2 (1 - lambda))` when no closed form is known.
pub fn eh_fallback(v_at_start: f64, lambda: f64, b: f64) -> Result<f64> {
    Ok(0.5 * v_at_start + 0.5 * stationary_moment_bound(lambda, b)?)
}

/// `B_{n0} = max(1, alpha^n0 (1 - eps) sup R h)`.
pub fn b_constant(n0: u64, alpha: f64, epsilon: f64, sup_rh: f64) -> f64 {
    (alpha.powf(n0 as f64) * (1.0 - epsilon) * sup_rh).max(1.0)
}

/// Result of checking `P^n0(x, D) = 1` over probe points of the small set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Containment {
    pub worst_x: f64,
    pub mass_outside: f64,
}

/// Bound `sup_{C x C} R h` by `sup_{D x D} h`, valid when `n0` steps from the
/// small set never leave `D`. The supremum is taken over `probe_grid x probe_grid`.
pub fn sup_rh_via_containment(
    h: impl Fn(f64, f64) -> f64,
    probe_grid: &[f64],
    containment: &Containment,
) -> Result<f64> {
    if containment.mass_outside > CONTAINMENT_TOL {
        return Err(Error::Containment {
            x: containment.worst_x,
            mass_outside: containment.mass_outside,
        });
    }
    let mut sup = f64::NEG_INFINITY;
    for &x in probe_grid {
        for &y in probe_grid {
            sup = sup.max(h(x, y));
        }
    }
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftBoundInputs {
    pub epsilon: f64,
    pub n0: u64,
    pub alpha: f64,
    pub b: f64,
    pub eh: f64,
}

impl DriftBoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::OutOfRange(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.n0 == 0 {
            return Err(Error::OutOfRange("n0 must be positive".into()));
        }
        if !(self.alpha > 1.0) {
            return Err(Error::OutOfRange(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if !(self.b >= 1.0) {
            return Err(Error::OutOfRange(format!("B must be at least 1, got {}", self.b)));
        }
        if !(self.eh >= 1.0) {
            return Err(Error::OutOfRange(format!("E h must be at least 1, got {}", self.eh)));
        }
        Ok(())
    }

    fn log_terms(&self, n: u64, j: u64) -> (f64, f64) {
        let first = j as f64 * (-self.epsilon).ln_1p();
        let second = -(n as f64) * self.alpha.ln() + (j - 1) as f64 * self.b.ln() + self.eh.ln();
        (first, second)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Natural log of `(1 - eps)^j + alpha^-n B^(j-1) E h`.
pub fn drift_log_bound(inputs: &DriftBoundInputs, n: u64, j: u64) -> Result<f64> {
    inputs.validate()?;
    if j < 1 || j > n {
        return Err(Error::OutOfRange(format!("need 1 <= j <= n, got j = {j}, n = {n}")));
    }
    let (a, b) = inputs.log_terms(n, j);
    Ok(log_add(a, b))
}

pub fn drift_bound(inputs: &DriftBoundInputs, n: u64, j: u64) -> Result<f64> {
    Ok(drift_log_bound(inputs, n, j)?.exp())
}

/// `j = 1 + floor(n / divisor)`, a linear schedule for the coupling-attempt count.
pub fn linear_schedule_j(n: u64, divisor: f64) -> u64 {
    1 + (n as f64 / divisor).floor() as u64
}

/// Integer `j` in `[1, n]` minimizing the drift bound at fixed `n`, with its log value.
///
/// The bound is a sum of two exponentials in `j`, hence convex, so the integer
/// minimizer is adjacent to the stationary point of the continuous relaxation.
pub fn best_j(inputs: &DriftBoundInputs, n: u64) -> Result<(u64, f64)> {
    inputs.validate()?;
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    let log_b = inputs.b.ln();
    let centre = if log_b == 0.0 {
        n as f64
    } else {
        let a = (-inputs.epsilon).ln_1p();
        let k = -(n as f64) * inputs.alpha.ln() + inputs.eh.ln();
        (log_b.ln() + k - log_b - (-a).ln()) / (a - log_b)
    };
    let base = if centre.is_finite() { centre.floor().clamp(1.0, n as f64) as u64 } else { n };
    let mut best: Option<(u64, f64)> = None;
    for j in base.saturating_sub(2)..=base.saturating_add(3) {
        if j < 1 || j > n {
            continue;
        }
        let v = drift_log_bound(inputs, n, j)?;
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((j, v));
        }
    }
    Ok(best.expect("at least one j in range"))
}

/// Smallest `n` for which some `j` brings the drift bound below `delta`.
/// The optimal bound is non-increasing in `n`, so a doubling search followed
/// by bisection finds it.
pub fn optimize_drift_bound(inputs: &DriftBoundInputs, delta: f64, cap: u64) -> Result<BoundReport> {
    inputs.validate()?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange(format!("delta must lie in (0, 1), got {delta}")));
    }
    let log_delta = delta.ln();
    let mut curve = Vec::new();
    let mut probe = |n: u64| -> Result<bool> {
        let (j, lv) = best_j(inputs, n)?;
        curve.push(CurvePoint { j: Some(j), ..CurvePoint::log(n, lv) });
        Ok(lv < log_delta)
    };

    let mut lo = 0;
    let mut hi = 1;
    while !probe(hi)? {
        if hi >= cap {
            return Err(Error::Unreachable { delta, cap });
        }
        lo = hi;
        hi = hi.saturating_mul(2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    curve.sort_by_key(|p| p.n);
    curve.dedup_by_key(|p| p.n);
    let (j, lv) = best_j(inputs, hi)?;

    let mut report = BoundReport::new("drift")
        .input("epsilon", inputs.epsilon, Source::UserSupplied)
        .input("n0", inputs.n0 as f64, Source::UserSupplied)
        .input("alpha", inputs.alpha, Source::UserSupplied)
        .input("B", inputs.b, Source::UserSupplied)
        .input("Eh", inputs.eh, Source::UserSupplied);
    report.curve = curve;
    report.threshold = Some(delta);
    report.crossing = Some(Crossing { n: hi, value: lv.exp(), j: Some(j) });
    Ok(report)
}

/// Minorization bound curve on `0..=n_max` with its crossing of `delta`.
pub fn minorization_report(epsilon: f64, n0: u64, n_max: u64, delta: f64) -> Result<BoundReport> {
    check_epsilon(epsilon)?;
    let mut report = BoundReport::new("minorization");
    for n in 0..=n_max {
        let log_value = Some(minorization_log_bound(epsilon, n0, n)?);
        report.curve.push(CurvePoint { log_value, ..CurvePoint::new(n, minorization_bound(epsilon, n0, n)?) });
    }
    let n_star =
        steps_to_threshold(|n| minorization_bound(epsilon, n0, n).unwrap_or(1.0), delta, DEFAULT_STEP_CAP)?;
    report.threshold = Some(delta);
    report.crossing =
        Some(Crossing { n: n_star, value: minorization_bound(epsilon, n0, n_star)?, j: None });
    Ok(report)
}
