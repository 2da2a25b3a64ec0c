//! Numerical checks of drift and minorization conditions on probe grids.
//!
//! These are engineering checks at finitely many states, not proofs: each
//! probe evaluates `PV(x)` or an n-step transition density by adaptive
//! quadrature and compares it against the claimed inequality.

use serde::Serialize;

use super::DensityKernel;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::parallel::{try_map_indexed, Execution};
use crate::quadrature::{Integral, Quadrature};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub quadrature: Quadrature,
    /// Allowed negative slack for minorization probes.
    pub minorization_tol: f64,
    pub execution: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { quadrature: Quadrature::default(), minorization_tol: 1e-6, execution: Execution::default() }
    }
}

fn merged_breaks<K: DensityKernel + ?Sized>(kernel: &K, x: f64, extra: &[f64]) -> Vec<f64> {
    let mut b = kernel.breakpoints(x);
    b.extend_from_slice(extra);
    b
}

/// `E[f(X_1) | X_0 = x]`: quadrature over the continuous part plus the atom term.
pub fn transition_expectation<K: DensityKernel + ?Sized>(
    kernel: &K,
    x: f64,
    f: impl Fn(f64) -> f64,
    quadrature: &Quadrature,
) -> Result<Integral> {
    let s = kernel.support(x);
    let mut r = quadrature.integrate_with_breaks(|y| f(y) * kernel.density(x, y), s.lo, s.hi, &merged_breaks(kernel, x, &[]))?;
    r.value += kernel.atom(x) * f(x);
    Ok(r)
}

/// Density of the continuous part of `P^2(x, .)` at `y`:
/// `int p(x,z) p(z,y) dz + atom(x) p(x,y) + p(x,y) atom(y)`.
/// The remaining mass `atom(x)^2` sits on `x` itself.
pub fn two_step_density<K: DensityKernel + ?Sized>(
    kernel: &K,
    x: f64,
    y: f64,
    quadrature: &Quadrature,
) -> Result<f64> {
    let direct = kernel.density(x, y);
    let atoms = direct * (kernel.atom(x) + kernel.atom(y));
    let Some(dom) = kernel.support(x).intersect(&kernel.reverse_support(y)) else {
        return Ok(atoms);
    };
    let breaks = merged_breaks(kernel, x, &kernel.reverse_breakpoints(y));
    let conv = quadrature.integrate_with_breaks(
        |z| kernel.density(x, z) * kernel.density(z, y),
        dom.lo,
        dom.hi,
        &breaks,
    )?;
    Ok(conv.value + atoms)
}

pub fn n_step_density<K: DensityKernel + ?Sized>(
    kernel: &K,
    n0: u64,
    x: f64,
    y: f64,
    quadrature: &Quadrature,
) -> Result<f64> {
    match n0 {
        1 => Ok(kernel.density(x, y)),
        2 => two_step_density(kernel, x, y, quadrature),
        _ => Err(Error::Unsupported(format!("{n0}-step densities (only n0 = 1 or 2)"))),
    }
}

fn one_step_outside<K: DensityKernel + ?Sized>(kernel: &K, x: f64, d: &Interval, quadrature: &Quadrature) -> Result<f64> {
    let s = kernel.support(x);
    let breaks = kernel.breakpoints(x);
    let mut mass = if d.contains(x) { 0.0 } else { kernel.atom(x) };
    for piece in [Interval { lo: f64::NEG_INFINITY, hi: d.lo }, Interval { lo: d.hi, hi: f64::INFINITY }] {
        if let Some(p) = s.intersect(&piece) {
            if p.len() > 0.0 {
                mass += quadrature.integrate_with_breaks(|y| kernel.density(x, y), p.lo, p.hi, &breaks)?.value;
            }
        }
    }
    Ok(mass)
}

/// `P^n0(x, D^c)` for `n0` in `{1, 2}`.
pub fn mass_outside<K: DensityKernel + ?Sized>(
    kernel: &K,
    n0: u64,
    x: f64,
    d: &Interval,
    quadrature: &Quadrature,
) -> Result<f64> {
    match n0 {
        1 => one_step_outside(kernel, x, d, quadrature),
        2 => {
            let s = kernel.support(x);
            let err = std::cell::RefCell::new(None);
            let inner = quadrature.integrate_with_breaks(
                |z| {
                    let p = kernel.density(x, z);
                    if p == 0.0 {
                        return 0.0;
                    }
                    match one_step_outside(kernel, z, d, quadrature) {
                        Ok(m) => p * m,
                        Err(e) => {
                            *err.borrow_mut() = Some(e);
                            0.0
                        }
                    }
                },
                s.lo,
                s.hi,
                &kernel.breakpoints(x),
            );
            if let Some(e) = err.into_inner() {
                return Err(e);
            }
            Ok(inner?.value + kernel.atom(x) * one_step_outside(kernel, x, d, quadrature)?)
        }
        _ => Err(Error::Unsupported(format!("{n0}-step containment (only n0 = 1 or 2)"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftVerificationReport {
    pub grid: Vec<f64>,
    /// `PV(x)` at each probe.
    pub lhs: Vec<f64>,
    /// `lambda V(x) + b 1_C(x)` at each probe.
    pub rhs: Vec<f64>,
    pub max_violation: f64,
    pub worst_x: f64,
    pub quadrature_error_estimate: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Check `PV(x) <= lambda V(x) + b 1_C(x)` at every probe state.
pub fn verify_univariate_drift<K: DensityKernel + ?Sized>(
    kernel: &K,
    v: &(dyn Fn(f64) -> f64 + Sync),
    small_set: Interval,
    lambda: f64,
    b: f64,
    grid: &[f64],
    options: &VerifyOptions,
) -> Result<DriftVerificationReport> {
    if grid.is_empty() {
        return Err(Error::OutOfRange("empty probe grid".into()));
    }
    for &x in grid {
        kernel.check_state(x)?;
        if !(v(x) >= 1.0) {
            return Err(Error::OutOfRange(format!("V({x}) = {} is below 1", v(x))));
        }
    }
    let probes = try_map_indexed(grid.len() as u64, options.execution, |i| {
        let x = grid[i as usize];
        let pv = transition_expectation(kernel, x, v, &options.quadrature)?;
        let rhs = lambda * v(x) + if small_set.contains(x) { b } else { 0.0 };
        Ok((pv.value, rhs, pv.error_estimate))
    })?;

    let mut max_violation = f64::NEG_INFINITY;
    let mut worst_x = grid[0];
    let mut quad_err: f64 = 0.0;
    for (&x, &(l, r, e)) in grid.iter().zip(&probes) {
        if l - r > max_violation {
            max_violation = l - r;
            worst_x = x;
        }
        quad_err = quad_err.max(e);
    }
    let tolerance = options.quadrature.abs_tol;
    Ok(DriftVerificationReport {
        grid: grid.to_vec(),
        lhs: probes.iter().map(|p| p.0).collect(),
        rhs: probes.iter().map(|p| p.1).collect(),
        max_violation,
        worst_x,
        quadrature_error_estimate: quad_err,
        tolerance,
        passed: max_violation <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorizationVerificationReport {
    pub n0: u64,
    pub epsilon: f64,
    pub probes: usize,
    /// `min p^n0(x, y) - eps nu(y)` over the probes.
    pub min_slack: f64,
    pub worst_x: f64,
    pub worst_y: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Check `p^n0(x, y) >= eps nu(y)` for all `x` in `x_grid` (inside the small
/// set) and `y` in `y_grid` (inside the support of `nu`).
pub fn verify_minorization_numeric<K: DensityKernel + ?Sized>(
    kernel: &K,
    x_grid: &[f64],
    n0: u64,
    epsilon: f64,
    nu: &(dyn Fn(f64) -> f64 + Sync),
    y_grid: &[f64],
    options: &VerifyOptions,
) -> Result<MinorizationVerificationReport> {
    if x_grid.is_empty() || y_grid.is_empty() {
        return Err(Error::OutOfRange("empty probe grid".into()));
    }
    for &x in x_grid {
        kernel.check_state(x)?;
    }
    let rows = try_map_indexed(x_grid.len() as u64, options.execution, |i| {
        let x = x_grid[i as usize];
        let mut best = (f64::INFINITY, y_grid[0]);
        for &y in y_grid {
            let slack = n_step_density(kernel, n0, x, y, &options.quadrature)? - epsilon * nu(y);
            if slack < best.0 {
                best = (slack, y);
            }
        }
        Ok(best)
    })?;
    let (idx, &(min_slack, worst_y)) = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("nonempty grid");
    Ok(MinorizationVerificationReport {
        n0,
        epsilon,
        probes: x_grid.len() * y_grid.len(),
        min_slack,
        worst_x: x_grid[idx],
        worst_y,
        tolerance: options.minorization_tol,
        passed: min_slack >= -options.minorization_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{HalflineMixture, RwmLaplace};

    fn v(x: f64) -> f64 {
        (0.5 * x.abs()).exp()
    }

    #[test]
    fn pv_closed_form_far_from_origin() {
        let k = RwmLaplace::new();
        let e1 = (-1f64).exp();
        // (1/4) e^{x/2} [2(1 - e^-1) + 2(1 - e^-1) + (1 + e^-2)] at x = 6
        let closed = 0.25 * 3f64.exp() * (4.0 * (1.0 - e1) + 1.0 + (-2f64).exp());
        let pv = transition_expectation(&k, 6.0, v, &Quadrature::default()).unwrap().value;
        assert!((pv - closed).abs() < 1e-9);
        assert!((pv / v(6.0) - 0.916).abs() / 0.916 < 0.01);
    }

    #[test]
    fn constant_v_always_passes() {
        let k = RwmLaplace::new();
        let grid = Interval::new(-3.0, 3.0).grid(0.5);
        let r = verify_univariate_drift(&k, &|_| 1.0, Interval::new(-3.0, 3.0), 0.5, 1.0, &grid, &VerifyOptions::default())
            .unwrap();
        assert!(r.passed);
        assert!((r.max_violation + 0.5).abs() < 1e-8);
    }

    #[test]
    fn v_below_one_rejected() {
        let k = RwmLaplace::new();
        let r = verify_univariate_drift(&k, &|_| 0.5, Interval::new(-2.0, 2.0), 0.5, 1.0, &[0.0], &VerifyOptions::default());
        assert!(r.is_err());
    }

    #[test]
    fn wrong_lambda_fails() {
        let k = RwmLaplace::new();
        let grid = Interval::new(-10.0, 10.0).grid(0.5);
        let r = verify_univariate_drift(&k, &v, Interval::new(-2.0, 2.0), 0.5, 0.0, &grid, &VerifyOptions::default())
            .unwrap();
        assert!(!r.passed);
        assert!(r.max_violation > 0.0);
    }

    #[test]
    fn two_step_density_integrates_with_atom() {
        let k = RwmLaplace::new();
        let q = Quadrature::default();
        for x in [0.0, 1.3] {
            let r = q
                .integrate_with_breaks(
                    |y| two_step_density(&k, x, y, &q).unwrap(),
                    x - 4.0,
                    x + 4.0,
                    &[x - 2.0, x + 2.0, 0.0, -x.abs(), x.abs(), -2.0, 2.0],
                )
                .unwrap();
            let total = r.value + k.atom(x).powi(2);
            assert!((total - 1.0).abs() < 1e-6, "x={x}: {total}");
        }
    }

    #[test]
    fn halfline_exponential_minorization() {
        let k = HalflineMixture::new();
        let xs = Interval::new(0.0, 50.0).grid(1.0);
        let ys = Interval::new(0.0, 10.0).grid(0.25);
        let nu = |y: f64| 2.0 * (-2.0 * y).exp();
        let r = verify_minorization_numeric(&k, &xs, 1, 0.5, &nu, &ys, &VerifyOptions::default()).unwrap();
        assert!(r.passed);
        let zero = verify_minorization_numeric(&k, &xs, 1, 0.0, &nu, &ys, &VerifyOptions::default()).unwrap();
        assert!(zero.passed && zero.min_slack >= 0.0);
        let greedy = verify_minorization_numeric(&k, &xs, 1, 0.9, &nu, &ys, &VerifyOptions::default()).unwrap();
        assert!(!greedy.passed);
    }

    #[test]
    fn rwm_two_steps_stay_within_six() {
        let k = RwmLaplace::new();
        let d = Interval::new(-6.0, 6.0);
        for x in [-2.0, 0.0, 1.5, 2.0] {
            assert!(mass_outside(&k, 2, x, &d, &Quadrature::default()).unwrap() < 1e-12);
        }
        let m = mass_outside(&k, 2, 5.0, &d, &Quadrature::default()).unwrap();
        assert!(m > 0.01);
        assert!(n_step_density(&k, 3, 0.0, 0.0, &Quadrature::default()).is_err());
    }
}
