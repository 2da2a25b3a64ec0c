//! Built-in models with their certified constants.

use std::sync::Arc;

use crate::bounds::{
    b_constant, bivariate_from_univariate, conversion_threshold, eh_fallback, stationary_moment_bound,
    sup_rh_via_containment, Containment, DriftBoundInputs, UnivariateDrift,
};
use crate::error::Result;
use crate::interval::Interval;
use crate::kernels::{mass_outside, OverlapMeasure, RwmLaplace};
use crate::parallel::{try_map_indexed, Execution};
use crate::quadrature::Quadrature;
use crate::report::{Input, Source};

/// Grid walk: 3 x 3 lattice started from the centre cell (index 4).
pub const GRID_ROWS: usize = 3;
pub const GRID_COLS: usize = 3;
pub const GRID_START: usize = 4;
pub const GRID_N0: u64 = 2;

/// Half-line mixture: `P(x, dy) >= e^{-2y} dy`.
pub const HALFLINE_EPSILON: f64 = 0.5;
pub const HALFLINE_NU: OverlapMeasure = OverlapMeasure::Exponential { rate: 2.0 };

/// Point process interaction strengths.
pub const POINT_PROCESS_C: f64 = 0.1;
pub const POINT_PROCESS_D: f64 = 0.1;

pub const LAPLACE_SMALL_SET: Interval = Interval { lo: -2.0, hi: 2.0 };
pub const LAPLACE_N0: u64 = 2;
pub const LAPLACE_NU: OverlapMeasure = OverlapMeasure::Uniform { lo: -1.0, hi: 1.0 };
pub const LAPLACE_LAMBDA: f64 = 0.916;
pub const LAPLACE_B: f64 = 0.285;
/// Set that two steps from the small set never leave.
pub const LAPLACE_CONTAINMENT: Interval = Interval { lo: -6.0, hi: 6.0 };
pub const LAPLACE_START: f64 = 0.0;
/// `E_{Z~pi} h(0, Z)` as tabulated for this model. The exact value is
/// [`laplace_eh_analytic`]; this larger value remains a valid upper bound.
pub const LAPLACE_EH: f64 = 2.0;
/// Divisor of the linear schedule `j = 1 + n / 439.56`.
pub const LAPLACE_SCHEDULE_DIVISOR: f64 = 439.56;
pub const LAPLACE_SCHEDULE_N: u64 = 120_000;

pub fn laplace_epsilon() -> f64 {
    1.0 / (8.0 * std::f64::consts::E.powi(2))
}

pub fn laplace_v(x: f64) -> f64 {
    (x.abs() / 2.0).exp()
}

/// `inf V` outside `[-2, 2]`.
pub fn laplace_d() -> f64 {
    std::f64::consts::E
}

/// `E_pi V = E e^{|Z|/2}` with `|Z| ~ Exp(1)`, i.e. `1 / (1 - 1/2) = 2`.
pub fn laplace_stationary_v_mean() -> f64 {
    2.0
}

/// `E_{Z~pi} h(x0, Z) = (V(x0) + E_pi V) / 2`.
pub fn laplace_eh_analytic(x0: f64) -> f64 {
    0.5 * (laplace_v(x0) + laplace_stationary_v_mean())
}

/// Values that replace the built-in constants of the Laplace pipeline.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LaplaceOverrides {
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    pub b: Option<f64>,
    pub d: Option<f64>,
    pub sup_rh: Option<f64>,
    pub b_constant: Option<f64>,
    pub eh: Option<f64>,
}

/// Every constant of the drift bound for the Laplace random-walk chain, with
/// the provenance of each.
#[derive(Debug, Clone)]
pub struct LaplacePipeline {
    pub drift: UnivariateDrift,
    pub d: f64,
    pub conversion_threshold: f64,
    pub alpha: f64,
    pub containment: Option<Containment>,
    pub sup_rh: Option<f64>,
    pub stationary_moment_bound: f64,
    pub eh_fallback: f64,
    pub eh_analytic: f64,
    pub bound_inputs: DriftBoundInputs,
    pub provenance: Vec<Input>,
}

fn pick(user: Option<f64>, preset: f64) -> (f64, Source) {
    match user {
        Some(v) => (v, Source::UserSupplied),
        None => (preset, Source::Preset),
    }
}

fn input(name: &str, value: f64, source: Source) -> Input {
    Input { name: name.into(), value, exact: None, source }
}

/// Largest `P^2(x, D^c)` over `x` in a grid on the small set.
pub fn laplace_containment(step: f64, execution: Execution) -> Result<Containment> {
    let kernel = RwmLaplace::new();
    let grid = LAPLACE_SMALL_SET.grid(step);
    let quad = Quadrature::with_abs_tol(1e-13);
    let masses = try_map_indexed(grid.len() as u64, execution, |i| {
        mass_outside(&kernel, LAPLACE_N0, grid[i as usize], &LAPLACE_CONTAINMENT, &quad)
    })?;
    let (idx, &mass) = masses
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    Ok(Containment { worst_x: grid[idx], mass_outside: mass })
}

pub fn laplace_pipeline(overrides: &LaplaceOverrides, execution: Execution) -> Result<LaplacePipeline> {
    let mut provenance = Vec::new();
    let (epsilon, src) = pick(overrides.epsilon, laplace_epsilon());
    provenance.push(input("epsilon", epsilon, src));
    provenance.push(input("n0", LAPLACE_N0 as f64, Source::Preset));
    let (lambda, src) = pick(overrides.lambda, LAPLACE_LAMBDA);
    provenance.push(input("lambda", lambda, src));
    let (b, src) = pick(overrides.b, LAPLACE_B);
    provenance.push(input("b", b, src));
    let (d, src) = pick(overrides.d, laplace_d());
    provenance.push(input("d", d, src));

    let drift = UnivariateDrift::new(Arc::new(laplace_v), LAPLACE_SMALL_SET, lambda, b)?;
    let threshold = conversion_threshold(lambda, b);
    provenance.push(input("conversion_threshold", threshold, Source::Computed));
    let bivariate = bivariate_from_univariate(&drift, d)?;
    let alpha = bivariate.alpha;
    provenance.push(input("alpha_inverse", 1.0 / alpha, Source::Computed));

    let mut containment = None;
    let mut sup_rh = None;
    let b_n0 = match (overrides.b_constant, overrides.sup_rh) {
        (Some(bc), _) => {
            provenance.push(input("B", bc, Source::UserSupplied));
            bc
        }
        (None, user_sup) => {
            let sup = match user_sup {
                Some(s) => {
                    provenance.push(input("sup_Rh", s, Source::UserSupplied));
                    s
                }
                None => {
                    let c = laplace_containment(0.05, execution)?;
                    provenance.push(input("containment_mass_outside", c.mass_outside, Source::Computed));
                    let s = sup_rh_via_containment(
                        |x, y| bivariate.h(x, y),
                        &LAPLACE_CONTAINMENT.grid(0.05),
                        &c,
                    )?;
                    containment = Some(c);
                    provenance.push(input("sup_Rh", s, Source::Computed));
                    s
                }
            };
            sup_rh = Some(sup);
            let bc = b_constant(LAPLACE_N0, alpha, epsilon, sup);
            provenance.push(input("B", bc, Source::Computed));
            bc
        }
    };

    let moment = stationary_moment_bound(lambda, b)?;
    provenance.push(input("stationary_moment_bound", moment, Source::Computed));
    let fallback = eh_fallback(laplace_v(LAPLACE_START), lambda, b)?;
    provenance.push(input("Eh_fallback", fallback, Source::Fallback));
    let analytic = laplace_eh_analytic(LAPLACE_START);
    provenance.push(input("Eh_analytic", analytic, Source::Analytic));
    let (eh, src) = pick(overrides.eh, LAPLACE_EH);
    provenance.push(input("Eh", eh, src));

    let bound_inputs = DriftBoundInputs { epsilon, n0: LAPLACE_N0, alpha, b: b_n0, eh };
    bound_inputs.validate()?;
    Ok(LaplacePipeline {
        drift,
        d,
        conversion_threshold: threshold,
        alpha,
        containment,
        sup_rh,
        stationary_moment_bound: moment,
        eh_fallback: fallback,
        eh_analytic: analytic,
        bound_inputs,
        provenance,
    })
}
