use mcb_core::interval::Interval;
use mcb_core::kernels::{
    verify_minorization_numeric, verify_univariate_drift, HalflineMixture, RwmLaplace, VerifyOptions,
};
use mcb_core::presets;
use mcb_core::quadrature::Quadrature;
use serde_json::{json, Value};

use super::execution;
use crate::cli::{Condition, KernelPreset, VerifyArgs};
use crate::error::{CliError, CliResult};
use crate::output::{f, to_value, Report, Status};

pub fn run(args: &VerifyArgs, config: Value) -> CliResult<Report> {
    if !(args.abs_tol > 0.0) {
        return Err(CliError::usage("--abs-tol must be positive"));
    }
    let options = VerifyOptions {
        quadrature: Quadrature::with_abs_tol(args.abs_tol),
        execution: execution(args.workers)?,
        ..VerifyOptions::default()
    };
    match args.condition {
        Condition::Drift => drift(args, &options, config),
        Condition::Minorization => minorization(args, &options, config),
    }
}

fn probe_grid(args: &VerifyArgs, lo: f64, hi: f64, step: f64) -> CliResult<Vec<f64>> {
    let lo = args.grid_lo.unwrap_or(lo);
    let hi = args.grid_hi.unwrap_or(hi);
    let step = args.step.unwrap_or(step);
    if !(lo <= hi) || !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(CliError::usage(format!("invalid probe grid [{lo}, {hi}] with step {step}")));
    }
    if (hi - lo) / step > 1e7 {
        return Err(CliError::usage("probe grid has more than 1e7 points"));
    }
    Ok(Interval::new(lo, hi).grid(step))
}

fn finish(stem: &str, command: &str, config: Value, passed: bool, result: Value, csv: Option<String>) -> Report {
    let mut out = Report::new(stem, command, config, result);
    out.csv = csv;
    if !passed {
        out.envelope.status = Status::Fail;
    }
    out
}

fn drift(args: &VerifyArgs, options: &VerifyOptions, config: Value) -> CliResult<Report> {
    if args.preset != KernelPreset::RwmLaplace {
        return Err(CliError::usage("the half-line chain has a uniform minorization and no drift condition"));
    }
    if args.epsilon.is_some() {
        return Err(CliError::usage("--epsilon applies to `verify minorization`"));
    }
    let lambda = args.lambda.unwrap_or(presets::LAPLACE_LAMBDA);
    let b = args.b.unwrap_or(presets::LAPLACE_B);
    let grid = probe_grid(args, -10.0, 10.0, 0.05)?;
    let r = verify_univariate_drift(
        &RwmLaplace::new(),
        &presets::laplace_v,
        presets::LAPLACE_SMALL_SET,
        lambda,
        b,
        &grid,
        options,
    )?;
    let mut csv = String::from("x,pv,rhs\n");
    for ((x, l), r) in r.grid.iter().zip(&r.lhs).zip(&r.rhs) {
        csv.push_str(&format!("{},{},{}\n", f(*x), f(*l), f(*r)));
    }
    let result = json!({
        "preset": "rwm-laplace",
        "lambda": lambda,
        "b": b,
        "small_set": [presets::LAPLACE_SMALL_SET.lo, presets::LAPLACE_SMALL_SET.hi],
        "probes": r.grid.len(),
        "passed": r.passed,
        "max_violation": r.max_violation,
        "worst_x": r.worst_x,
        "quadrature_error_estimate": r.quadrature_error_estimate,
        "tolerance": r.tolerance,
    });
    Ok(finish("verify-drift", "verify drift", config, r.passed, result, Some(csv)))
}

fn minorization(args: &VerifyArgs, options: &VerifyOptions, config: Value) -> CliResult<Report> {
    if args.lambda.is_some() || args.b.is_some() {
        return Err(CliError::usage("--lambda and --b apply to `verify drift`"));
    }
    let r = match args.preset {
        KernelPreset::Halfline => {
            let eps = args.epsilon.unwrap_or(presets::HALFLINE_EPSILON);
            let xs = probe_grid(args, 0.0, 50.0, 0.5)?;
            let ys = Interval::new(0.0, 50.0).grid(0.05);
            let nu = |y: f64| presets::HALFLINE_NU.density(y);
            verify_minorization_numeric(&HalflineMixture::new(), &xs, 1, eps, &nu, &ys, options)?
        }
        KernelPreset::RwmLaplace => {
            let eps = args.epsilon.unwrap_or_else(presets::laplace_epsilon);
            let c = presets::LAPLACE_SMALL_SET;
            let xs = probe_grid(args, c.lo, c.hi, 0.1)?;
            if xs.iter().any(|x| !c.contains(*x)) {
                return Err(CliError::usage(format!("probe states must lie in the small set [{}, {}]", c.lo, c.hi)));
            }
            let support = presets::LAPLACE_NU.support();
            let ys = support.grid(0.05);
            let nu = |y: f64| presets::LAPLACE_NU.density(y);
            verify_minorization_numeric(&RwmLaplace::new(), &xs, presets::LAPLACE_N0, eps, &nu, &ys, options)?
        }
    };
    let preset = to_value(&args.preset)?;
    let passed = r.passed;
    let result = json!({ "preset": preset, "report": to_value(&r)? });
    Ok(finish("verify-minorization", "verify minorization", config, passed, result, None))
}
