use mcb_core::bounds::{
    b_constant, best_j, conversion_threshold, drift_bound, linear_schedule_j, minorization_report,
    optimize_drift_bound, DriftBoundInputs, DEFAULT_STEP_CAP,
};
use mcb_core::kernels::point_process_epsilon;
use mcb_core::presets::{self, LaplaceOverrides};
use mcb_core::report::{Input, Source};
use serde_json::{json, Value};

use super::parse_number;
use crate::cli::{BoundArgs, BoundPreset, BoundKind};
use crate::error::{CliError, CliResult};
use crate::output::{to_value, Report};

pub fn run(args: &BoundArgs, config: Value) -> CliResult<Report> {
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(CliError::usage("--delta must lie in (0, 1)"));
    }
    match args.kind {
        BoundKind::T1 => t1(args, config),
        BoundKind::T2 => t2(args, config),
    }
}

fn user_epsilon(args: &BoundArgs) -> CliResult<Option<f64>> {
    args.epsilon.as_deref().map(|s| parse_number(s, "--epsilon")).transpose()
}

fn t1(args: &BoundArgs, config: Value) -> CliResult<Report> {
    let preset = match args.preset {
        None => None,
        Some(BoundPreset::GridUniform) => Some((9.0 / 80.0, 2)),
        Some(BoundPreset::GridPseudo) => Some((1.0 / 3.0, 2)),
        Some(BoundPreset::Halfline) => Some((presets::HALFLINE_EPSILON, 1)),
        Some(BoundPreset::PointProcess) => {
            Some((point_process_epsilon(presets::POINT_PROCESS_C, presets::POINT_PROCESS_D)?, 1))
        }
        Some(BoundPreset::RwmLaplace) => {
            return Err(CliError::usage("rwm-laplace has only a small-set minorization; use `bound t2`"))
        }
    };
    let (epsilon, eps_src) = match (user_epsilon(args)?, preset) {
        (Some(e), _) => (e, Source::UserSupplied),
        (None, Some((e, _))) => (e, Source::Preset),
        (None, None) => return Err(CliError::usage("bound t1 needs --epsilon or --preset")),
    };
    let (n0, n0_src) = match (args.n0, preset) {
        (Some(n), _) => (n, Source::UserSupplied),
        (None, Some((_, n))) => (n, Source::Preset),
        (None, None) => return Err(CliError::usage("bound t1 needs --n0 or --preset")),
    };
    if n0 == 0 {
        return Err(CliError::usage("--n0 must be at least 1"));
    }
    let probe = minorization_report(epsilon, n0, 0, args.delta)?;
    let n_star = probe.crossing.as_ref().map(|c| c.n).unwrap_or(0);
    let n_max = args.n.unwrap_or(n_star.max(1) * 2).min(1_000_000);
    let mut report = minorization_report(epsilon, n0, n_max, args.delta)?;
    report.inputs = vec![
        Input { name: "epsilon".into(), value: epsilon, exact: args.epsilon.clone(), source: eps_src },
        Input { name: "n0".into(), value: n0 as f64, exact: None, source: n0_src },
    ];
    let csv = report.to_csv();
    let mut out = Report::new("bound-t1", "bound t1", config, json!({ "steps_to_threshold": n_star, "bound": to_value(&report)? }));
    out.csv = Some(csv);
    Ok(out)
}

fn require(v: Option<f64>, flag: &str) -> CliResult<f64> {
    v.ok_or_else(|| CliError::usage(format!("bound t2 without --preset needs {flag}")))
}

fn input(name: &str, value: f64, source: Source) -> Input {
    Input { name: name.into(), value, exact: None, source }
}

fn t2(args: &BoundArgs, config: Value) -> CliResult<Report> {
    let epsilon = user_epsilon(args)?;
    let (inputs, provenance, schedule) = match args.preset {
        Some(BoundPreset::RwmLaplace) => {
            if args.n0.is_some_and(|n| n != presets::LAPLACE_N0) {
                return Err(CliError::usage("the rwm-laplace certificate has n0 = 2"));
            }
            let o = LaplaceOverrides {
                epsilon,
                lambda: args.lambda,
                b: args.b,
                d: args.d,
                sup_rh: args.sup_rh,
                b_constant: args.b_constant,
                eh: args.eh,
            };
            let p = presets::laplace_pipeline(&o, Default::default())?;
            let j = linear_schedule_j(presets::LAPLACE_SCHEDULE_N, presets::LAPLACE_SCHEDULE_DIVISOR);
            (p.bound_inputs, p.provenance, Some((presets::LAPLACE_SCHEDULE_N, j)))
        }
        Some(other) => {
            return Err(CliError::usage(format!("preset {other:?} has no drift condition; use `bound t1`")))
        }
        None => {
            let epsilon = require(epsilon, "--epsilon")?;
            let n0 = args.n0.ok_or_else(|| CliError::usage("bound t2 without --preset needs --n0"))?;
            let lambda = require(args.lambda, "--lambda")?;
            let b = require(args.b, "--b")?;
            let d = require(args.d, "--d")?;
            let eh = require(args.eh, "--eh")?;
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(CliError::usage("--lambda must lie in (0, 1)"));
            }
            let threshold = conversion_threshold(lambda, b);
            if d <= threshold {
                return Err(mcb_core::Error::SmallSetTooSmall { d, threshold }.into());
            }
            let alpha = 1.0 / (lambda + b / (d + 1.0));
            let mut prov = vec![
                input("epsilon", epsilon, Source::UserSupplied),
                input("n0", n0 as f64, Source::UserSupplied),
                input("lambda", lambda, Source::UserSupplied),
                input("b", b, Source::UserSupplied),
                input("d", d, Source::UserSupplied),
                input("conversion_threshold", threshold, Source::Computed),
                input("alpha_inverse", 1.0 / alpha, Source::Computed),
            ];
            let big_b = match (args.b_constant, args.sup_rh) {
                (Some(bc), _) => {
                    prov.push(input("B", bc, Source::UserSupplied));
                    bc
                }
                (None, Some(s)) => {
                    prov.push(input("sup_Rh", s, Source::UserSupplied));
                    let bc = b_constant(n0, alpha, epsilon, s);
                    prov.push(input("B", bc, Source::Computed));
                    bc
                }
                (None, None) => return Err(CliError::usage("bound t2 without --preset needs --sup-rh or --B")),
            };
            prov.push(input("Eh", eh, Source::UserSupplied));
            (DriftBoundInputs { epsilon, n0, alpha, b: big_b, eh }, prov, None)
        }
    };
    inputs.validate()?;
    let mut report = optimize_drift_bound(&inputs, args.delta, DEFAULT_STEP_CAP)?;
    report.inputs = provenance;

    let mut evaluations = Vec::new();
    let mut eval = |n: u64, j: Option<u64>, label: &str| -> CliResult<()> {
        let (j, value) = match j {
            Some(j) => (j, drift_bound(&inputs, n, j)?),
            None => {
                let (j, lv) = best_j(&inputs, n)?;
                (j, lv.exp())
            }
        };
        evaluations.push(json!({ "label": label, "n": n, "j": j, "value": value, "below_threshold": value < args.delta }));
        Ok(())
    };
    if let Some((n, j)) = schedule {
        eval(n, Some(j), "linear schedule j = 1 + n / 439.56")?;
    }
    if let Some(n) = args.at_n {
        eval(n, args.at_j, "requested")?;
    }
    let crossing = report.crossing.clone();
    let csv = report.to_csv();
    let mut out = Report::new(
        "bound-t2",
        "bound t2",
        config,
        json!({
            "steps_to_threshold": crossing.as_ref().map(|c| c.n),
            "best_j": crossing.as_ref().and_then(|c| c.j),
            "bound": to_value(&report)?,
            "evaluations": evaluations,
        }),
    );
    out.csv = Some(csv);
    Ok(out)
}
