use mcb_core::bounds::{minorization_bound, minorization_report, steps_to_threshold, DEFAULT_STEP_CAP};
use mcb_core::finite_chain::{
    eigen_bound, evolve, exact_tv_values, minorization_pseudo, minorization_uniform, stationary, CertVariant,
    MinorizationCert, ProbVector, StochasticMatrix,
};
use mcb_core::rational;
use serde_json::{json, Value};

use super::{labels, load_chain, state_index};
use crate::cli::{FiniteAnalysis, FiniteArgs};
use crate::error::{CliError, CliResult};
use crate::output::{f, to_value, Report, Status};

pub fn run(args: &FiniteArgs, config: Value) -> CliResult<Report> {
    let chain = load_chain(args.chain.grid.as_deref(), args.chain.matrix.as_deref())?;
    let p = &chain.matrix;
    let start = state_index(args.chain.start, chain.default_start, p.size(), "--start")?;
    if args.n0 == 0 {
        return Err(CliError::usage("--n0 must be at least 1"));
    }
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(CliError::usage("--delta must lie in (0, 1)"));
    }
    let (stem, command) = match args.analysis {
        FiniteAnalysis::Stationary => ("finite-stationary", "finite stationary"),
        FiniteAnalysis::EigenBound => ("finite-eigen-bound", "finite eigen-bound"),
        FiniteAnalysis::Minorization => ("finite-minorization", "finite minorization"),
        FiniteAnalysis::Pseudo => ("finite-pseudo", "finite pseudo"),
        FiniteAnalysis::TvExact => ("finite-tv-exact", "finite tv-exact"),
    };
    let mut report = match args.analysis {
        FiniteAnalysis::Stationary => stationary_report(p)?,
        FiniteAnalysis::EigenBound => {
            let target = state_index(args.target, start, p.size(), "--target")?;
            eigen_report(p, start, target, args.n, args.delta)?
        }
        FiniteAnalysis::Minorization => {
            let cert = minorization_uniform(p, args.n0).ok_or_else(|| {
                CliError::math(format!("P^{} has a zero in every column; no uniform minorization", args.n0))
            })?;
            cert_report(p, &cert, args.n, args.delta)?
        }
        FiniteAnalysis::Pseudo => {
            let cert = minorization_pseudo(p, args.n0).ok_or_else(|| {
                CliError::math(format!("some pair of rows of P^{} has disjoint support", args.n0))
            })?;
            cert_report(p, &cert, args.n, args.delta)?
        }
        FiniteAnalysis::TvExact => tv_report(p, start, args.n0, args.n)?,
    };
    if let Value::Object(m) = &mut report.0 {
        m.insert("chain".into(), json!(chain.label));
        m.insert("size".into(), json!(p.size()));
        if args.analysis != FiniteAnalysis::Stationary {
            m.insert("start".into(), json!(start + 1));
        }
    }
    let violations = ["bound_violations", "violations_of_exact_deviation"]
        .iter()
        .filter_map(|k| report.0.get(*k).and_then(Value::as_u64))
        .sum::<u64>();
    let mut out = Report::new(stem, command, config, report.0);
    out.csv = report.1;
    if violations > 0 {
        out.envelope.status = Status::Fail;
        out.envelope.warnings.push(format!("{violations} curve points exceed their bound"));
    }
    Ok(out)
}

type Partial = (Value, Option<String>);

fn vector_json(v: &ProbVector) -> Value {
    json!({ "exact": v.to_strings(), "float": v.to_f64() })
}

fn stationary_report(p: &StochasticMatrix) -> CliResult<Partial> {
    let pi = stationary(p)?;
    Ok((json!({ "stationary": vector_json(&pi) }), None))
}

fn eigen_report(p: &StochasticMatrix, start: usize, target: usize, n_max: u64, delta: f64) -> CliResult<Partial> {
    let mu0 = ProbVector::point_mass(p.size(), start);
    let b = eigen_bound(p, &mu0, target)?;
    let pi = stationary(p)?;
    let n_star = steps_to_threshold(|n| b.value(n), delta, DEFAULT_STEP_CAP)?;
    let mut csv = String::from("n,value,exact_deviation\n");
    let mut mu = mu0;
    let mut violations = 0;
    for n in 0..=n_max {
        let dev = rational::to_f64(&(&mu.entries()[target] - &pi.entries()[target])).abs();
        if dev > b.value(n) + 1e-9 {
            violations += 1;
        }
        csv.push_str(&format!("{n},{},{}\n", f(b.value(n)), f(dev)));
        mu = evolve(&mu, p, 1)?;
    }
    let mut bound = to_value(&b)?;
    if let Value::Object(m) = &mut bound {
        m.insert("target_state".into(), json!(target + 1));
    }
    Ok((
        json!({
            "target": target + 1,
            "bound": bound,
            "threshold": delta,
            "steps_to_threshold": n_star,
            "violations_of_exact_deviation": violations,
        }),
        Some(csv),
    ))
}

fn cert_report(p: &StochasticMatrix, cert: &MinorizationCert, n_max: u64, delta: f64) -> CliResult<Partial> {
    let eps = cert.epsilon_f64();
    let curve = minorization_report(eps, cert.n0, n_max, delta)?;
    let crossing = curve.crossing.as_ref().map(|c| c.n);
    let variant = match cert.variant {
        CertVariant::Uniform => "uniform",
        CertVariant::Pseudo => "pseudo",
    };
    let pairs: Vec<[usize; 2]> = cert.argmin_pairs.iter().map(|&(i, j)| [i + 1, j + 1]).collect();
    let mut result = json!({
        "certificate": {
            "variant": variant,
            "n0": cert.n0,
            "epsilon": rational::to_string(&cert.epsilon),
            "epsilon_float": eps,
            "small_set": labels(&cert.small_set),
            "verified": cert.verify(p),
        },
        "steps_to_threshold": crossing,
        "bound": to_value(&curve)?,
    });
    if let Some(nu) = &cert.nu {
        result["certificate"]["nu"] = vector_json(nu);
    }
    if cert.variant == CertVariant::Pseudo {
        result["certificate"]["argmin_pairs"] = json!(pairs);
    }
    Ok((result, Some(curve.to_csv())))
}

fn tv_report(p: &StochasticMatrix, start: usize, n0: u64, n_max: u64) -> CliResult<Partial> {
    let mu0 = ProbVector::point_mass(p.size(), start);
    let tv = exact_tv_values(&mu0, p, n_max)?;
    let uniform = minorization_uniform(p, n0).map(|c| c.epsilon_f64());
    let pseudo = minorization_pseudo(p, n0).map(|c| c.epsilon_f64());
    let column = |eps: Option<f64>, n: u64| -> CliResult<Option<f64>> {
        eps.map(|e| minorization_bound(e, n0, n)).transpose().map_err(Into::into)
    };
    let mut csv = String::from("n,value,uniform_bound,pseudo_bound\n");
    let mut points = Vec::new();
    let mut violations = 0;
    for (n, v) in tv.iter().enumerate() {
        let n = n as u64;
        let value = rational::to_f64(v);
        let (u, ps) = (column(uniform, n)?, column(pseudo, n)?);
        for b in [u, ps].into_iter().flatten() {
            if value > b + 1e-12 {
                violations += 1;
            }
        }
        let cell = |b: Option<f64>| b.map(f).unwrap_or_default();
        csv.push_str(&format!("{n},{},{},{}\n", f(value), cell(u), cell(ps)));
        points.push(json!({ "n": n, "value": value, "exact": rational::to_string(v), "uniform_bound": u, "pseudo_bound": ps }));
    }
    Ok((
        json!({
            "n0": n0,
            "uniform_epsilon": uniform,
            "pseudo_epsilon": pseudo,
            "curve": points,
            "bound_violations": violations,
        }),
        Some(csv),
    ))
}
