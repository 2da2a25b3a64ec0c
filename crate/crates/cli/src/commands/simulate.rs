use std::sync::Arc;

use mcb_core::bounds::{best_j, minorization_bound};
use mcb_core::coupling::{
    run_small_set_coupling, run_uniform_coupling, ContinuousCoupling, CouplingConfig, CouplingResult,
    FiniteCoupling, Sampler, StationaryStart,
};
use mcb_core::finite_chain::{minorization_pseudo, minorization_uniform, ProbVector};
use mcb_core::interval::Interval;
use mcb_core::kernels::{HalflineMixture, RwmLaplace};
use mcb_core::presets::{self, LaplaceOverrides};
use serde_json::{json, Value};

use super::{execution, labels, load_chain, state_index};
use crate::cli::{CertChoice, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::output::{f, to_value, Report};

/// Bound curve to compare the simulation against, with a description.
struct Simulated {
    model: Value,
    result: CouplingResult,
    bound: Vec<f64>,
    bound_kind: &'static str,
}

pub fn run(args: &SimulateArgs, config: Value) -> CliResult<Report> {
    if args.reps == 0 {
        return Err(CliError::usage("--reps must be at least 1"));
    }
    let mut cfg = CouplingConfig::new(args.n_max, args.reps, args.seed);
    cfg.record_horizon = args.record_horizon;
    cfg.trajectories = args.trajectories;
    cfg.execution = execution(args.workers)?;

    let sim = if args.grid.is_some() || args.matrix.is_some() {
        finite(args, &cfg)?
    } else if args.halfline {
        halfline(args, &cfg)?
    } else {
        rwm_laplace(args, &cfg)?
    };
    Ok(report(sim, args.seed, config))
}

fn finite(args: &SimulateArgs, cfg: &CouplingConfig) -> CliResult<Simulated> {
    if args.n0 == 0 {
        return Err(CliError::usage("--n0 must be at least 1"));
    }
    let chain = load_chain(args.grid.as_deref(), args.matrix.as_deref())?;
    let size = chain.matrix.size();
    let start = state_index(args.start, chain.default_start, size, "--start")?;
    let cert = match args.cert {
        CertChoice::Uniform => minorization_uniform(&chain.matrix, args.n0),
        CertChoice::Pseudo => minorization_pseudo(&chain.matrix, args.n0),
    }
    .ok_or_else(|| {
        CliError::math(format!("no {:?} minorization with n0 = {} (epsilon is zero)", args.cert, args.n0))
    })?;
    let mu0 = ProbVector::point_mass(size, start);
    let model = FiniteCoupling::new(&chain.matrix, &mu0, &cert)?;
    let result = run_uniform_coupling(&model, cfg)?;
    let eps = cert.epsilon_f64();
    let bound = result
        .times
        .iter()
        .map(|&n| minorization_bound(eps, args.n0, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Simulated {
        model: json!({
            "chain": chain.label,
            "size": size,
            "start": start + 1,
            "certificate": format!("{:?}", cert.variant).to_lowercase(),
            "epsilon": cert.epsilon.to_string(),
            "small_set": labels(&cert.small_set),
        }),
        result,
        bound,
        bound_kind: "minorization",
    })
}

fn halfline(args: &SimulateArgs, cfg: &CouplingConfig) -> CliResult<Simulated> {
    let model = ContinuousCoupling::new(
        HalflineMixture::new(),
        1,
        presets::HALFLINE_EPSILON,
        presets::HALFLINE_NU,
        Interval::new(0.0, f64::INFINITY),
        args.x0,
        StationaryStart::BurnIn { from: args.x0, steps: args.burn_in },
    )?;
    let result = run_uniform_coupling(&model, cfg)?;
    let bound = result
        .times
        .iter()
        .map(|&n| minorization_bound(presets::HALFLINE_EPSILON, 1, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Simulated {
        model: json!({
            "chain": "halfline",
            "x0": args.x0,
            "epsilon": presets::HALFLINE_EPSILON,
            "stationary_start": { "burn_in": args.burn_in, "from": args.x0 },
        }),
        result,
        bound,
        bound_kind: "minorization",
    })
}

fn rwm_laplace(args: &SimulateArgs, cfg: &CouplingConfig) -> CliResult<Simulated> {
    let sampler: Sampler = Arc::new(|rng| RwmLaplace::new().sample_target(rng));
    let model = ContinuousCoupling::new(
        RwmLaplace::new(),
        presets::LAPLACE_N0,
        presets::laplace_epsilon(),
        presets::LAPLACE_NU,
        presets::LAPLACE_SMALL_SET,
        args.x0,
        StationaryStart::Exact(sampler),
    )?
    .with_lyapunov(Arc::new(presets::laplace_v));
    let result = run_small_set_coupling(&model, cfg)?;
    let pipeline = presets::laplace_pipeline(&LaplaceOverrides::default(), cfg.execution)?;
    let mut inputs = pipeline.bound_inputs;
    // The preset Eh is tabulated for x0 = 0.
    if args.x0 != presets::LAPLACE_START {
        inputs.eh = presets::laplace_eh_analytic(args.x0);
    }
    let bound = result
        .times
        .iter()
        .map(|&n| if n == 0 { Ok(1.0) } else { best_j(&inputs, n).map(|(_, lv)| lv.exp().min(1.0)) })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Simulated {
        model: json!({
            "chain": "rwm-laplace",
            "x0": args.x0,
            "epsilon": presets::laplace_epsilon(),
            "small_set": [presets::LAPLACE_SMALL_SET.lo, presets::LAPLACE_SMALL_SET.hi],
            "eh": inputs.eh,
            "mean_v_cap": 1.0 + presets::LAPLACE_B / (1.0 - presets::LAPLACE_LAMBDA),
        }),
        result,
        bound,
        bound_kind: "drift",
    })
}

fn report(sim: Simulated, seed: u64, config: Value) -> Report {
    let res = &sim.result;
    let mut warnings = Vec::new();
    let mut csv = String::from("n,value,se,bound");
    if res.empirical_tv.is_some() {
        csv.push_str(",empirical_tv,empirical_tv_se");
    }
    csv.push('\n');
    let mut rows = Vec::with_capacity(res.times.len());
    for (t, &n) in res.times.iter().enumerate() {
        let nc = res.non_coupling[t];
        let bound = sim.bound[t];
        if nc.value > bound + 3.0 * nc.se {
            warnings.push(format!(
                "n = {n}: non-coupling frequency {:.6} exceeds bound {:.6} by more than 3 SE",
                nc.value, bound
            ));
        }
        let mut row = json!({ "n": n, "non_coupling": nc.value, "se": nc.se, "bound": bound });
        csv.push_str(&format!("{n},{},{},{}", f(nc.value), f(nc.se), f(bound)));
        if let Some(tv) = res.empirical_tv.as_ref().map(|v| v[t]) {
            let combined = (tv.se * tv.se + nc.se * nc.se).sqrt();
            if tv.value > nc.value + 3.0 * combined {
                warnings.push(format!(
                    "n = {n}: empirical TV {:.6} exceeds non-coupling frequency {:.6} by more than 3 SE",
                    tv.value, nc.value
                ));
            }
            row["empirical_tv"] = json!(tv.value);
            row["empirical_tv_se"] = json!(tv.se);
            csv.push_str(&format!(",{},{}", f(tv.value), f(tv.se)));
        }
        csv.push('\n');
        rows.push(row);
    }
    let mut result = json!({
        "model": sim.model,
        "bound_kind": sim.bound_kind,
        "curve": rows,
    });
    if let Ok(Value::Object(map)) = to_value(res) {
        for (k, v) in map {
            result[k.as_str()] = v;
        }
    }
    let mut out = Report::new("simulate", "simulate", config, result);
    out.envelope.seed = Some(seed);
    out.envelope.warnings = warnings;
    out.csv = Some(csv);
    if !res.trajectories.is_empty() {
        out.extra_csv.push(("trajectories".into(), res.trajectories_csv()));
    }
    out
}
