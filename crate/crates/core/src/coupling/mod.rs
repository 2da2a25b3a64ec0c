//! Monte Carlo simulation of coupling constructions.
//!
//! Two copies of a chain run side by side, `X` from the initial law and `X'`
//! from stationarity. At each multiple of `n0` an unequal pair inside the small
//! set flips an `eps`-coin: Heads draws a common state from the overlap
//! measure, Tails moves each copy independently from its residual law. Outside
//! the small set the copies move independently, and equal copies move together.
//! Statistics are recorded on the `n0` lattice only.
//!
//! Replication `r` draws all of its randomness from ChaCha8 stream `r` of the
//! master seed. Results therefore depend only on the seed and replication
//! count, not on how replications are scheduled across workers.

mod continuous;
mod finite;

pub use continuous::{ContinuousCoupling, Sampler, StationaryStart};
pub use finite::FiniteCoupling;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel::{try_map_indexed, Execution};

/// A chain together with a minorization certificate, ready to be coupled.
pub trait CouplingModel: Sync {
    type State: Clone + PartialEq + Send + Sync + std::fmt::Debug;

    fn n0(&self) -> u64;
    fn epsilon(&self) -> f64;
    fn in_small_set(&self, x: &Self::State) -> bool;

    /// Draw from `P^n0(x, .)`.
    fn step_block(&self, x: &Self::State, rng: &mut ChaCha8Rng) -> Self::State;
    /// Common draw after Heads for the unequal pair `(x, y)`.
    fn sample_overlap(&self, x: &Self::State, y: &Self::State, rng: &mut ChaCha8Rng) -> Self::State;
    /// Draw for `x` after Tails, from `(P^n0(x, .) - eps nu_xy) / (1 - eps)`.
    fn sample_residual(&self, x: &Self::State, y: &Self::State, rng: &mut ChaCha8Rng) -> Result<Self::State>;

    fn sample_initial(&self, rng: &mut ChaCha8Rng) -> Self::State;
    fn sample_stationary(&self, rng: &mut ChaCha8Rng) -> Self::State;

    /// Index of `x` in a finite state space, if the chain is finite.
    fn state_index(&self, _x: &Self::State) -> Option<usize> {
        None
    }
    fn state_count(&self) -> Option<usize> {
        None
    }
    /// Drift function value at `x`, when one is attached to the model.
    fn lyapunov(&self, _x: &Self::State) -> Option<f64> {
        None
    }
    /// Exact stationary law of a finite chain, used for empirical TV.
    fn stationary_reference(&self) -> Option<Vec<f64>> {
        None
    }
    fn describe(&self, x: &Self::State) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingMode {
    /// Coin flips for every unequal pair (small set = whole space).
    Uniform,
    /// Coin flips only when both copies are in the small set.
    SmallSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingConfig {
    pub n_max: u64,
    pub replications: u64,
    pub master_seed: u64,
    /// Statistics are recorded on lattice times up to this horizon; beyond it a
    /// replication only runs until its copies meet. Defaults to `n_max`.
    pub record_horizon: Option<u64>,
    /// Number of leading replications whose lattice trajectories are kept.
    pub trajectories: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl CouplingConfig {
    pub fn new(n_max: u64, replications: u64, master_seed: u64) -> Self {
        Self {
            n_max,
            replications,
            master_seed,
            record_horizon: None,
            trajectories: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingTimeSummary {
    /// Replications whose copies met by `n_max`.
    pub coupled: u64,
    pub mean: Option<f64>,
    pub median: Option<u64>,
    pub q90: Option<u64>,
    pub q99: Option<u64>,
    pub max: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub replication: u64,
    pub n: u64,
    pub x: String,
    pub x_prime: String,
    pub coupled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingResult {
    pub mode: CouplingMode,
    pub n0: u64,
    pub epsilon: f64,
    pub replications: u64,
    pub master_seed: u64,
    pub n_max: u64,
    /// Lattice times at which statistics were recorded.
    pub times: Vec<u64>,
    /// Empirical `P(X_n != X'_n)`.
    pub non_coupling: Vec<Estimate>,
    /// Empirical TV between the law of `X_n` and the exact stationary law (finite chains).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_tv: Option<Vec<Estimate>>,
    /// Per-time state frequencies of `X_n` (finite chains).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginal_x: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginal_x_prime: Option<Vec<Vec<f64>>>,
    /// Mean of the drift function along `X_n`, when the model carries one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_lyapunov: Option<Vec<Estimate>>,
    /// Fraction of replications with an unequal pair inside the small set at each time.
    pub small_set_occupancy: Vec<f64>,
    /// Mean number of coin flips (unequal visits to the small set) before meeting or `n_max`.
    pub mean_coin_flips: f64,
    pub coupling_time: CouplingTimeSummary,
    #[serde(skip)]
    pub trajectories: Vec<TrajectoryRow>,
}

impl CouplingResult {
    /// CSV dump of the kept trajectories: `replication,n,x,x_prime,coupled`.
    pub fn trajectories_csv(&self) -> String {
        let mut out = String::from("replication,n,x,x_prime,coupled\n");
        for r in &self.trajectories {
            out.push_str(&format!("{},{},{},{},{}\n", r.replication, r.n, r.x, r.x_prime, r.coupled as u8));
        }
        out
    }
}

struct Outcome {
    coupling_time: Option<u64>,
    records: Vec<Record>,
    coin_flips: u64,
    trajectory: Vec<TrajectoryRow>,
}

#[derive(Clone, Copy)]
struct Record {
    x: usize,
    x_prime: usize,
    coupled: bool,
    in_cc: bool,
    v: Option<f64>,
}

/// Independent RNG for replication `r`.
pub fn replication_rng(master_seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(r);
    rng
}

fn run_one<M: CouplingModel>(
    model: &M,
    config: &CouplingConfig,
    mode: CouplingMode,
    rep: u64,
) -> Result<Outcome> {
    let n0 = model.n0();
    let mut rng = replication_rng(config.master_seed, rep);
    let mut x = model.sample_initial(&mut rng);
    let mut xp = model.sample_stationary(&mut rng);
    let blocks = config.n_max / n0;
    let record_blocks = config.record_horizon.unwrap_or(config.n_max).min(config.n_max) / n0;
    let keep = rep < config.trajectories;

    let mut out = Outcome {
        coupling_time: None,
        records: Vec::with_capacity(record_blocks as usize + 1),
        coin_flips: 0,
        trajectory: Vec::new(),
    };
    let mut coupled = x == xp;
    if coupled {
        out.coupling_time = Some(0);
    }
    for k in 0..=blocks {
        let in_c = |s: &M::State| mode == CouplingMode::Uniform || model.in_small_set(s);
        let in_cc = !coupled && in_c(&x) && in_c(&xp);
        if k <= record_blocks {
            out.records.push(Record {
                x: model.state_index(&x).unwrap_or(0),
                x_prime: model.state_index(&xp).unwrap_or(0),
                coupled,
                in_cc,
                v: model.lyapunov(&x),
            });
            if keep {
                out.trajectory.push(TrajectoryRow {
                    replication: rep,
                    n: k * n0,
                    x: model.describe(&x),
                    x_prime: model.describe(&xp),
                    coupled,
                });
            }
        } else if coupled {
            break;
        }
        if k == blocks {
            break;
        }
        if coupled {
            let z = model.step_block(&x, &mut rng);
            xp = z.clone();
            x = z;
        } else if in_cc {
            out.coin_flips += 1;
            if rng.random::<f64>() < model.epsilon() {
                let z = model.sample_overlap(&x, &xp, &mut rng);
                xp = z.clone();
                x = z;
            } else {
                let nx = model.sample_residual(&x, &xp, &mut rng)?;
                let nxp = model.sample_residual(&xp, &x, &mut rng)?;
                x = nx;
                xp = nxp;
            }
        } else {
            x = model.step_block(&x, &mut rng);
            xp = model.step_block(&xp, &mut rng);
        }
        if !coupled && x == xp {
            coupled = true;
            out.coupling_time = Some((k + 1) * n0);
        }
    }
    Ok(out)
}

fn run<M: CouplingModel>(model: &M, config: &CouplingConfig, mode: CouplingMode) -> Result<CouplingResult> {
    let n0 = model.n0();
    if config.replications == 0 {
        return Err(Error::OutOfRange("at least one replication is required".into()));
    }
    let eps = model.epsilon();
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidCertificate(format!("epsilon {eps} outside (0, 1]")));
    }
    let outcomes =
        try_map_indexed(config.replications, config.execution, |r| run_one(model, config, mode, r))?;
    Ok(aggregate(model, config, mode, outcomes, n0))
}

fn aggregate<M: CouplingModel>(
    model: &M,
    config: &CouplingConfig,
    mode: CouplingMode,
    outcomes: Vec<Outcome>,
    n0: u64,
) -> CouplingResult {
    let reps = outcomes.len() as f64;
    let t_len = outcomes[0].records.len();
    let times: Vec<u64> = (0..t_len as u64).map(|k| k * n0).collect();
    let states = model.state_count();

    let mut apart = vec![0u64; t_len];
    let mut in_cc = vec![0u64; t_len];
    let mut v_sum = vec![0.0; t_len];
    let mut v_sq = vec![0.0; t_len];
    let mut counts_x = states.map(|s| vec![vec![0u64; s]; t_len]);
    let mut counts_xp = states.map(|s| vec![vec![0u64; s]; t_len]);
    for o in &outcomes {
        for (t, rec) in o.records.iter().enumerate() {
            apart[t] += (!rec.coupled) as u64;
            in_cc[t] += rec.in_cc as u64;
            let v = rec.v.unwrap_or(0.0);
            v_sum[t] += v;
            v_sq[t] += v * v;
            if let Some(c) = counts_x.as_mut() {
                c[t][rec.x] += 1;
            }
            if let Some(c) = counts_xp.as_mut() {
                c[t][rec.x_prime] += 1;
            }
        }
    }

    let non_coupling = apart
        .iter()
        .map(|&a| {
            let p = a as f64 / reps;
            Estimate { value: p, se: (p * (1.0 - p) / reps).sqrt() }
        })
        .collect();
    let freqs = |counts: &Vec<Vec<u64>>| -> Vec<Vec<f64>> {
        counts.iter().map(|c| c.iter().map(|&k| k as f64 / reps).collect()).collect()
    };
    let has_lyapunov = outcomes.iter().all(|o| o.records.iter().all(|r| r.v.is_some()));
    let mean_lyapunov = has_lyapunov.then(|| {
        v_sum
            .iter()
            .zip(&v_sq)
            .map(|(&s, &q)| {
                let mean = s / reps;
                let var = (q / reps - mean * mean).max(0.0);
                Estimate { value: mean, se: (var / reps).sqrt() }
            })
            .collect()
    });

    let mut ctimes: Vec<u64> = outcomes.iter().filter_map(|o| o.coupling_time).collect();
    ctimes.sort_unstable();
    let q = |p: f64| -> Option<u64> {
        if ctimes.is_empty() {
            return None;
        }
        let idx = ((p * ctimes.len() as f64).ceil() as usize).clamp(1, ctimes.len()) - 1;
        Some(ctimes[idx])
    };
    let coupling_time = CouplingTimeSummary {
        coupled: ctimes.len() as u64,
        mean: (!ctimes.is_empty()).then(|| ctimes.iter().sum::<u64>() as f64 / ctimes.len() as f64),
        median: q(0.5),
        q90: q(0.9),
        q99: q(0.99),
        max: ctimes.last().copied(),
    };

    let empirical_tv = counts_x.as_ref().and_then(|c| {
        let reference = model.stationary_reference()?;
        Some(c.iter().map(|row| empirical_tv(row, &reference)).collect())
    });

    CouplingResult {
        mode,
        n0,
        epsilon: model.epsilon(),
        replications: config.replications,
        master_seed: config.master_seed,
        n_max: config.n_max,
        times,
        non_coupling,
        empirical_tv,
        marginal_x: counts_x.as_ref().map(freqs),
        marginal_x_prime: counts_xp.as_ref().map(freqs),
        mean_lyapunov,
        small_set_occupancy: in_cc.iter().map(|&c| c as f64 / reps).collect(),
        mean_coin_flips: outcomes.iter().map(|o| o.coin_flips as f64).sum::<f64>() / reps,
        coupling_time,
        trajectories: outcomes.into_iter().flat_map(|o| o.trajectory).collect(),
    }
}

/// Couple with coin flips for every unequal pair, as under a uniform minorization condition.
pub fn run_uniform_coupling<M: CouplingModel>(model: &M, config: &CouplingConfig) -> Result<CouplingResult> {
    run(model, config, CouplingMode::Uniform)
}

/// Couple with coin flips only inside the small set; elsewhere the copies move independently.
pub fn run_small_set_coupling<M: CouplingModel>(model: &M, config: &CouplingConfig) -> Result<CouplingResult> {
    run(model, config, CouplingMode::SmallSet)
}

/// Half the L1 distance between the empirical frequencies `counts / N` and
/// `reference`, with a delete-one jackknife standard error.
pub fn empirical_tv(counts: &[u64], reference: &[f64]) -> Estimate {
    assert_eq!(counts.len(), reference.len(), "dimension mismatch");
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    let tv_of = |skip: Option<usize>, denom: f64| -> f64 {
        0.5 * counts
            .iter()
            .zip(reference)
            .enumerate()
            .map(|(s, (&c, &r))| {
                let c = if Some(s) == skip { c as f64 - 1.0 } else { c as f64 };
                (c / denom - r).abs()
            })
            .sum::<f64>()
    };
    let value = tv_of(None, n);
    if total < 2 {
        return Estimate { value, se: f64::NAN };
    }
    // Deleting any one observation in state s gives the same leave-one-out value.
    let loo: Vec<(f64, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| (c as f64, tv_of(Some(s), n - 1.0)))
        .collect();
    let mean = loo.iter().map(|(c, t)| c * t).sum::<f64>() / n;
    let var = (n - 1.0) / n * loo.iter().map(|(c, t)| c * (t - mean).powi(2)).sum::<f64>();
    Estimate { value, se: var.sqrt() }
}
