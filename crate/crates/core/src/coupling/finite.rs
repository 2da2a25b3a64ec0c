use num_traits::Signed;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_chacha::ChaCha8Rng;

use super::CouplingModel;
use crate::error::{Error, Result};
use crate::finite_chain::{matrix_power, stationary, CertVariant, MinorizationCert, ProbVector, StochasticMatrix};
use crate::rational::{self, Rational};

/// Residual draws are unavailable when `eps = 1`; Tails never occurs then.
struct PairTables {
    overlap: WeightedIndex<f64>,
    /// Residual law of the first and second state of the pair.
    residual: Option<(WeightedIndex<f64>, WeightedIndex<f64>)>,
}

/// Coupling of a finite chain under a uniform or pseudo minorization certificate.
///
/// All sampling tables are built from exact rational arithmetic, so a
/// certificate that overstates `eps` is rejected at construction.
pub struct FiniteCoupling {
    size: usize,
    n0: u64,
    epsilon: f64,
    in_c: Vec<bool>,
    block: Vec<WeightedIndex<f64>>,
    initial: WeightedIndex<f64>,
    stationary: WeightedIndex<f64>,
    stationary_f64: Vec<f64>,
    /// Uniform certificates: one table for every state, indexed `[i]`.
    /// Pseudo certificates: one table per unordered pair, indexed by `pair_slot`.
    uniform: Option<UniformTables>,
    pairs: Vec<Option<PairTables>>,
}

/// Overlap measure `nu` and, per state, its residual table (absent when empty).
type UniformTables = (WeightedIndex<f64>, Vec<Option<WeightedIndex<f64>>>);

fn weighted(w: &[Rational]) -> Result<WeightedIndex<f64>> {
    let f: Vec<f64> = w.iter().map(rational::to_f64).collect();
    WeightedIndex::new(f).map_err(|e| Error::InvalidCertificate(format!("unusable weights: {e}")))
}

/// `(row - eps nu) / (1 - eps)`, rejecting entries below zero.
fn residual(row: &[Rational], eps: &Rational, nu: &[Rational], state: usize) -> Result<Vec<Rational>> {
    let scale = rational::one() - eps;
    row.iter()
        .zip(nu)
        .map(|(p, v)| {
            let r = (p - eps * v) / &scale;
            if r.is_negative() {
                Err(Error::InvalidCertificate(format!(
                    "residual mass {} at state {} is negative",
                    rational::to_string(&r),
                    state + 1
                )))
            } else {
                Ok(r)
            }
        })
        .collect()
}

impl FiniteCoupling {
    pub fn new(p: &StochasticMatrix, mu0: &ProbVector, cert: &MinorizationCert) -> Result<Self> {
        let size = p.size();
        if mu0.len() != size {
            return Err(Error::DimensionMismatch { expected: size, got: mu0.len() });
        }
        if cert.n0 == 0 {
            return Err(Error::InvalidCertificate("n0 must be at least 1".into()));
        }
        if cert.epsilon <= rational::zero() || cert.epsilon > rational::one() {
            return Err(Error::InvalidCertificate(format!(
                "epsilon {} outside (0, 1]",
                rational::to_string(&cert.epsilon)
            )));
        }
        if let Some(&bad) = cert.small_set.iter().find(|&&i| i >= size) {
            return Err(Error::InvalidCertificate(format!("small-set state {} out of range", bad + 1)));
        }
        let pn = matrix_power(p, cert.n0);
        let pi = stationary(p)?;
        let eps = &cert.epsilon;
        let tails = eps < &rational::one();
        let mut in_c = vec![false; size];
        for &i in &cert.small_set {
            in_c[i] = true;
        }

        let mut uniform = None;
        let mut pairs = Vec::new();
        match cert.variant {
            CertVariant::Uniform => {
                let nu = cert
                    .nu
                    .as_ref()
                    .ok_or_else(|| Error::InvalidCertificate("uniform certificate without nu".into()))?;
                if nu.len() != size {
                    return Err(Error::DimensionMismatch { expected: size, got: nu.len() });
                }
                let res = (0..size)
                    .map(|i| {
                        if in_c[i] && tails {
                            weighted(&residual(pn.row(i), eps, nu.entries(), i)?).map(Some)
                        } else {
                            Ok(None)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                uniform = Some((weighted(nu.entries())?, res));
            }
            CertVariant::Pseudo => {
                pairs = (0..size * size).map(|_| None).collect();
                for &i in &cert.small_set {
                    for &j in &cert.small_set {
                        if i >= j {
                            continue;
                        }
                        let nu = cert.pair_measure(&pn, i, j);
                        let residual = if tails {
                            Some((
                                weighted(&residual(pn.row(i), eps, nu.entries(), i)?)?,
                                weighted(&residual(pn.row(j), eps, nu.entries(), j)?)?,
                            ))
                        } else {
                            None
                        };
                        pairs[i * size + j] = Some(PairTables { overlap: weighted(nu.entries())?, residual });
                    }
                }
            }
        }

        Ok(Self {
            size,
            n0: cert.n0,
            epsilon: cert.epsilon_f64(),
            in_c,
            block: pn.rows().iter().map(|r| weighted(r)).collect::<Result<_>>()?,
            initial: weighted(mu0.entries())?,
            stationary: weighted(pi.entries())?,
            stationary_f64: pi.to_f64(),
            uniform,
            pairs,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn pair(&self, x: usize, y: usize) -> &PairTables {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        self.pairs[a * self.size + b].as_ref().expect("pair inside the small set")
    }
}

impl CouplingModel for FiniteCoupling {
    type State = usize;

    fn n0(&self) -> u64 {
        self.n0
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn in_small_set(&self, x: &usize) -> bool {
        self.in_c[*x]
    }

    fn step_block(&self, x: &usize, rng: &mut ChaCha8Rng) -> usize {
        self.block[*x].sample(rng)
    }

    fn sample_overlap(&self, x: &usize, y: &usize, rng: &mut ChaCha8Rng) -> usize {
        match &self.uniform {
            Some((nu, _)) => nu.sample(rng),
            None => self.pair(*x, *y).overlap.sample(rng),
        }
    }

    fn sample_residual(&self, x: &usize, y: &usize, rng: &mut ChaCha8Rng) -> Result<usize> {
        let table = match &self.uniform {
            Some((_, res)) => res[*x].as_ref(),
            None => self.pair(*x, *y).residual.as_ref().map(|(a, b)| if x < y { a } else { b }),
        };
        table
            .map(|t| t.sample(rng))
            .ok_or_else(|| Error::InvalidCertificate(format!("no residual law for state {}", x + 1)))
    }

    fn sample_initial(&self, rng: &mut ChaCha8Rng) -> usize {
        self.initial.sample(rng)
    }

    fn sample_stationary(&self, rng: &mut ChaCha8Rng) -> usize {
        self.stationary.sample(rng)
    }

    fn state_index(&self, x: &usize) -> Option<usize> {
        Some(*x)
    }

    fn state_count(&self) -> Option<usize> {
        Some(self.size)
    }

    fn stationary_reference(&self) -> Option<Vec<f64>> {
        Some(self.stationary_f64.clone())
    }

    /// States are labelled from 1.
    fn describe(&self, x: &usize) -> String {
        (x + 1).to_string()
    }
}
