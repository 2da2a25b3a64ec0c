//! Spectral bound for a single state of a finite chain.
//!
//! The chain's left eigenvectors are computed in complex floating point, the
//! initial law is expanded in that basis by solving a linear system (the basis
//! is not orthogonal for non-reversible chains), and the triangle inequality
//! turns the expansion into `|mu_n(t) - pi(t)| <= coefficient * rate^n`.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use super::{ProbVector, StochasticMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_CONDITION_CAP: f64 = 1e8;

/// Eigenvalues closer than this are treated as one repeated eigenvalue.
const CLUSTER_TOL: f64 = 1e-6;
/// Singular values of `P^T - lambda I` below this count toward the null space.
const NULL_TOL: f64 = 1e-9;
/// Target weights below this do not contribute to the bound.
const WEIGHT_FLOOR: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-9;

/// One distinct eigenvalue with the projection of the initial law onto its eigenspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenMode {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    /// Euclidean norm of the projection `sum c_i v_i` over this eigenspace,
    /// with each `v_i` scaled to unit norm.
    pub coefficient_norm: f64,
    /// Value of the projection at the target state.
    pub target_weight_re: f64,
    pub target_weight_im: f64,
}

impl EigenMode {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn target_weight(&self) -> f64 {
        self.target_weight_re.hypot(self.target_weight_im)
    }

    fn is_unit(&self) -> bool {
        (self.re - 1.0).abs() < UNIT_TOL && self.im.abs() < UNIT_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenBound {
    pub target_state: usize,
    pub coefficient: f64,
    pub rate: f64,
    pub modes: Vec<EigenMode>,
    pub stationary: Vec<f64>,
    pub condition_number: f64,
}

impl EigenBound {
    pub fn value(&self, n: u64) -> f64 {
        if self.coefficient == 0.0 {
            return 0.0;
        }
        self.coefficient * self.rate.powf(n as f64)
    }

    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        self.modes
            .iter()
            .flat_map(|m| std::iter::repeat_n((m.re, m.im), m.multiplicity))
            .collect()
    }
}

pub fn eigen_bound(p: &StochasticMatrix, mu0: &ProbVector, target: usize) -> Result<EigenBound> {
    eigen_bound_with_cap(p, mu0, target, DEFAULT_CONDITION_CAP)
}

pub fn eigen_bound_with_cap(
    p: &StochasticMatrix,
    mu0: &ProbVector,
    target: usize,
    condition_cap: f64,
) -> Result<EigenBound> {
    let n = p.size();
    if mu0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: mu0.len() });
    }
    if target >= n {
        return Err(Error::OutOfRange(format!("target state {target} not below {n}")));
    }
    let pf = p.to_f64();
    let pt = DMatrix::from_fn(n, n, |i, j| pf[j][i]);
    let eigenvalues = pt.clone().complex_eigenvalues();

    let unit_count = eigenvalues.iter().filter(|l| (l.norm() - 1.0).abs() < UNIT_TOL).count();
    if unit_count > 1 {
        return Err(Error::MultipleUnitEigenvalues { count: unit_count });
    }

    // Group numerically repeated eigenvalues.
    let mut clusters: Vec<(Complex<f64>, usize)> = Vec::new();
    for l in eigenvalues.iter() {
        match clusters.iter_mut().find(|(c, m)| (c / *m as f64 - l).norm() < CLUSTER_TOL) {
            Some((c, m)) => {
                *c += l;
                *m += 1;
            }
            None => clusters.push((*l, 1)),
        }
    }
    let mut clusters: Vec<(Complex<f64>, usize)> =
        clusters.into_iter().map(|(c, m)| (c / m as f64, m)).collect();
    clusters.sort_by(|a, b| b.0.norm().total_cmp(&a.0.norm()).then(b.0.re.total_cmp(&a.0.re)));

    // Left eigenvectors of P = null vectors of P^T - lambda I, one row of `basis` each.
    let ptc = pt.map(|v| Complex::new(v, 0.0));
    let mut basis: Vec<DVector<Complex<f64>>> = Vec::with_capacity(n);
    let mut owner: Vec<usize> = Vec::with_capacity(n);
    for (k, (lambda, mult)) in clusters.iter().enumerate() {
        let shifted = &ptc - DMatrix::identity(n, n) * *lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let scale = svd.singular_values.max().max(1.0);
        let geometric = order
            .iter()
            .take(*mult)
            .filter(|&&i| svd.singular_values[i] <= NULL_TOL * scale)
            .count();
        if geometric < *mult {
            return Err(Error::NotDiagonalizable {
                re: lambda.re,
                im: lambda.im,
                geometric,
                algebraic: *mult,
            });
        }
        for &i in order.iter().take(*mult) {
            let v: DVector<Complex<f64>> = v_t.row(i).transpose().map(|z| z.conj());
            basis.push(v.normalize());
            owner.push(k);
        }
    }

    // Rows of `vm` are the left eigenvectors.
    let vm = DMatrix::from_fn(n, n, |i, j| basis[i][j]);
    let sv = vm.clone().singular_values();
    let condition_number = sv.max() / sv.min();
    if !condition_number.is_finite() || condition_number > condition_cap {
        return Err(Error::IllConditioned { cond: condition_number, cap: condition_cap });
    }

    // mu0 = c^T V  <=>  V^T c = mu0
    let rhs = DVector::from_iterator(n, mu0.to_f64().into_iter().map(|v| Complex::new(v, 0.0)));
    let coeffs = vm
        .transpose()
        .lu()
        .solve(&rhs)
        .ok_or(Error::IllConditioned { cond: f64::INFINITY, cap: condition_cap })?;

    let mut modes = Vec::with_capacity(clusters.len());
    let mut stationary = vec![0.0; n];
    for (k, (lambda, mult)) in clusters.iter().enumerate() {
        let mut projection = DVector::<Complex<f64>>::zeros(n);
        for (i, _) in owner.iter().enumerate().filter(|(_, &o)| o == k) {
            projection += &basis[i] * coeffs[i];
        }
        let w = projection[target];
        modes.push(EigenMode {
            re: lambda.re,
            im: lambda.im,
            multiplicity: *mult,
            coefficient_norm: projection.norm(),
            target_weight_re: w.re,
            target_weight_im: w.im,
        });
        if (lambda.re - 1.0).abs() < UNIT_TOL && lambda.im.abs() < UNIT_TOL {
            let v = &basis[owner.iter().position(|&o| o == k).expect("cluster has a vector")];
            let total: Complex<f64> = v.iter().sum();
            for (s, z) in stationary.iter_mut().zip(v.iter()) {
                *s = (z / total).re;
            }
        }
    }

    let mut coefficient = 0.0;
    let mut rate: f64 = 0.0;
    for m in modes.iter().filter(|m| !m.is_unit()) {
        let w = m.target_weight();
        if w >= WEIGHT_FLOOR {
            coefficient += w;
            rate = rate.max(m.modulus());
        }
    }

    Ok(EigenBound { target_state: target, coefficient, rate, modes, stationary, condition_number })
}
