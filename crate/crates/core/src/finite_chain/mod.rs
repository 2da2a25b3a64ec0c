//! Finite-state Markov chains with exact rational transition probabilities.
//!
//! Everything here except the eigen analysis runs in exact arithmetic. Row sums
//! are checked with no tolerance, stationary distributions come out of exact
//! Gaussian elimination, and minorization constants are exact rationals.

mod eigen;
mod minorization;

pub use eigen::{eigen_bound, eigen_bound_with_cap, EigenBound, EigenMode, DEFAULT_CONDITION_CAP};
pub use minorization::{minorization_pseudo, minorization_uniform, CertVariant, MinorizationCert};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::report::{BoundReport, CurvePoint};

/// Exact row-stochastic matrix. Rows are "from" states, columns "to" states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticMatrix {
    rows: Vec<Vec<Rational>>,
}

impl StochasticMatrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotStochastic("empty matrix".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            if let Some(j) = row.iter().position(|p| p.is_negative()) {
                return Err(Error::NotStochastic(format!("entry ({i}, {j}) is negative")));
            }
            let sum: Rational = row.iter().sum();
            if sum != rational::one() {
                return Err(Error::NotStochastic(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { rational::one() } else { rational::zero() }).collect())
            .collect();
        Self { rows }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.iter().map(rational::to_f64).collect()).collect()
    }

    /// Exact product `self * other`. Both factors are stochastic, so the result is too.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.size();
        assert_eq!(n, other.size(), "matrix sizes differ");
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut acc = rational::zero();
                        for k in 0..n {
                            let a = &self.rows[i][k];
                            if !a.is_zero() {
                                acc += a * &other.rows[k][j];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn to_file_form(&self) -> MatrixFile {
        MatrixFile {
            size: self.size(),
            rows: self.rows.iter().map(|r| r.iter().map(rational::to_string).collect()).collect(),
        }
    }

    pub fn from_file_form(file: &MatrixFile) -> Result<Self> {
        if file.rows.len() != file.size {
            return Err(Error::DimensionMismatch { expected: file.size, got: file.rows.len() });
        }
        let rows = file
            .rows
            .iter()
            .map(|r| r.iter().map(|s| rational::parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }
}

/// JSON form of a matrix: `{"size": n, "rows": [["1/4", "0", ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub size: usize,
    pub rows: Vec<Vec<String>>,
}

/// Exact probability distribution over `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbVector(Vec<Rational>);

impl ProbVector {
    pub fn new(entries: Vec<Rational>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::NotProbability("empty vector".into()));
        }
        if let Some(i) = entries.iter().position(|p| p.is_negative()) {
            return Err(Error::NotProbability(format!("entry {i} is negative")));
        }
        let sum: Rational = entries.iter().sum();
        if sum != rational::one() {
            return Err(Error::NotProbability(format!("entries sum to {sum}")));
        }
        Ok(Self(entries))
    }

    pub fn point_mass(len: usize, state: usize) -> Self {
        assert!(state < len, "state {state} out of range for {len} states");
        let mut v = vec![rational::zero(); len];
        v[state] = rational::one();
        Self(v)
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![rational::ratio(1, len as i64); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational::to_f64).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(rational::to_string).collect()
    }
}

/// Lazy random walk on a `rows x cols` grid: from each cell, stay put or move to
/// any orthogonal neighbour, all with equal probability. Cells are numbered
/// row-major, top to bottom and left to right.
pub fn build_grid_walk(rows: usize, cols: usize) -> Result<StochasticMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::OutOfRange(format!("grid must be at least 1x1, got {rows}x{cols}")));
    }
    let n = rows * cols;
    let mut m = vec![vec![rational::zero(); n]; n];
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            let mut targets = vec![i];
            if r > 0 {
                targets.push(i - cols);
            }
            if r + 1 < rows {
                targets.push(i + cols);
            }
            if c > 0 {
                targets.push(i - 1);
            }
            if c + 1 < cols {
                targets.push(i + 1);
            }
            let p = rational::ratio(1, targets.len() as i64);
            for j in targets {
                m[i][j] = p.clone();
            }
        }
    }
    StochasticMatrix::new(m)
}

/// Exact n-step transition matrix by repeated squaring.
pub fn matrix_power(p: &StochasticMatrix, n: u64) -> StochasticMatrix {
    let mut result = StochasticMatrix::identity(p.size());
    let mut base = p.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base);
        }
    }
    result
}

fn step(mu: &[Rational], p: &StochasticMatrix) -> Vec<Rational> {
    let n = p.size();
    let mut out = vec![rational::zero(); n];
    for (i, mi) in mu.iter().enumerate() {
        if mi.is_zero() {
            continue;
        }
        for (j, pij) in p.row(i).iter().enumerate() {
            if !pij.is_zero() {
                out[j] += mi * pij;
            }
        }
    }
    out
}

/// Distribution after `n` steps from `mu0`, as the row vector `mu0 * P^n`.
pub fn evolve(mu0: &ProbVector, p: &StochasticMatrix, n: u64) -> Result<ProbVector> {
    if mu0.len() != p.size() {
        return Err(Error::DimensionMismatch { expected: p.size(), got: mu0.len() });
    }
    let mut mu = mu0.0.clone();
    for _ in 0..n {
        mu = step(&mu, p);
    }
    Ok(ProbVector(mu))
}

/// Unique stationary distribution, solved exactly from `(P^T - I) pi = 0` with
/// `sum(pi) = 1`. Fails when the unit eigenspace has dimension above one.
pub fn stationary(p: &StochasticMatrix) -> Result<ProbVector> {
    let n = p.size();
    // a = P^T - I
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = p.get(j, i).clone();
                    if i == j {
                        v - rational::one()
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();

    // Reduced row echelon form.
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == n {
            break;
        }
        let Some(sel) = (row..n).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, sel);
        let inv = rational::one() / a[row][col].clone();
        for v in a[row].iter_mut() {
            *v *= &inv;
        }
        let pivot = a[row].clone();
        for (r, target) in a.iter_mut().enumerate() {
            if r != row && !target[col].is_zero() {
                let f = target[col].clone();
                for (x, p) in target[col..n].iter_mut().zip(&pivot[col..n]) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }

    let nullity = n - pivots.len();
    if nullity != 1 {
        return Err(Error::NonUniqueStationary { dim: nullity });
    }
    let free = (0..n).find(|c| !pivots.contains(c)).expect("one free column");
    let mut pi = vec![rational::zero(); n];
    pi[free] = rational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        pi[pc] = -a[r][free].clone();
    }
    let total: Rational = pi.iter().sum();
    for v in pi.iter_mut() {
        *v /= &total;
    }
    ProbVector::new(pi)
}

/// Total variation distance, computed as half the L1 distance.
pub fn tv_distance(mu: &ProbVector, nu: &ProbVector) -> Result<Rational> {
    if mu.len() != nu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), got: nu.len() });
    }
    let l1: Rational = mu.0.iter().zip(&nu.0).map(|(a, b)| rational::abs(&(a - b))).sum();
    Ok(l1 / rational::int(2))
}

/// Floating-point counterpart of [`tv_distance`].
pub fn tv_distance_f64(mu: &[f64], nu: &[f64]) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), got: nu.len() });
    }
    Ok(0.5 * mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Exact `||L(X_n) - pi||_TV` for `n = 0..=n_max`.
pub fn exact_tv_values(mu0: &ProbVector, p: &StochasticMatrix, n_max: u64) -> Result<Vec<Rational>> {
    let pi = stationary(p)?;
    if mu0.len() != p.size() {
        return Err(Error::DimensionMismatch { expected: p.size(), got: mu0.len() });
    }
    let mut out = Vec::with_capacity(n_max as usize + 1);
    let mut mu = mu0.clone();
    out.push(tv_distance(&mu, &pi)?);
    for _ in 0..n_max {
        mu = ProbVector(step(&mu.0, p));
        out.push(tv_distance(&mu, &pi)?);
    }
    Ok(out)
}

/// [`exact_tv_values`] packaged as a curve report, with exact values kept as strings.
pub fn exact_tv_curve(mu0: &ProbVector, p: &StochasticMatrix, n_max: u64) -> Result<BoundReport> {
    let values = exact_tv_values(mu0, p, n_max)?;
    let mut report = BoundReport::new("exact_tv");
    report.curve = values
        .iter()
        .enumerate()
        .map(|(n, v)| CurvePoint::exact(n as u64, rational::to_f64(v), rational::to_string(v)))
        .collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn grid() -> StochasticMatrix {
        build_grid_walk(3, 3).unwrap()
    }

    #[test]
    fn grid_rows_match_bunny_walk() {
        let p = grid();
        let quarter = ratio(1, 4);
        // G2 is state 1.
        for j in [0, 1, 2, 4] {
            assert_eq!(p.get(1, j), &quarter);
        }
        for j in [3, 5, 6, 7, 8] {
            assert!(p.get(1, j).is_zero());
        }
        assert_eq!(p.get(4, 4), &ratio(1, 5));
        assert_eq!(p.get(0, 0), &ratio(1, 3));
    }

    #[test]
    fn one_by_one_grid() {
        let p = build_grid_walk(1, 1).unwrap();
        assert_eq!(p, StochasticMatrix::identity(1));
        assert!(build_grid_walk(0, 3).is_err());
    }

    #[test]
    fn two_step_center_to_corner() {
        let p2 = matrix_power(&grid(), 2);
        assert_eq!(p2.get(4, 6), &ratio(1, 10));
        let mu2 = evolve(&ProbVector::point_mass(9, 4), &grid(), 2).unwrap();
        assert_eq!(mu2.entries()[6], ratio(1, 10));
    }

    #[test]
    fn power_zero_is_identity() {
        assert_eq!(matrix_power(&grid(), 0), StochasticMatrix::identity(9));
    }

    #[test]
    fn two_step_matches_reference_multiply() {
        let p = grid();
        let p2 = matrix_power(&p, 2);
        // Reference: triple loop on the raw rows, no shared helpers.
        for i in 0..9 {
            for j in 0..9 {
                let mut acc = rational::zero();
                for k in 0..9 {
                    acc += p.rows()[i][k].clone() * p.rows()[k][j].clone();
                }
                assert_eq!(p2.get(i, j), &acc);
            }
        }
        let col_min = (0..9).map(|i| p2.get(i, 4).clone()).min().unwrap();
        assert_eq!(col_min, ratio(9, 80));
    }

    #[test]
    fn evolve_three_steps_is_row_of_cube() {
        let p = grid();
        let mu3 = evolve(&ProbVector::point_mass(9, 4), &p, 3).unwrap();
        assert_eq!(mu3.entries(), matrix_power(&p, 3).row(4));
    }

    #[test]
    fn evolve_dimension_mismatch() {
        assert!(matches!(
            evolve(&ProbVector::point_mass(4, 0), &grid(), 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grid_stationary_exact() {
        let pi = stationary(&grid()).unwrap();
        let expect = [
            ratio(1, 11),
            ratio(4, 33),
            ratio(1, 11),
            ratio(4, 33),
            ratio(5, 33),
            ratio(4, 33),
            ratio(1, 11),
            ratio(4, 33),
            ratio(1, 11),
        ];
        assert_eq!(pi.entries(), &expect);
        assert_eq!(evolve(&pi, &grid(), 7).unwrap(), pi);
    }

    #[test]
    fn stationary_rejects_reducible() {
        let err = stationary(&StochasticMatrix::identity(2)).unwrap_err();
        assert_eq!(err, Error::NonUniqueStationary { dim: 2 });
    }

    #[test]
    fn stationary_two_by_two_grid_is_uniform() {
        let pi = stationary(&build_grid_walk(2, 2).unwrap()).unwrap();
        assert_eq!(pi, ProbVector::uniform(4));
    }

    #[test]
    fn tv_basic_cases() {
        let a = ProbVector::point_mass(3, 0);
        let b = ProbVector::point_mass(3, 1);
        assert_eq!(tv_distance(&a, &a).unwrap(), rational::zero());
        assert_eq!(tv_distance(&a, &b).unwrap(), rational::one());
        assert!(tv_distance(&a, &ProbVector::point_mass(2, 0)).is_err());
    }

    #[test]
    fn tv_curve_starts_at_28_over_33() {
        let values = exact_tv_values(&ProbVector::point_mass(9, 4), &grid(), 3).unwrap();
        assert_eq!(values[0], ratio(28, 33));
        let pi = stationary(&grid()).unwrap();
        let flat = exact_tv_values(&pi, &grid(), 5).unwrap();
        assert!(flat.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn matrix_file_round_trip() {
        let p = grid();
        let file = p.to_file_form();
        assert_eq!(file.rows[1][0], "1/4");
        assert_eq!(file.rows[1][3], "0");
        assert_eq!(StochasticMatrix::from_file_form(&file).unwrap(), p);
    }

    #[test]
    fn rejects_non_stochastic() {
        let rows = vec![vec![ratio(1, 2), ratio(1, 3)], vec![ratio(0, 1), ratio(1, 1)]];
        assert!(matches!(StochasticMatrix::new(rows), Err(Error::NotStochastic(_))));
        let rows = vec![vec![ratio(3, 2), ratio(-1, 2)], vec![ratio(0, 1), ratio(1, 1)]];
        assert!(matches!(StochasticMatrix::new(rows), Err(Error::NotStochastic(_))));
    }
}
