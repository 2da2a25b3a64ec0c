use num_traits::Zero;
use serde::Serialize;

use super::{matrix_power, ProbVector, StochasticMatrix};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertVariant {
    Uniform,
    Pseudo,
}

/// An `n0`-step minorization certificate on a finite chain.
///
/// For the uniform variant `nu` is the common overlap measure. For the pseudo
/// variant the overlap measure depends on the pair of starting states and is
/// rebuilt on demand by [`MinorizationCert::pair_measure`].
#[derive(Debug, Clone, PartialEq)]
pub struct MinorizationCert {
    pub variant: CertVariant,
    pub small_set: Vec<usize>,
    pub n0: u64,
    pub epsilon: Rational,
    pub nu: Option<ProbVector>,
    /// Pairs `(i, j)`, `i < j`, attaining the pseudo minimum, in lexicographic order.
    pub argmin_pairs: Vec<(usize, usize)>,
}

fn overlap(pn: &StochasticMatrix, i: usize, j: usize) -> Vec<Rational> {
    pn.row(i).iter().zip(pn.row(j)).map(|(a, b)| a.min(b).clone()).collect()
}

impl MinorizationCert {
    pub fn epsilon_f64(&self) -> f64 {
        rational::to_f64(&self.epsilon)
    }

    /// Overlap measure for the pair `(i, j)`: `nu` itself for uniform certs,
    /// the normalized pointwise minimum of rows `i` and `j` of `P^n0` for pseudo.
    pub fn pair_measure(&self, pn0: &StochasticMatrix, i: usize, j: usize) -> ProbVector {
        match self.variant {
            CertVariant::Uniform => self.nu.clone().expect("uniform cert carries nu"),
            CertVariant::Pseudo => {
                let m = overlap(pn0, i, j);
                let total: Rational = m.iter().sum();
                ProbVector(m.into_iter().map(|v| v / &total).collect())
            }
        }
    }

    /// Exact check of the minorization inequalities against `P`.
    pub fn verify(&self, p: &StochasticMatrix) -> bool {
        if self.epsilon <= rational::zero() {
            return false;
        }
        let pn = matrix_power(p, self.n0);
        let n = p.size();
        match self.variant {
            CertVariant::Uniform => {
                let Some(nu) = &self.nu else { return false };
                self.small_set.iter().all(|&i| {
                    (0..n).all(|j| pn.get(i, j) >= &(&self.epsilon * &nu.entries()[j]))
                })
            }
            CertVariant::Pseudo => self.small_set.iter().all(|&i| {
                self.small_set.iter().all(|&j| {
                    let nu = self.pair_measure(&pn, i, j);
                    (0..n).all(|z| {
                        let floor = &self.epsilon * &nu.entries()[z];
                        pn.get(i, z) >= &floor && pn.get(j, z) >= &floor
                    })
                })
            }),
        }
    }
}

/// Column-minimum minorization of `P^n0`: `eps = sum_j min_i (P^n0)_ij`.
/// Returns `None` when every column of `P^n0` has a zero.
pub fn minorization_uniform(p: &StochasticMatrix, n0: u64) -> Option<MinorizationCert> {
    assert!(n0 >= 1, "n0 must be positive");
    let pn = matrix_power(p, n0);
    let n = p.size();
    let col_min: Vec<Rational> =
        (0..n).map(|j| (0..n).map(|i| pn.get(i, j)).min().expect("nonempty").clone()).collect();
    let epsilon: Rational = col_min.iter().sum();
    if epsilon.is_zero() {
        return None;
    }
    let nu = ProbVector(col_min.into_iter().map(|m| m / &epsilon).collect());
    Some(MinorizationCert {
        variant: CertVariant::Uniform,
        small_set: (0..n).collect(),
        n0,
        epsilon,
        nu: Some(nu),
        argmin_pairs: Vec::new(),
    })
}

/// Pairwise (pseudo) minorization of `P^n0`:
/// `eps = min_{i<j} sum_z min((P^n0)_iz, (P^n0)_jz)`.
pub fn minorization_pseudo(p: &StochasticMatrix, n0: u64) -> Option<MinorizationCert> {
    assert!(n0 >= 1, "n0 must be positive");
    let pn = matrix_power(p, n0);
    let n = p.size();
    let mut best: Option<Rational> = None;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let s: Rational = overlap(&pn, i, j).iter().sum();
            match &best {
                Some(b) if &s > b => {}
                Some(b) if &s == b => pairs.push((i, j)),
                _ => {
                    best = Some(s);
                    pairs = vec![(i, j)];
                }
            }
        }
    }
    let epsilon = match best {
        Some(e) => e,
        // A single state overlaps itself completely.
        None => {
            pairs = vec![(0, 0)];
            rational::one()
        }
    };
    if epsilon.is_zero() {
        return None;
    }
    Some(MinorizationCert {
        variant: CertVariant::Pseudo,
        small_set: (0..n).collect(),
        n0,
        epsilon,
        nu: None,
        argmin_pairs: pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_chain::build_grid_walk;
    use crate::rational::ratio;

    #[test]
    fn grid_has_no_one_step_uniform_minorization() {
        assert!(minorization_uniform(&build_grid_walk(3, 3).unwrap(), 1).is_none());
    }

    #[test]
    fn grid_two_step_uniform_is_nine_eightieths() {
        let p = build_grid_walk(3, 3).unwrap();
        let cert = minorization_uniform(&p, 2).unwrap();
        assert_eq!(cert.epsilon, ratio(9, 80));
        assert_eq!(cert.nu.as_ref().unwrap(), &ProbVector::point_mass(9, 4));
        assert!(cert.verify(&p));
    }

    #[test]
    fn trivial_chain() {
        let p = build_grid_walk(1, 1).unwrap();
        let cert = minorization_uniform(&p, 1).unwrap();
        assert_eq!(cert.epsilon, rational::one());
        assert_eq!(cert.nu.unwrap(), ProbVector::point_mass(1, 0));
        assert_eq!(minorization_pseudo(&p, 1).unwrap().epsilon, rational::one());
    }

    #[test]
    fn grid_two_step_pseudo_is_one_third() {
        let p = build_grid_walk(3, 3).unwrap();
        let cert = minorization_pseudo(&p, 2).unwrap();
        assert_eq!(cert.epsilon, ratio(1, 3));
        assert_eq!(cert.argmin_pairs, vec![(0, 8), (2, 6)]);
        let pn = matrix_power(&p, 2);
        let m = overlap(&pn, 2, 6);
        assert_eq!(m[0], ratio(1, 12));
        assert_eq!(m[4], ratio(1, 6));
        assert_eq!(m[8], ratio(1, 12));
        assert!(m.iter().enumerate().all(|(z, v)| [0, 4, 8].contains(&z) || v.is_zero()));
        assert!(cert.verify(&p));
    }

    #[test]
    fn disjoint_rows_have_no_pseudo_minorization() {
        assert!(minorization_pseudo(&StochasticMatrix::identity(2), 1).is_none());
    }

    #[test]
    fn inflated_epsilon_fails_verification() {
        let p = build_grid_walk(3, 3).unwrap();
        let mut cert = minorization_uniform(&p, 2).unwrap();
        cert.epsilon = ratio(1, 8);
        assert!(!cert.verify(&p));
        let mut cert = minorization_pseudo(&p, 2).unwrap();
        cert.epsilon = ratio(1, 2);
        assert!(!cert.verify(&p));
    }
}
