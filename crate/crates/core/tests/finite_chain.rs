use mcb_core::bounds::{steps_to_threshold, minorization_bound, DEFAULT_STEP_CAP};
use mcb_core::finite_chain::{
    build_grid_walk, eigen_bound, evolve, exact_tv_values, matrix_power, minorization_pseudo, minorization_uniform,
    stationary, tv_distance, ProbVector, StochasticMatrix,
};
use mcb_core::rational::{self, Rational};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

/// Rows of small nonnegative integer weights, each row with positive total.
fn weights(size: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(0u32..5, size), size)
        .prop_map(|mut rows| {
            for (i, r) in rows.iter_mut().enumerate() {
                if r.iter().all(|&w| w == 0) {
                    r[i] = 1;
                }
            }
            rows
        })
}

fn normalize(w: &[u32]) -> Vec<Rational> {
    let total: u32 = w.iter().sum();
    w.iter().map(|&v| rational::ratio(v as i64, total as i64)).collect()
}

fn chain() -> impl Strategy<Value = StochasticMatrix> {
    (2usize..6)
        .prop_flat_map(weights)
        .prop_map(|rows| StochasticMatrix::new(rows.iter().map(|r| normalize(r)).collect()).unwrap())
}

fn vector(size: usize) -> impl Strategy<Value = ProbVector> {
    prop::collection::vec(0u32..6, size).prop_map(move |mut w| {
        if w.iter().all(|&v| v == 0) {
            w[0] = 1;
        }
        ProbVector::new(normalize(&w)).unwrap()
    })
}

fn row_sums_are_one(m: &StochasticMatrix) -> bool {
    m.rows().iter().all(|r| r.iter().sum::<Rational>() == rational::one() && r.iter().all(|v| !v.is_negative()))
}

/// `max_A |mu(A) - nu(A)|` over all `2^n` events.
fn tv_by_events(mu: &[Rational], nu: &[Rational]) -> Rational {
    let n = mu.len();
    let mut best = Rational::zero();
    for mask in 0u32..(1 << n) {
        let mut diff = Rational::zero();
        for s in 0..n {
            if mask & (1 << s) != 0 {
                diff += &mu[s] - &nu[s];
            }
        }
        if diff.abs() > best {
            best = diff.abs();
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn powers_stay_stochastic(p in chain(), n in 0u64..7) {
        prop_assert!(row_sums_are_one(&matrix_power(&p, n)));
    }

    #[test]
    fn chapman_kolmogorov(p in chain(), a in 0u64..5, b in 0u64..5) {
        prop_assert_eq!(matrix_power(&p, a + b), matrix_power(&p, a).mul(&matrix_power(&p, b)));
    }

    #[test]
    fn pseudo_epsilon_dominates_uniform(p in chain(), n0 in 1u64..4) {
        if let Some(u) = minorization_uniform(&p, n0) {
            let ps = minorization_pseudo(&p, n0).expect("uniform overlap implies pairwise overlap");
            prop_assert!(u.epsilon <= ps.epsilon);
        }
    }

    #[test]
    fn computed_certificates_verify(p in chain(), n0 in 1u64..4) {
        for cert in [minorization_uniform(&p, n0), minorization_pseudo(&p, n0)].into_iter().flatten() {
            prop_assert!(cert.verify(&p));
            prop_assert!(cert.epsilon > Rational::zero() && cert.epsilon <= rational::one());
        }
    }

    #[test]
    fn stationary_law_is_invariant(p in chain()) {
        if let Ok(pi) = stationary(&p) {
            prop_assert_eq!(evolve(&pi, &p, 1).unwrap(), pi.clone());
            prop_assert_eq!(pi.entries().iter().sum::<Rational>(), rational::one());
        }
    }

    #[test]
    fn tv_matches_event_supremum((mu, nu) in (1usize..11).prop_flat_map(|n| (vector(n), vector(n)))) {
        prop_assert_eq!(tv_distance(&mu, &nu).unwrap(), tv_by_events(mu.entries(), nu.entries()));
    }

    #[test]
    fn tv_is_a_metric(
        (a, b, c) in (1usize..8).prop_flat_map(|n| (vector(n), vector(n), vector(n)))
    ) {
        let ab = tv_distance(&a, &b).unwrap();
        prop_assert_eq!(&ab, &tv_distance(&b, &a).unwrap());
        prop_assert!(ab <= rational::one());
        prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap());
        prop_assert!(tv_distance(&a, &a).unwrap().is_zero());
    }
}

#[test]
fn tv_oracle_on_twelve_states() {
    let mu = ProbVector::point_mass(12, 3);
    let nu = ProbVector::uniform(12);
    assert_eq!(tv_distance(&mu, &nu).unwrap(), tv_by_events(mu.entries(), nu.entries()));
    assert_eq!(tv_distance(&mu, &nu).unwrap(), rational::ratio(11, 12));
}

#[test]
fn grid_tv_curve_matches_event_oracle() {
    let p = build_grid_walk(3, 3).unwrap();
    let mu0 = ProbVector::point_mass(9, 4);
    let pi = stationary(&p).unwrap();
    let tv = exact_tv_values(&mu0, &p, 12).unwrap();
    for (n, value) in tv.iter().enumerate() {
        let mu = evolve(&mu0, &p, n as u64).unwrap();
        assert_eq!(value, &tv_by_events(mu.entries(), pi.entries()));
    }
}

#[test]
fn eigen_bound_dominates_exact_deviation() {
    let p = build_grid_walk(3, 3).unwrap();
    let mu0 = ProbVector::point_mass(9, 4);
    let b = eigen_bound(&p, &mu0, 4).unwrap();
    let pi = stationary(&p).unwrap();
    let mut mu = mu0.clone();
    for n in 0..=200u64 {
        let dev = rational::to_f64(&(&mu.entries()[4] - &pi.entries()[4])).abs();
        assert!(dev <= b.value(n) + 1e-9, "n={n}");
        assert!(dev <= 0.85 * 0.4667f64.powi(n as i32) + 1e-9, "n={n}");
        mu = evolve(&mu, &p, 1).unwrap();
    }
    assert_eq!(steps_to_threshold(|n| b.value(n), 0.01, DEFAULT_STEP_CAP).unwrap(), 6);
}

#[test]
fn exact_tv_is_below_both_minorization_bounds() {
    let p = build_grid_walk(3, 3).unwrap();
    let mu0 = ProbVector::point_mass(9, 4);
    let tv = exact_tv_values(&mu0, &p, 200).unwrap();
    for cert in [minorization_uniform(&p, 2).unwrap(), minorization_pseudo(&p, 2).unwrap()] {
        let eps = cert.epsilon_f64();
        for (n, v) in tv.iter().enumerate() {
            let bound = minorization_bound(eps, 2, n as u64).unwrap();
            assert!(rational::to_f64(v) <= bound + 1e-12, "n={n} eps={eps}");
        }
    }
}

#[test]
fn grid_stationary_law_is_proportional_to_move_count() {
    // On any grid the lazy walk is reversible with pi proportional to the number of moves.
    for (r, c) in [(2, 2), (2, 3), (4, 4), (1, 5)] {
        let p = build_grid_walk(r, c).unwrap();
        let pi = stationary(&p).unwrap();
        let degrees: Vec<i64> = p.rows().iter().map(|row| row.iter().filter(|v| !v.is_zero()).count() as i64).collect();
        let total: i64 = degrees.iter().sum();
        for (s, d) in degrees.iter().enumerate() {
            assert_eq!(pi.entries()[s], rational::ratio(*d, total));
        }
    }
}
