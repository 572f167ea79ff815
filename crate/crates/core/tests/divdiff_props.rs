use num_complex::Complex;
use num_rational::BigRational;
use num_traits::One;
use opcalc::divdiff::multiindex::{factorial, up_to};
use opcalc::divdiff::{
    dd_explicit, dd_power, dd_recursive, multinomial_identity, simplex_moment_s_exact, Compositions, MultinomialMode,
};
use opcalc::scalar::rel_diff;
use opcalc::{HolomorphicFunction, NodeSet, C64};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = C64> {
    (0.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex::from_polar(r.sqrt(), t))
}

fn separated(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(point(), n + 1).prop_filter("nodes too close", |xs| {
        xs.iter()
            .enumerate()
            .all(|(i, x)| xs[..i].iter().all(|y| (x - y).norm() >= 0.15))
    })
}

fn functions() -> Vec<HolomorphicFunction<f64>> {
    vec![
        HolomorphicFunction::exp(),
        HolomorphicFunction::pow(5),
        HolomorphicFunction::resolvent(Complex::new(3.0, 0.0)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_symmetry(xs in (1usize..=4).prop_flat_map(separated), shift in 1usize..5) {
        let n = xs.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * (2 * shift + 1) + shift) % n).collect();
        let mut unique = perm.clone();
        unique.sort();
        unique.dedup();
        prop_assume!(unique.len() == n);
        let set = NodeSet::new(xs).unwrap();
        let other = set.permuted(&perm);
        for f in functions() {
            prop_assert_eq!(dd_explicit(&f, &set).unwrap(), dd_explicit(&f, &other).unwrap());
            let (a, b) = (dd_recursive(&f, &set).unwrap(), dd_recursive(&f, &other).unwrap());
            prop_assert!(rel_diff(a, b, 0.0) <= 1e-10);
        }
    }

    #[test]
    fn leading_coefficient_is_one(xs in (0usize..=4).prop_flat_map(separated)) {
        let n = xs.len() - 1;
        let set = NodeSet::new(xs).unwrap();
        let v = dd_recursive(&HolomorphicFunction::pow(n as i32), &set).unwrap();
        prop_assert!((v - 1.0).norm() <= 1e-10);
        prop_assert_eq!(dd_power(&set, n as i32).unwrap(), Complex::new(1.0, 0.0));
    }
}

#[test]
fn normalised_moments_are_one() {
    for parts in 1..=5 {
        for alpha in up_to(6, parts).unwrap() {
            let n = parts as u32 - 1;
            let scaled = simplex_moment_s_exact(&alpha)
                * BigRational::from_integer(factorial(alpha.abs() + n).into())
                / BigRational::from_integer(alpha.factorial().into());
            assert!(scaled.is_one(), "{:?}", alpha.parts());
        }
    }
}

#[test]
fn multinomial_pairs_agree() {
    for n in 1..=4 {
        for beta in up_to(4, n).unwrap() {
            for m in beta.abs()..=8 {
                for mode in [MultinomialMode::AtMost, MultinomialMode::Exactly] {
                    let (brute, closed) = multinomial_identity(&beta, m, mode).unwrap();
                    assert_eq!(brute, closed, "beta {:?} m {m} {mode:?}", beta.parts());
                }
            }
        }
    }
}

#[test]
fn composition_shells_partition_the_total() {
    for parts in 1..=4 {
        for total in 0..=6 {
            for alpha in Compositions::new(total, parts) {
                assert_eq!(alpha.abs(), total);
                assert_eq!(alpha.len(), parts);
            }
        }
    }
}
