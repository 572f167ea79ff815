use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use opcalc::magnus::{bernoulli, liouville_residual, magnus_solve, rk_reference, TimeDependentMatrix};
use opcalc::random::MatrixGen;
use opcalc::tensor::matrix_exp;
use opcalc::Matrix;
use proptest::prelude::*;

fn primes_below(n: u64) -> Vec<u64> {
    (2..n).filter(|p| (2..*p).all(|q| p % q != 0)).collect()
}

#[test]
fn odd_bernoulli_vanish_beyond_one() {
    let t = bernoulli(30).unwrap();
    for k in (3..=30).step_by(2) {
        assert!(t.exact[k].is_zero(), "B_{k}");
    }
}

#[test]
fn even_bernoulli_denominators() {
    let t = bernoulli(30).unwrap();
    for k in (2..=30).step_by(2) {
        let want: u64 = primes_below(k as u64 + 2)
            .into_iter()
            .filter(|p| k as u64 % (p - 1) == 0)
            .product();
        assert_eq!(t.exact[k].denom(), &BigInt::from(want), "B_{k}");
        let sign_ok = if k % 4 == 0 { t.exact[k] < Zero::zero() } else { t.exact[k] > Zero::zero() };
        assert!(sign_ok, "sign of B_{k}");
    }
}

#[test]
fn generating_function() {
    let t = bernoulli(30).unwrap();
    let x: f64 = 0.7;
    let mut fact = 1.0;
    let mut sum = 0.0;
    for (k, b) in t.exact.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        sum += b.to_f64().unwrap() * x.powi(k as i32) / fact;
    }
    assert!((sum - x / (x.exp() - 1.0)).abs() < 1e-14);
    assert!(t.exact[0].is_one());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hermitian_fields_match_reference(seed in any::<u64>(), d in 2usize..=3) {
        let mut g = MatrixGen::new(seed, "magnus-props");
        let h0: Matrix = g.hermitian(d);
        let h1: Matrix = g.hermitian::<f64>(d).scale_real(0.5);
        let field = TimeDependentMatrix::hermitian_perturbed(h0, h1);
        let sol = magnus_solve(&field, 1.0, 0.02, 30).unwrap();
        let reference = rk_reference(&field, 1.0, 0.02).unwrap();
        prop_assert!((&sol.y - &reference.y).opnorm() <= 1e-6);
        prop_assert!(liouville_residual(&field, 1.0, &reference.y) <= 1e-7);
    }

    #[test]
    fn commuting_field_is_the_integral(seed in any::<u64>(), d in 1usize..=3) {
        let mut g = MatrixGen::new(seed, "magnus-props");
        let (p, q): (Matrix, Matrix) = g.commuting_pair(d);
        let (p2, q2) = (p.clone(), q.clone());
        let field = TimeDependentMatrix::new(d, move |t: f64| &p2 + &q2.scale_real(t * t));
        let sol = magnus_solve(&field, 1.0, 0.05, 8).unwrap();
        let integral = &p + &q.scale_real(1.0 / 3.0);
        prop_assert!((&sol.omega - &integral).opnorm() <= 1e-9 * integral.opnorm().max(1.0));
        prop_assert!(matrix_exp(&sol.omega).rel_dist(&sol.y, 1e-300) <= 1e-12);
    }
}
