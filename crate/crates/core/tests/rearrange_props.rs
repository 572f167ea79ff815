use num_complex::Complex;
use opcalc::rearrange::{decay_condition, homogeneity_residual, modular_family, rearrange_all, scaling_residual, SectorFunction};
use opcalc::random::MatrixGen;
use opcalc::{Error, Matrix};
use proptest::prelude::*;

const DELTA: f64 = 0.3;

fn sector_point() -> impl Strategy<Value = Complex<f64>> {
    (-0.95 * DELTA..0.95 * DELTA, 0.05f64..20.0).prop_map(|(t, r)| Complex::from_polar(r, t))
}

fn family(ks: &[u32]) -> Vec<SectorFunction<f64>> {
    ks.iter().map(|&k| SectorFunction::inverse_power(k)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scalar_identities(ks in prop::collection::vec(0u32..=3, 2..=3), pts in prop::collection::vec(sector_point(), 3), c in 0.05f64..20.0) {
        prop_assume!(ks.iter().sum::<u32>() >= 2);
        let fs = family(&ks);
        let s = &pts[..ks.len()];
        prop_assert!(scaling_residual(&fs, s).unwrap() <= 1e-9);
        prop_assert!(homogeneity_residual(&fs, s, c).unwrap() <= 1e-9);
    }

    #[test]
    fn exponent_gate(ps in prop::collection::vec(0u32..=2, 2..=3), qs in prop::collection::vec(0u32..=4, 3)) {
        let fs: Vec<SectorFunction<f64>> = ps
            .iter()
            .zip(&qs)
            .map(|(&p, &q)| SectorFunction::builtin(p as f64, q as f64))
            .collect();
        let alpha: f64 = ps.iter().zip(&qs).map(|(&p, &q)| q as f64 - p as f64).sum();
        let beta: f64 = ps.iter().map(|&p| -(p as f64)).sum();
        let gate = decay_condition(&fs);
        let violates = alpha <= 1.0 || beta >= 1.0;
        prop_assert_eq!(matches!(gate, Err(Error::DecayViolation(_))), violates);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn three_sides_agree(seed in any::<u64>(), d in 2usize..=3, p in 1usize..=2) {
        let mut g = MatrixGen::new(seed, "rearrange-props");
        let a: Matrix = g.hermitian(d);
        let bs: Vec<Matrix> = (0..p).map(|_| g.random(d)).collect();
        let ks: Vec<u32> = (0..=p).map(|j| 1 + (j == 0) as u32).collect();
        let r = rearrange_all(&family(&ks), &a, &bs, DELTA).unwrap();
        prop_assert!(r.worst() <= 1e-6, "residuals {:?}", r.residuals);
        let m = modular_family(&a, p, DELTA).unwrap();
        prop_assert!(m.modular_residual <= 1e-10);
    }
}
