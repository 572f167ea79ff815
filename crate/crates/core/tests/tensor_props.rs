use opcalc::random::MatrixGen;
use opcalc::tensor::{ad_power, eigenvalues, embed_slot, kron, nabla, pair};
use opcalc::{Matrix, Tensor};
use proptest::prelude::*;

fn mats(seed: u64, d: usize, k: usize) -> Vec<Matrix> {
    let mut g = MatrixGen::new(seed, "tensor-props");
    (0..k).map(|_| g.random(d)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distinct_slots_commute(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=3) {
        let m = mats(seed, d, 2);
        for i in 0..=n {
            for j in 0..=n {
                if i == j {
                    continue;
                }
                let x = embed_slot(&m[0], n, i).unwrap();
                let y = embed_slot(&m[1], n, j).unwrap();
                let c = x.mul(&y).sub(&y.mul(&x));
                prop_assert!(c.matrix().opnorm() <= 1e-13 * m[0].opnorm() * m[1].opnorm());
            }
        }
    }

    #[test]
    fn pairing_is_multilinear(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=3) {
        let m = mats(seed, d, 3 * n + 2);
        let t = Tensor::new(d, n + 1, {
            let mut g = MatrixGen::new(seed ^ 1, "tensor-props");
            g.random(d.pow(n as u32 + 1))
        }).unwrap();
        let s = Tensor::new(d, n + 1, {
            let mut g = MatrixGen::new(seed ^ 2, "tensor-props");
            g.random(d.pow(n as u32 + 1))
        }).unwrap();
        let bs = &m[..n];
        let base = pair(&t, bs).unwrap();
        let mut expect = base.clone();
        expect += &pair(&s, bs).unwrap();
        prop_assert!(pair(&t.add(&s), bs).unwrap().rel_dist(&expect, 1e-300) <= 1e-12);
        for i in 0..n {
            let mut shifted = bs.to_vec();
            shifted[i] += &m[n + i];
            let mut other = bs.to_vec();
            other[i] = m[n + i].clone();
            let mut expect = base.clone();
            expect += &pair(&t, &other).unwrap();
            prop_assert!(pair(&t, &shifted).unwrap().rel_dist(&expect, 1e-300) <= 1e-12);
        }
    }

    #[test]
    fn nabla_power_is_nested_commutator(seed in any::<u64>(), d in 1usize..=4, k in 0u32..=5) {
        let m = mats(seed, d, 2);
        let t = nabla(&m[0], 1, 1).unwrap().powi(k);
        let got = pair(&t, &m[1..2]).unwrap();
        let want = ad_power(&m[0], &m[1], k as usize);
        prop_assert!((&got - &want).opnorm() <= 1e-12 * m[0].opnorm().max(1.0).powi(k as i32) * m[1].opnorm() * 2f64.powi(k as i32));
    }

    #[test]
    fn kron_spectrum_is_products(seed in any::<u64>(), d in 1usize..=3) {
        let mut g = MatrixGen::new(seed, "tensor-props");
        let x: Matrix = g.diagonalizable(d);
        let y: Matrix = g.diagonalizable(d);
        let ex = eigenvalues(&x).unwrap();
        let ey = eigenvalues(&y).unwrap();
        for mu in eigenvalues(&kron(&x, &y)).unwrap() {
            let best = ex
                .iter()
                .flat_map(|a| ey.iter().map(move |b| (a * b - mu).norm()))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(best <= 1e-8, "{mu} is {best} away from any product");
        }
    }

    #[test]
    fn telescoping_nablas(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=3) {
        let m = mats(seed, d, 1);
        // Σⱼ ∇⁽ʲ⁾ = a⁽⁰⁾ − a⁽ⁿ⁾
        let mut sum = nabla(&m[0], n, 1).unwrap();
        for j in 2..=n {
            sum = sum.add(&nabla(&m[0], n, j).unwrap());
        }
        let want = embed_slot(&m[0], n, 0).unwrap().sub(&embed_slot(&m[0], n, n).unwrap());
        prop_assert!(sum.sub(&want).matrix().max_abs() <= 1e-15 * m[0].max_abs().max(1.0));
    }
}
