//! Closed forms: powers, resolvents, simplex moments and multinomial sums.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::multiindex::{binomial, Compositions, MultiIndex};
use super::nodes::NodeSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `[x₀, …, xₙ] z^N` by composition enumeration.
pub fn dd_power<T: Real>(xs: &NodeSet<T>, big_n: i32) -> Result<Complex<T>> {
    let x = xs.nodes();
    let n = xs.order() as i64;
    let big = big_n as i64;
    if big >= n {
        return power_sum(x, (big - n) as u32, false);
    }
    if big >= 0 {
        return Ok(Complex::zero());
    }
    if x.iter().any(|z| z.is_zero()) {
        return Err(Error::ZeroNodeNegativePower);
    }
    let prod = x.iter().fold(Complex::one(), |p, z| p * z);
    let sign = if n % 2 == 0 { T::one() } else { -T::one() };
    let s = power_sum(x, (-big - 1) as u32, true)?;
    Ok(s * sign / prod)
}

/// `Σ_{|α| = m} x^α` (or `x^{−α}` when `inverse`), `α ∈ ℕ^{len x}`.
fn power_sum<T: Real>(x: &[Complex<T>], m: u32, inverse: bool) -> Result<Complex<T>> {
    let base: Vec<Complex<T>> = if inverse {
        x.iter().map(|z| z.inv()).collect()
    } else {
        x.to_vec()
    };
    // pw[j][k] = base_j^k
    let pw: Vec<Vec<Complex<T>>> = base
        .iter()
        .map(|b| {
            let mut row = Vec::with_capacity(m as usize + 1);
            let mut acc = Complex::one();
            for _ in 0..=m {
                row.push(acc);
                acc *= b;
            }
            row
        })
        .collect();
    let mut sum = Complex::zero();
    for alpha in Compositions::capped(m, x.len())? {
        let term = alpha
            .parts()
            .iter()
            .enumerate()
            .fold(Complex::one(), |t, (j, &a)| t * pw[j][a as usize]);
        sum += term;
    }
    Ok(sum)
}

/// `∏ⱼ (λ − xⱼ)⁻¹`.
pub fn dd_resolvent<T: Real>(xs: &NodeSet<T>, lambda: Complex<T>) -> Result<Complex<T>> {
    let floor = xs.coincidence_tol() * lambda.norm().max(T::one());
    let mut p = Complex::one();
    for (j, x) in xs.nodes().iter().enumerate() {
        let d = lambda - x;
        if d.norm() <= floor {
            return Err(Error::PoleAtNode(j));
        }
        p *= d;
    }
    Ok(p.inv())
}

/// `∫_{Δₙ} s^α ds = α!/(|α|+n)!` for `α` with `n+1` parts, via `ln Γ`.
pub fn simplex_moment_s(alpha: &MultiIndex) -> f64 {
    assert!(!alpha.is_empty(), "moment needs at least one part");
    let n = alpha.len() - 1;
    let num: f64 = alpha.parts().iter().map(|&a| libm::lgamma(a as f64 + 1.0)).sum();
    let den = libm::lgamma((alpha.abs() as usize + n) as f64 + 1.0);
    (num - den).exp()
}

pub fn simplex_moment_s_exact(alpha: &MultiIndex) -> BigRational {
    assert!(!alpha.is_empty(), "moment needs at least one part");
    let n = alpha.len() - 1;
    let den = super::multiindex::factorial(alpha.abs() + n as u32);
    ratio(alpha.factorial(), den)
}

/// `∫_{0≤tₙ≤…≤t₁≤1} t^α dt = ∏ⱼ (αₙ + … + α_{n−j+1} + j)⁻¹`.
pub fn simplex_moment_t(alpha: &MultiIndex) -> f64 {
    let mut partial = 0u64;
    let mut p = 1.0;
    for (j, &a) in alpha.parts().iter().rev().enumerate() {
        partial += a as u64;
        p /= (partial + j as u64 + 1) as f64;
    }
    p
}

pub fn simplex_moment_t_exact(alpha: &MultiIndex) -> BigRational {
    ratio(alpha.factorial(), alpha.shriek_bang_exact())
}

/// `(α₀, α′) ↦ (|α| + n + 1)·α!/α?!` with `α?!` taken over all `n+1` parts;
/// agrees with [`simplex_moment_t_exact`] of `α′`.
pub fn simplex_moment_t_full_form(alpha: &MultiIndex) -> BigRational {
    assert!(!alpha.is_empty());
    let n = alpha.len() - 1;
    let k = BigUint::from(alpha.abs() as u64 + n as u64 + 1);
    ratio(k * alpha.factorial(), alpha.shriek_bang_exact())
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `(α!?, α?!)` as floating-point values.
pub fn bang_shriek(alpha: &MultiIndex) -> (f64, f64) {
    let f = |b: BigUint| b.to_f64().unwrap_or(f64::INFINITY);
    (f(alpha.bang_shriek_exact()), f(alpha.shriek_bang_exact()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MultinomialMode {
    /// `|α| ≤ m`
    AtMost,
    /// `|α| = m`
    Exactly,
}

/// Brute-force `Σ_{β≤α} C(α, β)` over `|α| ≤ m` or `|α| = m`, paired with
/// the closed form `C(m+n, |β|+n)` or `C(m+n−1, |β|+n−1)`.
pub fn multinomial_identity(beta: &MultiIndex, m: u32, mode: MultinomialMode) -> Result<(u128, u128)> {
    let n = beta.len() as u64;
    let b = beta.abs();
    if m < b {
        return Err(Error::Invalid(format!("m = {m} is below |β| = {b}")));
    }
    if n == 0 && mode == MultinomialMode::Exactly {
        return Err(Error::Invalid("the |α| = m identity needs at least one part".into()));
    }
    let shells: Vec<u32> = match mode {
        MultinomialMode::AtMost => (b..=m).collect(),
        MultinomialMode::Exactly => vec![m],
    };
    let mut brute: u128 = 0;
    for s in shells {
        for alpha in Compositions::capped(s, beta.len())? {
            if alpha.dominates(beta) {
                brute += alpha.binomial(beta);
            }
        }
    }
    let (m, b) = (m as u64, b as u64);
    let closed = match mode {
        MultinomialMode::AtMost => binomial(m + n, b + n),
        MultinomialMode::Exactly => binomial(m + n - 1, b + n - 1),
    };
    Ok((brute, closed))
}

/// Exact `Σ_{|α|=m} ∏ xⱼ^{αⱼ}` for rational nodes; oracle for [`dd_power`].
pub fn power_sum_exact(x: &[BigRational], m: u32) -> BigRational {
    let mut sum = BigRational::zero();
    for alpha in Compositions::new(m, x.len()) {
        let mut t = BigRational::one();
        for (xj, &a) in x.iter().zip(alpha.parts()) {
            for _ in 0..a {
                t *= xj;
            }
        }
        sum += t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn power_examples() {
        let xs = NodeSet::<f64>::real(&[1.0, 2.0]).unwrap();
        assert_eq!(dd_power(&xs, 2).unwrap(), cx(3.0, 0.0));
        assert!((dd_power(&xs, -1).unwrap() - cx(-0.5, 0.0)).norm() < 1e-16);
        let xs3 = NodeSet::<f64>::real(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(dd_power(&xs3, 1).unwrap(), cx(0.0, 0.0));
        let z = NodeSet::<f64>::real(&[0.0, 2.0]).unwrap();
        assert!(matches!(dd_power(&z, -2), Err(Error::ZeroNodeNegativePower)));
    }

    #[test]
    fn resolvent_examples() {
        let xs = NodeSet::<f64>::real(&[0.0, 1.0]).unwrap();
        assert!((dd_resolvent(&xs, cx(3.0, 0.0)).unwrap() - cx(1.0 / 6.0, 0.0)).norm() < 1e-16);
        assert!(matches!(dd_resolvent(&xs, cx(1.0, 0.0)), Err(Error::PoleAtNode(1))));
    }

    #[test]
    fn moment_examples() {
        assert!((simplex_moment_s(&mi(&[0, 0, 0])) - 0.5).abs() < 1e-15);
        assert!((simplex_moment_s(&mi(&[1, 0])) - 0.5).abs() < 1e-15);
        assert!((simplex_moment_s(&mi(&[1, 1, 1])) - 1.0 / 120.0).abs() < 1e-16);
        assert_eq!(simplex_moment_t(&mi(&[1])), 0.5);
        assert_eq!(simplex_moment_t(&mi(&[0, 0])), 0.5);
        assert!((simplex_moment_t(&mi(&[1, 2])) - 1.0 / 15.0).abs() < 1e-16);
    }

    #[test]
    fn the_two_t_moment_forms_agree() {
        for alpha in super::super::multiindex::up_to(5, 3).unwrap() {
            let tail = MultiIndex::new(alpha.parts()[1..].to_vec());
            assert_eq!(simplex_moment_t_full_form(&alpha), simplex_moment_t_exact(&tail));
        }
    }

    #[test]
    fn bang_shriek_examples() {
        assert_eq!(bang_shriek(&mi(&[])), (1.0, 1.0));
        assert_eq!(bang_shriek(&mi(&[1, 2])), (20.0, 30.0));
        assert_eq!(bang_shriek(&mi(&[3])), (24.0, 24.0));
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial_identity(&mi(&[0]), 2, MultinomialMode::AtMost).unwrap(), (3, 3));
        assert_eq!(multinomial_identity(&mi(&[1]), 3, MultinomialMode::AtMost).unwrap(), (6, 6));
        assert_eq!(multinomial_identity(&mi(&[1, 0]), 2, MultinomialMode::Exactly).unwrap(), (3, 3));
        assert!(multinomial_identity(&mi(&[3]), 2, MultinomialMode::AtMost).is_err());
    }
}
