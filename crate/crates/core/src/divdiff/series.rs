//! Power-series expansions of divided differences about a base point.

use num_bigint::BigUint;
use num_complex::Complex;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::function::HolomorphicFunction;
use super::multiindex::{factorial, Compositions, MultiIndex};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which divided difference the series represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesVariant {
    /// `[a+x₀, …, a+xₙ]f = Σ_{α∈ℕ^{n+1}} f^{(n+|α|)}(a)/(|α|+n)! · x^α`
    Origin,
    /// `[a, a+x₁, …, a+xₙ]f = Σ_{α∈ℕⁿ} f^{(n+|α|)}(a)/(|α|+n)! · x^α`
    Offset,
    /// `[a, a+x₁, a+x₁+x₂, …]f = Σ_{α∈ℕⁿ} f^{(n+|α|)}(a)/α?! · x^α`
    Cumulative,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesValue<T> {
    pub value: Complex<T>,
    pub shells: usize,
    /// Magnitude of the last shell summed.
    pub truncation_estimate: T,
}

pub(crate) const SHELL_GROWTH_LIMIT: usize = 3;

/// Partial sum over `|α| ≤ order_cap`.
pub fn dd_series_eval<T: Real>(
    f: &HolomorphicFunction<T>,
    variant: SeriesVariant,
    a: Complex<T>,
    x: &[Complex<T>],
    order_cap: u32,
) -> Result<SeriesValue<T>> {
    let n = match variant {
        SeriesVariant::Origin => x
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::Invalid("origin series needs at least one offset".into()))?,
        _ => x.len(),
    };
    let mut sum = Complex::zero();
    let mut last = T::zero();
    let mut grew = 0usize;
    let mut shells = 0usize;
    for m in 0..=order_cap {
        let deriv = f.deriv(n + m as usize, a)?;
        let mut shell: Complex<T> = Complex::zero();
        for alpha in Compositions::capped(m, x.len())? {
            let den: BigUint = match variant {
                SeriesVariant::Cumulative => alpha.shriek_bang_exact(),
                _ => factorial(m + n as u32),
            };
            shell += monomial(x, &alpha) / T::lit(den.to_f64().unwrap_or(f64::INFINITY));
        }
        let shell = shell * deriv;
        sum += shell;
        shells += 1;
        let mag = shell.norm();
        if m > 0 && mag > last && last > T::zero() {
            grew += 1;
            if grew >= SHELL_GROWTH_LIMIT {
                return Err(Error::SeriesDiverging);
            }
        } else {
            grew = 0;
        }
        last = mag;
    }
    Ok(SeriesValue {
        value: sum,
        shells,
        truncation_estimate: last,
    })
}

fn monomial<T: Real>(x: &[Complex<T>], alpha: &MultiIndex) -> Complex<T> {
    x.iter()
        .zip(alpha.parts())
        .fold(Complex::one(), |t, (xj, &k)| t * xj.powu(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divdiff::{dd_recursive, NodeSet};
    use crate::scalar::cx;

    type F = HolomorphicFunction<f64>;

    #[test]
    fn origin_at_zero_nodes() {
        let z = cx(0.0, 0.0);
        let v = dd_series_eval(&F::exp(), SeriesVariant::Origin, z, &[z, z], 10).unwrap();
        assert!((v.value - cx(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cumulative_matches_recursion() {
        let a = cx(0.3, 0.0);
        let x = [cx(0.1, 0.0), cx(0.2, 0.0)];
        let v = dd_series_eval(&F::exp(), SeriesVariant::Cumulative, a, &x, 20).unwrap();
        let nodes = NodeSet::new(vec![a, a + x[0], a + x[0] + x[1]]).unwrap();
        let r = dd_recursive(&F::exp(), &nodes).unwrap();
        assert!((v.value - r).norm() < 1e-13);
    }

    #[test]
    fn offset_and_origin_agree_with_recursion() {
        let h = 0.05;
        let x = [cx(h, 0.0), cx(2.0 * h, 0.0)];
        let zero = cx(0.0, 0.0);
        let off = dd_series_eval(&F::exp(), SeriesVariant::Offset, zero, &x, 20).unwrap();
        let org = dd_series_eval(&F::exp(), SeriesVariant::Origin, zero, &[zero, x[0], x[1]], 20).unwrap();
        let nodes = NodeSet::real(&[0.0, h, 2.0 * h]).unwrap();
        let r = dd_recursive(&F::exp(), &nodes).unwrap();
        assert!((off.value - r).norm() < 1e-12);
        assert!((org.value - r).norm() < 1e-12);
    }

    #[test]
    fn divergence_is_detected() {
        // (1+z)^-1 about 0 with offsets beyond the radius of convergence
        let x = [cx(1.5, 0.0)];
        let r = dd_series_eval(&F::rational(1), SeriesVariant::Offset, cx(0.0, 0.0), &x, 30);
        assert!(matches!(r, Err(Error::SeriesDiverging)));
    }
}
