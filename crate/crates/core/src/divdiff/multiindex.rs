//! Multi-indices `α ∈ ℕⁿ` and their enumeration.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Most terms any single enumeration may produce.
pub const ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex {
    parts: Vec<u32>,
}

impl MultiIndex {
    pub fn new(parts: Vec<u32>) -> Self {
        Self { parts }
    }

    pub fn zeros(n: usize) -> Self {
        Self { parts: vec![0; n] }
    }

    #[inline]
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `|α|`
    pub fn abs(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// `α!` exactly.
    pub fn factorial(&self) -> BigUint {
        self.parts
            .iter()
            .fold(BigUint::one(), |acc, &a| acc * factorial(a))
    }

    /// `α! · ∏ⱼ (j + α₁ + … + αⱼ)`, partial sums from the front.
    pub fn bang_shriek_exact(&self) -> BigUint {
        let mut acc = self.factorial();
        let mut partial = 0u64;
        for (j, &a) in self.parts.iter().enumerate() {
            partial += a as u64;
            acc *= BigUint::from(partial + j as u64 + 1);
        }
        acc
    }

    /// `α! · ∏ⱼ (j + αₙ + … + α_{n−j+1})`, partial sums from the back.
    pub fn shriek_bang_exact(&self) -> BigUint {
        let mut acc = self.factorial();
        let mut partial = 0u64;
        for (j, &a) in self.parts.iter().rev().enumerate() {
            partial += a as u64;
            acc *= BigUint::from(partial + j as u64 + 1);
        }
        acc
    }

    /// `∏ⱼ C(αⱼ, βⱼ)`, zero unless `β ≤ α`.
    pub fn binomial(&self, beta: &MultiIndex) -> u128 {
        assert_eq!(self.len(), beta.len());
        self.parts
            .iter()
            .zip(&beta.parts)
            .map(|(&a, &b)| binomial(a as u64, b as u64))
            .product()
    }

    /// Componentwise `self ≥ other`.
    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.parts.iter().zip(&other.parts).all(|(a, b)| a >= b)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(parts: Vec<u32>) -> Self {
        Self::new(parts)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub fn factorial(k: u32) -> BigUint {
    (2..=k as u64).fold(BigUint::one(), |acc, j| acc * BigUint::from(j))
}

/// `C(n, k)`, zero for `k > n`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Number of `α ∈ ℕ^parts` with `|α| = total`.
pub fn composition_count(total: u32, parts: usize) -> u128 {
    if parts == 0 {
        return u128::from(total == 0);
    }
    binomial(total as u64 + parts as u64 - 1, parts as u64 - 1)
}

/// All `α ∈ ℕ^parts` with `|α| = total` in colexicographic order, starting
/// from `(total, 0, …, 0)`.
pub struct Compositions {
    cur: Option<Vec<u32>>,
}

impl Compositions {
    pub fn new(total: u32, parts: usize) -> Self {
        let cur = if parts == 0 {
            (total == 0).then(Vec::new)
        } else {
            let mut v = vec![0; parts];
            v[0] = total;
            Some(v)
        };
        Self { cur }
    }

    /// Like `new` but refuses enumerations larger than the cap.
    pub fn capped(total: u32, parts: usize) -> Result<Self> {
        let count = composition_count(total, parts);
        if count > ENUMERATION_CAP {
            return Err(Error::EnumerationCap(count));
        }
        Ok(Self::new(total, parts))
    }
}

impl Iterator for Compositions {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let out = self.cur.clone()?;
        let v = self.cur.as_mut().expect("checked above");
        match v.iter().position(|&a| a > 0) {
            Some(i) if i + 1 < v.len() => {
                let a = v[i];
                v[i] = 0;
                v[0] = a - 1;
                v[i + 1] += 1;
            }
            _ => self.cur = None,
        }
        Some(MultiIndex::new(out))
    }
}

/// Shells `|α| = 0, 1, …, max_total` concatenated.
pub fn up_to(max_total: u32, parts: usize) -> Result<impl Iterator<Item = MultiIndex>> {
    let count: u128 = (0..=max_total).map(|m| composition_count(m, parts)).sum();
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationCap(count));
    }
    Ok((0..=max_total).flat_map(move |m| Compositions::new(m, parts)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colex_order() {
        let all: Vec<Vec<u32>> = Compositions::new(2, 3).map(|a| a.parts().to_vec()).collect();
        assert_eq!(
            all,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
        assert_eq!(Compositions::new(0, 2).count(), 1);
        assert_eq!(Compositions::new(0, 0).count(), 1);
        assert_eq!(Compositions::new(3, 0).count(), 0);
        assert_eq!(Compositions::new(5, 1).count(), 1);
    }

    #[test]
    fn counts_agree() {
        for parts in 1..5 {
            for total in 0..7 {
                assert_eq!(
                    Compositions::new(total, parts).count() as u128,
                    composition_count(total, parts)
                );
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            Compositions::capped(60, 6),
            Err(Error::EnumerationCap(_))
        ));
    }

    #[test]
    fn factorial_products() {
        let a = MultiIndex::new(vec![1, 2]);
        assert_eq!(a.bang_shriek_exact(), BigUint::from(20u32));
        assert_eq!(a.shriek_bang_exact(), BigUint::from(30u32));
        let e = MultiIndex::new(vec![]);
        assert_eq!(e.bang_shriek_exact(), BigUint::one());
    }
}
