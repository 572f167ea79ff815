//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// All matrix and quadrature code is written against this trait; complex
/// values are `Complex<T>`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Builds a complex number from two `f64` parts.
#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// Lifts a real into the complex plane.
#[inline]
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Relative difference `|u - v| / max(|u|, |v|, floor)`.
pub fn rel_diff<T: Real>(u: Complex<T>, v: Complex<T>, floor: T) -> T {
    let den = u.norm().max(v.norm()).max(floor);
    if den == T::zero() {
        return T::zero();
    }
    (u - v).norm() / den
}

/// Values that can be accumulated by the quadrature routines.
pub trait Accumulate: Clone + Send + Sync {
    type Real: Real;
    /// `self += other * w`
    fn axpy(&mut self, w: Complex<Self::Real>, other: &Self);
    fn scaled(&self, w: Complex<Self::Real>) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    /// Norm used for convergence decisions.
    fn size(&self) -> Self::Real;
    /// Cheap upper bound for `size`, used for round-off floors.
    fn magnitude(&self) -> Self::Real {
        self.size()
    }
}

impl<T: Real> Accumulate for Complex<T> {
    type Real = T;
    #[inline]
    fn axpy(&mut self, w: Complex<T>, other: &Self) {
        *self += w * *other;
    }
    #[inline]
    fn scaled(&self, w: Complex<T>) -> Self {
        *self * w
    }
    #[inline]
    fn add(&self, other: &Self) -> Self {
        *self + *other
    }
    #[inline]
    fn sub(&self, other: &Self) -> Self {
        *self - *other
    }
    #[inline]
    fn size(&self) -> T {
        self.norm()
    }
}

/// Fixed-order pairwise summation; the result depends only on the order of
/// `items`, never on thread scheduling.
pub fn pairwise_sum<V: Accumulate>(items: &[V]) -> Option<V> {
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        n => {
            let (lo, hi) = items.split_at(n / 2);
            let a = pairwise_sum(lo)?;
            let b = pairwise_sum(hi)?;
            Some(a.add(&b))
        }
    }
}

/// Pairwise sum of `w_k * v_k`.
pub fn pairwise_weighted<V: Accumulate>(weights: &[Complex<V::Real>], values: &[V]) -> Option<V> {
    debug_assert_eq!(weights.len(), values.len());
    let scaled: Vec<V> = weights
        .iter()
        .zip(values)
        .map(|(w, v)| v.scaled(*w))
        .collect();
    pairwise_sum(&scaled)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_for_small_inputs() {
        let v: Vec<Complex<f64>> = (1..=10).map(|k| cx(k as f64, -(k as f64))).collect();
        let s = pairwise_sum(&v).unwrap();
        assert_eq!(s, cx(55.0, -55.0));
        assert!(pairwise_sum::<Complex<f64>>(&[]).is_none());
    }

    #[test]
    fn rel_diff_respects_floor() {
        let z = Complex::new(0.0f64, 0.0);
        assert_eq!(rel_diff(z, z, 0.0), 0.0);
        assert!((rel_diff(cx::<f64>(1e-20, 0.0), z, 1.0) - 1e-20).abs() < 1e-30);
    }
}
