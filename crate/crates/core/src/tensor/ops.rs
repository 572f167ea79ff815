//! Kronecker products, slot lifts and the pairing with tuples of matrices.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::SquareMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Element of the `(n+1)`-fold tensor product of `d × d` matrices, realised
/// as a dense matrix of dimension `d^(n+1)`. Slot 0 is the leftmost
/// Kronecker factor.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorOperator<T> {
    base_dim: usize,
    slots: usize,
    mat: SquareMatrix<T>,
}

impl<T: Real> TensorOperator<T> {
    pub fn new(base_dim: usize, slots: usize, mat: SquareMatrix<T>) -> Result<Self> {
        let expect = base_dim
            .checked_pow(slots as u32)
            .ok_or_else(|| Error::DimensionMismatch("tensor dimension overflow".into()))?;
        if slots == 0 || mat.dim() != expect {
            return Err(Error::DimensionMismatch(format!(
                "tensor with {slots} slots over dim {base_dim} needs size {expect}, got {}",
                mat.dim()
            )));
        }
        Ok(Self {
            base_dim,
            slots,
            mat,
        })
    }

    pub fn identity(base_dim: usize, slots: usize) -> Self {
        Self {
            base_dim,
            slots,
            mat: SquareMatrix::identity(base_dim.pow(slots as u32)),
        }
    }

    /// `x₀ ⊗ x₁ ⊗ … ⊗ xₙ`
    pub fn elementary(factors: &[SquareMatrix<T>]) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::Invalid("empty tensor product".into()))?;
        let d = first.dim();
        if factors.iter().any(|f| f.dim() != d) {
            return Err(Error::DimensionMismatch("factors of unequal size".into()));
        }
        Ok(Self {
            base_dim: d,
            slots: factors.len(),
            mat: kron_all(factors),
        })
    }

    #[inline]
    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    #[inline]
    pub fn slots(&self) -> usize {
        self.slots
    }

    #[inline]
    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> SquareMatrix<T> {
        self.mat
    }

    fn with_matrix(&self, mat: SquareMatrix<T>) -> Self {
        Self {
            base_dim: self.base_dim,
            slots: self.slots,
            mat,
        }
    }

    fn assert_same_shape(&self, other: &Self) {
        assert!(
            self.base_dim == other.base_dim && self.slots == other.slots,
            "tensor operators of different shape"
        );
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_shape(other);
        self.with_matrix(self.mat.matmul(&other.mat))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_shape(other);
        self.with_matrix(&self.mat + &other.mat)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same_shape(other);
        self.with_matrix(&self.mat - &other.mat)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.with_matrix(self.mat.scale(c))
    }

    pub fn powi(&self, k: u32) -> Self {
        self.with_matrix(self.mat.powi(k))
    }

    /// Applies a matrix-level map (e.g. the exponential) keeping the shape.
    pub fn map_matrix(&self, f: impl FnOnce(&SquareMatrix<T>) -> SquareMatrix<T>) -> Self {
        let mat = f(&self.mat);
        assert_eq!(mat.dim(), self.mat.dim());
        self.with_matrix(mat)
    }
}

/// Standard Kronecker product.
pub fn kron<T: Real>(x: &SquareMatrix<T>, y: &SquareMatrix<T>) -> SquareMatrix<T> {
    let dy = y.dim();
    SquareMatrix::from_fn(x.dim() * dy, |r, c| x[(r / dy, c / dy)] * y[(r % dy, c % dy)])
}

pub fn kron_all<T: Real>(factors: &[SquareMatrix<T>]) -> SquareMatrix<T> {
    let mut it = factors.iter();
    let first = it.next().expect("at least one factor").clone();
    it.fold(first, |acc, f| kron(&acc, f))
}

/// `1 ⊗ … ⊗ a ⊗ … ⊗ 1` with `a` in slot `j` of `n + 1` slots.
pub fn embed_slot<T: Real>(a: &SquareMatrix<T>, n: usize, j: usize) -> Result<TensorOperator<T>> {
    if j > n {
        return Err(Error::SlotOutOfRange {
            index: j,
            slots: n + 1,
        });
    }
    let id = SquareMatrix::identity(a.dim());
    let factors: Vec<SquareMatrix<T>> = (0..=n)
        .map(|k| if k == j { a.clone() } else { id.clone() })
        .collect();
    TensorOperator::elementary(&factors)
}

/// Difference of adjacent slot lifts: `a^(j-1) - a^(j)`, `1 ≤ j ≤ n`.
pub fn nabla<T: Real>(a: &SquareMatrix<T>, n: usize, j: usize) -> Result<TensorOperator<T>> {
    if j == 0 || j > n {
        return Err(Error::SlotOutOfRange {
            index: j,
            slots: n + 1,
        });
    }
    Ok(embed_slot(a, n, j - 1)?.sub(&embed_slot(a, n, j)?))
}

/// Pairing `t(b₁ ⋯ bₙ) = μ(t · (b₁ ⊗ … ⊗ bₙ ⊗ 1))` where `μ` multiplies
/// the slots left to right. For elementary tensors this interleaves:
/// `(a₀ ⊗ … ⊗ aₙ)(b₁ ⋯ bₙ) = a₀ b₁ a₁ ⋯ bₙ aₙ`.
pub fn pair<T: Real>(t: &TensorOperator<T>, bs: &[SquareMatrix<T>]) -> Result<SquareMatrix<T>> {
    let d = t.base_dim();
    let slots = t.slots();
    if bs.len() + 1 != slots {
        return Err(Error::DimensionMismatch(format!(
            "pairing a {slots}-slot tensor needs {} matrices, got {}",
            slots - 1,
            bs.len()
        )));
    }
    if bs.iter().any(|b| b.dim() != d) {
        return Err(Error::DimensionMismatch("pairing matrices of wrong size".into()));
    }
    let big = t.matrix();
    let size = big.dim();
    let mut out = SquareMatrix::zeros(d);
    let mut rdig = vec![0usize; slots];
    let mut cdig = vec![0usize; slots];
    for r in 0..size {
        digits(r, d, &mut rdig);
        for c in 0..size {
            let v = big[(r, c)];
            if v.is_zero() {
                continue;
            }
            digits(c, d, &mut cdig);
            // entry picks b_{k+1}[col digit k, row digit k+1]
            let mut w = v;
            for (k, b) in bs.iter().enumerate() {
                w *= b[(cdig[k], rdig[k + 1])];
                if w.is_zero() {
                    break;
                }
            }
            out[(rdig[0], cdig[slots - 1])] += w;
        }
    }
    Ok(out)
}

/// Base-`d` digits of `x`, most significant (slot 0) first.
fn digits(mut x: usize, d: usize, out: &mut [usize]) {
    for slot in (0..out.len()).rev() {
        out[slot] = x % d;
        x /= d;
    }
}

/// `ad_a^k(b)` by nested commutators.
pub fn ad_power<T: Real>(a: &SquareMatrix<T>, b: &SquareMatrix<T>, k: usize) -> SquareMatrix<T> {
    let mut x = b.clone();
    for _ in 0..k {
        x = a.commutator(&x);
    }
    x
}

/// Pairs the unit tensor with `bs`; equals the plain product `b₁ ⋯ bₙ`.
pub fn product<T: Real>(d: usize, bs: &[SquareMatrix<T>]) -> SquareMatrix<T> {
    bs.iter()
        .fold(SquareMatrix::scalar(d, Complex::one()), |acc, b| acc.matmul(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type M = SquareMatrix<f64>;

    fn sample(seed: u64, d: usize) -> M {
        // small deterministic LCG, enough for unit tests
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        M::from_fn(d, |_, _| {
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            };
            cx(next(), next())
        })
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&M::identity(2), &M::identity(2)), M::identity(4));
        let d = M::from_real_diag(&[2.0, 3.0]);
        assert_eq!(kron(&d, &M::identity(2)), M::from_real_diag(&[2.0, 2.0, 3.0, 3.0]));
    }

    #[test]
    fn embed_slot_is_left_factor_for_slot_zero() {
        let a = sample(1, 2);
        let t = embed_slot(&a, 1, 0).unwrap();
        assert_eq!(t.matrix(), &kron(&a, &M::identity(2)));
        assert!(matches!(embed_slot(&a, 1, 2), Err(Error::SlotOutOfRange { .. })));
        assert!(matches!(nabla(&a, 2, 0), Err(Error::SlotOutOfRange { .. })));
        assert!(matches!(nabla(&a, 2, 3), Err(Error::SlotOutOfRange { .. })));
    }

    #[test]
    fn pairing_interleaves_elementary_tensors() {
        let a0 = sample(2, 2);
        let a1 = sample(3, 2);
        let b = sample(4, 2);
        let t = TensorOperator::elementary(&[a0.clone(), a1.clone()]).unwrap();
        let got = pair(&t, std::slice::from_ref(&b)).unwrap();
        let expect = a0.matmul(&b).matmul(&a1);
        assert!(got.rel_dist(&expect, 1.0) < 1e-14);
        // unit tensor
        let id = TensorOperator::identity(2, 2);
        assert!(pair(&id, std::slice::from_ref(&b)).unwrap().rel_dist(&b, 1.0) < 1e-15);
    }

    #[test]
    fn middle_slot_sandwich() {
        let a = sample(5, 2);
        let b1 = sample(6, 2);
        let b2 = sample(7, 2);
        let t = embed_slot(&a, 2, 1).unwrap();
        let got = pair(&t, &[b1.clone(), b2.clone()]).unwrap();
        assert!(got.rel_dist(&b1.matmul(&a).matmul(&b2), 1.0) < 1e-14);
    }

    #[test]
    fn pairing_arity_is_checked() {
        let t = TensorOperator::<f64>::identity(2, 3);
        assert!(matches!(pair(&t, &[M::identity(2)]), Err(Error::DimensionMismatch(_))));
    }
}
