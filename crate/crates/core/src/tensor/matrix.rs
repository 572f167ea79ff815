//! Dense complex square matrices.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Accumulate, Real};

/// Dense `d × d` complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, Complex::one())
    }

    /// `c · I`
    pub fn scalar(dim: usize, c: Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = c;
        }
        m
    }

    pub fn from_diag(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<Complex<T>> = diag.iter().map(|x| Complex::new(T::lit(*x), T::zero())).collect();
        Self::from_diag(&d)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries, checking shape and finiteness.
    pub fn from_row_major(dim: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    /// Real row-major rows, convenient for literals in tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| Complex::new(T::lit(rows[i][j]), T::zero()))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diag(&self) -> Vec<Complex<T>> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| f(*z)).collect(),
        }
    }

    /// Converts between scalar precisions.
    pub fn cast<U: Real>(&self) -> SquareMatrix<U> {
        SquareMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64())))
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.map(|z| z * c)
    }

    pub fn scale_real(&self, c: T) -> Self {
        self.map(|z| z * c)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![Complex::zero(); n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (k, a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let rrow = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += *a * *b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    /// `self · diag(d)`
    pub fn mul_diag_right(&self, d: &[Complex<T>]) -> Self {
        Self::from_fn(self.dim, |i, j| self[(i, j)] * d[j])
    }

    /// `diag(d) · self`
    pub fn mul_diag_left(&self, d: &[Complex<T>]) -> Self {
        Self::from_fn(self.dim, |i, j| d[i] * self[(i, j)])
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = Self::identity(self.dim);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> T {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<T>())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Operator 2-norm (largest singular value).
    pub fn opnorm(&self) -> T {
        let f = self.frobenius_norm();
        if f == T::zero() || !f.is_finite() {
            return f;
        }
        // scale to avoid overflow in the Gram matrix
        let s = self.scale_real(T::one() / f);
        let gram = s.adjoint().matmul(&s);
        let evals = super::eigen::hermitian_eigenvalues(&gram);
        let top = evals.iter().fold(T::zero(), |m, v| m.max(*v));
        top.max(T::zero()).sqrt() * f
    }

    pub fn is_hermitian(&self, rel_tol: T) -> bool {
        let scale = self.max_abs().max(T::min_positive_value());
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= rel_tol * scale)
        })
    }

    /// LU factorisation with partial pivoting.
    pub fn lu(&self) -> Result<Lu<T>> {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let scale = self.max_abs();
        let tiny = T::epsilon() * T::lit(1e-3) * scale.max(T::min_positive_value());
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= tiny {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                if f.is_zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
            }
        }
        Ok(Lu {
            n,
            lu: a,
            perm,
            sign,
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = self.lu()?;
        Ok(lu.solve(&Self::identity(self.dim)))
    }

    /// Solves `self · X = rhs`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        Ok(self.lu()?.solve(rhs))
    }

    pub fn det(&self) -> Complex<T> {
        match self.lu() {
            Ok(lu) => lu.det(),
            Err(_) => Complex::zero(),
        }
    }

    /// Resolvent `(z - self)^{-1}`.
    pub fn resolvent(&self, z: Complex<T>) -> Result<Self> {
        let shifted = &Self::scalar(self.dim, z) - self;
        shifted.inverse()
    }

    /// Relative distance in operator norm, normalised by `max(‖self‖, ‖other‖, floor)`.
    pub fn rel_dist(&self, other: &Self, floor: T) -> T {
        let den = self.opnorm().max(other.opnorm()).max(floor);
        if den == T::zero() {
            return T::zero();
        }
        (self - other).opnorm() / den
    }
}

/// Result of [`SquareMatrix::lu`].
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<Complex<T>>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    pub fn solve(&self, rhs: &SquareMatrix<T>) -> SquareMatrix<T> {
        let n = self.n;
        let mut x = SquareMatrix::zeros(n);
        for col in 0..n {
            let mut y: Vec<Complex<T>> = (0..n).map(|i| rhs[(self.perm[i], col)]).collect();
            for i in 0..n {
                let mut s = y[i];
                for j in 0..i {
                    s -= self.lu[i * n + j] * y[j];
                }
                y[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for j in (i + 1)..n {
                    s -= self.lu[i * n + j] * y[j];
                }
                y[i] = s / self.lu[i * n + i];
            }
            for i in 0..n {
                x[(i, col)] = y[i];
            }
        }
        x
    }

    pub fn det(&self) -> Complex<T> {
        let mut d = Complex::new(self.sign, T::zero());
        for i in 0..self.n {
            d *= self.lu[i * self.n + i];
        }
        d
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

macro_rules! elementwise {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a, T: Real> $trait<&'a SquareMatrix<T>> for &'a SquareMatrix<T> {
            type Output = SquareMatrix<T>;
            fn $method(self, rhs: &'a SquareMatrix<T>) -> SquareMatrix<T> {
                assert_eq!(self.dim, rhs.dim, "dimension mismatch");
                SquareMatrix {
                    dim: self.dim,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a $op *b).collect(),
                }
            }
        }
        impl<T: Real> $trait for SquareMatrix<T> {
            type Output = SquareMatrix<T>;
            fn $method(self, rhs: SquareMatrix<T>) -> SquareMatrix<T> {
                <&SquareMatrix<T> as $trait>::$method(&self, &rhs)
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl<'a, T: Real> Mul<&'a SquareMatrix<T>> for &'a SquareMatrix<T> {
    type Output = SquareMatrix<T>;
    fn mul(self, rhs: &'a SquareMatrix<T>) -> SquareMatrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> Mul for SquareMatrix<T> {
    type Output = SquareMatrix<T>;
    fn mul(self, rhs: SquareMatrix<T>) -> SquareMatrix<T> {
        self.matmul(&rhs)
    }
}

impl<T: Real> Neg for SquareMatrix<T> {
    type Output = SquareMatrix<T>;
    fn neg(self) -> SquareMatrix<T> {
        self.map(|z| -z)
    }
}

impl<T: Real> AddAssign<&SquareMatrix<T>> for SquareMatrix<T> {
    fn add_assign(&mut self, rhs: &SquareMatrix<T>) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += *b;
        }
    }
}

impl<T: Real> SubAssign<&SquareMatrix<T>> for SquareMatrix<T> {
    fn sub_assign(&mut self, rhs: &SquareMatrix<T>) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= *b;
        }
    }
}

impl<T: Real> Accumulate for SquareMatrix<T> {
    type Real = T;
    fn axpy(&mut self, w: Complex<T>, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += w * *b;
        }
    }
    fn scaled(&self, w: Complex<T>) -> Self {
        self.scale(w)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn size(&self) -> T {
        self.opnorm()
    }
    fn magnitude(&self) -> T {
        self.frobenius_norm()
    }
}

impl<T: fmt::Debug> fmt::Debug for SquareMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SquareMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = &self.data[i * self.dim + j];
                write!(f, "({:.6?}, {:.6?}) ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type M = SquareMatrix<f64>;

    #[test]
    fn shape_is_validated() {
        assert!(matches!(
            M::from_row_major(2, vec![cx(1.0, 0.0); 3]),
            Err(Error::DimensionMismatch(_))
        ));
        assert_eq!(
            M::from_row_major(1, vec![cx(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn inverse_and_det() {
        let a = M::from_real_rows(&[&[4.0, 1.0], &[2.0, 3.0]]);
        let inv = a.inverse().unwrap();
        assert!(a.matmul(&inv).rel_dist(&M::identity(2), 1.0) < 1e-15);
        assert!((a.det() - cx(10.0, 0.0)).norm() < 1e-14);
        let s = M::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(s.inverse(), Err(Error::Singular));
    }

    #[test]
    fn opnorm_of_known_matrices() {
        let d = M::from_real_diag(&[3.0, -5.0, 1.0]);
        assert!((d.opnorm() - 5.0).abs() < 1e-13);
        let j = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!((j.opnorm() - 1.0).abs() < 1e-14);
        // [[1,1],[0,1]] has singular values golden ratio and its inverse
        let g = M::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((g.opnorm() - phi).abs() < 1e-13);
    }
}
