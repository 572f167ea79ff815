//! Eigenvalues and eigendecompositions of dense complex matrices.
//!
//! Hermitian input goes through cyclic Jacobi rotations; everything else
//! through Hessenberg reduction and shifted QR to complex Schur form, with
//! eigenvectors recovered by back substitution on the triangular factor.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::SquareMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default cap on the eigenvector condition number.
pub const DEFAULT_CONDITION_CAP: f64 = 1e8;

/// Eigenvalues together with the eigenvector-matrix condition estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<Complex<T>>,
    pub conditioning: T,
}

/// `m = V · diag(λ) · V⁻¹`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T> {
    pub spectrum: Spectrum<T>,
    pub vectors: SquareMatrix<T>,
    pub inverse_vectors: SquareMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn eigenvalues(&self) -> &[Complex<T>] {
        &self.spectrum.eigenvalues
    }

    /// `V · diag(f(λ)) · V⁻¹`
    pub fn apply(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> SquareMatrix<T> {
        let fl: Vec<Complex<T>> = self.spectrum.eigenvalues.iter().map(|l| f(*l)).collect();
        self.vectors.mul_diag_right(&fl).matmul(&self.inverse_vectors)
    }

    pub fn reconstruct(&self) -> SquareMatrix<T> {
        self.apply(|l| l)
    }
}

/// Eigendecomposition with the default condition cap of `1e8`.
pub fn eigen_decompose<T: Real>(m: &SquareMatrix<T>) -> Result<EigenDecomposition<T>> {
    eigen_decompose_capped(m, T::lit(DEFAULT_CONDITION_CAP))
}

pub fn eigen_decompose_capped<T: Real>(
    m: &SquareMatrix<T>,
    cap: T,
) -> Result<EigenDecomposition<T>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.dim();
    let (vals, vecs) = if m.is_hermitian(T::epsilon() * T::lit(16.0)) {
        let (w, v) = hermitian_eigen(m);
        (w.into_iter().map(|x| Complex::new(x, T::zero())).collect(), v)
    } else {
        let schur = schur(m)?;
        let y = triangular_eigenvectors(&schur.t);
        (schur.t.diag(), schur.q.matmul(&y))
    };
    // unit columns
    let mut v = vecs;
    for j in 0..n {
        let norm = (0..n).map(|i| v[(i, j)].norm_sqr()).sum::<T>().sqrt();
        if norm > T::zero() {
            for i in 0..n {
                v[(i, j)] = v[(i, j)] / norm;
            }
        }
    }
    let vinv = match v.inverse() {
        Ok(x) => x,
        Err(_) => {
            return Err(Error::NonDiagonalizable {
                condition: f64::INFINITY,
                cap: cap.as_f64(),
            })
        }
    };
    let condition = v.opnorm() * vinv.opnorm();
    if !condition.is_finite() || condition > cap {
        return Err(Error::NonDiagonalizable {
            condition: condition.as_f64(),
            cap: cap.as_f64(),
        });
    }
    Ok(EigenDecomposition {
        spectrum: Spectrum {
            eigenvalues: vals,
            conditioning: condition,
        },
        vectors: v,
        inverse_vectors: vinv,
    })
}

/// Eigenvalues only; never requires diagonalizability.
pub fn eigenvalues<T: Real>(m: &SquareMatrix<T>) -> Result<Vec<Complex<T>>> {
    if m.is_hermitian(T::epsilon() * T::lit(16.0)) {
        return Ok(hermitian_eigenvalues(m)
            .into_iter()
            .map(|x| Complex::new(x, T::zero()))
            .collect());
    }
    Ok(schur(m)?.t.diag())
}

/// Complex Schur form `m = Q T Qᴴ` with `T` upper triangular.
#[derive(Clone, Debug)]
pub struct Schur<T> {
    pub q: SquareMatrix<T>,
    pub t: SquareMatrix<T>,
}

pub fn schur<T: Real>(m: &SquareMatrix<T>) -> Result<Schur<T>> {
    let n = m.dim();
    let (mut h, mut q) = hessenberg(m);
    if n == 1 {
        return Ok(Schur { q, t: h });
    }
    let eps = T::epsilon();
    let norm = m.max_abs().max(T::min_positive_value());
    let mut hi = n - 1;
    let mut iter = 0usize;
    let max_iter = 60 * n;
    while hi > 0 {
        // deflate from the bottom
        let sub = h[(hi, hi - 1)].norm();
        let diag = h[(hi, hi)].norm() + h[(hi - 1, hi - 1)].norm();
        if negligible(sub, diag, norm, eps) {
            h[(hi, hi - 1)] = Complex::zero();
            hi -= 1;
            iter = 0;
            continue;
        }
        let mut lo = hi - 1;
        while lo > 0 {
            let s = h[(lo, lo - 1)].norm();
            let d = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if negligible(s, d, norm, eps) {
                h[(lo, lo - 1)] = Complex::zero();
                break;
            }
            lo -= 1;
        }
        iter += 1;
        if iter > max_iter {
            return Err(Error::EigenNoConvergence);
        }
        let shift = if iter % 11 == 0 {
            // exceptional shift
            h[(hi, hi)] + Complex::new(h[(hi, hi - 1)].norm() * T::lit(0.75), h[(hi, hi - 1)].norm() * T::lit(0.4))
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_step(&mut h, &mut q, lo, hi, shift);
    }
    // clean strictly-lower part
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = Complex::zero();
        }
    }
    Ok(Schur { q, t: h })
}

#[inline]
fn negligible<T: Real>(sub: T, diag: T, norm: T, eps: T) -> bool {
    let reference = if diag > T::zero() { diag } else { norm };
    sub <= eps * reference
}

fn wilkinson_shift<T: Real>(
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    d: Complex<T>,
) -> Complex<T> {
    let half = T::lit(0.5);
    let tr = (a + d) * half;
    let disc = ((a - d) * half).powu(2) + b * c;
    let s = disc.sqrt();
    let l1 = tr + s;
    let l2 = tr - s;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Givens rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
fn givens<T: Real>(a: Complex<T>, b: Complex<T>) -> (T, Complex<T>) {
    let na = a.norm();
    let nb = b.norm();
    if nb == T::zero() {
        return (T::one(), Complex::zero());
    }
    if na == T::zero() {
        return (T::zero(), b.conj() / nb);
    }
    let r = na.hypot(nb);
    let c = na / r;
    let s = (a / na) * b.conj() / r;
    (c, s)
}

fn qr_step<T: Real>(
    h: &mut SquareMatrix<T>,
    q: &mut SquareMatrix<T>,
    lo: usize,
    hi: usize,
    shift: Complex<T>,
) {
    let n = h.dim();
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        // rows k, k+1
        for j in k..n {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        rots.push((c, s));
    }
    for (idx, k) in (lo..hi).enumerate() {
        let (c, s) = rots[idx];
        // columns k, k+1 multiplied by Gᴴ
        for i in 0..(k + 2) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
        for i in 0..n {
            let x = q[(i, k)];
            let y = q[(i, k + 1)];
            q[(i, k)] = x * c + y * s.conj();
            q[(i, k + 1)] = -x * s + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Householder reduction to upper Hessenberg form: `m = Q H Qᴴ`.
fn hessenberg<T: Real>(m: &SquareMatrix<T>) -> (SquareMatrix<T>, SquareMatrix<T>) {
    let n = m.dim();
    let mut h = m.clone();
    let mut q = SquareMatrix::identity(n);
    if n < 3 {
        return (h, q);
    }
    for k in 0..n - 2 {
        let x: Vec<Complex<T>> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if xnorm == T::zero() {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == T::zero() {
            Complex::one()
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for z in v.iter_mut() {
            *z = *z / vnorm;
        }
        let two = T::lit(2.0);
        // H <- P H, P = I - 2 v vᴴ acting on rows k+1..n
        for j in 0..n {
            let mut dot: Complex<T> = Complex::zero();
            for (r, vi) in v.iter().enumerate() {
                dot += vi.conj() * h[(k + 1 + r, j)];
            }
            for (r, vi) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= *vi * dot * two;
            }
        }
        // H <- H P, Q <- Q P
        for i in 0..n {
            let mut dot: Complex<T> = Complex::zero();
            for (r, vi) in v.iter().enumerate() {
                dot += h[(i, k + 1 + r)] * *vi;
            }
            for (r, vi) in v.iter().enumerate() {
                h[(i, k + 1 + r)] -= dot * vi.conj() * two;
            }
            let mut dq: Complex<T> = Complex::zero();
            for (r, vi) in v.iter().enumerate() {
                dq += q[(i, k + 1 + r)] * *vi;
            }
            for (r, vi) in v.iter().enumerate() {
                q[(i, k + 1 + r)] -= dq * vi.conj() * two;
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = Complex::zero();
        }
    }
    (h, q)
}

/// Columns are eigenvectors of the upper-triangular `t`.
fn triangular_eigenvectors<T: Real>(t: &SquareMatrix<T>) -> SquareMatrix<T> {
    let n = t.dim();
    let mut y = SquareMatrix::zeros(n);
    let small = T::epsilon() * t.max_abs().max(T::min_positive_value());
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = Complex::one();
        for j in (0..k).rev() {
            let mut s: Complex<T> = Complex::zero();
            for l in (j + 1)..=k {
                s += t[(j, l)] * y[(l, k)];
            }
            let mut den = t[(j, j)] - lambda;
            if den.norm() < small {
                den = Complex::new(small, T::zero());
            }
            y[(j, k)] = -s / den;
        }
    }
    y
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &SquareMatrix<T>) -> Vec<T> {
    hermitian_eigen(m).0
}

/// Cyclic Jacobi eigen-solver for Hermitian input; eigenvalues ascending,
/// eigenvectors as unitary columns.
pub fn hermitian_eigen<T: Real>(m: &SquareMatrix<T>) -> (Vec<T>, SquareMatrix<T>) {
    let n = m.dim();
    let mut a = m.clone();
    // symmetrise
    for i in 0..n {
        a[(i, i)] = Complex::new(a[(i, i)].re, T::zero());
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * T::lit(0.5);
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut v = SquareMatrix::identity(n);
    let total = a.frobenius_norm();
    if total == T::zero() {
        return (vec![T::zero(); n], v);
    }
    for _sweep in 0..64 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<T>()
            .sqrt();
        if off <= T::epsilon() * T::lit(0.1) * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= T::min_positive_value() {
                    continue;
                }
                let phase = apq / mag; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (T::lit(2.0) * mag);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // U = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q)
                let ph = phase.conj();
                let upp = Complex::new(c, T::zero());
                let upq = Complex::new(s, T::zero());
                let uqp = ph * (-s);
                let uqq = ph * c;
                // A <- A U
                for i in 0..n {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    a[(i, p)] = x * upp + y * uqp;
                    a[(i, q)] = x * upq + y * uqq;
                }
                // A <- Uᴴ A
                for j in 0..n {
                    let x = a[(p, j)];
                    let y = a[(q, j)];
                    a[(p, j)] = upp.conj() * x + uqp.conj() * y;
                    a[(q, j)] = upq.conj() * x + uqq.conj() * y;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = x * upp + y * uqp;
                    v[(i, q)] = x * upq + y * uqq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|i, j| a[(*i, *i)].re.partial_cmp(&a[(*j, *j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let vals: Vec<T> = order.iter().map(|i| a[(*i, *i)].re).collect();
    let vecs = SquareMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type M = SquareMatrix<f64>;

    fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn diagonal_input_has_identity_eigenvectors() {
        let d = M::from_real_diag(&[1.0, 2.0]);
        let e = eigen_decompose(&d).unwrap();
        assert_eq!(sorted(e.eigenvalues().to_vec()), vec![cx(1.0, 0.0), cx(2.0, 0.0)]);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((e.vectors[(i, j)].norm() - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn jordan_block_is_rejected() {
        let j = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(eigen_decompose(&j), Err(Error::NonDiagonalizable { .. })));
        // eigenvalues alone are still available
        let ev = eigenvalues(&j).unwrap();
        assert!(ev.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn nonnormal_reconstruction() {
        let m = M::from_fn(4, |i, j| cx((i * 4 + j) as f64 * 0.37 - 1.0, ((i + 2 * j) % 3) as f64 * 0.5));
        let e = eigen_decompose(&m).unwrap();
        assert!(e.reconstruct().rel_dist(&m, 1.0) < 1e-12);
    }

    #[test]
    fn upper_triangular_eigenvalues() {
        let m = M::from_real_rows(&[&[2.0, 0.3, 1.0], &[0.0, -1.0, 4.0], &[0.0, 0.0, 0.5]]);
        let ev = sorted(eigenvalues(&m).unwrap());
        let expect = [-1.0, 0.5, 2.0];
        for (z, e) in ev.iter().zip(expect) {
            assert!((z - cx(e, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_has_complex_pair() {
        let r = M::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let ev = sorted(eigenvalues(&r).unwrap());
        assert!((ev[0] - cx(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - cx(0.0, 1.0)).norm() < 1e-14);
    }
}
