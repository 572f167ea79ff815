//! Matrix exponential by scaling and squaring with the degree-13 Padé
//! approximant.

use num_complex::Complex;

use super::SquareMatrix;
use crate::scalar::Real;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

pub fn matrix_exp<T: Real>(m: &SquareMatrix<T>) -> SquareMatrix<T> {
    let n = m.dim();
    if n == 1 {
        return SquareMatrix::from_diag(&[m[(0, 0)].exp()]);
    }
    let norm = m.norm_1();
    if norm == T::zero() {
        return SquareMatrix::identity(n);
    }
    let theta = T::lit(THETA13);
    let s = if norm > theta {
        (norm / theta).log2().ceil().to_i32().unwrap_or(0).max(0)
    } else {
        0
    };
    let a = m.scale_real(T::lit(0.5f64.powi(s)));
    let b: Vec<T> = PADE13.iter().map(|x| T::lit(*x)).collect();
    let id = SquareMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let lin = |terms: &[(&SquareMatrix<T>, T)]| {
        let mut out = SquareMatrix::zeros(n);
        for (mat, c) in terms {
            out.axpy_real(*c, mat);
        }
        out
    };
    let u_inner = lin(&[(&a6, b[13]), (&a4, b[11]), (&a2, b[9])]);
    let u_outer = lin(&[(&a6, b[7]), (&a4, b[5]), (&a2, b[3]), (&id, b[1])]);
    let u = a.matmul(&(&a6.matmul(&u_inner) + &u_outer));
    let v_inner = lin(&[(&a6, b[12]), (&a4, b[10]), (&a2, b[8])]);
    let v_outer = lin(&[(&a6, b[6]), (&a4, b[4]), (&a2, b[2]), (&id, b[0])]);
    let v = &a6.matmul(&v_inner) + &v_outer;
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.solve(&p).unwrap_or_else(|_| taylor_fallback(&a));
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r
}

fn taylor_fallback<T: Real>(a: &SquareMatrix<T>) -> SquareMatrix<T> {
    let n = a.dim();
    let mut term = SquareMatrix::identity(n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = term.matmul(a).scale_real(T::one() / T::from_usize_lossy(k));
        sum += &term;
    }
    sum
}

impl<T: Real> SquareMatrix<T> {
    /// `self += c · other` for real `c`.
    pub fn axpy_real(&mut self, c: T, other: &SquareMatrix<T>) {
        let w = Complex::new(c, T::zero());
        for (a, b) in self.as_mut_slice().iter_mut().zip(other.as_slice()) {
            *a += w * *b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use crate::tensor::eigen_decompose;

    type M = SquareMatrix<f64>;

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(matrix_exp(&M::zeros(3)), M::identity(3));
    }

    #[test]
    fn exp_of_diagonal() {
        let e = matrix_exp(&M::from_real_diag(&[0.0, 1.0]));
        let expect = M::from_real_diag(&[1.0, std::f64::consts::E]);
        assert!(e.rel_dist(&expect, 1.0) < 1e-15);
    }

    #[test]
    fn exp_of_nilpotent_terminates() {
        let j = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e = matrix_exp(&j);
        let expect = M::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!((&e - &expect).max_abs() < 1e-15);
    }

    #[test]
    fn large_norm_uses_squaring() {
        // Hermitian with eigenvalues ±8
        let h = M::from_fn(2, |i, j| if i == j { cx(0.0, 0.0) } else { cx(8.0, 0.0) });
        let e = matrix_exp(&h);
        let oracle = eigen_decompose(&h).unwrap().apply(|z| z.exp());
        assert!(e.rel_dist(&oracle, 1.0) < 1e-13);
    }

    #[test]
    fn single_precision_instance() {
        let e: SquareMatrix<f32> = matrix_exp(&SquareMatrix::from_real_diag(&[0.0, 1.0]));
        assert!((e[(1, 1)].re - std::f32::consts::E).abs() < 1e-5);
    }
}
