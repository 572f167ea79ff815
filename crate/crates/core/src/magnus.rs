//! Magnus integrator for `Y′ = A(t) Y`, driven by the nonlinear equation
//! `Ω′ = Σ Bₙ/n! ad_Ωⁿ(A)`, and a classical Runge–Kutta oracle.

use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_interval;
use crate::scalar::Real;
use crate::tensor::{matrix_exp, SquareMatrix};

pub const MAX_BERNOULLI: usize = 30;
pub const DEFAULT_ORDER: usize = 8;
/// Principal-branch safety radius for `‖Ω‖`.
pub const BRANCH_RADIUS: f64 = std::f64::consts::PI;
pub const RK_TOL: f64 = 1e-10;
const RK_MAX_STEPS: usize = 1 << 20;

/// Smooth matrix-valued function of time.
#[derive(Clone)]
pub struct TimeDependentMatrix<T> {
    dim: usize,
    eval: Arc<dyn Fn(T) -> SquareMatrix<T> + Send + Sync>,
}

impl<T> std::fmt::Debug for TimeDependentMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TimeDependentMatrix").field("dim", &self.dim).finish()
    }
}

impl<T: Real> TimeDependentMatrix<T> {
    pub fn new(dim: usize, eval: impl Fn(T) -> SquareMatrix<T> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
        }
    }

    pub fn constant(a: SquareMatrix<T>) -> Self {
        Self::new(a.dim(), move |_| a.clone())
    }

    /// `A(t) = [[2, t], [0, −1]]`.
    pub fn upper_triangular() -> Self {
        Self::new(2, |t| {
            let mut m = SquareMatrix::from_real_diag(&[2.0, -1.0]);
            m[(0, 1)] = Complex::new(t, T::zero());
            m
        })
    }

    /// `A(t) = −i(H₀ + t·H₁)`, generating a unitary flow for Hermitian `Hⱼ`.
    pub fn hermitian_perturbed(h0: SquareMatrix<T>, h1: SquareMatrix<T>) -> Self {
        let m = Complex::new(T::zero(), -T::one());
        Self::new(h0.dim(), move |t| {
            let mut x = h0.clone();
            x.axpy_real(t, &h1);
            x.scale(m)
        })
    }

    /// Piecewise-linear interpolation of samples at increasing times;
    /// constant beyond the ends.
    pub fn from_samples(times: Vec<T>, mats: Vec<SquareMatrix<T>>) -> Result<Self> {
        if times.is_empty() || times.len() != mats.len() {
            return Err(Error::Invalid("need one matrix per sample time".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Invalid("sample times must increase".into()));
        }
        let d = mats[0].dim();
        if mats.iter().any(|m| m.dim() != d) {
            return Err(Error::DimensionMismatch("samples differ in size".into()));
        }
        if mats.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::new(d, move |t| {
            let k = times.partition_point(|x| *x <= t);
            if k == 0 {
                return mats[0].clone();
            }
            if k == times.len() {
                return mats[k - 1].clone();
            }
            let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
            let mut m = mats[k - 1].scale_real(T::one() - w);
            m.axpy_real(w, &mats[k]);
            m
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: T) -> SquareMatrix<T> {
        (self.eval)(t)
    }
}

/// Bernoulli numbers `B₀ … B_K` with `B₁ = −1/2` (generating function
/// `x/(eˣ − 1)`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernoulliTable {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub exact: Vec<BigRational>,
    pub convention: String,
}

impl BernoulliTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Bernoulli numbers from `Σ_{k≤n} C(n+1, k) B_k = 0`.
pub fn bernoulli(k_max: usize) -> Result<BernoulliTable> {
    if k_max > MAX_BERNOULLI {
        return Err(Error::Invalid(format!("Bernoulli table capped at B_{MAX_BERNOULLI}")));
    }
    let mut exact: Vec<BigRational> = vec![BigRational::one()];
    for n in 1..=k_max {
        // row n+1 of Pascal's triangle
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for (k, b) in exact.iter().enumerate() {
            acc += b * BigRational::from_integer(binom.clone());
            binom = binom * BigInt::from(n + 1 - k) / BigInt::from(k + 1);
        }
        // binom is now C(n+1, n) = n+1
        exact.push(-acc / BigRational::from_integer(binom));
    }
    let values = exact.iter().map(|b| b.to_f64().unwrap_or(f64::NAN)).collect();
    Ok(BernoulliTable {
        values,
        exact,
        convention: "B1 = -1/2".into(),
    })
}

/// `Σ_{n≤order} (Bₙ/n!) ad_Ωⁿ(A)` together with the norm of the last
/// non-zero term.
pub fn magnus_rhs_with_tail<T: Real>(
    omega: &SquareMatrix<T>,
    a: &SquareMatrix<T>,
    order: usize,
    table: &BernoulliTable,
) -> Result<(SquareMatrix<T>, T)> {
    if order >= table.len() {
        return Err(Error::Invalid(format!(
            "order {order} needs Bernoulli numbers up to B_{order}, table has {}",
            table.len()
        )));
    }
    let mut sum = a.clone();
    let mut ad = a.clone();
    let mut fact = 1.0f64;
    let mut tail = a.opnorm();
    for n in 1..=order {
        ad = omega.commutator(&ad);
        fact *= n as f64;
        let c = table.values[n] / fact;
        if c != 0.0 {
            let term = ad.scale_real(T::lit(c));
            tail = term.opnorm();
            sum = &sum + &term;
        }
    }
    Ok((sum, tail))
}

/// `Σ_{n≤order} (Bₙ/n!) ad_Ωⁿ(A)` by nested commutators.
pub fn magnus_rhs<T: Real>(omega: &SquareMatrix<T>, a: &SquareMatrix<T>, order: usize, table: &BernoulliTable) -> Result<SquareMatrix<T>> {
    Ok(magnus_rhs_with_tail(omega, a, order, table)?.0)
}

/// Outcome of [`magnus_solve`].
#[derive(Clone, Debug)]
pub struct MagnusSolution<T> {
    pub omega: SquareMatrix<T>,
    pub y: SquareMatrix<T>,
    pub steps: usize,
    /// Times and `‖Ω‖` after every step.
    pub trajectory: Vec<(T, T)>,
    /// Largest norm of the last series term seen during the run.
    pub max_tail: T,
}

fn step_count<T: Real>(t_end: T, h: T) -> Result<usize> {
    if !(h > T::zero()) || !h.is_finite() || !(t_end >= T::zero()) || !t_end.is_finite() {
        return Err(Error::Invalid("need h > 0 and a finite t_end ≥ 0".into()));
    }
    let n = (t_end / h).as_f64().ceil().max(1.0);
    if n > RK_MAX_STEPS as f64 {
        return Err(Error::Invalid(format!("step {} gives more than {RK_MAX_STEPS} steps", h.as_f64())));
    }
    Ok(n as usize)
}

/// Classical RK4 on `Ω′ = Σ Bₙ/n! ad_Ωⁿ(A(t))`, `Ω(0) = 0`, with fixed
/// steps no larger than `h`; returns `Ω(t_end)` and `Y = exp(Ω)`.
pub fn magnus_solve<T: Real>(field: &TimeDependentMatrix<T>, t_end: T, h: T, order: usize) -> Result<MagnusSolution<T>> {
    let table = bernoulli(order)?;
    let steps = step_count(t_end, h)?;
    let h = t_end / T::from_usize_lossy(steps);
    let half = h / T::lit(2.0);
    let mut omega = SquareMatrix::zeros(field.dim());
    let mut trajectory = Vec::with_capacity(steps);
    let mut max_tail = T::zero();
    let mut rhs = |om: &SquareMatrix<T>, t: T| -> Result<SquareMatrix<T>> {
        let (v, tail) = magnus_rhs_with_tail(om, &field.eval(t), order, &table)?;
        max_tail = max_tail.max(tail);
        Ok(v)
    };
    for k in 0..steps {
        let t = h * T::from_usize_lossy(k);
        let k1 = rhs(&omega, t)?;
        let k2 = rhs(&axpy(&omega, half, &k1), t + half)?;
        let k3 = rhs(&axpy(&omega, half, &k2), t + half)?;
        let k4 = rhs(&axpy(&omega, h, &k3), t + h)?;
        let mut inc = &(&k1 + &k4) + &(&k2 + &k3).scale_real(T::lit(2.0));
        inc = inc.scale_real(h / T::lit(6.0));
        omega = &omega + &inc;
        let t_next = t + h;
        if !omega.is_finite() {
            return Err(Error::StepRejected(t_next.as_f64()));
        }
        let norm = omega.opnorm();
        if norm >= T::lit(BRANCH_RADIUS) {
            return Err(Error::BranchRadiusExceeded(norm.as_f64()));
        }
        trajectory.push((t_next, norm));
    }
    let y = matrix_exp(&omega);
    Ok(MagnusSolution {
        omega,
        y,
        steps,
        trajectory,
        max_tail,
    })
}

fn axpy<T: Real>(x: &SquareMatrix<T>, c: T, y: &SquareMatrix<T>) -> SquareMatrix<T> {
    let mut r = x.clone();
    r.axpy_real(c, y);
    r
}

/// Fixed-step RK4 for `Y′ = A(t) Y`, `Y(0) = I`.
pub fn rk4_fixed<T: Real>(field: &TimeDependentMatrix<T>, t_end: T, steps: usize) -> SquareMatrix<T> {
    let h = t_end / T::from_usize_lossy(steps);
    let half = h / T::lit(2.0);
    let mut y = SquareMatrix::identity(field.dim());
    for k in 0..steps {
        let t = h * T::from_usize_lossy(k);
        let am = field.eval(t + half);
        let k1 = field.eval(t).matmul(&y);
        let k2 = am.matmul(&axpy(&y, half, &k1));
        let k3 = am.matmul(&axpy(&y, half, &k2));
        let k4 = field.eval(t + h).matmul(&axpy(&y, h, &k3));
        let inc = (&(&k1 + &k4) + &(&k2 + &k3).scale_real(T::lit(2.0))).scale_real(h / T::lit(6.0));
        y = &y + &inc;
    }
    y
}

/// Outcome of [`rk_reference`].
#[derive(Clone, Debug)]
pub struct RkReference<T> {
    pub y: SquareMatrix<T>,
    pub steps: usize,
    pub last_change: T,
}

/// RK4 with step halving until successive answers agree to `1e-10`
/// (relative to `max(1, ‖Y‖)`), then one Richardson extrapolation.
pub fn rk_reference<T: Real>(field: &TimeDependentMatrix<T>, t_end: T, h: T) -> Result<RkReference<T>> {
    let mut steps = step_count(t_end, h)?;
    let mut prev = rk4_fixed(field, t_end, steps);
    loop {
        if steps * 2 > RK_MAX_STEPS {
            return Err(Error::QuadratureNoConvergence(format!(
                "RK4 reference still changing at {steps} steps"
            )));
        }
        steps *= 2;
        let cur = rk4_fixed(field, t_end, steps);
        if !cur.is_finite() {
            return Err(Error::StepRejected(t_end.as_f64()));
        }
        let diff = &cur - &prev;
        let change = diff.opnorm();
        if change <= T::lit(RK_TOL) * cur.opnorm().max(T::one()) {
            let y = axpy(&cur, T::one() / T::lit(15.0), &diff);
            return Ok(RkReference {
                y,
                steps,
                last_change: change,
            });
        }
        prev = cur;
    }
}

/// `|det Y − exp(∫₀ᵗ tr A)| / |exp(∫₀ᵗ tr A)|`.
pub fn liouville_residual<T: Real>(field: &TimeDependentMatrix<T>, t_end: T, y: &SquareMatrix<T>) -> T {
    let tr = |t: T| field.eval(t).trace();
    let integral: Complex<T> = integrate_interval(&tr, T::zero(), t_end, 16, 8);
    let expect = integral.exp();
    (y.det() - expect).norm() / expect.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::MatrixGen;
    use crate::scalar::cx;

    type M = SquareMatrix<f64>;

    #[test]
    fn bernoulli_values() {
        let b = bernoulli(12).unwrap();
        assert_eq!(b.exact[0], BigRational::one());
        assert_eq!(b.values[1], -0.5);
        assert_eq!(b.exact[2], BigRational::new(1.into(), 6.into()));
        assert_eq!(b.exact[4], BigRational::new((-1).into(), 30.into()));
        assert_eq!(b.exact[12], BigRational::new((-691).into(), 2730.into()));
        for k in (3..=11).step_by(2) {
            assert!(b.exact[k].is_zero());
        }
        assert!(bernoulli(31).is_err());
        assert_eq!(bernoulli(30).unwrap().len(), 31);
    }

    #[test]
    fn rhs_trivial_cases() {
        let t = bernoulli(8).unwrap();
        let a = M::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(magnus_rhs(&M::zeros(2), &a, 8, &t).unwrap(), a);
        let om = a.scale_real(0.3);
        assert!(magnus_rhs(&om, &a, 8, &t).unwrap().rel_dist(&a, 1.0) < 1e-15);
        assert!(magnus_rhs(&om, &a, 9, &t).is_err());
    }

    #[test]
    fn rhs_series_tail_is_small() {
        let mut g = MatrixGen::new(4, "magnus");
        let om: M = g.random::<f64>(2).scale_real(0.1);
        let a: M = g.random(2);
        let t = bernoulli(12).unwrap();
        let d = &magnus_rhs(&om, &a, 6, &t).unwrap() - &magnus_rhs(&om, &a, 12, &t).unwrap();
        assert!(d.opnorm() <= 1e-9);
    }

    #[test]
    fn constant_field() {
        let a0 = M::from_real_rows(&[&[0.1, 0.4], &[-0.3, 0.2]]);
        let s = magnus_solve(&TimeDependentMatrix::constant(a0.clone()), 1.0, 0.1, 8).unwrap();
        assert!(s.omega.rel_dist(&a0, 1.0) < 1e-14);
    }

    #[test]
    fn scalar_cosine_field() {
        let f = TimeDependentMatrix::new(1, |t: f64| M::scalar(1, cx(t.cos(), 0.0)));
        let s = magnus_solve(&f, 1.0, 0.01, 8).unwrap();
        assert!((s.omega[(0, 0)].re - 1f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn upper_triangular_field_matches_reference() {
        let f = TimeDependentMatrix::upper_triangular();
        let s = magnus_solve(&f, 1.0, 0.01, 30).unwrap();
        let r = rk_reference(&f, 1.0, 0.01).unwrap();
        assert!((&s.y - &r.y).opnorm() <= 1e-6, "{:e}", (&s.y - &r.y).opnorm());
    }

    #[test]
    fn reference_trivial_fields() {
        let z = rk_reference(&TimeDependentMatrix::constant(M::zeros(3)), 1.0, 0.1).unwrap();
        assert_eq!(z.y, M::identity(3));
        let a0 = M::from_real_rows(&[&[0.5, -1.0], &[0.7, 0.1]]);
        let r = rk_reference(&TimeDependentMatrix::constant(a0.clone()), 1.0, 0.1).unwrap();
        assert!(r.y.rel_dist(&matrix_exp(&a0), 1.0) <= 1e-9);
    }

    #[test]
    fn liouville_on_random_field() {
        let mut g = MatrixGen::new(8, "liouville");
        let a0: M = g.random(3);
        let a1: M = g.random(3);
        let f = TimeDependentMatrix::new(3, move |t: f64| {
            let mut m = a0.clone();
            m.axpy_real(t.sin(), &a1);
            m
        });
        let r = rk_reference(&f, 1.0, 0.05).unwrap();
        assert!(liouville_residual(&f, 1.0, &r.y) <= 1e-7);
    }

    #[test]
    fn commuting_field_integrates_exactly() {
        let mut g = MatrixGen::new(1, "commuting");
        let (p, q): (M, M) = g.commuting_pair(3);
        let (p2, q2) = (p.clone(), q.clone());
        let f = TimeDependentMatrix::new(3, move |t: f64| {
            let mut m = p2.scale_real(t.cos());
            m.axpy_real(t * t, &q2);
            m
        });
        let s = magnus_solve(&f, 1.0, 0.02, 8).unwrap();
        let mut expect = p.scale_real(1f64.sin());
        expect.axpy_real(1.0 / 3.0, &q);
        assert!(s.omega.rel_dist(&expect, 1.0) < 1e-9);
    }

    #[test]
    fn branch_radius_is_enforced() {
        let f = TimeDependentMatrix::constant(M::scalar(2, cx(0.0, 4.0)));
        assert!(matches!(magnus_solve(&f, 1.0, 0.1, 8), Err(Error::BranchRadiusExceeded(_))));
    }

    #[test]
    fn samples_interpolate_linearly() {
        let f = TimeDependentMatrix::from_samples(vec![0.0, 1.0], vec![M::zeros(1), M::scalar(1, cx(2.0, 0.0))]).unwrap();
        assert_eq!(f.eval(0.25)[(0, 0)].re, 0.5);
        assert_eq!(f.eval(3.0)[(0, 0)].re, 2.0);
        assert!(TimeDependentMatrix::from_samples(vec![1.0, 0.0], vec![M::zeros(1); 2]).is_err());
    }

    #[test]
    fn step_halving_order() {
        let f = TimeDependentMatrix::upper_triangular();
        let r = rk_reference(&f, 1.0, 0.01).unwrap();
        let e = |h: f64| (&magnus_solve(&f, 1.0, h, 30).unwrap().y - &r.y).opnorm();
        let (e1, e2) = (e(0.1), e(0.05));
        assert!(e1 / e2 >= 8.0, "{e1:e} {e2:e}");
    }
}
