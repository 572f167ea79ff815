//! Noncommutative Newton interpolation, Taylor formulas with remainder, the
//! ad-operator series and the Dyson expansion of the exponential.

use std::cmp::Ordering;

use num_complex::Complex;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::contour::{trapezoid, Contour, TrapezoidOptions};
use crate::divdiff::{Compositions, HolomorphicFunction, MultiIndex, SHELL_GROWTH_LIMIT};
use crate::error::{Error, Result};
use crate::funcalc::{dd_apply, funcalc, shared_contour};
use crate::quadrature::simplex_integrate_converged;
use crate::scalar::{re, Real};
use crate::tensor::{eigen_decompose_capped, matrix_exp, SquareMatrix};

pub const NEWTON_TOL: f64 = 1e-8;
pub const DYSON_TOL: f64 = 1e-7;
pub const AD_SERIES_TOL: f64 = 1e-6;
/// Shells below this fraction of the running sum end the ad series.
pub const SHELL_STOP: f64 = 1e-14;
/// Eigenbases with a worse condition number fall back to `matrix_exp`.
pub const DYSON_CONDITION_CAP: f64 = 1e4;
pub const DYSON_ORDERS: [usize; 10] = [4, 5, 6, 7, 8, 10, 12, 16, 24, 32];
pub const FD_STEP: f64 = 1e-4;
const MAX_PERMUTED: usize = 7;
const C2_SAMPLES: usize = 64;

const CONTOUR_OPTS: TrapezoidOptions = TrapezoidOptions {
    rel_tol: 1e-12,
    max_nodes: 1 << 12,
};

/// Partial sums of an expansion together with its remainders.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct ExpansionReport<T> {
    pub partial_sums: Vec<SquareMatrix<T>>,
    /// Norm of the remainder after each order; the exact remainder term
    /// where the expansion has one, otherwise `‖target − partial‖`.
    pub remainder_norms: Vec<T>,
    /// `‖target − partial‖` per order.
    pub differences: Vec<T>,
    /// `‖partial + remainder − target‖` per order (empty without an exact
    /// remainder term).
    pub identity_residuals: Vec<T>,
    pub target: SquareMatrix<T>,
    pub converged: bool,
    /// `C₂‖b‖` for Taylor expansions.
    pub bound_ratio: Option<T>,
}

impl<T: Real> ExpansionReport<T> {
    /// Final `‖target − partial‖`.
    pub fn residual(&self) -> T {
        self.differences.last().copied().unwrap_or_else(T::zero)
    }

    pub fn worst_identity_residual(&self) -> T {
        self.identity_residuals
            .iter()
            .fold(T::zero(), |m, x| m.max(*x))
    }
}

fn require_same_dim<T: Real>(mats: &[&SquareMatrix<T>]) -> Result<usize> {
    let d = mats
        .first()
        .ok_or_else(|| Error::Invalid("need at least one matrix".into()))?
        .dim();
    if mats.iter().any(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch("matrices differ in size".into()));
    }
    Ok(d)
}

/// `f(aₙ) = f(a₀) + Σⱼ ([a₀,…,aⱼ]f)((aₙ−a₀)⋯(aₙ−a_{j−1}))`, one partial sum
/// per order `j`.
pub fn newton_interpolate<T: Real>(f: &HolomorphicFunction<T>, mats: &[SquareMatrix<T>]) -> Result<ExpansionReport<T>> {
    require_same_dim(&mats.iter().collect::<Vec<_>>())?;
    let n = mats.len() - 1;
    let last = &mats[n];
    let target = funcalc(f, last, None)?;
    let mut sum = funcalc(f, &mats[0], None)?;
    let mut partial_sums = vec![sum.clone()];
    let increments: Vec<SquareMatrix<T>> = mats[..n].iter().map(|a| last - a).collect();
    for j in 1..=n {
        let term = dd_apply(f, &mats[..=j], &increments[..j], None)?;
        sum = &sum + &term;
        partial_sums.push(sum.clone());
    }
    let differences: Vec<T> = partial_sums.iter().map(|s| (&target - s).opnorm()).collect();
    let scale = target.opnorm().max(T::min_positive_value());
    let converged = *differences.last().unwrap() <= T::lit(NEWTON_TOL) * scale;
    Ok(ExpansionReport {
        partial_sums,
        remainder_norms: differences.clone(),
        differences,
        identity_residuals: Vec::new(),
        target,
        converged,
        bound_ratio: None,
    })
}

/// Both sides of the recursion
/// `([a₀…a_{n−1},a_{n+1}]f − [a₀…aₙ]f)(b₁⋯bₙ) = [a₀…a_{n+1}]f(b₁⋯bₙ·(a_{n+1}−aₙ))`
/// on one shared contour.
pub fn newton_recursion_terms<T: Real>(
    f: &HolomorphicFunction<T>,
    mats: &[SquareMatrix<T>],
    bs: &[SquareMatrix<T>],
) -> Result<(SquareMatrix<T>, SquareMatrix<T>)> {
    if mats.len() != bs.len() + 2 {
        return Err(Error::DimensionMismatch(format!(
            "{} perturbations need {} nodes, got {}",
            bs.len(),
            bs.len() + 2,
            mats.len()
        )));
    }
    let n = bs.len();
    let c = shared_contour(f, mats, None)?;
    let mut skip: Vec<SquareMatrix<T>> = mats[..n].to_vec();
    skip.push(mats[n + 1].clone());
    let lhs = &dd_apply(f, &skip, bs, Some(&c))? - &dd_apply(f, &mats[..=n], bs, Some(&c))?;
    let mut longer = bs.to_vec();
    longer.push(&mats[n + 1] - &mats[n]);
    let rhs = dd_apply(f, mats, &longer, Some(&c))?;
    Ok((lhs, rhs))
}

/// `‖LHS − RHS‖` of [`newton_recursion_terms`].
pub fn newton_recursion_check<T: Real>(f: &HolomorphicFunction<T>, mats: &[SquareMatrix<T>], bs: &[SquareMatrix<T>]) -> Result<T> {
    let (l, r) = newton_recursion_terms(f, mats, bs)?;
    Ok((&l - &r).opnorm())
}

/// `max_ζ ‖(ζ − a)⁻¹‖` over the contour.
pub fn resolvent_bound<T: Real>(a: &SquareMatrix<T>, c: &Contour<T>) -> Result<T> {
    let mut m = T::zero();
    for k in 0..C2_SAMPLES {
        m = m.max(a.resolvent(c.node(k, C2_SAMPLES))?.opnorm());
    }
    Ok(m)
}

/// Taylor formula of `f(a + b)` about `a` up to order `order`, with the exact
/// remainder `[a, …, a, a+b]f(b ⋯ b)` at every order.
pub fn taylor_expand<T: Real>(
    f: &HolomorphicFunction<T>,
    a: &SquareMatrix<T>,
    b: &SquareMatrix<T>,
    order: usize,
) -> Result<ExpansionReport<T>> {
    require_same_dim(&[a, b])?;
    let ab = a + b;
    let c = shared_contour(f, &[a.clone(), ab.clone()], None)?;
    let c2 = resolvent_bound(a, &c)?;
    let ratio = c2 * b.opnorm();
    let target = funcalc(f, &ab, None)?;
    let mut partial_sums = Vec::with_capacity(order + 1);
    let mut remainder_norms = Vec::with_capacity(order + 1);
    let mut identity_residuals = Vec::with_capacity(order + 1);
    let mut sum = SquareMatrix::zeros(a.dim());
    for j in 0..=order {
        let nodes = vec![a.clone(); j + 1];
        let bs = vec![b.clone(); j];
        sum = &sum + &dd_apply(f, &nodes, &bs, Some(&c))?;
        let mut mixed = nodes;
        mixed.push(ab.clone());
        let rem = dd_apply(f, &mixed, &vec![b.clone(); j + 1], Some(&c))?;
        identity_residuals.push((&(&sum + &rem) - &target).opnorm());
        remainder_norms.push(rem.opnorm());
        partial_sums.push(sum.clone());
    }
    let differences: Vec<T> = partial_sums.iter().map(|s| (&target - s).opnorm()).collect();
    let scale = target.opnorm().max(T::one());
    let exact = identity_residuals.iter().all(|r| *r <= T::lit(NEWTON_TOL) * scale);
    Ok(ExpansionReport {
        partial_sums,
        remainder_norms,
        differences,
        identity_residuals,
        target,
        converged: exact && ratio < T::one(),
        bound_ratio: Some(ratio),
    })
}

fn cmp_matrices<T: Real>(x: &SquareMatrix<T>, y: &SquareMatrix<T>) -> Ordering {
    for (u, v) in x.as_slice().iter().zip(y.as_slice()) {
        let o = u
            .re
            .partial_cmp(&v.re)
            .unwrap_or(Ordering::Equal)
            .then(u.im.partial_cmp(&v.im).unwrap_or(Ordering::Equal));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// `DⁿF(a)[b₁,…,bₙ] = Σ_σ [a,…,a]f(b_{σ1} ⋯ b_{σn})`.
///
/// The `bs` are sorted before summing, so the value does not depend on
/// their order.
pub fn nth_derivative<T: Real>(f: &HolomorphicFunction<T>, a: &SquareMatrix<T>, bs: &[SquareMatrix<T>]) -> Result<SquareMatrix<T>> {
    let n = bs.len();
    if n > MAX_PERMUTED {
        return Err(Error::Invalid(format!("derivative order {n} exceeds {MAX_PERMUTED}")));
    }
    let mut all: Vec<&SquareMatrix<T>> = vec![a];
    all.extend(bs);
    let d = require_same_dim(&all)?;
    if n == 0 {
        return funcalc(f, a, None);
    }
    let mut sorted = bs.to_vec();
    sorted.sort_by(cmp_matrices);
    let perms = permutations(n);
    let c = shared_contour(f, std::slice::from_ref(a), None)?;
    let g = |z: Complex<T>| -> Result<SquareMatrix<T>> {
        let r = a.resolvent(z)?;
        let rb: Vec<SquareMatrix<T>> = sorted.iter().map(|b| b.matmul(&r)).collect();
        let mut acc = SquareMatrix::zeros(d);
        for p in &perms {
            let mut t = r.clone();
            for &k in p {
                t = t.matmul(&rb[k]);
            }
            acc = &acc + &t;
        }
        Ok(acc.scale(f.eval(z)))
    };
    Ok(trapezoid(&c, &g, CONTOUR_OPTS)?.value)
}

/// Mixed central difference `∂_{s₁}⋯∂_{sₙ} F(a + Σ sᵢbᵢ)` at `s = 0`.
pub fn finite_difference_derivative<T: Real>(
    eval: &dyn Fn(&SquareMatrix<T>) -> Result<SquareMatrix<T>>,
    a: &SquareMatrix<T>,
    bs: &[SquareMatrix<T>],
    h: T,
) -> Result<SquareMatrix<T>> {
    let n = bs.len();
    let mut acc = SquareMatrix::zeros(a.dim());
    for mask in 0..(1usize << n) {
        let mut x = a.clone();
        let mut sign = T::one();
        for (i, b) in bs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                x.axpy_real(h, b);
            } else {
                x.axpy_real(-h, b);
                sign = -sign;
            }
        }
        acc.axpy_real(sign, &eval(&x)?);
    }
    Ok(acc.scale_real(T::one() / (T::lit(2.0) * h).powi(n as i32)))
}

/// `F(a) = e^a` oracle for [`finite_difference_derivative`].
pub fn exp_oracle<T: Real>(m: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
    Ok(matrix_exp(m))
}

/// Which side of the ad-monomials the derivative `f^(k)(a)` multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    LeftF,
    RightF,
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left-f" | "left" => Ok(Side::LeftF),
            "right-f" | "right" => Ok(Side::RightF),
            _ => Err(Error::Invalid(format!("unknown side {s:?}"))),
        }
    }
}

/// Direction of the partial sums in the denominator,
/// `α! ∏ⱼ (j + α₁ + … + αⱼ)` (front) or `α! ∏ⱼ (j + αₙ + … + α_{n−j+1})` (back).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartialSums {
    Front,
    Back,
}

impl Side {
    /// Denominator that makes the series equal the divided difference.
    pub fn partial_sums(self) -> PartialSums {
        match self {
            Side::LeftF => PartialSums::Back,
            Side::RightF => PartialSums::Front,
        }
    }
}

/// Partial sum of an ad series.
#[derive(Clone, Debug)]
pub struct AdSeries<T> {
    pub value: SquareMatrix<T>,
    pub shells: usize,
    pub last_shell_norm: T,
}

/// `Σ_α (−1)^{|α|} f^{(n+|α|)}(a) ad^{α₁}(b₁)⋯ad^{αₙ}(bₙ) / α?!` (left) or
/// `Σ_α ad^{α₁}(b₁)⋯ad^{αₙ}(bₙ) f^{(n+|α|)}(a) / α!?` (right), over
/// `|α| ≤ order_cap`.
pub fn taylor_series_ad<T: Real>(
    f: &HolomorphicFunction<T>,
    a: &SquareMatrix<T>,
    bs: &[SquareMatrix<T>],
    order_cap: u32,
    side: Side,
) -> Result<AdSeries<T>> {
    ad_series_with(f, a, bs, order_cap, side, side.partial_sums())
}

/// [`taylor_series_ad`] with an explicit denominator convention.
pub fn ad_series_with<T: Real>(
    f: &HolomorphicFunction<T>,
    a: &SquareMatrix<T>,
    bs: &[SquareMatrix<T>],
    order_cap: u32,
    side: Side,
    weights: PartialSums,
) -> Result<AdSeries<T>> {
    let mut all: Vec<&SquareMatrix<T>> = vec![a];
    all.extend(bs);
    let d = require_same_dim(&all)?;
    let n = bs.len();
    let c = shared_contour(f, std::slice::from_ref(a), None)?;
    if n == 0 {
        return Ok(AdSeries {
            value: funcalc(f, a, Some(&c))?,
            shells: 1,
            last_shell_norm: T::zero(),
        });
    }
    // ad^k(bᵢ) for k ≤ order_cap
    let ads: Vec<Vec<SquareMatrix<T>>> = bs
        .iter()
        .map(|b| {
            let mut v = vec![b.clone()];
            for k in 1..=order_cap as usize {
                let next = a.commutator(&v[k - 1]);
                v.push(next);
            }
            v
        })
        .collect();
    let mut sum = SquareMatrix::zeros(d);
    let mut last = T::zero();
    let mut grew = 0;
    let mut last_ratio = T::zero();
    let mut shells = 0;
    for m in 0..=order_cap {
        let mut mono = SquareMatrix::zeros(d);
        for alpha in Compositions::capped(m, n)? {
            let den = match weights {
                PartialSums::Front => alpha.bang_shriek_exact(),
                PartialSums::Back => alpha.shriek_bang_exact(),
            };
            let w = T::lit(1.0 / den.to_f64().unwrap_or(f64::INFINITY));
            mono.axpy_real(w, &ad_monomial(&ads, &alpha));
        }
        let deriv = funcalc(&f.derivative(n + m as usize), a, Some(&c))?;
        let mut shell = match side {
            Side::LeftF => deriv.matmul(&mono),
            Side::RightF => mono.matmul(&deriv),
        };
        if side == Side::LeftF && m % 2 == 1 {
            shell = -shell;
        }
        if !shell.is_finite() {
            return Err(Error::SeriesDiverging);
        }
        sum = &sum + &shell;
        shells += 1;
        let mag = shell.opnorm();
        // growth only counts while the shell ratio is not shrinking
        if m > 0 && mag > last && last > T::zero() {
            let ratio = mag / last;
            if ratio >= T::lit(0.99) * last_ratio {
                grew += 1;
                if grew >= SHELL_GROWTH_LIMIT {
                    return Err(Error::SeriesDiverging);
                }
            } else {
                grew = 0;
            }
            last_ratio = ratio;
        } else {
            grew = 0;
            last_ratio = T::zero();
        }
        last = mag;
        if m > 0 && mag <= T::lit(SHELL_STOP) * sum.opnorm() {
            break;
        }
    }
    Ok(AdSeries {
        value: sum,
        shells,
        last_shell_norm: last,
    })
}

fn ad_monomial<T: Real>(ads: &[Vec<SquareMatrix<T>>], alpha: &MultiIndex) -> SquareMatrix<T> {
    let mut it = alpha.parts().iter().zip(ads);
    let (&k0, v0) = it.next().expect("non-empty multi-index");
    let mut acc = v0[k0 as usize].clone();
    for (&k, v) in it {
        acc = acc.matmul(&v[k as usize]);
    }
    acc
}

/// Both ad series next to the contour value `[a,…,a]f(b₁⋯bₙ)`.
#[derive(Clone, Debug)]
pub struct AdCoherence<T> {
    pub left: AdSeries<T>,
    pub right: AdSeries<T>,
    pub direct: SquareMatrix<T>,
    /// Largest pairwise relative deviation of the three values.
    pub max_rel: T,
}

impl<T: Real> AdCoherence<T> {
    pub fn passed(&self) -> bool {
        self.max_rel <= T::lit(AD_SERIES_TOL)
    }
}

pub fn ad_series_coherence<T: Real>(
    f: &HolomorphicFunction<T>,
    a: &SquareMatrix<T>,
    bs: &[SquareMatrix<T>],
    order_cap: u32,
) -> Result<AdCoherence<T>> {
    let left = taylor_series_ad(f, a, bs, order_cap, Side::LeftF)?;
    let right = taylor_series_ad(f, a, bs, order_cap, Side::RightF)?;
    let direct = dd_apply(f, &vec![a.clone(); bs.len() + 1], bs, None)?;
    let floor = T::lit(1e-300);
    let max_rel = left
        .value
        .rel_dist(&right.value, floor)
        .max(left.value.rel_dist(&direct, floor))
        .max(right.value.rel_dist(&direct, floor));
    Ok(AdCoherence {
        left,
        right,
        direct,
        max_rel,
    })
}

/// `s ↦ e^{s·m}` as a diagonal factor in an eigenbasis, or a dense one.
enum ExpFactor<T> {
    Diagonal(Vec<Complex<T>>),
    Dense(SquareMatrix<T>),
}

impl<T: Real> ExpFactor<T> {
    fn at(&self, s: T) -> Factor<T> {
        match self {
            ExpFactor::Diagonal(l) => Factor::Diagonal(l.iter().map(|x| (*x * s).exp()).collect()),
            ExpFactor::Dense(m) => Factor::Dense(matrix_exp(&m.scale_real(s))),
        }
    }
}

enum Factor<T> {
    Diagonal(Vec<Complex<T>>),
    Dense(SquareMatrix<T>),
}

impl<T: Real> Factor<T> {
    fn right_of(&self, p: &SquareMatrix<T>) -> SquareMatrix<T> {
        match self {
            Factor::Diagonal(d) => p.mul_diag_right(d),
            Factor::Dense(m) => p.matmul(m),
        }
    }
}

/// `(V, V⁻¹, factor)` with `e^{sm} = V · factor(s) · V⁻¹`.
fn exp_basis<T: Real>(m: &SquareMatrix<T>) -> (SquareMatrix<T>, SquareMatrix<T>, ExpFactor<T>) {
    match eigen_decompose_capped(m, T::lit(DYSON_CONDITION_CAP)) {
        Ok(e) => {
            let l = e.eigenvalues().to_vec();
            (e.vectors, e.inverse_vectors, ExpFactor::Diagonal(l))
        }
        Err(_) => {
            let id = SquareMatrix::identity(m.dim());
            (id.clone(), id, ExpFactor::Dense(m.clone()))
        }
    }
}

/// Dyson expansion `e^{a+b} = e^a + Σ_{n≤N} ∫_{Δₙ} e^{s₀a} b ⋯ b e^{sₙa} ds`
/// plus the exact remainder `∫_{Δ_{N+1}} e^{s₀a} b ⋯ e^{s_N a} b e^{s_{N+1}(a+b)} ds`,
/// reported for every order up to `order`.
pub fn dyson_exp<T: Real>(a: &SquareMatrix<T>, b: &SquareMatrix<T>, order: usize) -> Result<ExpansionReport<T>> {
    let d = require_same_dim(&[a, b])?;
    let ab = a + b;
    let target = matrix_exp(&ab);
    let (v, vinv, fa) = exp_basis(a);
    let (w, winv, fab) = exp_basis(&ab);
    // all integrals in a's eigenbasis
    let bt = vinv.matmul(b).matmul(&v);
    let to_ab = vinv.matmul(&w);
    let from_ab = winv.matmul(&v);
    let tol = T::lit(1e-12);
    let root = SquareMatrix::identity(d);
    let extend = |p: &SquareMatrix<T>, _j: usize, s: T| fa.at(s).right_of(p).matmul(&bt);
    let leaf_a = |p: &SquareMatrix<T>, s: T| fa.at(s).right_of(p);
    let leaf_ab = |p: &SquareMatrix<T>, s: T| fab.at(s).right_of(&p.matmul(&to_ab)).matmul(&from_ab);
    let back = |m: &SquareMatrix<T>| v.matmul(m).matmul(&vinv);

    let mut partial_sums = Vec::with_capacity(order + 1);
    let mut remainder_norms = Vec::with_capacity(order + 1);
    let mut identity_residuals = Vec::with_capacity(order + 1);
    let mut sum = SquareMatrix::zeros(d);
    for n in 0..=order {
        let term = simplex_integrate_converged(n, &DYSON_ORDERS, tol, &root, &extend, &leaf_a)?.value;
        sum = &sum + &back(&term);
        let rem = back(&simplex_integrate_converged(n + 1, &DYSON_ORDERS, tol, &root, &extend, &leaf_ab)?.value);
        identity_residuals.push((&(&sum + &rem) - &target).opnorm());
        remainder_norms.push(rem.opnorm());
        partial_sums.push(sum.clone());
    }
    let differences: Vec<T> = partial_sums.iter().map(|s| (&target - s).opnorm()).collect();
    let scale = target.opnorm().max(T::min_positive_value());
    let converged = identity_residuals.iter().all(|r| *r <= T::lit(DYSON_TOL) * scale);
    Ok(ExpansionReport {
        partial_sums,
        remainder_norms,
        differences,
        identity_residuals,
        target,
        converged,
        bound_ratio: None,
    })
}

/// `e^a · Σ_{k≤N} bᵏ/k!`, the scalar Dyson partial sum.
pub fn scalar_taylor_partial<T: Real>(a: Complex<T>, b: Complex<T>, order: usize) -> Complex<T> {
    let mut term = Complex::<T>::one();
    let mut sum = Complex::<T>::zero();
    for k in 0..=order {
        if k > 0 {
            term = term * b / re(T::from_usize_lossy(k));
        }
        sum += term;
    }
    sum * a.exp()
}
