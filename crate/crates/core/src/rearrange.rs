//! The holomorphic rearrangement identity
//! `∫₀^∞ f₀(uA) b₁ f₁(uA) ⋯ b_p f_p(uA) du = F(A^(0),…,A^(p))(b₁⋯b_p)
//!  = A⁻¹ G(Δ^(1), Δ^(1)Δ^(2), …)(b₁⋯b_p)`
//! with the sector geometry, kernels and modular operators it needs.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::divdiff::{Domain, HolomorphicFunction};
use crate::error::{Error, Result};
use crate::funcalc::funcalc;
use crate::quadrature::{integrate_half_line, AdaptiveOptions};
use crate::scalar::{cis, re, Real};
use crate::tensor::{eigen_decompose, eigenvalues, embed_slot, kron_all, matrix_exp, nabla, pair, SquareMatrix, TensorOperator};

pub const MAX_SLOTS: usize = 4;
/// Largest Kronecker dimension `d^(p+1)` handled.
pub const MAX_TENSOR_DIM: usize = 729;
pub const MODULAR_TOL: f64 = 1e-10;
pub const REARRANGE_TOL: f64 = 1e-6;

const KERNEL_OPTS: AdaptiveOptions = AdaptiveOptions {
    rel_tol: 1e-10,
    abs_tol: 0.0,
    max_depth: 30,
    max_panels: 4000,
};

/// Half-angle `δ ∈ (0, π/2)` of the strip `S_δ` and sectors `Λ_δ`, `Λ_{2δ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorConfig<T> {
    delta: T,
}

impl<T: Real> SectorConfig<T> {
    pub fn new(delta: T) -> Result<Self> {
        if !(delta > T::zero() && delta < T::FRAC_PI_2()) {
            return Err(Error::Invalid(format!(
                "sector half-angle {} must lie in (0, pi/2)",
                delta.as_f64()
            )));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// `|Im z| < δ`
    pub fn in_strip(&self, z: Complex<T>) -> bool {
        z.im.abs() < self.delta
    }

    /// `z ∈ Λ_{k·δ}`
    pub fn in_sector(&self, z: Complex<T>, k: T) -> bool {
        z != Complex::zero() && z.arg().abs() < k * self.delta
    }

    pub fn strip(&self) -> Domain<T> {
        Domain::Strip { delta: self.delta }
    }

    pub fn sector(&self) -> Domain<T> {
        Domain::Sector { delta: self.delta }
    }

    pub fn double_sector(&self) -> Domain<T> {
        Domain::Sector {
            delta: self.delta * T::lit(2.0),
        }
    }
}

/// Where a [`SectorFunction`] comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    /// `s^p (1+s)^(−q)`
    Builtin { p: f64, q: f64 },
    Custom { name: String },
}

type Eval<T> = Arc<dyn Fn(Complex<T>) -> Complex<T> + Send + Sync>;

/// Holomorphic function on the double sector with power-law decay
/// `|f(s)| ≲ |s|^(−α)` far out and `|f(s)| ≲ |s|^(−β)` near zero.
#[derive(Clone)]
pub struct SectorFunction<T> {
    eval: Eval<T>,
    pub decay_far: f64,
    pub decay_near: f64,
    pub family: Family,
}

impl<T> std::fmt::Debug for SectorFunction<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SectorFunction")
            .field("decay_far", &self.decay_far)
            .field("decay_near", &self.decay_near)
            .field("family", &self.family)
            .finish()
    }
}

impl<T: Real> SectorFunction<T> {
    pub fn new(
        name: impl Into<String>,
        decay_far: f64,
        decay_near: f64,
        eval: impl Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            decay_far,
            decay_near,
            family: Family::Custom { name: name.into() },
        }
    }

    /// `s^p (1+s)^(−q)`, with `α = q − p` and `β = −p`.
    pub fn builtin(p: f64, q: f64) -> Self {
        let pt = T::lit(p);
        let qt = T::lit(q);
        let p_int = p.fract() == 0.0 && p.abs() < 64.0;
        let q_int = q.fract() == 0.0 && q.abs() < 64.0;
        let eval = move |s: Complex<T>| {
            let head = if p == 0.0 {
                Complex::one()
            } else if p_int {
                s.powi(p as i32)
            } else {
                s.powf(pt)
            };
            let one_s = s + T::one();
            let tail = if q_int { one_s.powi(-(q as i32)) } else { one_s.powf(-qt) };
            head * tail
        };
        Self {
            eval: Arc::new(eval),
            decay_far: q - p,
            decay_near: -p,
            family: Family::Builtin { p, q },
        }
    }

    /// `(1+s)^(−k)`
    pub fn inverse_power(k: u32) -> Self {
        Self::builtin(0.0, k as f64)
    }

    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        (self.eval)(s)
    }

    pub fn name(&self) -> String {
        match &self.family {
            Family::Builtin { p, q } => format!("s^{p}(1+s)^-{q}"),
            Family::Custom { name } => name.clone(),
        }
    }

    /// `s ↦ f(u·s)` as a function on the sector `Λ_{2δ}` for the
    /// contour calculus.
    pub fn scaled_holomorphic(&self, u: T, cfg: &SectorConfig<T>) -> HolomorphicFunction<T> {
        let f = self.eval.clone();
        HolomorphicFunction::new(format!("{}(u.)", self.name()), cfg.double_sector(), move |s| f(s * u))
    }

    /// Samples rays in `Λ_{2δ}` and checks that `|f(s)|·|s|^α` stays bounded
    /// as `|s| → ∞` and `|f(s)|·|s|^β` as `|s| → 0`.
    pub fn check_decay(&self, cfg: &SectorConfig<T>) -> Result<()> {
        let width = cfg.delta().as_f64() * 2.0 * 0.95;
        for k in 0..5 {
            let phi = T::lit(width * (k as f64 / 2.0 - 1.0));
            let dir = cis(phi);
            let far = |r: f64| self.eval(dir * T::lit(r)).norm().as_f64() * r.powf(self.decay_far);
            let near = |r: f64| self.eval(dir * T::lit(r)).norm().as_f64() * r.powf(self.decay_near);
            let (f1, f2) = (far(1e3), far(1e6));
            let (n1, n2) = (near(1e-3), near(1e-6));
            if !(f2 <= 10.0 * f1 + 1e-300) || !f2.is_finite() {
                return Err(Error::DecayViolation(format!(
                    "{} decays slower than |s|^-{} along arg s = {:.3}",
                    self.name(),
                    self.decay_far,
                    phi.as_f64()
                )));
            }
            if !(n2 <= 10.0 * n1 + 1e-300) || !n2.is_finite() {
                return Err(Error::DecayViolation(format!(
                    "{} grows faster than |s|^-{} near 0 along arg s = {:.3}",
                    self.name(),
                    self.decay_near,
                    phi.as_f64()
                )));
            }
        }
        Ok(())
    }
}

/// `Σαⱼ > 1` and `Σβⱼ < 1`, the conditions under which the kernels exist.
pub fn decay_condition<T: Real>(fs: &[SectorFunction<T>]) -> Result<()> {
    let far: f64 = fs.iter().map(|f| f.decay_far).sum();
    let near: f64 = fs.iter().map(|f| f.decay_near).sum();
    if far <= 1.0 {
        return Err(Error::DecayViolation(format!("far-field exponents sum to {far}, need > 1")));
    }
    if near >= 1.0 {
        return Err(Error::DecayViolation(format!("near-field exponents sum to {near}, need < 1")));
    }
    Ok(())
}

/// Eigenvalues of `a` and those leaving the strip `S_δ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectorReport {
    pub passed: bool,
    pub eigenvalues: Vec<(f64, f64)>,
    pub violating: Vec<(f64, f64)>,
}

/// `spec(a) ⊂ S_δ`.
pub fn sector_check<T: Real>(a: &SquareMatrix<T>, delta: T) -> Result<SectorReport> {
    let cfg = SectorConfig::new(delta)?;
    let ev = eigenvalues(a)?;
    let pairs = |v: &[Complex<T>]| v.iter().map(|z| (z.re.as_f64(), z.im.as_f64())).collect::<Vec<_>>();
    let bad: Vec<Complex<T>> = ev.iter().copied().filter(|z| !cfg.in_strip(*z)).collect();
    Ok(SectorReport {
        passed: bad.is_empty(),
        eigenvalues: pairs(&ev),
        violating: pairs(&bad),
    })
}

/// `A = e^a` with the modular operators `Δ^(j) = exp(−∇_a^(j))` on `p+1`
/// slots and their running products.
#[derive(Clone, Debug)]
pub struct ModularFamily<T> {
    pub a: SquareMatrix<T>,
    pub exp_a: SquareMatrix<T>,
    pub deltas: Vec<TensorOperator<T>>,
    /// `Δ^(1) ⋯ Δ^(j)` for `j = 1..=p`
    pub products: Vec<TensorOperator<T>>,
    /// Worst relative residual of `A^(j) = A^(0) Δ^(1) ⋯ Δ^(j)`.
    pub modular_residual: T,
    pub cfg: SectorConfig<T>,
}

pub fn modular_family<T: Real>(a: &SquareMatrix<T>, p: usize, delta: T) -> Result<ModularFamily<T>> {
    let cfg = SectorConfig::new(delta)?;
    let report = sector_check(a, delta)?;
    if !report.passed {
        return Err(Error::SectorViolation(report.violating));
    }
    check_slots(a.dim(), p)?;
    let exp_a = matrix_exp(a);
    let mut deltas = Vec::with_capacity(p);
    let mut products = Vec::with_capacity(p);
    let a0 = embed_slot(&exp_a, p, 0)?;
    let mut worst = T::zero();
    for j in 1..=p {
        let dj = nabla(a, p, j)?.map_matrix(|m| matrix_exp(&-m.clone()));
        let prod = match products.last() {
            Some(prev) => TensorOperator::mul(prev, &dj),
            None => dj.clone(),
        };
        let lhs = embed_slot(&exp_a, p, j)?;
        let rhs = a0.mul(&prod);
        worst = worst.max(lhs.matrix().rel_dist(rhs.matrix(), T::min_positive_value()));
        for z in eigenvalues(prod.matrix())? {
            if !cfg.in_sector(z, T::lit(2.0)) {
                return Err(Error::SectorViolation(vec![(z.re.as_f64(), z.im.as_f64())]));
            }
        }
        deltas.push(dj);
        products.push(prod);
    }
    Ok(ModularFamily {
        a: a.clone(),
        exp_a,
        deltas,
        products,
        modular_residual: worst,
        cfg,
    })
}

fn check_slots(d: usize, p: usize) -> Result<()> {
    if p == 0 || p > MAX_SLOTS {
        return Err(Error::Invalid(format!("need 1 ≤ p ≤ {MAX_SLOTS}, got {p}")));
    }
    let size = (d as u128).pow(p as u32 + 1);
    if size > MAX_TENSOR_DIM as u128 {
        return Err(Error::Invalid(format!("tensor dimension {size} exceeds {MAX_TENSOR_DIM}")));
    }
    Ok(())
}

/// `F(s) = ∫₀^∞ f₀(u s₀) ⋯ f_p(u s_p) du`.
pub fn kernel_f<T: Real>(fs: &[SectorFunction<T>], s: &[Complex<T>]) -> Result<Complex<T>> {
    if fs.len() != s.len() || fs.is_empty() {
        return Err(Error::DimensionMismatch(format!("{} functions, {} points", fs.len(), s.len())));
    }
    decay_condition(fs)?;
    let g = |u: T| {
        fs.iter()
            .zip(s)
            .fold(Complex::<T>::one(), |acc, (f, x)| acc * f.eval(*x * u))
    };
    Ok(integrate_half_line(&g, KERNEL_OPTS)?.value)
}

/// `G(λ) = ∫₀^∞ f₀(u) f₁(u λ₁) ⋯ f_p(u λ_p) du`.
pub fn kernel_g<T: Real>(fs: &[SectorFunction<T>], lambda: &[Complex<T>]) -> Result<Complex<T>> {
    if fs.len() != lambda.len() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} functions need {} arguments, got {}",
            fs.len(),
            fs.len().saturating_sub(1),
            lambda.len()
        )));
    }
    let mut s = vec![Complex::one()];
    s.extend_from_slice(lambda);
    kernel_f(fs, &s)
}

fn check_inputs<T: Real>(fs: &[SectorFunction<T>], a: &SquareMatrix<T>, bs: &[SquareMatrix<T>]) -> Result<()> {
    if fs.len() != bs.len() + 1 {
        return Err(Error::DimensionMismatch(format!("{} functions need {} perturbations", fs.len(), fs.len() - 1)));
    }
    if bs.iter().any(|b| b.dim() != a.dim()) {
        return Err(Error::DimensionMismatch("perturbations differ in size from A".into()));
    }
    decay_condition(fs)
}

fn check_spectrum<T: Real>(a: &SquareMatrix<T>, cfg: &SectorConfig<T>) -> Result<()> {
    let bad: Vec<(f64, f64)> = eigenvalues(a)?
        .into_iter()
        .filter(|z| !cfg.in_sector(*z, T::one()))
        .map(|z| (z.re.as_f64(), z.im.as_f64()))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::SectorViolation(bad))
    }
}

/// `∫₀^∞ f₀(uA) b₁ f₁(uA) ⋯ b_p f_p(uA) du`, with `fⱼ(uA)` from the
/// eigendecomposition of `A` (contour calculus when `A` is not
/// diagonalizable).
pub fn rearrange_lhs<T: Real>(
    fs: &[SectorFunction<T>],
    a: &SquareMatrix<T>,
    bs: &[SquareMatrix<T>],
    cfg: &SectorConfig<T>,
) -> Result<SquareMatrix<T>> {
    check_inputs(fs, a, bs)?;
    check_spectrum(a, cfg)?;
    let d = a.dim();
    match eigen_decompose(a) {
        Ok(e) => {
            let mu = e.eigenvalues().to_vec();
            let bt: Vec<SquareMatrix<T>> = bs.iter().map(|b| e.inverse_vectors.matmul(b).matmul(&e.vectors)).collect();
            let g = |u: T| {
                let diag = |f: &SectorFunction<T>| mu.iter().map(|m| f.eval(*m * u)).collect::<Vec<_>>();
                let mut acc = SquareMatrix::from_diag(&diag(&fs[0]));
                for (f, b) in fs[1..].iter().zip(&bt) {
                    acc = acc.matmul(b).mul_diag_right(&diag(f));
                }
                acc
            };
            let v = integrate_half_line(&g, KERNEL_OPTS)?.value;
            Ok(e.vectors.matmul(&v).matmul(&e.inverse_vectors))
        }
        Err(Error::NonDiagonalizable { .. }) => {
            let failed = std::sync::atomic::AtomicBool::new(false);
            let g = |u: T| {
                let out = || -> Result<SquareMatrix<T>> {
                    let mut acc = funcalc(&fs[0].scaled_holomorphic(u, cfg), a, None)?;
                    for (f, b) in fs[1..].iter().zip(bs) {
                        acc = acc.matmul(b).matmul(&funcalc(&f.scaled_holomorphic(u, cfg), a, None)?);
                    }
                    Ok(acc)
                };
                out().unwrap_or_else(|_| {
                    failed.store(true, std::sync::atomic::Ordering::Relaxed);
                    SquareMatrix::zeros(d)
                })
            };
            let v = integrate_half_line(&g, KERNEL_OPTS)?.value;
            if failed.load(std::sync::atomic::Ordering::Relaxed) {
                return Err(Error::DomainViolation("matrix argument fell outside the double sector".into()));
            }
            Ok(v)
        }
        Err(e) => Err(e),
    }
}

/// `V^⊗ diag(φ(i)) V^{−⊗}` on `p+1` slots, `φ` indexed by multi-indices
/// into the eigenvalue list.
fn joint_calculus<T: Real>(
    v: &SquareMatrix<T>,
    vinv: &SquareMatrix<T>,
    slots: usize,
    phi: &dyn Fn(&[usize]) -> Result<Complex<T>>,
) -> Result<TensorOperator<T>> {
    let d = v.dim();
    let big_v = kron_all(&vec![v.clone(); slots]);
    let big_vinv = kron_all(&vec![vinv.clone(); slots]);
    let size = big_v.dim();
    let mut digits = vec![0usize; slots];
    let mut diag = Vec::with_capacity(size);
    for x in 0..size {
        let mut r = x;
        for k in (0..slots).rev() {
            digits[k] = r % d;
            r /= d;
        }
        diag.push(phi(&digits)?);
    }
    TensorOperator::new(d, slots, big_v.mul_diag_right(&diag).matmul(&big_vinv))
}

/// `F(A^(0), …, A^(p))(b₁ ⋯ b_p)` by the joint eigenbasis `V^{⊗(p+1)}` of
/// the slot lifts.
pub fn rearrange_rhs_f<T: Real>(
    fs: &[SectorFunction<T>],
    a: &SquareMatrix<T>,
    bs: &[SquareMatrix<T>],
    cfg: &SectorConfig<T>,
) -> Result<SquareMatrix<T>> {
    check_inputs(fs, a, bs)?;
    check_spectrum(a, cfg)?;
    check_slots(a.dim(), bs.len())?;
    let e = eigen_decompose(a)?;
    let mu = e.eigenvalues().to_vec();
    let phi = |idx: &[usize]| {
        let s: Vec<Complex<T>> = idx.iter().map(|&i| mu[i]).collect();
        kernel_f(fs, &s)
    };
    let t = joint_calculus(&e.vectors, &e.inverse_vectors, bs.len() + 1, &phi)?;
    pair(&t, bs)
}

/// `A⁻¹ G(Δ^(1), Δ^(1)Δ^(2), …)(b₁ ⋯ b_p)`, where `A = e^a`.
///
/// The spectra of the modular products are read off from their conjugation
/// into the joint eigenbasis.
pub fn rearrange_rhs_g<T: Real>(fs: &[SectorFunction<T>], family: &ModularFamily<T>, bs: &[SquareMatrix<T>]) -> Result<SquareMatrix<T>> {
    let a = &family.exp_a;
    check_inputs(fs, a, bs)?;
    let p = bs.len();
    if family.products.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "modular family has {} slots beyond the first, need {p}",
            family.products.len()
        )));
    }
    if family.modular_residual > T::lit(MODULAR_TOL) {
        return Err(Error::DomainViolation(format!(
            "modular products violate A^(j) = A^(0) D^(1)...D^(j) by {:.3e}",
            family.modular_residual.as_f64()
        )));
    }
    let e = match eigen_decompose(&family.a) {
        Ok(e) => e,
        Err(_) => eigen_decompose(a)?,
    };
    let big_v = kron_all(&vec![e.vectors.clone(); p + 1]);
    let big_vinv = kron_all(&vec![e.inverse_vectors.clone(); p + 1]);
    let spectra: Vec<Vec<Complex<T>>> = family
        .products
        .iter()
        .map(|m| big_vinv.matmul(m.matrix()).matmul(&big_v).diag())
        .collect();
    let d = a.dim();
    let phi = |idx: &[usize]| {
        let flat = idx.iter().fold(0usize, |acc, &i| acc * d + i);
        let lambda: Vec<Complex<T>> = spectra.iter().map(|s| s[flat]).collect();
        kernel_g(fs, &lambda)
    };
    let t = joint_calculus(&e.vectors, &e.inverse_vectors, p + 1, &phi)?;
    Ok(a.inverse()?.matmul(&pair(&t, bs)?))
}

/// The three sides of the identity and their pairwise relative gaps.
#[derive(Clone, Debug)]
pub struct RearrangeReport<T> {
    pub lhs: SquareMatrix<T>,
    pub rhs_f: SquareMatrix<T>,
    pub rhs_g: SquareMatrix<T>,
    /// `(lhs, F)`, `(lhs, G)`, `(F, G)`
    pub residuals: [T; 3],
    pub modular_residual: T,
}

impl<T: Real> RearrangeReport<T> {
    pub fn worst(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, x| m.max(*x))
    }

    pub fn passed(&self) -> bool {
        self.worst() <= T::lit(REARRANGE_TOL)
    }
}

/// All three sides for `A = e^a`.
pub fn rearrange_all<T: Real>(
    fs: &[SectorFunction<T>],
    a: &SquareMatrix<T>,
    bs: &[SquareMatrix<T>],
    delta: T,
) -> Result<RearrangeReport<T>> {
    let family = modular_family(a, bs.len(), delta)?;
    let cfg = family.cfg;
    let lhs = rearrange_lhs(fs, &family.exp_a, bs, &cfg)?;
    let rhs_f = rearrange_rhs_f(fs, &family.exp_a, bs, &cfg)?;
    let rhs_g = rearrange_rhs_g(fs, &family, bs)?;
    let floor = T::min_positive_value();
    let residuals = [
        lhs.rel_dist(&rhs_f, floor),
        lhs.rel_dist(&rhs_g, floor),
        rhs_f.rel_dist(&rhs_g, floor),
    ];
    Ok(RearrangeReport {
        lhs,
        rhs_f,
        rhs_g,
        residuals,
        modular_residual: family.modular_residual,
    })
}

/// `F(s)` next to `s₀⁻¹ G(s₁/s₀, …, s_p/s₀)`.
pub fn scaling_residual<T: Real>(fs: &[SectorFunction<T>], s: &[Complex<T>]) -> Result<T> {
    let f = kernel_f(fs, s)?;
    let lam: Vec<Complex<T>> = s[1..].iter().map(|x| *x / s[0]).collect();
    let g = kernel_g(fs, &lam)? / s[0];
    Ok((f - g).norm() / f.norm().max(T::min_positive_value()))
}

/// `|F(c·s) − c⁻¹F(s)| / |F(s)|`.
pub fn homogeneity_residual<T: Real>(fs: &[SectorFunction<T>], s: &[Complex<T>], c: T) -> Result<T> {
    let f = kernel_f(fs, s)?;
    let cs: Vec<Complex<T>> = s.iter().map(|x| *x * c).collect();
    let fc = kernel_f(fs, &cs)?;
    Ok((fc - f / re(c)).norm() / f.norm().max(T::min_positive_value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::MatrixGen;
    use crate::scalar::cx;

    type M = SquareMatrix<f64>;
    type SF = SectorFunction<f64>;

    fn inv(k: u32) -> SF {
        SF::inverse_power(k)
    }

    #[test]
    fn sector_check_examples() {
        let mut g = MatrixGen::new(1, "sector");
        let h: M = g.hermitian(3);
        assert!(sector_check(&h, 0.1).unwrap().passed);
        let r = sector_check(&M::scalar(1, cx(0.0, 1.0)), std::f64::consts::FRAC_PI_4).unwrap();
        assert!(!r.passed && r.violating == vec![(0.0, 1.0)]);
        assert!(sector_check(&h, 2.0).is_err());
    }

    #[test]
    fn strip_maps_into_sector() {
        let cfg = SectorConfig::new(0.7).unwrap();
        let a = M::from_real_rows(&[&[0.2, 1.0], &[0.0, -0.4]]).scale(cx(1.0, 0.5));
        let r = sector_check(&a, 0.7).unwrap();
        assert!(r.passed);
        for z in eigenvalues(&matrix_exp(&a)).unwrap() {
            assert!(cfg.in_sector(z, 1.0));
        }
    }

    #[test]
    fn trivial_modular_flow() {
        let f = modular_family(&M::zeros(2), 2, 0.3).unwrap();
        for p in &f.products {
            assert!(p.matrix().rel_dist(&M::identity(8), 1.0) < 1e-15);
        }
    }

    #[test]
    fn diagonal_modular_products() {
        let lam = [0.3, -0.5];
        let f = modular_family(&M::from_real_diag(&lam), 2, 0.3).unwrap();
        // slot digits (k0, k1, k2); Δ^(1)Δ^(2) carries e^{λ_{k2} − λ_{k0}}
        let m = f.products[1].matrix();
        for x in 0..8 {
            let (k0, k2) = (x >> 2, x & 1);
            assert!((m[(x, x)].re - (lam[k2] - lam[k0]).exp()).abs() < 1e-14);
        }
        assert!(m.rel_dist(&M::from_diag(&m.diag()), 1.0) < 1e-15);
    }

    #[test]
    fn modular_identity_on_hermitian() {
        let mut g = MatrixGen::new(2, "modular");
        let a: M = g.hermitian(2);
        let f = modular_family(&a, 2, 0.3).unwrap();
        assert!(f.modular_residual <= 1e-10);
    }

    #[test]
    fn kernel_closed_forms() {
        let fs = [inv(1), inv(1)];
        assert!((kernel_f(&fs, &[cx(1.0, 0.0), cx(1.0, 0.0)]).unwrap().re - 1.0).abs() < 1e-10);
        assert!((kernel_g(&fs, &[cx(1.0, 0.0)]).unwrap().re - 1.0).abs() < 1e-10);
        assert!((kernel_g(&fs, &[cx(2.0, 0.0)]).unwrap().re - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn scaling_and_homogeneity() {
        let fs = [inv(1), inv(2), inv(1)];
        let s = [cx(1.2, 0.3), cx(0.7, -0.2), cx(2.0, 0.1)];
        assert!(scaling_residual(&fs, &s).unwrap() < 1e-9);
        assert!(homogeneity_residual(&fs, &s, 3.5).unwrap() < 1e-9);
        let ones = [cx(1.0, 0.0); 3];
        let f1 = kernel_f(&fs, &ones).unwrap();
        assert!((f1 - kernel_g(&fs, &ones[1..]).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn exponent_gate() {
        assert!(matches!(kernel_f(&[inv(1)], &[cx(1.0, 0.0)]), Err(Error::DecayViolation(_))));
        let near = [SF::builtin(-1.0, 2.0), inv(1)];
        assert!(matches!(decay_condition(&near), Err(Error::DecayViolation(_))));
        assert!(decay_condition(&[inv(1), inv(1)]).is_ok());
        assert!(decay_condition(&[SF::builtin(-0.5, 1.0), inv(1)]).is_ok());
    }

    #[test]
    fn decay_sampling() {
        let cfg = SectorConfig::new(0.4).unwrap();
        assert!(SF::builtin(1.0, 3.0).check_decay(&cfg).is_ok());
        let lying = SF::new("liar", 2.0, 0.0, |s| (s + 1.0).inv());
        assert!(matches!(lying.check_decay(&cfg), Err(Error::DecayViolation(_))));
    }

    #[test]
    fn lhs_diagonal_example() {
        let cfg = SectorConfig::new(0.3).unwrap();
        let lam = [0.5, 2.0, 3.0];
        let a = M::from_real_diag(&lam);
        let v = rearrange_lhs(&[inv(1), inv(1)], &a, &[M::identity(3)], &cfg).unwrap();
        let expect = M::from_real_diag(&[2.0, 0.5, 1.0 / 3.0]);
        assert!(v.rel_dist(&expect, 1.0) < 1e-10);
    }

    #[test]
    fn identity_argument_factors_out() {
        let cfg = SectorConfig::new(0.3).unwrap();
        let fs = [inv(1), inv(1), inv(1)];
        let bs = [
            M::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]),
            M::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.5]]),
        ];
        let c = kernel_f(&fs, &[cx(1.0, 0.0); 3]).unwrap();
        let expect = bs[0].matmul(&bs[1]).scale(c);
        let id = M::identity(2);
        assert!(rearrange_lhs(&fs, &id, &bs, &cfg).unwrap().rel_dist(&expect, 1.0) < 1e-10);
        assert!(rearrange_rhs_f(&fs, &id, &bs, &cfg).unwrap().rel_dist(&expect, 1.0) < 1e-10);
        let fam = modular_family(&M::zeros(2), 2, 0.3).unwrap();
        assert!(rearrange_rhs_g(&fs, &fam, &bs).unwrap().rel_dist(&expect, 1.0) < 1e-10);
    }

    #[test]
    fn diagonal_rhs_patterns() {
        let lam = [0.4, -0.6];
        let a = M::from_real_diag(&lam);
        let fs = [inv(1), inv(1)];
        let fam = modular_family(&a, 1, 0.3).unwrap();
        let mu: Vec<f64> = lam.iter().map(|x| x.exp()).collect();
        let b = M::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let g = rearrange_rhs_g(&fs, &fam, std::slice::from_ref(&b)).unwrap();
        let f = rearrange_rhs_f(&fs, &fam.exp_a, std::slice::from_ref(&b), &fam.cfg).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let gij = kernel_g(&fs, &[cx(mu[j] / mu[i], 0.0)]).unwrap() / mu[i];
                let fij = kernel_f(&fs, &[cx(mu[i], 0.0), cx(mu[j], 0.0)]).unwrap();
                assert!((g[(i, j)] - gij * b[(i, j)]).norm() < 1e-10);
                assert!((f[(i, j)] - fij * b[(i, j)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn three_way_on_random_hermitian() {
        let mut g = MatrixGen::new(5, "rearrange");
        let a: M = g.hermitian(2);
        let bs: Vec<M> = (0..2).map(|_| g.random(2)).collect();
        let r = rearrange_all(&[inv(1), inv(1), inv(1)], &a, &bs, 0.3).unwrap();
        assert!(r.passed(), "{:?}", r.residuals);
    }

    #[test]
    fn sector_violation_reported() {
        let a = M::scalar(2, cx(0.0, 1.0));
        assert!(matches!(modular_family(&a, 1, 0.3), Err(Error::SectorViolation(_))));
    }
}
