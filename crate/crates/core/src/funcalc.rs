//! Holomorphic functional calculus on matrices: single and multivariate
//! contour integrals and tensor divided differences.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::One;

use crate::contour::{trapezoid, Contour, TrapezoidOptions};
use crate::divdiff::{contour_within, margin_circle, Domain, HolomorphicFunction, HULL_SAMPLES_PER_AXIS};
use crate::error::{Error, Result};
use crate::quadrature::simplex_integrate_converged;
use crate::scalar::{Accumulate, Real};
use crate::tensor::{eigenvalues, kron_all, SquareMatrix, TensorOperator};

pub const DEFAULT_MARGIN: f64 = 0.1;
pub const DEFAULT_COMM_TOL: f64 = 1e-10;
/// Largest arity of the tensor-grid rule.
pub const MAX_ARITY: usize = 4;
/// Largest per-axis node count of the tensor-grid rule.
pub const MAX_GRID_NODES: usize = 256;
pub const TENSOR_RULE_TOL: f64 = 1e-8;

/// Circle about the eigenvalue centroid with radius `(1+m)D + m(1+D)`.
pub fn contour_for<T: Real>(m: &SquareMatrix<T>, margin: T) -> Result<Contour<T>> {
    margin_circle(&eigenvalues(m)?, margin)
}

/// Contour around `spec(m)` inside `domain`.
pub fn contour_in_domain<T: Real>(m: &SquareMatrix<T>, domain: &Domain<T>) -> Result<Contour<T>> {
    contour_within(&eigenvalues(m)?, domain, T::lit(DEFAULT_MARGIN))
}

/// Checks that `c` lies in `domain` and encircles `spec(m)`.
pub fn validate_contour<T: Real>(c: &Contour<T>, spectrum: &[Complex<T>], domain: &Domain<T>) -> Result<()> {
    if !domain.admits_disc(c.center, c.radius) {
        return Err(Error::ContourViolation(format!(
            "circle about {} of radius {} leaves the function's domain",
            c.center, c.radius
        )));
    }
    c.check_encloses(spectrum, T::lit(1e-6))
}

/// Pairwise commuting matrices of one size.
#[derive(Clone, Debug)]
pub struct CommutingTuple<T> {
    mats: Vec<SquareMatrix<T>>,
    comm_tol: T,
}

impl<T: Real> CommutingTuple<T> {
    pub fn new(mats: Vec<SquareMatrix<T>>) -> Result<Self> {
        Self::with_tol(mats, T::lit(DEFAULT_COMM_TOL))
    }

    pub fn with_tol(mats: Vec<SquareMatrix<T>>, comm_tol: T) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::Invalid("empty tuple".into()));
        };
        let d = first.dim();
        if mats.iter().any(|m| m.dim() != d) {
            return Err(Error::DimensionMismatch("tuple matrices differ in size".into()));
        }
        let norms: Vec<T> = mats.iter().map(|m| m.opnorm()).collect();
        for i in 0..mats.len() {
            for j in (i + 1)..mats.len() {
                let c = mats[i].commutator(&mats[j]).opnorm();
                let scale = norms[i] * norms[j];
                if c > comm_tol * scale {
                    let rel = if scale > T::zero() { c / scale } else { c };
                    return Err(Error::NonCommutingTuple {
                        i,
                        j,
                        norm: rel.as_f64(),
                    });
                }
            }
        }
        Ok(Self { mats, comm_tol })
    }

    pub fn mats(&self) -> &[SquareMatrix<T>] {
        &self.mats
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].dim()
    }

    pub fn comm_tol(&self) -> T {
        self.comm_tol
    }
}

type MultiEval<T> = Arc<dyn Fn(&[Complex<T>]) -> Complex<T> + Send + Sync>;

/// `f: U₁ × ⋯ × Uₙ → ℂ`.
#[derive(Clone)]
pub struct MultivariateFunction<T> {
    eval: MultiEval<T>,
    domains: Vec<Domain<T>>,
}

impl<T: Real> fmt::Debug for MultivariateFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultivariateFunction")
            .field("domains", &self.domains)
            .finish()
    }
}

impl<T: Real> MultivariateFunction<T> {
    pub fn new(domains: Vec<Domain<T>>, eval: impl Fn(&[Complex<T>]) -> Complex<T> + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            domains,
        }
    }

    /// `(z₁, …, zₙ) ↦ f₁(z₁)⋯fₙ(zₙ)`.
    pub fn tensor(fs: &[HolomorphicFunction<T>]) -> Self {
        let owned: Vec<HolomorphicFunction<T>> = fs.to_vec();
        let domains = fs.iter().map(|f| *f.domain()).collect();
        Self::new(domains, move |z| {
            owned
                .iter()
                .zip(z)
                .fold(Complex::one(), |p, (f, zj)| p * f.eval(*zj))
        })
    }

    pub fn arity(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Domain<T>] {
        &self.domains
    }

    #[inline]
    pub fn eval(&self, z: &[Complex<T>]) -> Complex<T> {
        (self.eval)(z)
    }

    pub fn product(&self, other: &Self) -> Self {
        assert_eq!(self.arity(), other.arity());
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(self.domains.clone(), move |z| f(z) * g(z))
    }

    pub fn linear_combination(&self, c1: Complex<T>, other: &Self, c2: Complex<T>) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(self.domains.clone(), move |z| f(z) * c1 + g(z) * c2)
    }
}

/// Weighted resolvents `(ζₖ − c)(ζₖ − a)⁻¹/M` on the `m`-point rule.
fn weighted_resolvents<T: Real>(c: &Contour<T>, m: usize, a: &SquareMatrix<T>) -> Result<(Vec<Complex<T>>, Vec<SquareMatrix<T>>)> {
    let inv_m = T::one() / T::from_usize_lossy(m);
    let mut zs = Vec::with_capacity(m);
    let mut rs = Vec::with_capacity(m);
    for k in 0..m {
        let z = c.node(k, m);
        rs.push(a.resolvent(z)?.scale((z - c.center) * inv_m));
        zs.push(z);
    }
    Ok((zs, rs))
}

fn grid_sum<T: Real>(
    f: &MultivariateFunction<T>,
    grids: &[(Vec<Complex<T>>, Vec<SquareMatrix<T>>)],
    axis: usize,
    z: &mut Vec<Complex<T>>,
    d: usize,
) -> SquareMatrix<T> {
    let (zs, rs) = &grids[axis];
    let mut acc = SquareMatrix::zeros(d);
    for (zk, rk) in zs.iter().zip(rs) {
        z.push(*zk);
        if axis + 1 == grids.len() {
            acc.axpy(f.eval(z), rk);
        } else {
            let inner = grid_sum(f, grids, axis + 1, z, d);
            acc += &inner.matmul(rk);
        }
        z.pop();
    }
    acc
}

/// `∮⋯∮ f(z) ∏ⱼ (zⱼ − aⱼ)⁻¹ dz̸` on a tensor trapezoidal grid, doubling
/// every axis until successive results agree to `1e-10`.
pub fn funcalc_n<T: Real>(f: &MultivariateFunction<T>, a: &CommutingTuple<T>, cs: &[Contour<T>]) -> Result<SquareMatrix<T>> {
    let n = a.len();
    if n > MAX_ARITY {
        return Err(Error::ArityCap(n));
    }
    if f.arity() != n || cs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "function of {} variables, {n} matrices, {} contours",
            f.arity(),
            cs.len()
        )));
    }
    for ((c, m), dom) in cs.iter().zip(a.mats()).zip(f.domains()) {
        validate_contour(c, &eigenvalues(m)?, dom)?;
    }
    let d = a.dim();
    let tol = T::lit(1e-10);
    let mut m = cs.iter().map(|c| c.nodes).max().unwrap_or(Contour::<T>::MIN_NODES);
    let mut prev: Option<SquareMatrix<T>> = None;
    while m <= MAX_GRID_NODES {
        let grids = cs
            .iter()
            .zip(a.mats())
            .map(|(c, am)| weighted_resolvents(c, m, am))
            .collect::<Result<Vec<_>>>()?;
        let cur = grid_sum(f, &grids, 0, &mut Vec::with_capacity(n), d);
        if let Some(p) = &prev {
            let diff = (&cur - p).opnorm();
            let floor = T::lit(1e3) * T::epsilon() * cur.frobenius_norm();
            if diff <= tol * cur.opnorm() || diff <= floor {
                return Ok(cur);
            }
        }
        prev = Some(cur);
        m *= 2;
    }
    Err(Error::QuadratureNoConvergence(format!(
        "tensor grid not converged at {MAX_GRID_NODES} nodes per axis"
    )))
}

/// Single-variable calculus `f(a) = ∮ f(ζ)(ζ − a)⁻¹ dζ̸`; the contour
/// defaults to a margin circle inside the domain.
pub fn funcalc<T: Real>(f: &HolomorphicFunction<T>, a: &SquareMatrix<T>, c: Option<&Contour<T>>) -> Result<SquareMatrix<T>> {
    let spec = eigenvalues(a)?;
    let c = match c {
        Some(c) => {
            validate_contour(c, &spec, f.domain())?;
            *c
        }
        None => contour_within(&spec, f.domain(), T::lit(DEFAULT_MARGIN))?,
    };
    let g = |z: Complex<T>| -> Result<SquareMatrix<T>> { Ok(a.resolvent(z)?.scale(f.eval(z))) };
    let opts = TrapezoidOptions {
        rel_tol: 1e-12,
        max_nodes: 1 << 12,
    };
    Ok(trapezoid(&c, &g, opts)?.value)
}

/// Product of single-variable values, checked against the multivariate
/// calculus of the tensor function.
pub fn funcalc_elementary<T: Real>(fs: &[HolomorphicFunction<T>], a: &CommutingTuple<T>) -> Result<SquareMatrix<T>> {
    if fs.len() != a.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} functions for {} matrices",
            fs.len(),
            a.len()
        )));
    }
    let cs = fs
        .iter()
        .zip(a.mats())
        .map(|(f, m)| contour_in_domain(m, f.domain()))
        .collect::<Result<Vec<_>>>()?;
    let joint = funcalc_n(&MultivariateFunction::tensor(fs), a, &cs)?;
    let mut prod = SquareMatrix::identity(a.dim());
    for ((f, m), c) in fs.iter().zip(a.mats()).zip(&cs) {
        prod = prod.matmul(&funcalc(f, m, Some(c))?);
    }
    let dev = joint.rel_dist(&prod, T::lit(1e-300));
    if dev > T::lit(TENSOR_RULE_TOL) {
        return Err(Error::TensorRuleViolation(dev.as_f64()));
    }
    Ok(prod)
}

/// Shared contour for a family of matrices: around the union of spectra.
pub fn shared_contour<T: Real>(f: &HolomorphicFunction<T>, mats: &[SquareMatrix<T>], c: Option<&Contour<T>>) -> Result<Contour<T>> {
    let mut spec = Vec::new();
    for m in mats {
        spec.extend(eigenvalues(m)?);
    }
    match c {
        Some(c) => {
            validate_contour(c, &spec, f.domain())?;
            Ok(*c)
        }
        None => contour_within(&spec, f.domain(), T::lit(DEFAULT_MARGIN)),
    }
}

fn check_family<T: Real>(mats: &[SquareMatrix<T>]) -> Result<usize> {
    let first = mats
        .first()
        .ok_or_else(|| Error::Invalid("need at least one matrix".into()))?;
    let d = first.dim();
    if mats.iter().any(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch("matrices differ in size".into()));
    }
    Ok(d)
}

const DD_OPTS: TrapezoidOptions = TrapezoidOptions {
    rel_tol: 1e-12,
    max_nodes: 1 << 12,
};

/// `[a₀, …, aₙ]f = ∮ f(ζ) (ζ−a₀)⁻¹ ⊗ ⋯ ⊗ (ζ−aₙ)⁻¹ dζ̸`.
pub fn dd_tensor<T: Real>(f: &HolomorphicFunction<T>, mats: &[SquareMatrix<T>], c: Option<&Contour<T>>) -> Result<TensorOperator<T>> {
    let d = check_family(mats)?;
    let c = shared_contour(f, mats, c)?;
    let g = |z: Complex<T>| -> Result<SquareMatrix<T>> {
        let rs = mats.iter().map(|m| m.resolvent(z)).collect::<Result<Vec<_>>>()?;
        Ok(kron_all(&rs).scale(f.eval(z)))
    };
    let v = trapezoid(&c, &g, DD_OPTS)?.value;
    TensorOperator::new(d, mats.len(), v)
}

/// `∮ f(ζ)(ζ−a₀)⁻¹ b₁ (ζ−a₁)⁻¹ ⋯ bₙ (ζ−aₙ)⁻¹ dζ̸` in `d × d` arithmetic.
pub fn dd_apply<T: Real>(
    f: &HolomorphicFunction<T>,
    mats: &[SquareMatrix<T>],
    bs: &[SquareMatrix<T>],
    c: Option<&Contour<T>>,
) -> Result<SquareMatrix<T>> {
    let d = check_family(mats)?;
    if bs.len() + 1 != mats.len() || bs.iter().any(|b| b.dim() != d) {
        return Err(Error::DimensionMismatch(format!(
            "{} nodes need {} perturbations of size {d}",
            mats.len(),
            mats.len() - 1
        )));
    }
    let c = shared_contour(f, mats, c)?;
    let g = |z: Complex<T>| -> Result<SquareMatrix<T>> {
        let mut acc = mats[0].resolvent(z)?;
        for (b, m) in bs.iter().zip(&mats[1..]) {
            acc = acc.matmul(b).matmul(&m.resolvent(z)?);
        }
        Ok(acc.scale(f.eval(z)))
    };
    Ok(trapezoid(&c, &g, DD_OPTS)?.value)
}

/// Divided difference of commuting matrices, `∮ f(ζ) ∏ⱼ (ζ − aⱼ)⁻¹ dζ̸`.
pub fn dd_commuting<T: Real>(f: &HolomorphicFunction<T>, a: &CommutingTuple<T>) -> Result<SquareMatrix<T>> {
    let ones = vec![SquareMatrix::identity(a.dim()); a.len() - 1];
    dd_apply(f, a.mats(), &ones, None)
}

/// `∫_{Δₙ} f^(n)(Σ sⱼ aⱼ) ds` with the matrix-argument derivative computed
/// by the single-variable calculus at every quadrature node.
pub fn genocchi_hermite_matrix<T: Real>(f: &HolomorphicFunction<T>, a: &CommutingTuple<T>) -> Result<SquareMatrix<T>> {
    let n = a.len() - 1;
    let mats = a.mats();
    let dn = f.derivative(n);
    let d = a.dim();
    // sample the simplex: spec(Σ sⱼ aⱼ) must stay in the domain
    for s in &simplex_lattice_weights::<T>(n + 1) {
        let m = combination(mats, s);
        for z in eigenvalues(&m)? {
            if !f.domain().contains(z) {
                return Err(Error::DomainViolation(format!(
                    "spectrum of a convex combination reaches {z}, outside the domain of {}",
                    f.name()
                )));
            }
        }
    }
    let extend = |p: &SquareMatrix<T>, j: usize, s: T| {
        let mut q = p.clone();
        q.axpy_real(s, &mats[j]);
        q
    };
    let failed = std::sync::atomic::AtomicBool::new(false);
    let leaf = |p: &SquareMatrix<T>, s: T| -> SquareMatrix<T> {
        let mut q = p.clone();
        q.axpy_real(s, &mats[n]);
        funcalc(&dn, &q, None).unwrap_or_else(|_| {
            failed.store(true, std::sync::atomic::Ordering::Relaxed);
            SquareMatrix::zeros(d)
        })
    };
    let r = simplex_integrate_converged(n, &[8, 16, 32], T::lit(1e-9), &SquareMatrix::zeros(d), &extend, &leaf)?;
    if failed.load(std::sync::atomic::Ordering::Relaxed) {
        return Err(Error::DomainViolation(format!(
            "derivative of {} not computable at a quadrature node",
            f.name()
        )));
    }
    Ok(r.value)
}

/// Barycentric lattice weights with `HULL_SAMPLES_PER_AXIS` points per axis.
fn simplex_lattice_weights<T: Real>(parts: usize) -> Vec<Vec<T>> {
    let steps = (HULL_SAMPLES_PER_AXIS - 1) as u32;
    crate::divdiff::Compositions::new(steps, parts)
        .map(|k| k.parts().iter().map(|&x| T::lit(x as f64 / steps as f64)).collect())
        .collect()
}

fn combination<T: Real>(mats: &[SquareMatrix<T>], s: &[T]) -> SquareMatrix<T> {
    let mut m = SquareMatrix::zeros(mats[0].dim());
    for (a, w) in mats.iter().zip(s) {
        m.axpy_real(*w, a);
    }
    m
}

/// `r · max|f| · max‖(ζ−a)⁻¹‖²` over the contour: first-order bound on
/// `‖f(a) − f(a′)‖/‖a − a′‖` for small perturbations.
pub fn lipschitz_estimate<T: Real>(f: &HolomorphicFunction<T>, a: &SquareMatrix<T>, c: &Contour<T>, samples: usize) -> Result<T> {
    let mut fmax = T::zero();
    let mut rmax = T::zero();
    for k in 0..samples {
        let z = c.node(k, samples);
        fmax = fmax.max(f.eval(z).norm());
        rmax = rmax.max(a.resolvent(z)?.opnorm());
    }
    Ok(c.radius * fmax * rmax * rmax)
}
