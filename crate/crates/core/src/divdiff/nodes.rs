//! Scalar divided differences by recursion, explicit sum, contour integral
//! and simplex integral.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::function::{Domain, HolomorphicFunction};
use crate::contour::{trapezoid, Contour, TrapezoidOptions, TrapezoidResult};
use crate::error::{Error, Result};
use crate::quadrature::{simplex_integrate_converged, SIMPLEX_ORDERS};
use crate::scalar::Real;

pub const DEFAULT_COINCIDENCE_TOL: f64 = 1e-8;

/// Interpolation nodes `x₀, …, xₙ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSet<T> {
    nodes: Vec<Complex<T>>,
    coincidence_tol: T,
}

impl<T: Real> NodeSet<T> {
    pub fn new(nodes: Vec<Complex<T>>) -> Result<Self> {
        Self::with_tol(nodes, T::lit(DEFAULT_COINCIDENCE_TOL))
    }

    pub fn with_tol(nodes: Vec<Complex<T>>, coincidence_tol: T) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Invalid("node set must be non-empty".into()));
        }
        if nodes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(coincidence_tol >= T::zero()) {
            return Err(Error::Invalid("coincidence tolerance must be non-negative".into()));
        }
        Ok(Self {
            nodes,
            coincidence_tol,
        })
    }

    pub fn real(nodes: &[f64]) -> Result<Self> {
        Self::new(nodes.iter().map(|x| Complex::new(T::lit(*x), T::zero())).collect())
    }

    #[inline]
    pub fn nodes(&self) -> &[Complex<T>] {
        &self.nodes
    }

    /// Order `n` (one less than the node count).
    #[inline]
    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn coincidence_tol(&self) -> T {
        self.coincidence_tol
    }

    fn separation_floor(&self) -> T {
        let scale = self
            .nodes
            .iter()
            .fold(T::one(), |m, z| m.max(z.norm()));
        self.coincidence_tol * scale
    }

    /// `CoincidentNodes` for the first pair closer than the tolerance.
    pub fn check_distinct(&self) -> Result<()> {
        let floor = self.separation_floor();
        for i in 0..self.nodes.len() {
            for j in (i + 1)..self.nodes.len() {
                if (self.nodes[i] - self.nodes[j]).norm() <= floor {
                    return Err(Error::CoincidentNodes { i, j });
                }
            }
        }
        Ok(())
    }

    /// Nodes sorted by `(re, im)`; the explicit formula runs on this order.
    fn canonical(&self) -> Vec<Complex<T>> {
        let mut v = self.nodes.clone();
        v.sort_by(|a, b| {
            let o = |x: T, y: T| x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal);
            o(a.re, b.re).then(o(a.im, b.im))
        });
        v
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            nodes: perm.iter().map(|&i| self.nodes[i]).collect(),
            coincidence_tol: self.coincidence_tol,
        }
    }
}

/// Table of the recursion `([x₀…xₙ₋₁] − [x₁…xₙ])/(x₀ − xₙ)`.
pub fn dd_recursive<T: Real>(f: &HolomorphicFunction<T>, xs: &NodeSet<T>) -> Result<Complex<T>> {
    xs.check_distinct()?;
    let x = xs.nodes();
    let mut d: Vec<Complex<T>> = x.iter().map(|z| f.eval(*z)).collect();
    for j in 1..x.len() {
        for i in (j..x.len()).rev() {
            d[i] = (d[i] - d[i - 1]) / (x[i] - x[i - j]);
        }
    }
    Ok(d[x.len() - 1])
}

/// `Σₖ f(xₖ) ∏_{j≠k} (xₖ − xⱼ)⁻¹`, evaluated in a canonical node order so
/// that permuting the input cannot change a single bit.
pub fn dd_explicit<T: Real>(f: &HolomorphicFunction<T>, xs: &NodeSet<T>) -> Result<Complex<T>> {
    xs.check_distinct()?;
    let x = xs.canonical();
    let mut sum = Complex::zero();
    for (k, xk) in x.iter().enumerate() {
        let mut den = Complex::one();
        for (j, xj) in x.iter().enumerate() {
            if j != k {
                den *= xk - xj;
            }
        }
        sum += f.eval(*xk) / den;
    }
    Ok(sum)
}

/// Circle around the nodes that stays inside `domain`: the margin circle if
/// the domain admits it, otherwise the geometric mean of the node spread and
/// the distance to the boundary.
pub fn contour_within<T: Real>(points: &[Complex<T>], domain: &Domain<T>, margin: T) -> Result<Contour<T>> {
    let c = margin_circle(points, margin)?;
    if domain.admits_disc(c.center, c.radius) {
        return Ok(c);
    }
    let spread = points
        .iter()
        .fold(T::zero(), |m, z| m.max((z - c.center).norm()));
    let room = domain.boundary_distance(c.center);
    if !(room > spread) {
        return Err(Error::ContourViolation(format!(
            "no circle about {} encloses the points inside the domain",
            c.center
        )));
    }
    let radius = if spread > T::zero() {
        (spread * room).sqrt()
    } else {
        room * T::lit(0.5)
    };
    Contour::circle(c.center, radius)
}

/// Centre at the centroid, radius `(1+m)D + m(1+D)` where `D` is the largest
/// distance from the centroid.
pub fn margin_circle<T: Real>(points: &[Complex<T>], margin: T) -> Result<Contour<T>> {
    if points.is_empty() {
        return Err(Error::Invalid("no points to enclose".into()));
    }
    let n = T::from_usize_lossy(points.len());
    let center = points.iter().fold(Complex::zero(), |s, z| s + z) / n;
    let spread = points
        .iter()
        .fold(T::zero(), |m, z| m.max((z - center).norm()));
    let radius = (T::one() + margin) * spread + margin * (T::one() + spread);
    Contour::circle(center, radius)
}

fn contour_checks<T: Real>(f: &HolomorphicFunction<T>, xs: &NodeSet<T>, c: &Contour<T>) -> Result<()> {
    if !f.domain().admits_disc(c.center, c.radius) {
        return Err(Error::ContourViolation(format!(
            "circle about {} of radius {} leaves the domain of {}",
            c.center,
            c.radius,
            f.name()
        )));
    }
    let tight = T::lit(1e-6) * c.radius;
    for z in xs.nodes() {
        if !c.encloses(*z) {
            return Err(Error::ContourViolation(format!("node {z} is not enclosed")));
        }
        let d = c.distance(*z);
        if d < tight {
            return Err(Error::ContourTooTight { distance: d.as_f64() });
        }
    }
    Ok(())
}

/// `(2πi)⁻¹ ∮ f(ζ) ∏ⱼ (ζ − xⱼ)⁻¹ dζ`; repeated nodes are allowed.
pub fn dd_contour<T: Real>(f: &HolomorphicFunction<T>, xs: &NodeSet<T>, c: &Contour<T>) -> Result<Complex<T>> {
    Ok(dd_contour_report(f, xs, c, TrapezoidOptions::default())?.value)
}

/// Like [`dd_contour`] but keeps the estimate at every node count.
pub fn dd_contour_report<T: Real>(
    f: &HolomorphicFunction<T>,
    xs: &NodeSet<T>,
    c: &Contour<T>,
    opts: TrapezoidOptions,
) -> Result<TrapezoidResult<Complex<T>>> {
    contour_checks(f, xs, c)?;
    let x = xs.nodes();
    let g = |z: Complex<T>| -> Result<Complex<T>> {
        let den = x.iter().fold(Complex::one(), |p, xj| p * (z - xj));
        Ok(f.eval(z) / den)
    };
    trapezoid(c, &g, opts)
}

/// Lattice points `Σ sⱼ xⱼ` with `sⱼ = kⱼ/(per_axis − 1)`.
pub fn simplex_lattice<T: Real>(xs: &[Complex<T>], per_axis: usize) -> Vec<Complex<T>> {
    let steps = per_axis.saturating_sub(1).max(1) as u32;
    let inv = T::one() / T::lit(steps as f64);
    super::multiindex::Compositions::new(steps, xs.len())
        .map(|k| {
            k.parts()
                .iter()
                .zip(xs)
                .fold(Complex::zero(), |s, (kj, x)| s + x * (T::lit(*kj as f64) * inv))
        })
        .collect()
}

pub const HULL_SAMPLES_PER_AXIS: usize = 10;

/// `∫_{Δₙ} f^(n)(Σ sⱼ xⱼ) ds` by the Duffy-mapped product rule.
pub fn dd_hermite<T: Real>(f: &HolomorphicFunction<T>, xs: &NodeSet<T>) -> Result<Complex<T>> {
    let x = xs.nodes();
    let n = xs.order();
    for p in simplex_lattice(x, HULL_SAMPLES_PER_AXIS) {
        if !f.domain().contains(p) {
            return Err(Error::DomainViolation(format!(
                "convex hull of the nodes leaves the domain of {} near {p}",
                f.name()
            )));
        }
    }
    let extend = |p: &Complex<T>, j: usize, s: T| *p + x[j] * s;
    let leaf = |p: &Complex<T>, s: T| -> Complex<T> {
        f.deriv(n, *p + x[n] * s)
            .unwrap_or_else(|_| Complex::new(T::nan(), T::nan()))
    };
    let r = simplex_integrate_converged(n, &SIMPLEX_ORDERS, T::lit(1e-10), &Complex::zero(), &extend, &leaf)?;
    if !r.value.re.is_finite() || !r.value.im.is_finite() {
        return Err(Error::DomainViolation(format!(
            "derivative of {} not computable on the hull",
            f.name()
        )));
    }
    Ok(r.value)
}

/// Selects one of the four algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DdMethod {
    Recursive,
    Explicit,
    Contour,
    Hermite,
}

impl DdMethod {
    pub const ALL: [DdMethod; 4] = [Self::Recursive, Self::Explicit, Self::Contour, Self::Hermite];

    pub fn name(self) -> &'static str {
        match self {
            Self::Recursive => "recursive",
            Self::Explicit => "explicit",
            Self::Contour => "contour",
            Self::Hermite => "hermite",
        }
    }
}

impl std::str::FromStr for DdMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown method '{s}'")))
    }
}

/// Runs `method`; the contour defaults to [`contour_within`] with margin 0.1.
pub fn divided_difference<T: Real>(
    method: DdMethod,
    f: &HolomorphicFunction<T>,
    xs: &NodeSet<T>,
    contour: Option<&Contour<T>>,
) -> Result<Complex<T>> {
    match method {
        DdMethod::Recursive => dd_recursive(f, xs),
        DdMethod::Explicit => dd_explicit(f, xs),
        DdMethod::Hermite => dd_hermite(f, xs),
        DdMethod::Contour => match contour {
            Some(c) => dd_contour(f, xs, c),
            None => dd_contour(f, xs, &contour_within(xs.nodes(), f.domain(), T::lit(0.1))?),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type F = HolomorphicFunction<f64>;

    fn close(a: Complex<f64>, b: Complex<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn square_on_two_nodes() {
        let f = F::pow(2);
        let xs = NodeSet::real(&[1.0, 2.0]).unwrap();
        for m in DdMethod::ALL {
            let v = divided_difference(m, &f, &xs, None).unwrap();
            assert!(close(v, cx(3.0, 0.0), 1e-12), "{m:?}: {v}");
        }
    }

    #[test]
    fn constant_has_vanishing_differences() {
        let f = F::constant(cx(2.5, 0.0));
        let xs = NodeSet::real(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(dd_recursive(&f, &xs).unwrap(), cx(0.0, 0.0));
    }

    #[test]
    fn recursion_refuses_coincident_nodes() {
        let xs = NodeSet::real(&[0.0, 1.0, 1.0 + 1e-12]).unwrap();
        assert!(matches!(
            dd_recursive(&F::exp(), &xs),
            Err(Error::CoincidentNodes { i: 1, j: 2 })
        ));
        assert!(dd_explicit(&F::exp(), &xs).is_err());
    }

    #[test]
    fn confluent_contour_and_hermite() {
        let xs = NodeSet::real(&[0.0, 0.0]).unwrap();
        let c = Contour::circle(cx(0.0, 0.0), 1.0).unwrap();
        assert!(close(dd_contour(&F::exp(), &xs, &c).unwrap(), cx(1.0, 0.0), 1e-12));
        let mut fact = 1.0;
        for n in 0..5 {
            if n > 0 {
                fact *= n as f64;
            }
            let xs = NodeSet::real(&vec![0.0; n + 1]).unwrap();
            let v = dd_hermite(&F::exp(), &xs).unwrap();
            assert!(close(v, cx(1.0 / fact, 0.0), 1e-12), "n={n}");
        }
    }

    #[test]
    fn cubic_on_three_nodes() {
        let xs = NodeSet::real(&[1.0, 2.0, 3.0]).unwrap();
        let c = Contour::circle(cx(2.0, 0.0), 2.0).unwrap();
        assert!(close(dd_contour(&F::pow(3), &xs, &c).unwrap(), cx(6.0, 0.0), 1e-12));
    }

    #[test]
    fn exp_agreement() {
        let xs = NodeSet::real(&[0.1, 0.7, 1.3]).unwrap();
        let e = dd_explicit(&F::exp(), &xs).unwrap();
        let r = dd_recursive(&F::exp(), &xs).unwrap();
        let c = dd_contour(&F::exp(), &xs, &Contour::circle(cx(0.7, 0.0), 1.5).unwrap()).unwrap();
        let h = dd_hermite(&F::exp(), &NodeSet::real(&[0.0, 0.5, 1.0]).unwrap()).unwrap();
        let h_ref = dd_recursive(&F::exp(), &NodeSet::real(&[0.0, 0.5, 1.0]).unwrap()).unwrap();
        assert!(close(e, r, 1e-12));
        assert!(close(c, e, 1e-10));
        assert!(close(h, h_ref, 1e-9));
    }

    #[test]
    fn contour_errors() {
        let xs = NodeSet::real(&[0.0, 1.0]).unwrap();
        let tight = Contour::circle(cx(0.0, 0.0), 1.0 + 1e-9).unwrap();
        assert!(matches!(
            dd_contour(&F::exp(), &xs, &tight),
            Err(Error::ContourTooTight { .. })
        ));
        let small = Contour::circle(cx(0.0, 0.0), 0.5).unwrap();
        assert!(matches!(dd_contour(&F::exp(), &xs, &small), Err(Error::ContourViolation(_))));
        let around_pole = Contour::circle(cx(0.0, 0.0), 4.0).unwrap();
        assert!(matches!(
            dd_contour(&F::resolvent(cx(3.0, 0.0)), &xs, &around_pole),
            Err(Error::ContourViolation(_))
        ));
    }

    #[test]
    fn hermite_checks_hull() {
        let xs = NodeSet::real(&[-1.0, 2.0]).unwrap();
        assert!(matches!(
            dd_hermite(&F::resolvent(cx(0.0, 0.0)), &xs),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn fallback_contour_respects_pole() {
        let pts = [cx::<f64>(-1.0, 0.0), cx(1.0, 0.0)];
        let c = contour_within(&pts, &Domain::Punctured { point: cx(1.2, 0.0) }, 0.1).unwrap();
        assert!(c.radius > 1.0 && c.radius < 1.2);
        let m = margin_circle(&pts, 0.1).unwrap();
        assert!((m.radius - 1.3).abs() < 1e-15);
        let z = margin_circle(&[cx::<f64>(0.0, 0.0); 2], 0.1).unwrap();
        assert!((z.radius - 0.1).abs() < 1e-15);
    }
}
