//! Circular integration cycles and the trapezoidal rule on them.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, pairwise_sum, re, Accumulate, Real};

/// Positively oriented circle with a starting trapezoidal node count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour<T> {
    pub center: Complex<T>,
    pub radius: T,
    pub nodes: usize,
}

impl<T: Real> Contour<T> {
    pub const MIN_NODES: usize = 16;

    pub fn new(center: Complex<T>, radius: T, nodes: usize) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() || !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::ContourViolation(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        if nodes < Self::MIN_NODES || !nodes.is_power_of_two() {
            return Err(Error::ContourViolation(format!(
                "node count must be a power of two >= 16, got {nodes}"
            )));
        }
        Ok(Self {
            center,
            radius,
            nodes,
        })
    }

    pub fn circle(center: Complex<T>, radius: T) -> Result<Self> {
        Self::new(center, radius, Self::MIN_NODES)
    }

    /// Node `k` of the `m`-point rule.
    #[inline]
    pub fn node(&self, k: usize, m: usize) -> Complex<T> {
        let theta = T::TAU() * T::from_usize_lossy(k) / T::from_usize_lossy(m);
        self.center + cis(theta) * self.radius
    }

    /// Strictly inside the disc.
    pub fn encloses(&self, z: Complex<T>) -> bool {
        (z - self.center).norm() < self.radius
    }

    /// Distance from `z` to the circle.
    pub fn distance(&self, z: Complex<T>) -> T {
        ((z - self.center).norm() - self.radius).abs()
    }

    /// Checks that every point lies inside with relative clearance `margin`.
    pub fn check_encloses(&self, pts: &[Complex<T>], margin: T) -> Result<()> {
        for z in pts {
            if (z - self.center).norm() > self.radius * (T::one() - margin) {
                return Err(Error::ContourViolation(format!(
                    "point {z} not enclosed by circle |z - {}| = {}",
                    self.center, self.radius
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TrapezoidOptions {
    pub rel_tol: f64,
    pub max_nodes: usize,
}

impl Default for TrapezoidOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_nodes: 1 << 14,
        }
    }
}

/// Estimates at each node count, the last one being the answer.
#[derive(Clone, Debug)]
pub struct TrapezoidResult<V> {
    pub value: V,
    pub nodes: usize,
    pub history: Vec<(usize, V)>,
}

/// Raw trapezoidal sums `Σ g(ζₖ)(ζₖ − c)` over a subset of nodes.
fn raw_sum<T, V>(
    c: &Contour<T>,
    m: usize,
    ks: impl IndexedParallelIterator<Item = usize>,
    g: &(dyn Fn(Complex<T>) -> Result<V> + Sync),
) -> Result<(V, T)>
where
    T: Real,
    V: Accumulate<Real = T>,
{
    let vals: Vec<V> = ks
        .with_min_len(32)
        .map(|k| {
            let z = c.node(k, m);
            g(z).map(|v| v.scaled(z - c.center))
        })
        .collect::<Result<_>>()?;
    let mag = vals.iter().map(|v| v.magnitude()).fold(T::zero(), |a, b| a + b);
    Ok((pairwise_sum(&vals).expect("non-empty"), mag))
}

/// `(2πi)⁻¹ ∮ g(ζ) dζ` with the trapezoidal rule, doubling the node count
/// from `c.nodes` until successive estimates agree to `rel_tol`.
pub fn trapezoid<T, V>(
    c: &Contour<T>,
    g: &(dyn Fn(Complex<T>) -> Result<V> + Sync),
    opts: TrapezoidOptions,
) -> Result<TrapezoidResult<V>>
where
    T: Real,
    V: Accumulate<Real = T>,
{
    let mut m = c.nodes;
    let (mut sum, mut mag) = raw_sum(c, m, (0..m).into_par_iter(), g)?;
    let mut est = sum.scaled(re(T::one() / T::from_usize_lossy(m)));
    let mut history = vec![(m, est.clone())];
    let tol = T::lit(opts.rel_tol);
    while 2 * m <= opts.max_nodes {
        let m2 = 2 * m;
        let (odd, odd_mag) = raw_sum(c, m2, (0..m).into_par_iter().map(|k| 2 * k + 1), g)?;
        sum = sum.add(&odd);
        mag += odd_mag;
        let next = sum.scaled(re(T::one() / T::from_usize_lossy(m2)));
        let diff = next.sub(&est).size();
        let floor = T::lit(128.0) * T::epsilon() * mag / T::from_usize_lossy(m2);
        m = m2;
        est = next;
        history.push((m, est.clone()));
        if diff <= tol * est.size() || diff <= floor {
            return Ok(TrapezoidResult {
                value: est,
                nodes: m,
                history,
            });
        }
    }
    Err(Error::QuadratureNoConvergence(format!(
        "contour rule not converged with {m} nodes"
    )))
}

/// Single trapezoidal estimate with exactly `m` nodes.
pub fn trapezoid_fixed<T, V>(
    c: &Contour<T>,
    m: usize,
    g: &(dyn Fn(Complex<T>) -> Result<V> + Sync),
) -> Result<V>
where
    T: Real,
    V: Accumulate<Real = T>,
{
    let (sum, _) = raw_sum(c, m, (0..m).into_par_iter(), g)?;
    Ok(sum.scaled(re(T::one() / T::from_usize_lossy(m))))
}

/// Smallest distance from the `m`-point rule nodes to any of `pts`.
pub fn min_node_distance<T: Real>(c: &Contour<T>, m: usize, pts: &[Complex<T>]) -> T {
    let mut best = T::infinity();
    for k in 0..m {
        let z = c.node(k, m);
        for p in pts {
            best = best.min((z - p).norm());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn validates_shape() {
        assert!(Contour::<f64>::new(cx(0.0, 0.0), 0.0, 16).is_err());
        assert!(Contour::<f64>::new(cx(0.0, 0.0), 1.0, 24).is_err());
        assert!(Contour::<f64>::new(cx(0.0, 0.0), 1.0, 8).is_err());
        assert!(Contour::<f64>::new(cx(0.0, 0.0), 1.0, 32).is_ok());
    }

    #[test]
    fn cauchy_formula_for_exp() {
        let c = Contour::circle(cx::<f64>(0.0, 0.0), 2.0).unwrap();
        let g = |z: Complex<f64>| Ok(z.exp() / (z - 0.5));
        let r = trapezoid(&c, &g, TrapezoidOptions::default()).unwrap();
        assert!((r.value - cx(0.5f64.exp(), 0.0)).norm() < 1e-13);
        assert!(r.history.len() >= 2);
    }

    #[test]
    fn residue_outside_is_ignored() {
        let c = Contour::circle(cx::<f64>(0.0, 0.0), 1.0).unwrap();
        let g = |z: Complex<f64>| Ok(Complex::new(1.0, 0.0) / (z - 3.0));
        let r = trapezoid(&c, &g, TrapezoidOptions::default()).unwrap();
        assert!(r.value.norm() < 1e-14);
    }
}
