//! Holomorphic functions with domain descriptors and derivative handles.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::contour::{trapezoid, Contour, TrapezoidOptions};
use crate::error::{Error, Result};
use crate::scalar::{re, Real};

/// Open set on which a function is holomorphic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain<T> {
    Entire,
    Disc { center: Complex<T>, radius: T },
    /// `|Im z| < delta`
    Strip { delta: T },
    /// `|arg z| < delta`, `0 < delta ≤ π`
    Sector { delta: T },
    /// `Re z > offset`
    HalfPlane { offset: T },
    /// `ℂ \ {point}`
    Punctured { point: Complex<T> },
}

impl<T: Real> Domain<T> {
    pub fn contains(&self, z: Complex<T>) -> bool {
        self.boundary_distance(z) > T::zero()
    }

    /// Distance from `z` to the complement; zero outside, `∞` for `Entire`.
    pub fn boundary_distance(&self, z: Complex<T>) -> T {
        let zero = T::zero();
        match *self {
            Domain::Entire => T::infinity(),
            Domain::Disc { center, radius } => (radius - (z - center).norm()).max(zero),
            Domain::Strip { delta } => (delta - z.im.abs()).max(zero),
            Domain::HalfPlane { offset } => (z.re - offset).max(zero),
            Domain::Punctured { point } => (z - point).norm(),
            Domain::Sector { delta } => {
                let r = z.norm();
                if r == zero {
                    return zero;
                }
                let phi = z.arg().abs();
                if phi >= delta {
                    return zero;
                }
                // nearest point on the boundary ray at angle ±delta
                let gap = delta - phi;
                if gap >= T::FRAC_PI_2() {
                    r
                } else {
                    r * gap.sin()
                }
            }
        }
    }

    /// Closed disc `|z − c| ≤ r` lies in the domain.
    pub fn admits_disc(&self, c: Complex<T>, r: T) -> bool {
        self.boundary_distance(c) > r
    }
}

type Eval<T> = Arc<dyn Fn(Complex<T>) -> Complex<T> + Send + Sync>;
type Derivs<T> = Arc<dyn Fn(usize, Complex<T>) -> Complex<T> + Send + Sync>;

/// Evaluation handle plus domain; derivatives are either supplied in closed
/// form or synthesised by a Cauchy integral.
#[derive(Clone)]
pub struct HolomorphicFunction<T> {
    name: String,
    eval: Eval<T>,
    derivs: Option<Derivs<T>>,
    domain: Domain<T>,
}

impl<T: Real> fmt::Debug for HolomorphicFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HolomorphicFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("closed_form_derivatives", &self.derivs.is_some())
            .finish()
    }
}

impl<T: Real> HolomorphicFunction<T> {
    pub fn new(
        name: impl Into<String>,
        domain: Domain<T>,
        eval: impl Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            derivs: None,
            domain,
        }
    }

    /// Attaches `(k, z) ↦ f^(k)(z)`; `k = 0` must agree with `eval`.
    pub fn with_derivs(mut self, d: impl Fn(usize, Complex<T>) -> Complex<T> + Send + Sync + 'static) -> Self {
        self.derivs = Some(Arc::new(d));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn has_derivs(&self) -> bool {
        self.derivs.is_some()
    }

    #[inline]
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        (self.eval)(z)
    }

    /// `f^(k)(z)`.
    pub fn deriv(&self, k: usize, z: Complex<T>) -> Result<Complex<T>> {
        if !self.domain.contains(z) {
            return Err(Error::DomainViolation(format!("{z} outside the domain of {}", self.name)));
        }
        if k == 0 {
            return Ok(self.eval(z));
        }
        if let Some(d) = &self.derivs {
            return Ok(d(k, z));
        }
        self.cauchy_derivative(k, z)
    }

    /// `k!/(2πi) ∮ f(ζ)(ζ − z)^{−k−1} dζ` on a circle of half the distance to
    /// the domain boundary (radius 1 for entire functions).
    pub fn cauchy_derivative(&self, k: usize, z: Complex<T>) -> Result<Complex<T>> {
        let dist = self.domain.boundary_distance(z);
        let rho = if dist.is_finite() { dist * T::lit(0.5) } else { T::one() };
        let nodes = (2 * (k + 1)).next_power_of_two().max(32);
        let c = Contour::new(z, rho, nodes)?;
        let kf = factorial_real::<T>(k);
        let g = |zeta: Complex<T>| -> Result<Complex<T>> {
            Ok(self.eval(zeta) / (zeta - z).powi(k as i32 + 1) * kf)
        };
        let r = trapezoid(&c, &g, TrapezoidOptions::default())?;
        Ok(r.value)
    }

    /// `f^(k)` as a function in its own right (closed form when available).
    pub fn derivative(&self, k: usize) -> Self {
        if k == 0 {
            return self.clone();
        }
        let base = self.clone();
        let mut g = Self::new(format!("d{k}({})", self.name), self.domain, move |z| {
            base.deriv(k, z)
                .unwrap_or_else(|_| Complex::new(T::nan(), T::nan()))
        });
        if let Some(d) = self.derivs.clone() {
            g = g.with_derivs(move |j, z| d(j + k, z));
        }
        g
    }

    /// Product `z ↦ f(z) g(z)` over the intersection of domains (the
    /// narrower descriptor is kept when they differ).
    pub fn product(&self, other: &Self) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let domain = narrower(self.domain, other.domain);
        Self::new(format!("{}*{}", self.name, other.name), domain, move |z| f(z) * g(z))
    }

    /// `c₁f + c₂g`.
    pub fn linear_combination(&self, c1: Complex<T>, other: &Self, c2: Complex<T>) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let domain = narrower(self.domain, other.domain);
        let mut h = Self::new(
            format!("{c1}*{}+{c2}*{}", self.name, other.name),
            domain,
            move |z| f(z) * c1 + g(z) * c2,
        );
        if let (Some(df), Some(dg)) = (self.derivs.clone(), other.derivs.clone()) {
            h = h.with_derivs(move |k, z| df(k, z) * c1 + dg(k, z) * c2);
        }
        h
    }

    pub fn exp() -> Self {
        Self::new("exp", Domain::Entire, |z: Complex<T>| z.exp()).with_derivs(|_, z| z.exp())
    }

    /// Principal logarithm on `ℂ \ (−∞, 0]`.
    pub fn log() -> Self {
        Self::new("log", Domain::Sector { delta: T::PI() }, |z: Complex<T>| z.ln()).with_derivs(|k, z| {
            if k == 0 {
                return z.ln();
            }
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            re(sign * factorial_real::<T>(k - 1)) / z.powi(k as i32)
        })
    }

    /// `z ↦ z^N` for any integer `N`.
    pub fn pow(n: i32) -> Self {
        let domain = if n >= 0 {
            Domain::Entire
        } else {
            Domain::Punctured { point: Complex::zero() }
        };
        Self::new(format!("pow:{n}"), domain, move |z: Complex<T>| powi(z, n)).with_derivs(move |k, z| {
            // falling factorial N(N−1)⋯(N−k+1)
            let mut c = T::one();
            for i in 0..k as i32 {
                c *= T::lit((n - i) as f64);
            }
            if c == T::zero() {
                Complex::zero()
            } else {
                powi(z, n - k as i32) * c
            }
        })
    }

    pub fn identity() -> Self {
        Self::pow(1)
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::new(format!("const:{c}"), Domain::Entire, move |_| c)
            .with_derivs(move |k, _| if k == 0 { c } else { Complex::zero() })
    }

    /// `z ↦ (λ − z)⁻¹`.
    pub fn resolvent(lambda: Complex<T>) -> Self {
        Self::new(
            format!("resolvent:{},{}", lambda.re, lambda.im),
            Domain::Punctured { point: lambda },
            move |z: Complex<T>| (lambda - z).inv(),
        )
        .with_derivs(move |k, z| (lambda - z).powi(-(k as i32) - 1) * factorial_real::<T>(k))
    }

    /// `z ↦ (1 + z)^{−K}`.
    pub fn rational(k_pow: u32) -> Self {
        let m1 = Complex::new(-T::one(), T::zero());
        Self::new(
            format!("rational:{k_pow}"),
            Domain::Punctured { point: m1 },
            move |z: Complex<T>| (z + T::one()).powi(-(k_pow as i32)),
        )
        .with_derivs(move |k, z| {
            // (−1)^k K(K+1)⋯(K+k−1)
            let mut c = T::one();
            for i in 0..k {
                c *= -T::lit((k_pow as usize + i) as f64);
            }
            (z + T::one()).powi(-(k_pow as i32) - k as i32) * c
        })
    }

    /// Parses `exp`, `log`, `id`, `pow:N`, `resolvent:RE,IM`, `rational:K`
    /// (also written `rational:(1+s)^-K`) and `const:RE,IM`.
    pub fn builtin(spec: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("unknown function '{spec}'"));
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (spec.trim(), None),
        };
        let pair = |a: &str| -> Result<Complex<T>> {
            let mut it = a.split(',').map(|x| x.trim().parse::<f64>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(r)), Some(Ok(i)), None) => Ok(Complex::new(T::lit(r), T::lit(i))),
                (Some(Ok(r)), None, None) => Ok(Complex::new(T::lit(r), T::zero())),
                _ => Err(bad()),
            }
        };
        match (head, arg) {
            ("exp", None) => Ok(Self::exp()),
            ("log", None) => Ok(Self::log()),
            ("id", None) => Ok(Self::identity()),
            ("pow", Some(a)) => a.parse::<i32>().map(Self::pow).map_err(|_| bad()),
            ("resolvent", Some(a)) => Ok(Self::resolvent(pair(a)?)),
            ("const", Some(a)) => Ok(Self::constant(pair(a)?)),
            ("rational", Some(a)) => {
                let k = a
                    .strip_prefix("(1+s)^-")
                    .or_else(|| a.strip_prefix("(1+z)^-"))
                    .unwrap_or(a);
                k.parse::<u32>().map(Self::rational).map_err(|_| bad())
            }
            _ => Err(bad()),
        }
    }
}

fn narrower<T: Real>(a: Domain<T>, b: Domain<T>) -> Domain<T> {
    match (a, b) {
        (Domain::Entire, d) | (d, Domain::Entire) => d,
        (d, _) => d,
    }
}

fn powi<T: Real>(z: Complex<T>, n: i32) -> Complex<T> {
    if n >= 0 {
        z.powu(n as u32)
    } else {
        z.inv().powu(n.unsigned_abs())
    }
}

pub(crate) fn factorial_real<T: Real>(k: usize) -> T {
    (2..=k).fold(T::one(), |acc, j| acc * T::from_usize_lossy(j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type F = HolomorphicFunction<f64>;

    #[test]
    fn closed_form_derivatives_match_cauchy() {
        let z = cx::<f64>(0.3, -0.2);
        for f in [
            F::exp(),
            F::log(),
            F::pow(5),
            F::pow(-2),
            F::resolvent(cx(3.0, 0.0)),
            F::rational(2),
        ] {
            for k in 0..6 {
                let exact = f.deriv(k, z).unwrap();
                let synth = f.cauchy_derivative(k, z).unwrap();
                assert!(
                    (exact - synth).norm() <= 1e-9 * exact.norm().max(1.0),
                    "{} k={k}: {exact} vs {synth}",
                    f.name()
                );
            }
        }
    }

    #[test]
    fn parses_builtins() {
        for s in ["exp", "log", "id", "pow:3", "pow:-1", "resolvent:3,0", "rational:2", "rational:(1+s)^-3", "const:1,0"] {
            assert!(F::builtin(s).is_ok(), "{s}");
        }
        assert!(F::builtin("sinh").is_err());
        assert!(F::builtin("pow:x").is_err());
        let r = F::builtin("rational:(1+s)^-3").unwrap();
        assert!((r.eval(cx(1.0, 0.0)) - cx(0.125, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn domain_distances() {
        let s = Domain::<f64>::Sector { delta: std::f64::consts::FRAC_PI_4 };
        assert!(s.contains(cx(1.0, 0.5)));
        assert!(!s.contains(cx(1.0, 1.5)));
        assert!((s.boundary_distance(cx(1.0, 0.0)) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let h = Domain::<f64>::Strip { delta: 0.5 };
        assert!(h.admits_disc(cx(3.0, 0.0), 0.4));
        assert!(!h.admits_disc(cx(3.0, 0.2), 0.4));
        let p = Domain::<f64>::Punctured { point: cx(3.0, 0.0) };
        assert!(p.admits_disc(cx(0.0, 0.0), 2.5));
        assert!(!p.admits_disc(cx(0.0, 0.0), 3.5));
        assert!(Domain::<f64>::Sector { delta: std::f64::consts::PI }.contains(cx(-1.0, 1e-3)));
    }

    #[test]
    fn derivative_outside_domain_fails() {
        assert!(matches!(
            F::log().deriv(1, cx(-1.0, 0.0)),
            Err(Error::DomainViolation(_))
        ));
    }
}
