//! Gauss–Legendre rules, a Duffy-mapped product rule on the standard
//! simplex, and adaptive Gauss–Kronrod on the half line.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, re, Accumulate, Real};

/// Default per-axis order schedule for simplex integrals.
pub const SIMPLEX_ORDERS: [usize; 5] = [8, 16, 32, 64, 128];

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

static RULES: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(order: usize) -> Rule {
    assert!(order > 0, "quadrature order must be positive");
    let cache = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("rule cache").get(&order) {
        return r.clone();
    }
    let rule = Arc::new(compute_gauss_legendre(order));
    cache
        .lock()
        .expect("rule cache")
        .insert(order, rule.clone());
    rule
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // P_n(z) and P_{n-1}(z) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// `∫_{Δₙ} g(s) ds` over `Δₙ = {s ∈ [0,1]^{n+1} : Σ sⱼ = 1}` with the
/// product rule of the given per-axis order.
///
/// The integrand is supplied incrementally: `extend(prefix, j, s_j)` appends
/// coordinate `s_j` (for `j < n`) and `leaf(prefix, s_n)` finishes it. Shared
/// prefixes are evaluated once.
pub fn simplex_integrate<T, P, V>(
    n: usize,
    order: usize,
    root: &P,
    extend: &(dyn Fn(&P, usize, T) -> P + Sync),
    leaf: &(dyn Fn(&P, T) -> V + Sync),
) -> V
where
    T: Real,
    P: Sync,
    V: Accumulate<Real = T>,
{
    if n == 0 {
        return leaf(root, T::one());
    }
    let rule = gauss_legendre(order);
    let ctx = SimplexCtx {
        n,
        nodes: rule.0.iter().map(|x| T::lit(*x)).collect(),
        weights: rule.1.iter().map(|x| T::lit(*x)).collect(),
        extend,
        leaf,
    };
    let parts: Vec<V> = if n >= 3 {
        (0..order)
            .into_par_iter()
            .map(|i| ctx.child(1, T::one(), root, i))
            .collect()
    } else {
        (0..order).map(|i| ctx.child(1, T::one(), root, i)).collect()
    };
    sum_in_order(parts)
}

struct SimplexCtx<'a, T, P, V> {
    n: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
    extend: &'a (dyn Fn(&P, usize, T) -> P + Sync),
    leaf: &'a (dyn Fn(&P, T) -> V + Sync),
}

impl<T: Real, P, V: Accumulate<Real = T>> SimplexCtx<'_, T, P, V> {
    // weighted contribution of node `i` at depth `k` (1-based)
    fn child(&self, k: usize, t_prev: T, prefix: &P, i: usize) -> V {
        let u = self.nodes[i];
        let t = t_prev * u;
        let w = self.weights[i] * u.powi((self.n - k) as i32);
        let p = (self.extend)(prefix, k - 1, t_prev - t);
        let v = if k == self.n {
            (self.leaf)(&p, t)
        } else {
            let parts: Vec<V> = (0..self.nodes.len())
                .map(|j| self.child(k + 1, t, &p, j))
                .collect();
            sum_in_order(parts)
        };
        v.scaled(re(w))
    }
}

fn sum_in_order<V: Accumulate>(parts: Vec<V>) -> V {
    pairwise_sum(&parts).expect("non-empty rule")
}

/// Outcome of an order-doubling simplex integration.
#[derive(Clone, Debug)]
pub struct SimplexResult<V> {
    pub value: V,
    pub order: usize,
    pub last_change: f64,
}

/// Repeats [`simplex_integrate`] over `orders` until two successive
/// estimates agree to `rel_tol`.
pub fn simplex_integrate_converged<T, P, V>(
    n: usize,
    orders: &[usize],
    rel_tol: T,
    root: &P,
    extend: &(dyn Fn(&P, usize, T) -> P + Sync),
    leaf: &(dyn Fn(&P, T) -> V + Sync),
) -> Result<SimplexResult<V>>
where
    T: Real,
    P: Sync,
    V: Accumulate<Real = T>,
{
    let mut prev: Option<V> = None;
    let mut change = f64::INFINITY;
    for &order in orders {
        let cur = simplex_integrate(n, order, root, extend, leaf);
        if let Some(p) = &prev {
            let diff = cur.sub(p).size();
            let floor = T::epsilon() * T::lit(64.0) * cur.magnitude().max(T::min_positive_value());
            change = diff.as_f64();
            if diff <= rel_tol * cur.size() || diff <= floor || n == 0 {
                return Ok(SimplexResult {
                    value: cur,
                    order,
                    last_change: change,
                });
            }
        } else if n == 0 {
            return Ok(SimplexResult {
                value: cur,
                order,
                last_change: 0.0,
            });
        }
        prev = Some(cur);
    }
    Err(Error::QuadratureNoConvergence(format!(
        "simplex rule of dimension {n} still changing by {change:.3e} at order {}",
        orders.last().copied().unwrap_or(0)
    )))
}

// 7-point Gauss / 15-point Kronrod on [-1, 1]; positive half, centre first.
const XGK: [f64; 8] = [
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
];
const WGK: [f64; 8] = [
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
];
// Gauss weights for XGK[0], XGK[2], XGK[4], XGK[6]
const WG: [f64; 4] = [
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
];

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub max_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_depth: 30,
            max_panels: 4000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdaptiveResult<V> {
    pub value: V,
    pub error: f64,
    pub panels: usize,
    pub evaluations: usize,
    pub max_depth: u32,
}

struct Panel<V> {
    a: f64,
    b: f64,
    depth: u32,
    value: V,
    err: f64,
}

fn gk15_panel<T, V>(f: &(dyn Fn(T) -> V + Sync), a: f64, b: f64) -> (V, f64)
where
    T: Real,
    V: Accumulate<Real = T>,
{
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // t ↦ u = t/(1-t), du = dt/(1-t)²
    let g = |t: f64| -> V {
        let s = 1.0 - t;
        f(T::lit(t / s)).scaled(re(T::lit(1.0 / (s * s))))
    };
    let fc = g(mid);
    let mut kron = fc.scaled(re(T::lit(WGK[0] * half)));
    let mut gauss = fc.scaled(re(T::lit(WG[0] * half)));
    for i in 1..8 {
        let x = half * XGK[i];
        let pair = g(mid - x).add(&g(mid + x));
        kron.axpy(re(T::lit(WGK[i] * half)), &pair);
        if i % 2 == 0 {
            gauss.axpy(re(T::lit(WG[i / 2] * half)), &pair);
        }
    }
    let err = kron.sub(&gauss).size().as_f64();
    (kron, err)
}

/// `∫₀^∞ f(u) du` by globally adaptive GK15 after `u = t/(1−t)`.
pub fn integrate_half_line<T, V>(
    f: &(dyn Fn(T) -> V + Sync),
    opts: AdaptiveOptions,
) -> Result<AdaptiveResult<V>>
where
    T: Real,
    V: Accumulate<Real = T>,
{
    let (v, e) = gk15_panel(f, 0.0, 1.0);
    let mut panels = vec![Panel {
        a: 0.0,
        b: 1.0,
        depth: 0,
        value: v,
        err: e,
    }];
    loop {
        let values: Vec<V> = panels.iter().map(|p| p.value.clone()).collect();
        let total = pairwise_sum(&values).expect("non-empty");
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * total.size().as_f64());
        if err <= tol {
            let max_depth = panels.iter().map(|p| p.depth).max().unwrap_or(0);
            return Ok(AdaptiveResult {
                value: total,
                error: err,
                panels: panels.len(),
                evaluations: 15 * (2 * panels.len() - 1),
                max_depth,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.depth < opts.max_depth)
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i);
        let Some(i) = worst.filter(|_| panels.len() < opts.max_panels) else {
            return Err(Error::QuadratureNoConvergence(format!(
                "half-line integral error estimate {err:.3e} above tolerance {tol:.3e}"
            )));
        };
        let p = panels.remove(i);
        let m = 0.5 * (p.a + p.b);
        let (lv, le) = gk15_panel(f, p.a, m);
        let (rv, ree) = gk15_panel(f, m, p.b);
        // keep panels ordered by position so the final sum is reproducible
        panels.insert(
            i,
            Panel {
                a: m,
                b: p.b,
                depth: p.depth + 1,
                value: rv,
                err: ree,
            },
        );
        panels.insert(
            i,
            Panel {
                a: p.a,
                b: m,
                depth: p.depth + 1,
                value: lv,
                err: le,
            },
        );
    }
}

/// Composite Gauss–Legendre on `[a, b]` for smooth integrands.
pub fn integrate_interval<T, V>(f: &(dyn Fn(T) -> V + Sync), a: T, b: T, order: usize, panels: usize) -> V
where
    T: Real,
    V: Accumulate<Real = T>,
{
    let rule = gauss_legendre(order);
    let h = (b - a) / T::from_usize_lossy(panels);
    let mut parts = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + h * T::from_usize_lossy(p);
        for (x, w) in rule.0.iter().zip(&rule.1) {
            parts.push(f(lo + h * T::lit(*x)).scaled(re(h * T::lit(*w))));
        }
    }
    pairwise_sum(&parts).expect("non-empty rule")
}
