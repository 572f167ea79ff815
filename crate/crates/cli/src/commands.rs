use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use num_complex::Complex;
use serde::Deserialize;
use serde_json::json;

use opcalc::divdiff::{divided_difference, DdMethod};
use opcalc::funcalc::{contour_for, dd_apply, dd_tensor, funcalc as funcalc_single, funcalc_n, CommutingTuple, MultivariateFunction, DEFAULT_MARGIN, TENSOR_RULE_TOL};
use opcalc::magnus::{liouville_residual, magnus_solve, rk_reference, TimeDependentMatrix, DEFAULT_ORDER};
use opcalc::ncseries::{dyson_exp, newton_interpolate, newton_recursion_terms, taylor_expand, DYSON_TOL, NEWTON_TOL};
use opcalc::random::{gen_matrix, MatrixGen, MatrixKind};
use opcalc::rearrange::{decay_condition, rearrange_all, SectorFunction, MODULAR_TOL, REARRANGE_TOL};
use opcalc::scalar::rel_diff;
use opcalc::tensor::{eigen_decompose, eigenvalues, pair, MatrixJson};
use opcalc::{Contour, Error, HolomorphicFunction, Matrix, NodeSet, C64};

use crate::report::{complex, mat, mats, RunReport, Table};
use crate::Settings;

pub const DD_AGREEMENT_TOL: f64 = 1e-8;
pub const EIGEN_ORACLE_TOL: f64 = 1e-9;
pub const TAYLOR_TOL: f64 = 1e-8;
pub const MAGNUS_TOL: f64 = 1e-6;
pub const LIOUVILLE_TOL: f64 = 1e-7;
pub const GEN_TOL: f64 = 1e-12;
const MAGNUS_ROWS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    All,
    Recursive,
    Explicit,
    Contour,
    Hermite,
}

fn function(spec: &str) -> Result<HolomorphicFunction<f64>> {
    Ok(HolomorphicFunction::builtin(spec)?)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn to_matrices(js: &[MatrixJson]) -> Result<Vec<Matrix>> {
    Ok(js.iter().map(|m| m.to_matrix()).collect::<opcalc::Result<Vec<_>>>()?)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > opcalc::random::MAX_DIM {
        bail!(Error::Invalid(format!("--dim must be in 1..={}, got {dim}", opcalc::random::MAX_DIM)));
    }
    Ok(())
}

/// Matrices from a JSON file, or `count` seeded random ones.
fn matrices(file: Option<&PathBuf>, count: usize, dim: usize, g: &mut MatrixGen) -> Result<Vec<Matrix>> {
    match file {
        Some(p) => {
            let ms = to_matrices(&read_json::<Vec<MatrixJson>>(p)?)?;
            if ms.len() != count {
                bail!(Error::DimensionMismatch(format!("{} holds {} matrices, expected {count}", p.display(), ms.len())));
            }
            Ok(ms)
        }
        None => {
            check_dim(dim)?;
            Ok((0..count).map(|_| g.random(dim)).collect())
        }
    }
}

#[derive(Args, Debug)]
pub struct DdArgs {
    /// exp, log, id, pow:N, resolvent:RE,IM, rational:K, const:RE,IM
    #[arg(long = "f", default_value = "exp")]
    pub f: String,
    /// JSON array of [re, im] pairs; seeded random nodes when absent
    #[arg(long)]
    pub nodes: Option<String>,
    /// Number of random nodes
    #[arg(long, default_value_t = 3)]
    pub count: usize,
    #[arg(long, value_enum, default_value = "all")]
    pub method: Which,
}

pub fn dd(a: &DdArgs, s: &Settings) -> Result<RunReport> {
    let t0 = Instant::now();
    let f = function(&a.f)?;
    let xs: Vec<C64> = match &a.nodes {
        Some(text) => serde_json::from_str::<Vec<[f64; 2]>>(text)
            .context("--nodes must be a JSON array of [re, im] pairs")?
            .into_iter()
            .map(|[r, i]| Complex::new(r, i))
            .collect(),
        None => {
            let mut g = MatrixGen::new(s.seed, "dd");
            (0..a.count).map(|_| g.in_disc(1.0)).collect()
        }
    };
    let set = NodeSet::new(xs.clone())?;
    let methods: Vec<DdMethod> = match a.method {
        Which::All => DdMethod::ALL.to_vec(),
        Which::Recursive => vec![DdMethod::Recursive],
        Which::Explicit => vec![DdMethod::Explicit],
        Which::Contour => vec![DdMethod::Contour],
        Which::Hermite => vec![DdMethod::Hermite],
    };
    let mut r = RunReport::new(
        "dd",
        json!({"f": a.f, "nodes": xs.iter().map(|z| complex(*z)).collect::<Vec<_>>(), "method": format!("{:?}", a.method).to_lowercase(), "seed": s.seed}),
        s,
    );
    let mut values = Vec::new();
    let mut refused = serde_json::Map::new();
    for m in &methods {
        match divided_difference(*m, &f, &set, None) {
            Ok(v) => values.push((*m, v)),
            Err(e) if methods.len() > 1 => {
                refused.insert(m.name().into(), json!(e.to_string()));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if values.is_empty() {
        bail!(Error::Invalid("no method accepted these nodes".into()));
    }
    let table: serde_json::Map<String, serde_json::Value> =
        values.iter().map(|(m, v)| (m.name().to_string(), json!(complex(*v)))).collect();
    r.result("values", table);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let (mi, vi) = values[i];
            let (mj, vj) = values[j];
            r.check(
                format!("divided difference agreement, {} vs {}", mi.name(), mj.name()),
                rel_diff(vi, vj, 0.0),
                DD_AGREEMENT_TOL,
            );
        }
    }
    if !refused.is_empty() {
        r.diagnostic("refused", refused);
    }
    let mut t = Table::new(&["method", "re", "im"]);
    for (m, v) in &values {
        t.push(vec![m.name().into(), format!("{:e}", v.re), format!("{:e}", v.im)]);
    }
    r.table = Some(t);
    r.time("total", t0.elapsed().as_secs_f64());
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Funcalc,
    Ddtensor,
    Ddapply,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum ContourSpec {
    Auto { auto: bool },
    Circle { center: [f64; 2], radius: f64 },
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct FuncalcJob {
    function: String,
    matrices: Vec<MatrixJson>,
    #[serde(default)]
    perturbations: Vec<MatrixJson>,
    contour: Option<ContourSpec>,
    mode: Mode,
}

#[derive(Args, Debug)]
pub struct FuncalcArgs {
    /// JSON job {"function", "matrices", "contour", "mode", "perturbations"}
    #[arg(long)]
    pub job: Option<PathBuf>,
    #[arg(long = "f", default_value = "exp")]
    pub f: String,
    #[arg(long, value_enum, default_value = "funcalc")]
    pub mode: Mode,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Number of matrices (commuting for funcalc, arbitrary otherwise)
    #[arg(long, default_value_t = 1)]
    pub count: usize,
}

pub fn funcalc(a: &FuncalcArgs, s: &Settings) -> Result<RunReport> {
    let t0 = Instant::now();
    let (fname, ms, bs, contour, mode) = match &a.job {
        Some(p) => {
            let job: FuncalcJob = read_json(p)?;
            let contour = match job.contour {
                Some(ContourSpec::Circle { center, radius }) => Some(Contour::circle(Complex::new(center[0], center[1]), radius)?),
                Some(ContourSpec::Auto { auto }) if !auto => bail!(Error::Invalid("contour must be {\"auto\": true} or a circle".into())),
                _ => None,
            };
            (job.function, to_matrices(&job.matrices)?, to_matrices(&job.perturbations)?, contour, job.mode)
        }
        None => {
            check_dim(a.dim)?;
            if a.count == 0 {
                bail!(Error::Invalid("--count must be at least 1".into()));
            }
            let mut g = MatrixGen::new(s.seed, "funcalc");
            let ms: Vec<Matrix> = if a.mode == Mode::Funcalc {
                if a.count == 1 {
                    vec![g.diagonalizable(a.dim)]
                } else {
                    let (p, q) = g.commuting_pair(a.dim);
                    (0..a.count).map(|k| if k % 2 == 0 { p.clone() } else { q.clone() }.scale_real(1.0 / (1 + k / 2) as f64)).collect()
                }
            } else {
                (0..a.count).map(|_| g.random(a.dim)).collect()
            };
            let bs: Vec<Matrix> = if a.mode == Mode::Ddapply || a.mode == Mode::Ddtensor {
                (1..ms.len()).map(|_| g.random(a.dim)).collect()
            } else {
                Vec::new()
            };
            (a.f.clone(), ms, bs, None, a.mode)
        }
    };
    if ms.is_empty() {
        bail!(Error::Invalid("at least one matrix is required".into()));
    }
    let f = function(&fname)?;
    let mut r = RunReport::new(
        "funcalc",
        json!({"function": fname, "mode": format!("{mode:?}").to_lowercase(), "matrices": mats(&ms), "perturbations": mats(&bs), "seed": s.seed}),
        s,
    );
    match mode {
        Mode::Funcalc => {
            let tuple = CommutingTuple::new(ms.clone())?;
            let cs: Vec<Contour<f64>> = match &contour {
                Some(c) => vec![*c; ms.len()],
                None => ms.iter().map(|m| contour_for(m, DEFAULT_MARGIN)).collect::<opcalc::Result<_>>()?,
            };
            let fs = vec![f.clone(); ms.len()];
            let value = funcalc_n(&MultivariateFunction::tensor(&fs), &tuple, &cs)?;
            r.result("value", mat(&value));
            if ms.len() == 1 {
                match eigen_decompose(&ms[0]) {
                    Ok(e) => {
                        r.check(
                            "functional calculus against the eigendecomposition",
                            value.rel_dist(&e.apply(|z| f.eval(z)), 1e-300),
                            EIGEN_ORACLE_TOL,
                        );
                    }
                    Err(e) => r.diagnostic("oracle", format!("eigendecomposition unavailable: {e}")),
                }
            } else {
                let mut prod = Matrix::identity(ms[0].dim());
                for (m, c) in ms.iter().zip(&cs) {
                    prod = prod.matmul(&funcalc_single(&f, m, Some(c))?);
                }
                r.check("tensor rule for elementary functions", value.rel_dist(&prod, 1e-300), TENSOR_RULE_TOL);
            }
            r.diagnostic("contour_radii", cs.iter().map(|c| c.radius).collect::<Vec<_>>());
        }
        Mode::Ddtensor | Mode::Ddapply => {
            let t = dd_tensor(&f, &ms, contour.as_ref())?;
            if mode == Mode::Ddtensor {
                r.result("tensor", mat(t.matrix()));
            }
            if bs.len() + 1 == ms.len() {
                let paired = pair(&t, &bs)?;
                let applied = dd_apply(&f, &ms, &bs, contour.as_ref())?;
                r.result("value", mat(&applied));
                r.check("tensor divided difference paired against direct application", applied.rel_dist(&paired, 1e-300), TENSOR_RULE_TOL);
            } else if mode == Mode::Ddapply || !bs.is_empty() {
                bail!(Error::DimensionMismatch(format!("{} matrices need {} perturbations, got {}", ms.len(), ms.len() - 1, bs.len())));
            }
        }
    }
    r.time("total", t0.elapsed().as_secs_f64());
    Ok(r)
}

#[derive(Args, Debug)]
pub struct NewtonArgs {
    #[arg(long = "f", default_value = "exp")]
    pub f: String,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Interpolation order; uses n + 1 nodes
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// JSON array of n + 1 matrices
    #[arg(long)]
    pub matrices: Option<PathBuf>,
}

pub fn newton(a: &NewtonArgs, s: &Settings) -> Result<RunReport> {
    let t0 = Instant::now();
    let f = function(&a.f)?;
    let mut g = MatrixGen::new(s.seed, "newton");
    let ms = matrices(a.matrices.as_ref(), a.n + 1, a.dim, &mut g)?;
    let mut r = RunReport::new("newton", json!({"f": a.f, "n": a.n, "matrices": mats(&ms), "seed": s.seed}), s);
    let rep = newton_interpolate(&f, &ms)?;
    let scale = rep.target.opnorm();
    r.check("noncommutative Newton interpolation", rep.residual() / scale, NEWTON_TOL);
    if a.n >= 1 {
        let d = ms[0].dim();
        let bs: Vec<Matrix> = (0..a.n - 1).map(|_| g.random(d)).collect();
        let (lhs, rhs) = newton_recursion_terms(&f, &ms, &bs)?;
        let scale = lhs.opnorm().max(rhs.opnorm()).max(f64::MIN_POSITIVE);
        r.check("divided difference recursion in the last node", (&lhs - &rhs).opnorm() / scale, NEWTON_TOL);
    }
    r.result("target", mat(&rep.target));
    r.result("differences", &rep.differences);
    let mut t = Table::new(&["order", "difference"]);
    for (k, d) in rep.differences.iter().enumerate() {
        t.push(vec![k.to_string(), format!("{d:e}")]);
    }
    r.table = Some(t);
    r.time("total", t0.elapsed().as_secs_f64());
    Ok(r)
}

#[derive(Args, Debug)]
pub struct TaylorArgs {
    #[arg(long = "f", default_value = "exp")]
    pub f: String,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    /// Operator norm of the generated perturbation b
    #[arg(long, default_value_t = 0.1)]
    pub b_norm: f64,
    /// JSON array [a, b]
    #[arg(long)]
    pub matrices: Option<PathBuf>,
}

fn expansion_table(rep: &opcalc::ncseries::ExpansionReport<f64>) -> Table {
    let mut t = Table::new(&["order", "remainder_norm", "difference", "identity_residual"]);
    for k in 0..rep.remainder_norms.len() {
        t.push(vec![
            k.to_string(),
            format!("{:e}", rep.remainder_norms[k]),
            format!("{:e}", rep.differences[k]),
            rep.identity_residuals.get(k).map(|x| format!("{x:e}")).unwrap_or_default(),
        ]);
    }
    t
}

fn pair_inputs(file: Option<&PathBuf>, dim: usize, b_norm: f64, g: &mut MatrixGen) -> Result<(Matrix, Matrix)> {
    if !(b_norm >= 0.0 && b_norm.is_finite()) {
        bail!(Error::Invalid(format!("--b-norm must be finite and non-negative, got {b_norm}")));
    }
    let mut ms = matrices(file, 2, dim, g)?;
    if file.is_none() {
        ms[1] = ms[1].scale_real(b_norm / ms[1].opnorm().max(f64::MIN_POSITIVE));
    }
    let b = ms.pop().expect("two matrices");
    Ok((ms.pop().expect("two matrices"), b))
}

pub fn taylor(a: &TaylorArgs, s: &Settings) -> Result<RunReport> {
    let t0 = Instant::now();
    let f = function(&a.f)?;
    let mut g = MatrixGen::new(s.seed, "taylor");
    let (x, b) = pair_inputs(a.matrices.as_ref(), a.dim, a.b_norm, &mut g)?;
    let mut r = RunReport::new("taylor", json!({"f": a.f, "order": a.order, "a": mat(&x), "b": mat(&b), "seed": s.seed}), s);
    let rep = taylor_expand(&f, &x, &b, a.order)?;
    let scale = rep.target.opnorm().max(1.0);
    r.check("Taylor formula with exact remainder", rep.worst_identity_residual() / scale, TAYLOR_TOL);
    r.result("target", mat(&rep.target));
    r.result("remainder_norms", &rep.remainder_norms);
    r.result("identity_residuals", &rep.identity_residuals);
    r.diagnostic("bound_ratio", rep.bound_ratio);
    r.diagnostic("geometric_regime", rep.converged);
    r.table = Some(expansion_table(&rep));
    r.time("total", t0.elapsed().as_secs_f64());
    Ok(r)
}

#[derive(Args, Debug)]
pub struct DysonArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    #[arg(long, default_value_t = 0.5)]
    pub b_norm: f64,
    /// JSON array [a, b]
    #[arg(long)]
    pub matrices: Option<PathBuf>,
}

pub fn dyson(a: &DysonArgs, s: &Settings) -> Result<RunReport> {
    let t0 = Instant::now();
    if a.order > 6 {
        bail!(Error::Invalid(format!("--order is capped at 6, got {}", a.order)));
    }
    let mut g = MatrixGen::new(s.seed, "dyson");
    let (x, b) = pair_inputs(a.matrices.as_ref(), a.dim, a.b_norm, &mut g)?;
    let mut r = RunReport::new("dyson", json!({"order": a.order, "a": mat(&x), "b": mat(&b), "seed": s.seed}), s);
    let rep = dyson_exp(&x, &b, a.order)?;
    r.check("Dyson expansion with exact remainder", rep.worst_identity_residual() / rep.target.opnorm(), DYSON_TOL);
    r.result("target", mat(&rep.target));
    r.result("remainder_norms", &rep.remainder_norms);
    r.result("identity_residuals", &rep.identity_residuals);
    r.table = Some(expansion_table(&rep));
    r.time("total", t0.elapsed().as_secs_f64());
    Ok(r)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampledField {
    times: Vec<f64>,
    matrices: Vec<MatrixJson>,
}

#[derive(Args, Debug)]
pub struct MagnusArgs {
    /// upper-triangular, hermitian, or a JSON file {"times", "matrices"}
    #[arg(long, default_value = "upper-triangular")]
    pub field: String,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    /// Size of the hermitian field
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

fn field(a: &MagnusArgs, s: &Settings) -> Result<TimeDependentMatrix<f64>> {
    Ok(match a.field.as_str() {
        "upper-triangular" => TimeDependentMatrix::upper_triangular(),
        "hermitian" => {
            check_dim(a.dim)?;
            let mut g = MatrixGen::new(s.seed, "magnus");
            let h0: Matrix = g.hermitian(a.dim);
            let h1: Matrix = g.hermitian::<f64>(a.dim).scale_real(0.5);
            TimeDependentMatrix::hermitian_perturbed(h0, h1)
        }
        path => {
            let p = Path::new(path);
            if !p.exists() {
                bail!(Error::Invalid(format!("unknown field '{path}'")));
            }
            let sf: SampledField = read_json(p)?;
            TimeDependentMatrix::from_samples(sf.times, to_matrices(&sf.matrices)?)?
        }
    })
}

pub fn magnus(a: &MagnusArgs, s: &Settings) -> Result<RunReport> {
    let t0 = Instant::now();
    let fld = field(a, s)?;
    let mut r = RunReport::new(
        "magnus",
        json!({"field": a.field, "t_end": a.t_end, "h": a.h, "order": a.order, "seed": s.seed}),
        s,
    );
    let sol = magnus_solve(&fld, a.t_end, a.h, a.order)?;
    let reference = rk_reference(&fld, a.t_end, a.h)?;
    let gap = (&sol.y - &reference.y).opnorm();
    r.check("exponential of the Magnus exponent against the reference solution", gap, MAGNUS_TOL);
    r.check("Liouville determinant formula", liouville_residual(&fld, a.t_end, &reference.y), LIOUVILLE_TOL);
    r.result("omega", mat(&sol.omega));
    r.result("y", mat(&sol.y));
    r.diagnostic("steps", sol.steps);
    r.diagnostic("max_tail", sol.max_tail);
    r.diagnostic("reference_steps", reference.steps);
    r.diagnostic("reference_last_change", reference.last_change);
    // the table re-solves on prefixes of the same grid
    let mut t = Table::new(&["t", "omega_norm", "discrepancy"]);
    let n = sol.trajectory.len();
    let stride = n.div_ceil(MAGNUS_ROWS).max(1);
    for k in (0..n).filter(|k| (k + 1) % stride == 0 || k + 1 == n) {
        let (tk, norm) = sol.trajectory[k];
        let disc = if k + 1 == n {
            gap
        } else {
            let y = magnus_solve(&fld, tk, a.h, a.order)?.y;
            (&y - &rk_reference(&fld, tk, a.h)?.y).opnorm()
        };
        t.push(vec![format!("{tk}"), format!("{norm:e}"), format!("{disc:e}")]);
    }
    r.table = Some(t);
    r.time("total", t0.elapsed().as_secs_f64());
    Ok(r)
}

#[derive(Args, Debug)]
pub struct RearrangeArgs {
    /// Number of perturbations
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Exponents kⱼ of (1+s)^(−kⱼ), p + 1 of them
    #[arg(long, default_value = "1,1")]
    pub family: String,
    /// Optional powers pⱼ for s^(pⱼ)(1+s)^(−kⱼ)
    #[arg(long)]
    pub powers: Option<String>,
    #[arg(long, default_value_t = 0.3)]
    pub delta: f64,
}

fn numbers(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Error::Invalid(format!("{what} must be a comma-separated list of numbers, got '{text}'")).into())
}

pub fn rearrange(a: &RearrangeArgs, s: &Settings) -> Result<RunReport> {
    let t0 = Instant::now();
    check_dim(a.dim)?;
    let qs = numbers(&a.family, "--family")?;
    let ps = match &a.powers {
        Some(t) => numbers(t, "--powers")?,
        None => vec![0.0; qs.len()],
    };
    if qs.len() != a.p + 1 || ps.len() != qs.len() {
        bail!(Error::DimensionMismatch(format!("p = {} needs {} family entries, got {} and {} powers", a.p, a.p + 1, qs.len(), ps.len())));
    }
    let fs: Vec<SectorFunction<f64>> = ps.iter().zip(&qs).map(|(p, q)| SectorFunction::builtin(*p, *q)).collect();
    decay_condition(&fs)?;
    let mut g = MatrixGen::new(s.seed, "rearrange");
    let x: Matrix = g.hermitian(a.dim);
    let bs: Vec<Matrix> = (0..a.p).map(|_| g.random(a.dim)).collect();
    let mut r = RunReport::new(
        "rearrange",
        json!({"p": a.p, "dim": a.dim, "family": qs, "powers": ps, "delta": a.delta, "a": mat(&x), "b": mats(&bs), "seed": s.seed}),
        s,
    );
    let rep = rearrange_all(&fs, &x, &bs, a.delta)?;
    let names = ["integral vs F-kernel side", "integral vs G-kernel side", "F-kernel vs G-kernel side"];
    for (name, res) in names.iter().zip(rep.residuals) {
        r.check(format!("rearrangement identity, {name}"), res, REARRANGE_TOL);
    }
    r.check("modular operator products against the conjugated exponential", rep.modular_residual, MODULAR_TOL);
    r.result("lhs", mat(&rep.lhs));
    r.result("rhs_f", mat(&rep.rhs_f));
    r.result("rhs_g", mat(&rep.rhs_g));
    r.time("total", t0.elapsed().as_secs_f64());
    Ok(r)
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, default_value = "random")]
    pub kind: String,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
}

pub fn gen(a: &GenArgs, s: &Settings) -> Result<RunReport> {
    let kind: MatrixKind = a.kind.parse()?;
    let ms: Vec<Matrix> = gen_matrix(kind, a.dim, s.seed)?;
    let mut r = RunReport::new("gen", json!({"kind": a.kind, "dim": a.dim, "seed": s.seed}), s);
    match kind {
        MatrixKind::CommutingPair => {
            let c = ms[0].commutator(&ms[1]).opnorm();
            r.check("generated pair commutes", c, GEN_TOL);
        }
        MatrixKind::Hermitian => {
            let worst = eigenvalues(&ms[0])?.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            r.check("generated hermitian matrix has a real spectrum", worst, GEN_TOL);
        }
        _ => {}
    }
    r.result("matrices", mats(&ms));
    r.timings = None;
    Ok(r)
}
