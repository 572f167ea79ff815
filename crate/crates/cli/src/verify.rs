use std::time::Instant;

use anyhow::Result;
use serde_json::json;

use opcalc::divdiff::multiindex::up_to;
use opcalc::divdiff::{dd_power, dd_recursive, multinomial_identity, MultinomialMode};
use opcalc::ncseries::{ad_series_coherence, AD_SERIES_TOL};
use opcalc::random::MatrixGen;
use opcalc::rearrange::{homogeneity_residual, scaling_residual, SectorFunction};
use opcalc::scalar::{cis, rel_diff};
use opcalc::{HolomorphicFunction, Matrix, NodeSet};

use crate::commands::{self, Mode, Which};
use crate::report::RunReport;
use crate::Settings;

const POWER_RULE_TOL: f64 = 1e-10;
const SCALAR_KERNEL_TOL: f64 = 1e-9;

fn absorb(total: &mut RunReport, part: RunReport, label: &str) {
    let passed = part.passed();
    for mut c in part.checks {
        c.identity = format!("{label}: {}", c.identity);
        total.checks.push(c);
    }
    total.result(label, passed);
}

pub fn verify_all(s: &Settings) -> Result<RunReport> {
    let t0 = Instant::now();
    let mut r = RunReport::new("verify-all", json!({"seed": s.seed}), s);

    for (f, count) in [("exp", 3), ("pow:5", 5), ("resolvent:3,0", 4)] {
        let a = commands::DdArgs {
            f: f.into(),
            nodes: None,
            count,
            method: Which::All,
        };
        absorb(&mut r, commands::dd(&a, s)?, &format!("dd {f}"));
    }
    for (mode, count) in [(Mode::Funcalc, 1), (Mode::Funcalc, 2), (Mode::Ddapply, 3)] {
        let a = commands::FuncalcArgs {
            job: None,
            f: "exp".into(),
            mode,
            dim: 3,
            count,
        };
        absorb(&mut r, commands::funcalc(&a, s)?, &format!("funcalc {mode:?} x{count}").to_lowercase());
    }
    let newton = commands::NewtonArgs {
        f: "exp".into(),
        dim: 3,
        n: 4,
        matrices: None,
    };
    absorb(&mut r, commands::newton(&newton, s)?, "newton");
    let taylor = commands::TaylorArgs {
        f: "exp".into(),
        dim: 3,
        order: 8,
        b_norm: 0.1,
        matrices: None,
    };
    absorb(&mut r, commands::taylor(&taylor, s)?, "taylor");
    let dyson = commands::DysonArgs {
        dim: 2,
        order: 4,
        b_norm: 0.5,
        matrices: None,
    };
    absorb(&mut r, commands::dyson(&dyson, s)?, "dyson");
    for (field, order) in [("upper-triangular", 30), ("hermitian", 30)] {
        let m = commands::MagnusArgs {
            field: field.into(),
            t_end: 1.0,
            h: 0.01,
            order,
            dim: 3,
        };
        absorb(&mut r, commands::magnus(&m, s)?, &format!("magnus {field}"));
    }
    for (p, family) in [(1, "1,1"), (2, "1,1,1")] {
        let a = commands::RearrangeArgs {
            p,
            dim: 2,
            family: family.into(),
            powers: None,
            delta: 0.3,
        };
        absorb(&mut r, commands::rearrange(&a, s)?, &format!("rearrange {family}"));
    }

    let mut g = MatrixGen::new(s.seed, "verify-all");
    let x: Matrix = g.random::<f64>(2).scale_real(0.5);
    let bs: Vec<Matrix> = (0..2).map(|_| g.random(2)).collect();
    for f in [HolomorphicFunction::exp(), HolomorphicFunction::pow(5)] {
        let c = ad_series_coherence(&f, &x, &bs, 40)?;
        r.check(format!("commutator series on both sides against the contour value, {}", f.name()), c.max_rel, AD_SERIES_TOL);
    }

    let mut worst = 0.0f64;
    for big_n in -3..=8 {
        for n in 0..=3usize {
            let xs: Vec<_> = (0..=n).map(|k| cis(1.3 * k as f64 + 0.2) * (0.5 + 0.1 * k as f64)).collect();
            let floor = if (0..n as i32).contains(&big_n) { 1.0 } else { 0.0 };
            let set = NodeSet::new(xs)?;
            let v = rel_diff(dd_power(&set, big_n)?, dd_recursive(&HolomorphicFunction::pow(big_n), &set)?, floor);
            worst = worst.max(v);
        }
    }
    r.check("closed form for divided differences of powers", worst, POWER_RULE_TOL);

    let mut wrong = 0u32;
    for n in 1..=4 {
        for beta in up_to(4, n)? {
            for m in beta.abs()..=8 {
                for mode in [MultinomialMode::AtMost, MultinomialMode::Exactly] {
                    let (brute, closed) = multinomial_identity(&beta, m, mode)?;
                    wrong += (brute != closed) as u32;
                }
            }
        }
    }
    r.check("multinomial coefficient sums", wrong as f64, 0.0);

    let mut worst = 0.0f64;
    for k in 0..100 {
        let ks: &[u32] = if k % 2 == 0 { &[1, 1] } else { &[1, 1, 1] };
        let fs: Vec<SectorFunction<f64>> = ks.iter().map(|&k| SectorFunction::inverse_power(k)).collect();
        let pts: Vec<_> = ks.iter().map(|_| cis(g.uniform(-0.28, 0.28)) * g.uniform(0.2, 5.0)).collect();
        let c = g.uniform(0.1, 10.0);
        worst = worst.max(scaling_residual(&fs, &pts)?).max(homogeneity_residual(&fs, &pts, c)?);
    }
    r.check("rescaling and homogeneity of the scalar kernels", worst, SCALAR_KERNEL_TOL);

    r.time("total", t0.elapsed().as_secs_f64());
    Ok(r)
}
