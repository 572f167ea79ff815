use std::collections::BTreeMap;
use std::io::Write;

use anyhow::{Context, Result};
use clap::ValueEnum;
use opcalc::tensor::MatrixJson;
use opcalc::Matrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Settings;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// One identity checked against its tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub identity: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Rows for CSV output.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub diagnostics: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
    #[serde(skip)]
    pub table: Option<Table>,
    #[serde(skip)]
    tol_scale: f64,
}

impl RunReport {
    pub fn new(command: &str, inputs: Value, s: &Settings) -> Self {
        Self {
            command: command.into(),
            inputs,
            results: Value::Object(Default::default()),
            checks: Vec::new(),
            diagnostics: Value::Object(Default::default()),
            timings: Some(BTreeMap::new()),
            table: None,
            tol_scale: s.tol_scale,
        }
    }

    /// Records `residual ≤ tol · tol_scale`.
    pub fn check(&mut self, identity: impl Into<String>, residual: f64, tol: f64) -> bool {
        let tolerance = tol * self.tol_scale;
        let passed = residual <= tolerance;
        self.checks.push(Check {
            identity: identity.into(),
            residual,
            tolerance,
            passed,
        });
        passed
    }

    pub fn result(&mut self, key: &str, v: impl Serialize) {
        put(&mut self.results, key, v);
    }

    pub fn diagnostic(&mut self, key: &str, v: impl Serialize) {
        put(&mut self.diagnostics, key, v);
    }

    pub fn time(&mut self, key: &str, secs: f64) {
        if let Some(t) = &mut self.timings {
            t.insert(key.into(), secs);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self)?;
                s.push('\n');
                s
            }
            Format::Csv => {
                let table = match &self.table {
                    Some(t) => t.clone(),
                    None => {
                        let mut t = Table::new(&["identity", "residual", "tolerance", "passed"]);
                        for c in &self.checks {
                            t.push(vec![
                                c.identity.clone(),
                                format!("{:e}", c.residual),
                                format!("{:e}", c.tolerance),
                                c.passed.to_string(),
                            ]);
                        }
                        t
                    }
                };
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.headers)?;
                for r in &table.rows {
                    w.write_record(r)?;
                }
                String::from_utf8(w.into_inner()?)?
            }
        })
    }

    pub fn emit(&self, s: &Settings) -> Result<()> {
        let text = self.render(s.format)?;
        match &s.output {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn put(target: &mut Value, key: &str, v: impl Serialize) {
    if let Value::Object(m) = target {
        m.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }
}

pub fn mat(m: &Matrix) -> MatrixJson {
    MatrixJson::from(m)
}

pub fn mats(ms: &[Matrix]) -> Vec<MatrixJson> {
    ms.iter().map(mat).collect()
}

pub fn complex(z: num_complex::Complex<f64>) -> [f64; 2] {
    [z.re, z.im]
}
