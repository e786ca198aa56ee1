//! Named experiments. Each one turns an [`ExperimentConfig`] into a
//! [`DefectReport`] plus named pass/fail checks and derived constants.

pub mod deform;
pub mod quasi;
pub mod riesz;
pub mod smear;
pub mod spin;
pub mod wick;

use asmlab_core::asymptotic::{DefectKind, DefectReport, HbarGrid};
use asmlab_core::operator::Tolerance;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{ExperimentConfig, Params};
use crate::error::{config, AppError};
use crate::io::{report_rows, RowJson};

/// ħ column value for rows that come from random sweeps rather than a grid.
pub const SWEEP_HBAR: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub experiment: String,
    pub grid: HbarGrid,
    pub report: DefectReport,
    pub checks: Vec<Check>,
    pub derived: Map<String, Value>,
    /// Extra lines for stdout, e.g. the Wick `index` line.
    pub notes: Vec<String>,
}

impl Outcome {
    fn new(experiment: impl Into<String>, grid: HbarGrid) -> Self {
        Outcome {
            experiment: experiment.into(),
            grid,
            report: DefectReport::new(),
            checks: Vec::new(),
            derived: Map::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    /// Check that `value ≤ bound`, naming the row.
    fn check_le(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.check(name, value <= bound, format!("{value:.6e} <= {bound:.1e}"));
    }

    /// Commas in cell labels such as `annulus(0.5,1.0)` become `;` so the
    /// subject stays one CSV field.
    fn push(&mut self, hbar: f64, kind: DefectKind, subject: &str, value: f64) -> Result<(), AppError> {
        self.report.push(hbar, kind, subject.replace(',', ";"), value)?;
        Ok(())
    }

    fn derive(&mut self, key: &str, value: Value) {
        self.derived.insert(key.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self, cfg: &ExperimentConfig, tol: &Tolerance) -> Value {
        let rows: Vec<RowJson> = report_rows(&self.report);
        json!({
            "schema": RESULT_SCHEMA,
            "experiment": self.experiment,
            "config": cfg,
            "grid": self.grid.values(),
            "tail_len": self.grid.tail_len(),
            "tolerances": {
                "eig_tol": tol.eig_tol,
                "psd_tol": tol.psd_tol,
                "rank_tol": tol.rank_tol,
            },
            "passed": self.passed(),
            "checks": self.checks,
            "derived": self.derived,
            "notes": self.notes,
            "rows": rows,
        })
    }
}

pub const RESULT_SCHEMA: &str = "asmlab-result/1";

/// Mode parameter shared by experiments with sub-commands.
fn mode(p: &mut Params<'_>, allowed: &[&str]) -> Result<String, AppError> {
    let m = p.string("mode", allowed[0])?;
    if allowed.contains(&m.as_str()) {
        Ok(m)
    } else {
        Err(config(format!("mode {m:?} is not one of {allowed:?}")))
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, AppError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let tol = Tolerance::default();
    // each experiment reads its params and calls `finish` before computing
    let params = Params::new(&cfg.params);
    match cfg.experiment.as_str() {
        "spin" => spin::run(params, grid, cfg.seed, &tol),
        "smear" => smear::run(params, grid, cfg.seed, &tol),
        "quasi" => quasi::run(params, grid, cfg.seed, &tol),
        "wick" => wick::run(params, grid, &tol),
        "deform" => deform::run(params, grid, &tol),
        "riesz" => riesz::run(params, grid, cfg.seed, &tol),
        other => Err(config(format!("unknown experiment {other:?}"))),
    }
}
