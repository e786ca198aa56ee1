//! JSON forms of POVMs and defect reports.
//!
//! Floats go through `serde_json`'s shortest round-trip formatting, so a
//! POVM written and read back is bit-identical.

use std::sync::Arc;

use asmlab_core::asymptotic::{DefectKind, DefectReport};
use asmlab_core::measure::{Atom, Povm, SampleSpace};
use asmlab_core::operator::{Operator, Tolerance};
use asmlab_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, AppError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

/// Effects are row-major lists of `[re, im]` pairs, one list per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmJson {
    pub dim: usize,
    pub atoms: Vec<AtomJson>,
    pub effects: Vec<Vec<[f64; 2]>>,
}

impl PovmJson {
    pub fn from_povm(p: &Povm) -> Self {
        PovmJson {
            dim: p.dim(),
            atoms: p
                .space()
                .atoms()
                .iter()
                .map(|a| AtomJson {
                    label: a.label.clone(),
                    coord: a.coord.clone(),
                    weight: a.weight,
                })
                .collect(),
            effects: p
                .effects()
                .iter()
                .map(|e| e.as_slice().iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        }
    }

    pub fn to_povm(&self, tol: &Tolerance) -> Result<Povm, AppError> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                label: a.label.clone(),
                coord: a.coord.clone(),
                weight: a.weight,
            })
            .collect();
        let space = Arc::new(SampleSpace::new(atoms)?);
        let effects = self
            .effects
            .iter()
            .map(|e| {
                if e.len() != self.dim * self.dim {
                    return Err(config(format!(
                        "effect has {} entries, expected {}",
                        e.len(),
                        self.dim * self.dim
                    )));
                }
                Ok(Operator::new(
                    self.dim,
                    e.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
                )?)
            })
            .collect::<Result<Vec<_>, AppError>>()?;
        Ok(Povm::new(space, effects, tol)?)
    }
}

pub fn povm_to_json(p: &Povm) -> String {
    serde_json::to_string_pretty(&PovmJson::from_povm(p)).expect("plain data serializes")
}

pub fn povm_from_json(text: &str, tol: &Tolerance) -> Result<Povm, AppError> {
    let parsed: PovmJson = serde_json::from_str(text).map_err(|e| config(format!("POVM JSON: {e}")))?;
    parsed.to_povm(tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowJson {
    pub hbar: f64,
    pub kind: String,
    pub subject: String,
    pub value: f64,
}

pub fn report_rows(report: &DefectReport) -> Vec<RowJson> {
    report
        .rows()
        .iter()
        .map(|r| RowJson {
            hbar: r.hbar,
            kind: r.kind.tag().to_string(),
            subject: r.subject.clone(),
            value: r.value,
        })
        .collect()
}

pub fn report_from_rows(rows: &[RowJson]) -> Result<DefectReport, AppError> {
    let mut report = DefectReport::new();
    for r in rows {
        let kind = DefectKind::from_tag(&r.kind).ok_or_else(|| config(format!("unknown defect kind {:?}", r.kind)))?;
        report.push(r.hbar, kind, r.subject.as_str(), r.value)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    #[test]
    fn povm_round_trip_is_bit_exact() {
        let tol = Tolerance::default();
        let mut r = sampling::rng(3);
        let space = sampling::labeled_space(3);
        let p = sampling::povm(&mut r, &space, 4, &tol).unwrap();
        let back = povm_from_json(&povm_to_json(&p), &tol).unwrap();
        for (a, b) in p.effects().iter().zip(back.effects()) {
            assert_eq!(a.as_slice(), b.as_slice());
        }
        assert_eq!(back.space().atoms(), p.space().atoms());
    }

    #[test]
    fn coordinates_survive() {
        let tol = Tolerance::default();
        let space = Arc::new(SampleSpace::on_line(&[-0.5, 0.5]).unwrap());
        let p = Povm::new(
            space,
            vec![
                Operator::diag_real(&[1.0, 0.0]).unwrap(),
                Operator::diag_real(&[0.0, 1.0]).unwrap(),
            ],
            &tol,
        )
        .unwrap();
        let back = povm_from_json(&povm_to_json(&p), &tol).unwrap();
        assert_eq!(back.space().atoms()[1].coord, Some(vec![0.5]));
    }

    #[test]
    fn malformed_povm_rejected() {
        let tol = Tolerance::default();
        let bad = r#"{"dim":2,"atoms":[{"label":"a"}],"effects":[[[1,0]]]}"#;
        assert!(povm_from_json(bad, &tol).is_err());
        let not_positive = r#"{"dim":1,"atoms":[{"label":"a"}],"effects":[[[-1,0]]]}"#;
        assert!(povm_from_json(not_positive, &tol).is_err());
    }

    #[test]
    fn report_rows_round_trip() {
        let mut rep = DefectReport::new();
        rep.push(0.5, DefectKind::Projectivity, "{a}*{a}", 0.1875).unwrap();
        let back = report_from_rows(&report_rows(&rep)).unwrap();
        assert_eq!(back.to_csv(), rep.to_csv());
    }
}
