//! `asmlab report`: merge result JSON files into one summary CSV, with a
//! log-log slope per defect column over each file's grid tail.

use std::collections::BTreeMap;

use asmlab_core::asymptotic::{format_g17, loglog_slope};
use serde::Deserialize;

use crate::error::{config, AppError};
use crate::experiments::RESULT_SCHEMA;
use crate::io::RowJson;

pub const SUMMARY_HEADER: &str = "experiment,kind,subject,tail_points,slope,value_at_min_hbar";

#[derive(Debug, Clone, Deserialize)]
pub struct ResultFile {
    pub schema: String,
    pub experiment: String,
    pub grid: Vec<f64>,
    pub tail_len: usize,
    pub passed: bool,
    pub rows: Vec<RowJson>,
}

impl ResultFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, AppError> {
        let f: ResultFile =
            serde_json::from_str(text).map_err(|e| config(format!("{origin}: not a result file: {e}")))?;
        if f.schema != RESULT_SCHEMA {
            return Err(config(format!(
                "{origin}: schema {:?}, expected {RESULT_SCHEMA:?}",
                f.schema
            )));
        }
        if f.tail_len > f.grid.len() {
            return Err(config(format!("{origin}: tail_len exceeds the grid")));
        }
        Ok(f)
    }

    fn tail(&self) -> &[f64] {
        &self.grid[self.grid.len() - self.tail_len..]
    }
}

/// Slope cell: `exact` for an identically zero column, `n/a` when fewer
/// than two positive tail points exist.
pub fn slope_cell(tail_points: &[(f64, f64)], all_zero: bool) -> String {
    if all_zero {
        return "exact".to_string();
    }
    match loglog_slope(tail_points) {
        Some(s) => format!("{s:.6}"),
        None => "n/a".to_string(),
    }
}

pub fn summarize(files: &[ResultFile]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for f in files {
        let tail = f.tail();
        // keep first-seen column order
        let mut order: Vec<(String, String)> = Vec::new();
        let mut cols: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
        for r in &f.rows {
            let key = (r.kind.clone(), r.subject.clone());
            if !cols.contains_key(&key) {
                order.push(key.clone());
            }
            cols.entry(key).or_default().push((r.hbar, r.value));
        }
        for key in order {
            let col = &cols[&key];
            let all_zero = col.iter().all(|p| p.1 == 0.0);
            let in_tail: Vec<(f64, f64)> = col.iter().copied().filter(|p| tail.contains(&p.0)).collect();
            let at_min = col
                .iter()
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map_or(String::new(), |p| format_g17(p.1));
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                f.experiment,
                key.0,
                key.1,
                in_tail.len(),
                slope_cell(&in_tail, all_zero),
                at_min
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(rows: &[(f64, &str, f64)]) -> ResultFile {
        ResultFile {
            schema: RESULT_SCHEMA.into(),
            experiment: "wick".into(),
            grid: vec![1.0, 0.5, 0.25, 0.125],
            tail_len: 3,
            passed: true,
            rows: rows
                .iter()
                .map(|&(hbar, subject, value)| RowJson {
                    hbar,
                    kind: "proj".into(),
                    subject: subject.into(),
                    value,
                })
                .collect(),
        }
    }

    #[test]
    fn slopes_over_tail() {
        // v = ħ² on the tail, an outlier outside it
        let f = file(&[
            (1.0, "a", 99.0),
            (0.5, "a", 0.25),
            (0.25, "a", 0.0625),
            (0.125, "a", 0.015625),
        ]);
        let csv = summarize(&[f]);
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line, format!("wick,proj,a,3,2.000000,{}", format_g17(0.015625)));
    }

    #[test]
    fn exact_and_undefined() {
        let f = file(&[(0.5, "z", 0.0), (0.25, "z", 0.0), (0.5, "one", 0.3)]);
        let csv = summarize(&[f]);
        assert!(csv.contains("wick,proj,z,2,exact,"));
        assert!(csv.contains("wick,proj,one,1,n/a,"));
    }

    #[test]
    fn schema_mismatch_rejected() {
        let bad = r#"{"schema":"other/2","experiment":"x","grid":[1.0],"tail_len":1,"passed":true,"rows":[]}"#;
        assert!(matches!(ResultFile::parse(bad, "f"), Err(AppError::Config(_))));
        assert!(ResultFile::parse("{", "f").is_err());
    }
}
