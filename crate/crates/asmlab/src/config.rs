//! Experiment configuration: the JSON file form and typed parameter access.

use std::collections::BTreeSet;

use asmlab_core::asymptotic::HbarGrid;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{config, AppError};

pub const EXPERIMENTS: [&str; 6] = ["spin", "smear", "quasi", "wick", "deform", "riesz"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub hbar_grid: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, AppError> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| config(format!("config JSON: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), AppError> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(config(format!(
                "unknown experiment {:?}; expected one of {}",
                self.experiment,
                EXPERIMENTS.join(", ")
            )));
        }
        parse_grid(&self.hbar_grid)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<HbarGrid, AppError> {
        parse_grid(&self.hbar_grid)
    }
}

fn number(s: &str) -> Result<f64, AppError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| config(format!("not a number: {s:?}")))
}

/// `geometric:start,ratio,count` or an explicit comma list, optionally
/// followed by `;tail=k`. The default tail is the last `min(3, len)` values.
pub fn parse_grid(spec: &str) -> Result<HbarGrid, AppError> {
    let (body, tail) = match spec.split_once(";tail=") {
        Some((b, t)) => (
            b,
            Some(
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| config(format!("bad tail length in {spec:?}")))?,
            ),
        ),
        None => (spec, None),
    };
    let grid = if let Some(rest) = body.strip_prefix("geometric:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 3 {
            return Err(config(format!("geometric grid needs start,ratio,count: {spec:?}")));
        }
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| config(format!("grid count must be an integer: {spec:?}")))?;
        HbarGrid::geometric(number(parts[0])?, number(parts[1])?, count)
    } else {
        let values = body.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
        let tail = values.len().clamp(2, 3);
        HbarGrid::new(values, tail)
    }
    .map_err(|e| config(format!("grid {spec:?}: {e}")))?;
    match tail {
        Some(t) => grid.with_tail(t).map_err(|e| config(format!("grid {spec:?}: {e}"))),
        None => Ok(grid),
    }
}

/// Typed view of `params`. Every key must be consumed by the experiment;
/// leftovers are reported as a config error by [`Params::finish`].
pub struct Params<'a> {
    map: &'a Map<String, Value>,
    used: BTreeSet<String>,
}

impl<'a> Params<'a> {
    pub fn new(map: &'a Map<String, Value>) -> Self {
        Params {
            map,
            used: BTreeSet::new(),
        }
    }

    fn get(&mut self, key: &str) -> Option<&'a Value> {
        self.used.insert(key.to_string());
        self.map.get(key)
    }

    pub fn string(&mut self, key: &str, default: &str) -> Result<String, AppError> {
        match self.get(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(v) => Err(config(format!("param {key} must be a string, got {v}"))),
        }
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize, AppError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| config(format!("param {key} must be a nonnegative integer, got {v}"))),
        }
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64, AppError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| config(format!("param {key} must be a number, got {v}"))),
        }
    }

    pub fn bool(&mut self, key: &str, default: bool) -> Result<bool, AppError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Bool(b)) => Ok(*b),
            Some(v) => Err(config(format!("param {key} must be true or false, got {v}"))),
        }
    }

    /// Comma list of numbers (`"0,0,1"`) or a JSON array.
    pub fn numbers(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, AppError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::String(s)) => s.split(',').map(number).collect(),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| config(format!("param {key} holds a non-number {v}")))
                })
                .collect(),
            Some(v) => Err(config(format!("param {key} must be a list of numbers, got {v}"))),
        }
    }

    /// Unit vector; inputs off the sphere by more than 1e-6 are normalized
    /// with a warning on stderr.
    pub fn direction(&mut self, key: &str, default: [f64; 3]) -> Result<[f64; 3], AppError> {
        let v = self.numbers(key, &default)?;
        let [x, y, z] = v[..] else {
            return Err(config(format!("param {key} needs three components, got {}", v.len())));
        };
        let len = (x * x + y * y + z * z).sqrt();
        if !(len.is_finite() && len > 0.0) {
            return Err(config(format!("param {key} must be a nonzero finite vector")));
        }
        if (len - 1.0).abs() > 1e-6 {
            eprintln!("warning: {key} = ({x}, {y}, {z}) has norm {len}; normalizing");
        }
        Ok([x / len, y / len, z / len])
    }

    pub fn finish(self) -> Result<(), AppError> {
        let extra: Vec<&String> = self.map.keys().filter(|k| !self.used.contains(*k)).collect();
        if extra.is_empty() {
            Ok(())
        } else {
            Err(config(format!("unknown params: {extra:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        let g = parse_grid("geometric:1,0.5,8").unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.min(), 1.0 / 128.0);
        assert_eq!(g.tail_len(), 3);
        let g = parse_grid("1,0.5,0.25,0.125").unwrap();
        assert_eq!(g.values(), &[1.0, 0.5, 0.25, 0.125]);
        let g = parse_grid("geometric:1,0.5,6;tail=4").unwrap();
        assert_eq!(g.tail_len(), 4);
        for bad in [
            "",
            "geometric:1,0.5",
            "1,2",
            "0.5,0.5",
            "abc",
            "geometric:1,0.5,x",
            "1,0.5;tail=9",
        ] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_validation() {
        let ok = r#"{"experiment":"spin","hbar_grid":"geometric:1,0.5,4","seed":3}"#;
        assert_eq!(ExperimentConfig::from_json(ok).unwrap().seed, 3);
        assert!(ExperimentConfig::from_json(r#"{"experiment":"nope","hbar_grid":"1,0.5"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment":"spin","hbar_grid":"2,1"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment":"spin","hbar_grid":"1,0.5","extra":1}"#).is_err());
    }

    #[test]
    fn params_are_typed_and_exhaustive() {
        let map: Map<String, Value> =
            serde_json::from_str(r#"{"samples":10,"n":"0,0,2","flag":true,"stray":1}"#).unwrap();
        let mut p = Params::new(&map);
        assert_eq!(p.usize("samples", 1).unwrap(), 10);
        assert_eq!(p.direction("n", [1.0, 0.0, 0.0]).unwrap(), [0.0, 0.0, 1.0]);
        assert!(p.bool("flag", false).unwrap());
        assert!(p.f64("samples", 0.0).is_ok());
        assert!(p.finish().is_err());
    }
}
