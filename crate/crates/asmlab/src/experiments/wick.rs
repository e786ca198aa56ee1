//! `wick`: Wick POVM cells on truncated Fock space against the
//! incomplete-gamma oracle, truncation sensitivity, flat-symbol
//! multiplicativity and the index witness.

use std::sync::Arc;

use asmlab_core::asymptotic::{DefectKind, HbarGrid};
use asmlab_core::measure::EventSet;
use asmlab_core::operator::{max_dim, Operator, Tolerance};
use asmlab_core::wick::special::gamma_p;
use asmlab_core::wick::{cdelta_mult_defect, index_witness, toeplitz, truncation_edge, wick_asm, FockTrunc, Symbol};
use serde_json::json;

use super::Outcome;
use crate::config::Params;
use crate::error::{config, AppError};

pub const ORACLE_TOL: f64 = 1e-8;
/// Largest allowed `|value(N) − value(N/2)| / value(N)`.
pub const SENSITIVITY_LIMIT: f64 = 0.10;
/// Required ratio `value(⅛)/value(½)` for the decay check.
pub const DECAY_RATIO: f64 = 0.25;

/// Parse `disks:r1,r2,…` (nested radii: a disk and the annuli between) or
/// `annuli:a-b,c-d,…`.
pub fn parse_cells(spec: &str) -> Result<Vec<Symbol>, AppError> {
    let num = |s: &str| -> Result<f64, AppError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| config(format!("bad radius {s:?} in {spec:?}")))
    };
    if let Some(rest) = spec.strip_prefix("disks:") {
        let radii = rest.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        if radii.windows(2).any(|w| w[0].is_nan() || w[1].is_nan() || w[0] >= w[1]) {
            return Err(config(format!("disk radii must increase: {spec:?}")));
        }
        let mut cells = vec![Symbol::disk(radii[0])?];
        for w in radii.windows(2) {
            cells.push(Symbol::annulus(w[0], w[1])?);
        }
        Ok(cells)
    } else if let Some(rest) = spec.strip_prefix("annuli:") {
        rest.split(',')
            .map(|pair| {
                let (a, b) = pair
                    .split_once('-')
                    .ok_or_else(|| config(format!("annulus {pair:?} must be inner-outer")))?;
                Ok(Symbol::annulus(num(a)?, num(b)?)?)
            })
            .collect()
    } else {
        Err(config(format!("cells spec {spec:?} must start with disks: or annuli:")))
    }
}

/// Band radii of a disk or annulus cell.
fn band(cell: &Symbol) -> (f64, f64) {
    let c = cell.as_cells().expect("parsed cells are indicators")[0];
    (c.inner, c.outer)
}

/// Independent diagonal oracle: `max_n p(1−p)` with `p_n = P(n+1, r₂²/ħ²) − P(n+1, r₁²/ħ²)`.
pub fn proj_oracle(inner: f64, outer: f64, hbar: f64, degree: usize) -> Result<f64, AppError> {
    let mut worst = 0.0f64;
    for n in 0..=degree {
        let a = n as f64 + 1.0;
        let p = gamma_p(a, (outer / hbar).powi(2))? - gamma_p(a, (inner / hbar).powi(2))?;
        worst = worst.max(p * (1.0 - p));
    }
    Ok(worst)
}

pub fn run(mut p: Params<'_>, grid: HbarGrid, tol: &Tolerance) -> Result<Outcome, AppError> {
    let trunc = p.usize("trunc", 32)?;
    let cells_spec = p.string("cells", "disks:1.0")?;
    let windings: Vec<i64> = p
        .numbers("windings", &[-2.0, -1.0, 1.0, 2.0])?
        .into_iter()
        .map(|m| {
            if m.fract() == 0.0 {
                Ok(m as i64)
            } else {
                Err(config(format!("winding {m} is not an integer")))
            }
        })
        .collect::<Result<_, _>>()?;
    let check_decay = p.bool("check_decay", false)?;
    p.finish()?;
    let fock = FockTrunc::new(trunc)?;
    let cells = parse_cells(&cells_spec)?;
    if let Some(m) = windings.iter().find(|m| 4 * m.unsigned_abs() as usize > trunc) {
        return Err(config(format!("winding {m} needs 4|m| <= trunc = {trunc}")));
    }

    let mut out = Outcome::new("wick", grid.clone());
    let id = toeplitz(&Symbol::constant(1.0), &fock)?;
    out.check(
        "toeplitz(1) = I exactly",
        id == Operator::identity(fock.dim()),
        "entrywise equality",
    );

    let family = wick_asm(&cells, &fock, &grid, tol)?;
    let half = wick_asm(&cells, &fock.half(), &grid, tol)?;
    let events: Vec<EventSet> = (0..cells.len())
        .map(|i| EventSet::singleton(family.space(), i))
        .collect::<Result<_, _>>()?;
    let mut oracle_gap = 0.0f64;
    let mut first_cell: Vec<(f64, f64, f64)> = Vec::new();
    let mut edges = Vec::new();
    for &h in grid.values() {
        for (i, (cell, e)) in cells.iter().zip(&events).enumerate() {
            let subject = format!("{}*{}", e.describe(), e.describe());
            let v = family.proj_defect(e, e, h)?;
            let (r1, r2) = band(cell);
            oracle_gap = oracle_gap.max((v - proj_oracle(r1, r2, h, fock.degree())?).abs());
            let hv = half.proj_defect(e, e, h)?;
            let sens = if v == 0.0 { 0.0 } else { (v - hv).abs() / v };
            out.push(h, DefectKind::Projectivity, &subject, v)?;
            out.push(h, DefectKind::Sensitivity, &subject, sens)?;
            if i == 0 {
                first_cell.push((h, v, sens));
            }
            for f in &events[i + 1..] {
                out.push(
                    h,
                    DefectKind::Projectivity,
                    &format!("{}*{}", e.describe(), f.describe()),
                    family.proj_defect(e, f, h)?,
                )?;
            }
        }
        edges.push((h, truncation_edge(&cells, h, &fock)?));
    }
    out.check_le("proj column vs incomplete-gamma oracle", oracle_gap, ORACLE_TOL);
    out.derive("truncation_edge", json!(edges));

    let bump = Symbol::radial("bump", Arc::new(|r: f64| 1.0 - (-r * r).exp()), Some(1.0));
    let well = Symbol::radial("well", Arc::new(|r: f64| (-r * r / 2.0).exp()), Some(0.0));
    let winding = Symbol::winding(1, asmlab_core::wick::WINDING_SMOOTHING)?;
    let mut bump_values = Vec::new();
    for &h in grid.values() {
        let d = cdelta_mult_defect(&bump, &well, h, &fock)?;
        out.push(h, DefectKind::Multiplicativity, "bump*well", d.value)?;
        out.push(h, DefectKind::Sensitivity, "bump*well", d.sensitivity())?;
        bump_values.push(d.value);
        // edge-dominated at truncation; reported only
        let w = cdelta_mult_defect(&winding, &winding.conj(), h, &fock)?;
        out.push(h, DefectKind::Multiplicativity, "winding*conj", w.value)?;
        out.push(h, DefectKind::Sensitivity, "winding*conj", w.sensitivity())?;
    }
    out.check(
        "bump*well defect decreasing",
        bump_values.windows(2).all(|w| w[1] < w[0]),
        format!("{bump_values:?}"),
    );

    let double = FockTrunc::new(2 * trunc).ok().filter(|f| f.dim() <= max_dim());
    let mut index = Vec::new();
    for &m in &windings {
        let at_n = index_witness(m, &fock, tol)?;
        let at_2n = match &double {
            Some(f) => Some(index_witness(m, f, tol)?),
            None => None,
        };
        out.check(
            format!("index_witness({m}) = {}", -m),
            at_n == -m && at_2n.is_none_or(|v| v == at_n),
            format!("N={trunc}: {at_n}, 2N: {at_2n:?}"),
        );
        index.push(json!({"m": m, "index": at_n, "index_2n": at_2n}));
        let twice = at_2n.map_or("n/a".to_string(), |v| v.to_string());
        out.notes
            .push(format!("index m={m} N={trunc} -> {at_n} (N={}: {twice})", 2 * trunc));
    }
    out.derive("index", json!(index));

    if check_decay {
        let values: Vec<f64> = first_cell.iter().map(|c| c.1).collect();
        out.check(
            "proj decreasing strictly along grid",
            values.windows(2).all(|w| w[1] < w[0]),
            format!("{values:?}"),
        );
        let at = |target: f64| first_cell.iter().find(|c| c.0 == target).map(|c| c.1);
        match (at(0.5), at(0.125)) {
            (Some(half_v), Some(eighth)) => out.check(
                "proj(1/8) <= 0.25 proj(1/2)",
                eighth <= DECAY_RATIO * half_v,
                format!("{eighth:.6} vs {:.6}", DECAY_RATIO * half_v),
            ),
            _ => out.check("proj(1/8) <= 0.25 proj(1/2)", false, "grid lacks 1/2 or 1/8"),
        }
        for &(h, _, s) in &first_cell {
            out.check(
                format!("N vs N/2 sensitivity < 10% at h = {h}"),
                s < SENSITIVITY_LIMIT,
                format!("{s:.4}"),
            );
        }
    }
    out.derive("trunc", json!(trunc));
    out.derive(
        "cells",
        json!(cells.iter().map(|c| c.label().to_string()).collect::<Vec<_>>()),
    );
    Ok(out)
}
