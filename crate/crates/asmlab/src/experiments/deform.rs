//! `deform`: injectivity profile and norm recovery for a Wick partition,
//! with a constant PVM as the exact reference.

use asmlab_core::asymptotic::{is_nonincreasing, AsmFamily, DefectKind, HbarGrid};
use asmlab_core::measure::{pvm_from_selfadjoint, AtomFn, EventSet};
use asmlab_core::operator::{Operator, Tolerance};
use asmlab_core::wick::{wick_asm, FockTrunc};
use serde_json::json;

use super::Outcome;
use crate::config::Params;
use crate::error::AppError;
use crate::experiments::wick::parse_cells;

pub fn run(mut p: Params<'_>, grid: HbarGrid, tol: &Tolerance) -> Result<Outcome, AppError> {
    let trunc = p.usize("trunc", 64)?;
    let cells_spec = p.string("cells", "disks:0.5,1.0,1.5")?;
    p.finish()?;
    let fock = FockTrunc::new(trunc)?;
    let cells = parse_cells(&cells_spec)?;
    let mut out = Outcome::new("deform", grid.clone());

    let family = wick_asm(&cells, &fock, &grid, tol)?;
    // nested disks: cells 0..=i of a `disks:` partition make disk(r_i)
    let bands: Vec<(f64, f64)> = cells
        .iter()
        .map(|c| {
            let b = c.as_cells().expect("indicator")[0];
            (b.inner, b.outer)
        })
        .collect();
    let mut sets = family.carrier().to_vec();
    let mut unit_disk = None;
    for i in 1..cells.len() {
        let nested = bands[0].0 == 0.0 && bands[..=i].windows(2).all(|w| w[0].1 == w[1].0);
        if nested {
            if bands[i].1 == 1.0 {
                unit_disk = Some(sets.len());
            }
            sets.push(EventSet::new(family.space(), 0..=i)?);
        }
    }
    if bands[0] == (0.0, 1.0) {
        unit_disk = Some(0);
    }
    let profile = family.injectivity_profile(&sets, &grid, tol)?;
    for (subject, v) in &profile.entries {
        out.push(grid.min(), DefectKind::Norm, subject, *v)?;
    }
    let cells_injective = profile.entries[..cells.len()].iter().all(|e| e.1 > tol.rank_tol);
    out.check(
        "wick partition injective on the tail",
        cells_injective,
        format!("{:?}", &profile.entries[..cells.len()]),
    );
    if let Some(i) = unit_disk {
        // ‖A_ħ(disk 1)‖ = 1 − e^{−1/ħ²} grows as ħ falls: the tail minimum
        // sits at the largest tail ħ
        let expect = grid
            .tail()
            .iter()
            .map(|&h| 1.0 - (-1.0 / (h * h)).exp())
            .fold(f64::INFINITY, f64::min);
        let got = profile.entries[i].1;
        out.check(
            "unit disk tail minimum >= min over tail of 1 - exp(-1/h^2), and > 0.9",
            got >= expect - 1e-12 && got > 0.9,
            format!("{got:.12} vs {expect:.12}"),
        );
    }
    let edge: Vec<(f64, f64)> = grid
        .values()
        .iter()
        .map(|&h| Ok((h, asmlab_core::wick::truncation_edge(&cells, h, &fock)?)))
        .collect::<Result<_, AppError>>()?;
    out.derive("truncation_edge", json!(edge));

    // radial bump on cell midpoints, zero on the complement
    let mut values: Vec<f64> = cells
        .iter()
        .map(|c| {
            let cell = c.as_cells().expect("indicator")[0];
            let mid = 0.5 * (cell.inner + cell.outer);
            (-mid * mid).exp()
        })
        .collect();
    values.push(0.0);
    let f = AtomFn::real(&values);
    let rec = family.norm_recovery_residual(&f, &grid, tol)?;
    for &(h, v) in &rec.trend {
        out.push(h, DefectKind::Residual, "norm_recovery", v)?;
    }
    let trend: Vec<f64> = rec.trend.iter().map(|t| t.1).collect();
    out.check(
        "norm recovery residual decreasing over the tail",
        is_nonincreasing(&trend, 1e-9),
        format!("{trend:?}"),
    );

    let pvm = pvm_from_selfadjoint(&Operator::diag_real(&[1.0, -1.0])?, tol)?;
    let constant = AsmFamily::constant("sigma3", pvm.into_povm());
    let g = AtomFn::real(&[0.3, -0.8]);
    let exact = constant.norm_recovery_residual(&g, &grid, tol)?;
    out.push(
        grid.min(),
        DefectKind::Residual,
        "constant_pvm_norm_recovery",
        exact.residual,
    )?;
    out.check_le("constant PVM norm recovery", exact.residual, 1e-10);
    let full = EventSet::full(constant.space());
    out.push(
        grid.min(),
        DefectKind::Norm,
        "constant_pvm_total",
        constant.at(grid.min())?.apply(&full)?.norm(),
    )?;
    out.derive("injective", json!(cells_injective));
    out.derive("norm_recovery_residual", json!(rec.residual));
    Ok(out)
}
