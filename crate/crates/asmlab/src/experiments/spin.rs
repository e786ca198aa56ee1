//! `spin identities | asm-defects | chsh-scan`.

use std::f64::consts::SQRT_2;

use asmlab_core::asymptotic::{defect_report, loglog_slope, DefectKind, HbarGrid, ReportRequest};
use asmlab_core::measure::{EventSet, Pvm};
use asmlab_core::operator::Tolerance;
use asmlab_core::smearing::{smear, ConfidenceKernel};
use asmlab_core::spin::{
    bell_threshold_scan, chsh_max, det_distance_residual, eavesdropping_threshold_constant, point_from_povm,
    povm_from_point, projectivity_identity_residual, roy_kar_path, spin_asm, spin_space, symmetric_violation_threshold,
    BallPoint, SpinPath, ThresholdScan, MINUS, PLUS,
};
use serde_json::json;

use super::{mode, Outcome, SWEEP_HBAR};
use crate::config::Params;
use crate::error::AppError;
use crate::sampling;

pub const MODES: [&str; 3] = ["identities", "asm-defects", "chsh-scan"];

/// Residual bound for the exact 2x2 identities.
pub const IDENTITY_TOL: f64 = 1e-12;

pub fn run(mut p: Params<'_>, grid: HbarGrid, seed: u64, tol: &Tolerance) -> Result<Outcome, AppError> {
    match mode(&mut p, &MODES)?.as_str() {
        "identities" => {
            let samples = p.usize("samples", 1000)?;
            p.finish()?;
            identities(grid, samples, seed)
        }
        "asm-defects" => {
            let n = p.direction("n", [0.0, 0.0, 1.0])?;
            p.finish()?;
            asm_defects(grid, n, tol)
        }
        _ => {
            p.finish()?;
            chsh_scan(grid)
        }
    }
}

fn identities(grid: HbarGrid, samples: usize, seed: u64) -> Result<Outcome, AppError> {
    let mut out = Outcome::new("spin identities", grid);
    let mut rng = sampling::rng(seed);
    let points: Vec<BallPoint> = (0..samples).map(|_| sampling::ball_point(&mut rng)).collect();
    let (mut proj, mut det, mut trip) = (0.0f64, 0.0f64, 0.0f64);
    for (i, x) in points.iter().enumerate() {
        proj = proj.max(projectivity_identity_residual(x));
        det = det.max(det_distance_residual(x, &points[(i + 1) % points.len()]));
        let back = point_from_povm(&povm_from_point(x))?.coords();
        let c = x.coords();
        trip = trip.max((0..3).map(|k| (back[k] - c[k]).abs()).fold(0.0, f64::max));
    }
    for (subject, v) in [
        ("projectivity_identity", proj),
        ("det_distance", det),
        ("round_trip", trip),
    ] {
        out.push(SWEEP_HBAR, DefectKind::Residual, subject, v)?;
        out.check_le(subject, v, IDENTITY_TOL);
    }
    out.derive("samples", json!(samples));
    out.derive("seed", json!(seed));
    Ok(out)
}

fn asm_defects(grid: HbarGrid, n: [f64; 3], tol: &Tolerance) -> Result<Outcome, AppError> {
    let mut out = Outcome::new("spin asm-defects", grid.clone());
    let family = spin_asm(&roy_kar_path(n)?, &grid, tol)?;
    let space = spin_space();
    let sharp = povm_from_point(&BallPoint::new(n)?).to_povm(&space, tol)?;
    let smeared = smear(&Pvm::new(sharp)?, &ConfidenceKernel::stochastic2(space)?, tol)?;
    let plus = EventSet::singleton(family.space(), PLUS)?;
    let minus = EventSet::singleton(family.space(), MINUS)?;
    let request = ReportRequest {
        event_pairs: vec![(plus.clone(), plus.clone()), (plus.clone(), minus.clone())],
        function_pairs: Vec::new(),
        equivalence: Some((&smeared, vec![plus.clone(), minus])),
    };
    out.report = defect_report(&family, &grid, &request)?;

    let pp = format!("{}*{}", plus.describe(), plus.describe());
    let column = out.report.column(DefectKind::Projectivity, &pp);
    let worst = column
        .iter()
        .map(|&(h, v)| (v - (2.0 * h - h * h) / 4.0).abs())
        .fold(0.0, f64::max);
    out.check_le("proj closed form (2h-h^2)/4", worst, IDENTITY_TOL);
    let values: Vec<f64> = column.iter().map(|c| c.1).collect();
    out.check(
        "proj nonincreasing",
        asmlab_core::asymptotic::is_nonincreasing(&values, 1e-9),
        format!("{values:?}"),
    );
    out.check_le(
        "roy-kar equals stochastic smearing",
        out.report.max_value(DefectKind::Equivalence),
        IDENTITY_TOL,
    );
    out.push(
        grid.min(),
        DefectKind::Continuity,
        &plus.describe(),
        family.continuity_defect(&plus, &grid)?,
    )?;
    let tail: Vec<(f64, f64)> = column
        .iter()
        .copied()
        .filter(|(h, _)| grid.tail().contains(h))
        .collect();
    out.derive("proj_slope_tail", json!(loglog_slope(&tail)));
    out.derive("direction", json!(n));
    Ok(out)
}

fn chsh_scan(grid: HbarGrid) -> Result<Outcome, AppError> {
    let mut out = Outcome::new("spin chsh-scan", grid.clone());
    let z = [0.0, 0.0, 1.0];
    let sharp_path = SpinPath::constant(z)?;
    let sharp = chsh_max(&sharp_path, &sharp_path, 1.0)?;
    out.check_le(
        "sharp singlet max = 2*sqrt(2)",
        (sharp.value - 2.0 * SQRT_2).abs(),
        1e-6,
    );
    out.derive("sharp_max", json!(sharp.value));
    out.derive("sharp_angles", json!(sharp.angles));

    let rk = roy_kar_path(z)?;
    let scan = bell_threshold_scan(&rk, &rk, &grid)?;
    let mut closed = 0.0f64;
    for &(h, s) in &scan.samples {
        out.push(h, DefectKind::Chsh, "max_S", s)?;
        closed = closed.max((s - 2.0 * SQRT_2 * (1.0 - h).powi(2)).abs());
    }
    out.check_le("max S = 2*sqrt(2)(1-h)^2", closed, 1e-9);
    let exact = symmetric_violation_threshold();
    match scan.outcome {
        ThresholdScan::Crossing { grid_hbar, refined } => {
            out.check_le("threshold scan vs 1-2^(-1/4)", (refined - exact).abs(), 1e-3);
            out.derive("threshold_grid", json!(grid_hbar));
            out.derive("threshold_scan", json!(refined));
        }
        ref other => out.check("threshold bracketed by grid", false, format!("{other:?}")),
    }
    let eaves = eavesdropping_threshold_constant();
    out.check_le("constant 1-sqrt2(sqrt2-1)^(1/2) = 0.0898", (eaves - 0.0898).abs(), 1e-4);
    out.derive("threshold_closed_form", json!(exact));
    out.derive("eavesdropping_constant", json!(eaves));
    out.notes.push(format!(
        "threshold scan {:?}; closed form {exact:.6}; eavesdropping constant {eaves:.6} (a different quantity)",
        scan.outcome
    ));
    Ok(out)
}
