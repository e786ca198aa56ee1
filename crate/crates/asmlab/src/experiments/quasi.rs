//! `quasi sweep | count`: straightening random quasiprojectors, and the
//! semiclassical state count of the Roy–Kar family.

use asmlab_core::asymptotic::{DefectKind, HbarGrid};
use asmlab_core::measure::EventSet;
use asmlab_core::operator::Tolerance;
use asmlab_core::quasiprojector::{count_states, semiclassical_report, straighten, trace_defect};
use asmlab_core::spin::{roy_kar_path, spin_asm, PLUS};
use rand::Rng;
use serde_json::json;

use super::{mode, Outcome, SWEEP_HBAR};
use crate::config::Params;
use crate::error::{config, AppError};
use crate::sampling;

pub const MODES: [&str; 2] = ["sweep", "count"];
pub const STRAIGHTEN_TOL: f64 = 1e-9;
/// Band for `trace_defect/ħ` at `ħ ≤ 1/8`.
pub const TRACE_RATIO_BAND: (f64, f64) = (0.4, 0.6);

pub fn run(mut p: Params<'_>, grid: HbarGrid, seed: u64, tol: &Tolerance) -> Result<Outcome, AppError> {
    match mode(&mut p, &MODES)?.as_str() {
        "sweep" => {
            let cases = p.usize("cases", 500)?;
            let max_dim = p.usize("max_dim", 8)?;
            p.finish()?;
            if max_dim == 0 {
                return Err(config("max_dim must be positive"));
            }
            sweep(grid, cases, max_dim, seed, tol)
        }
        _ => {
            let n = p.direction("n", [0.0, 0.0, 1.0])?;
            p.finish()?;
            count(grid, n, tol)
        }
    }
}

fn sweep(grid: HbarGrid, cases: usize, max_dim: usize, seed: u64, tol: &Tolerance) -> Result<Outcome, AppError> {
    let mut out = Outcome::new("quasi sweep", grid);
    let mut rng = sampling::rng(seed);
    let (mut excess, mut proj) = (0.0f64, 0.0f64);
    for _ in 0..cases {
        let dim = rng.random_range(1..=max_dim);
        let (a, _) = sampling::quasiprojector(&mut rng, dim, tol)?;
        let s = straighten(&a, tol)?;
        excess = excess.max(s.error - s.bound());
        let e = &s.projection;
        proj = proj.max((&(e * e) - e).norm());
    }
    out.push(SWEEP_HBAR, DefectKind::Residual, "bound_excess", excess.max(0.0))?;
    out.push(SWEEP_HBAR, DefectKind::Residual, "projection", proj)?;
    out.check_le("|a-e| <= (1-sqrt(1-4eps))/2", excess, STRAIGHTEN_TOL);
    out.check_le("e is a projection", proj, STRAIGHTEN_TOL);
    out.derive("cases", json!(cases));
    Ok(out)
}

fn count(grid: HbarGrid, n: [f64; 3], tol: &Tolerance) -> Result<Outcome, AppError> {
    let mut out = Outcome::new("quasi count", grid.clone());
    let family = spin_asm(&roy_kar_path(n)?, &grid, tol)?;
    let plus = EventSet::singleton(family.space(), PLUS)?;
    out.report = semiclassical_report(&family, &plus, &grid, tol)?;
    match count_states(&family, &plus, &grid, tol) {
        Ok(c) => {
            out.check(
                "count_states({+1/2}) = 1",
                c.count == 1,
                format!("count {} ranks {:?}", c.count, c.ranks),
            );
            out.derive("count", json!(c.count));
            out.derive("trace_residual", json!(c.trace_residual));
        }
        Err(e) => out.check("count_states({+1/2}) = 1", false, e.to_string()),
    }
    let mut ratios = Vec::new();
    for &h in grid.values().iter().filter(|&&h| h <= 0.125) {
        let r = trace_defect(&family, &plus, h)? / h;
        ratios.push((h, r));
        out.check(
            format!("trace_defect/h in [0.4, 0.6] at h = {h}"),
            (TRACE_RATIO_BAND.0..=TRACE_RATIO_BAND.1).contains(&r),
            format!("{r:.6} (exact (2h-h^2)/2/h = {:.6})", 1.0 - h / 2.0),
        );
    }
    if ratios.is_empty() {
        out.check("grid reaches h <= 1/8", false, "no grid value at or below 1/8");
    }
    out.derive("trace_defect_ratios", json!(ratios));
    let a0 = family.at(grid.min())?.apply(&plus)?;
    out.derive("min_hbar_trace", json!(a0.trace().re));
    Ok(out)
}
