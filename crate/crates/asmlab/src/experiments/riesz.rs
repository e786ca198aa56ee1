//! `riesz`: POVM ↔ positive map round trip, the integration bound and the
//! Naimark dilation on seeded random POVMs.

use asmlab_core::asymptotic::{DefectKind, HbarGrid};
use asmlab_core::measure::{naimark_dilate, Povm};
use asmlab_core::operator::Tolerance;
use rand::Rng;
use serde_json::json;

use super::{Outcome, SWEEP_HBAR};
use crate::config::Params;
use crate::error::{config, AppError};
use crate::sampling;

pub const ROUND_TRIP_TOL: f64 = 1e-12;
pub const BOUND_TOL: f64 = 1e-9;
pub const NAIMARK_TOL: f64 = 1e-8;

pub fn run(mut p: Params<'_>, grid: HbarGrid, seed: u64, tol: &Tolerance) -> Result<Outcome, AppError> {
    let cases = p.usize("cases", 100)?;
    let max_dim = p.usize("max_dim", 6)?;
    let max_atoms = p.usize("max_atoms", 5)?;
    p.finish()?;
    if max_dim == 0 || max_atoms == 0 {
        return Err(config("max_dim and max_atoms must be positive"));
    }
    let mut out = Outcome::new("riesz", grid);
    let mut rng = sampling::rng(seed);
    let (mut trip, mut bound, mut naimark) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cases {
        let dim = rng.random_range(1..=max_dim);
        let space = sampling::labeled_space(rng.random_range(1..=max_atoms));
        let a = sampling::povm(&mut rng, &space, dim, tol)?;
        let back = Povm::from_positive_map(&a, tol)?;
        for (x, y) in a.effects().iter().zip(back.effects()) {
            trip = trip.max((x - y).max_abs_entry());
        }
        let f = sampling::atom_fn(&mut rng, space.len());
        bound = bound.max(a.riesz_bound_residual(&f)?);
        naimark = naimark.max(naimark_dilate(&a, tol)?.compression_residual(&a)?);
    }
    for (subject, v, t) in [
        ("round_trip", trip, ROUND_TRIP_TOL),
        ("riesz_bound", bound, BOUND_TOL),
        ("naimark", naimark, NAIMARK_TOL),
    ] {
        out.push(SWEEP_HBAR, DefectKind::Residual, subject, v)?;
        out.check_le(subject, v, t);
    }
    out.derive("cases", json!(cases));
    Ok(out)
}
