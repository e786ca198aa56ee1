//! `smear`: the defect bound on seeded random cases, plus the smeared σ₃
//! family along the grid.

use std::sync::Arc;

use asmlab_core::asymptotic::{defect_report, is_nonincreasing, DefectKind, HbarGrid, ReportRequest};
use asmlab_core::measure::{pvm_from_selfadjoint, EventSet};
use asmlab_core::operator::{Operator, Tolerance};
use asmlab_core::smearing::{continuity_transport_residual, smear, smear_defect_bound_residual, ConfidenceKernel};
use rand::Rng;
use serde_json::json;

use super::{Outcome, SWEEP_HBAR};
use crate::config::Params;
use crate::error::{config, AppError};
use crate::sampling;

pub const BOUND_TOL: f64 = 1e-9;

pub fn run(mut p: Params<'_>, grid: HbarGrid, seed: u64, tol: &Tolerance) -> Result<Outcome, AppError> {
    let cases = p.usize("cases", 200)?;
    let max_dim = p.usize("max_dim", 8)?;
    let max_atoms = p.usize("max_atoms", 5)?;
    let kernel_name = p.string("kernel", "stochastic2")?;
    let sigma_scale = p.f64("sigma_scale", 1.0)?;
    p.finish()?;
    if max_dim == 0 || max_atoms == 0 {
        return Err(config("max_dim and max_atoms must be positive"));
    }

    let mut out = Outcome::new("smear", grid.clone());
    let mut rng = sampling::rng(seed);
    let (mut bound, mut transport) = (0.0f64, 0.0f64);
    for case in 0..cases {
        let dim = rng.random_range(1..=max_dim);
        let source = sampling::labeled_space(rng.random_range(1..=max_atoms));
        let target = sampling::labeled_space(rng.random_range(1..=max_atoms));
        let e = sampling::pvm(&mut rng, &source, dim, tol)?;
        let k = sampling::kernel(&mut rng, &source, &target);
        let d1 = sampling::event(&mut rng, &target);
        let d2 = sampling::event(&mut rng, &target);
        let h = 1.0 - rng.random::<f64>();
        bound = bound.max(smear_defect_bound_residual(&e, &k, &d1, &d2, h, tol)?);
        if case < 20 {
            transport = transport.max(continuity_transport_residual(&e, &k, &d1, &grid, tol)?);
        }
    }
    out.push(SWEEP_HBAR, DefectKind::Residual, "defect_bound", bound)?;
    out.push(SWEEP_HBAR, DefectKind::Residual, "continuity_transport", transport)?;
    out.check_le("proj_defect <= kernel_defect", bound, BOUND_TOL);
    out.check_le("continuity transported by the kernel", transport, BOUND_TOL);

    let e = pvm_from_selfadjoint(&Operator::diag_real(&[1.0, -1.0])?, tol)?;
    let space = Arc::clone(e.space());
    let kernel = match kernel_name.as_str() {
        "stochastic2" => ConfidenceKernel::stochastic2(Arc::clone(&space))?,
        "gaussian_grid" => ConfidenceKernel::gaussian_grid(Arc::clone(&space), Arc::clone(&space), sigma_scale)?,
        other => {
            return Err(config(format!(
                "unknown kernel {other:?}; use stochastic2 or gaussian_grid"
            )))
        }
    };
    let family = smear(&e, &kernel, tol)?;
    let pairs: Vec<(EventSet, EventSet)> = (0..space.len())
        .flat_map(|i| (i..space.len()).map(move |j| (i, j)))
        .map(|(i, j)| Ok((EventSet::singleton(&space, i)?, EventSet::singleton(&space, j)?)))
        .collect::<Result<_, asmlab_core::Error>>()?;
    let request = ReportRequest {
        event_pairs: pairs.clone(),
        ..Default::default()
    };
    out.report.extend(defect_report(&family, &grid, &request)?);
    for (d1, d2) in &pairs {
        let subject = format!("{}*{}", d1.describe(), d2.describe());
        let values: Vec<f64> = out
            .report
            .column(DefectKind::Projectivity, &subject)
            .iter()
            .map(|c| c.1)
            .collect();
        out.check(
            format!("proj {subject} nonincreasing"),
            is_nonincreasing(&values, 1e-9),
            format!("{values:?}"),
        );
    }
    out.derive("cases", json!(cases));
    out.derive("kernel", json!(kernel_name));
    Ok(out)
}
