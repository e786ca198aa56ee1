//! Straightening quasiprojectors into projections and semiclassical counts.
//!
//! A positive contraction `a` with `ε = ‖a − a²‖ ≤ 3/16` has no spectrum in
//! `(¼, ¾)`, so `e = χ_{(½,∞)}(a)` is a well-defined projection with
//! `‖a − e‖ ≤ (1 − √(1 − 4ε))/2`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::asymptotic::{proj_defect_of, AsmFamily, DefectKind, DefectReport, HbarGrid};
use crate::error::{invalid, Error, Result};
use crate::measure::EventSet;
use crate::operator::{hermitian_eig, rank_tol, Operator, Tolerance};

/// Largest `‖a − a²‖` for which straightening is defined.
pub const GAP_LIMIT: f64 = 3.0 / 16.0;

/// Upper bound `(1 − √(1 − 4ε))/2` on `‖a − e‖`.
pub fn straighten_bound(defect: f64) -> f64 {
    (1.0 - (1.0 - 4.0 * defect).max(0.0).sqrt()) / 2.0
}

#[derive(Debug, Clone)]
pub struct Straightened {
    pub projection: Operator,
    /// `ε = ‖a − a²‖`.
    pub defect: f64,
    /// `‖a − e‖`.
    pub error: f64,
}

impl Straightened {
    pub fn bound(&self) -> f64 {
        straighten_bound(self.defect)
    }
}

/// Replace a quasiprojector by the spectral projection onto eigenvalues
/// above ½.
pub fn straighten(a: &Operator, tol: &Tolerance) -> Result<Straightened> {
    straighten_at(a, None, tol)
}

fn straighten_at(a: &Operator, hbar: Option<f64>, tol: &Tolerance) -> Result<Straightened> {
    let eig = hermitian_eig(a, tol)?;
    let (lo, hi) = (eig.values[0], *eig.values.last().expect("dim ≥ 1"));
    if lo < -tol.psd_tol || hi > 1.0 + tol.psd_tol {
        return Err(invalid(format!(
            "quasiprojector spectrum [{lo}, {hi}] is not inside [0,1]"
        )));
    }
    let defect = (a - &(a * a)).norm();
    if defect > GAP_LIMIT {
        return Err(Error::GapViolation { hbar, defect });
    }
    if let Some(&l) = eig.values.iter().find(|&&l| (l - 0.5).abs() <= tol.eig_tol) {
        return Err(Error::DegenerateSpectrum {
            eigenvalue: l,
            threshold: 0.5,
        });
    }
    let projection = eig.rebuild(|l| if l > 0.5 { 1.0 } else { 0.0 });
    let error = (a - &projection).norm();
    Ok(Straightened {
        projection,
        defect,
        error,
    })
}

/// One straightened tail point.
#[derive(Debug, Clone)]
pub struct StraightenedPoint {
    pub hbar: f64,
    pub straightened: Straightened,
}

/// Projections `E_ħ(Δ)` at each tail ħ.
#[derive(Debug, Clone)]
pub struct StraightenedFamily {
    pub event: EventSet,
    pub points: Vec<StraightenedPoint>,
}

impl StraightenedFamily {
    pub fn errors(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.straightened.error).collect()
    }

    pub fn ranks(&self, tol: &Tolerance) -> Vec<usize> {
        self.points
            .iter()
            .map(|p| rank_tol(&p.straightened.projection, tol))
            .collect()
    }
}

pub fn straighten_family(
    family: &AsmFamily,
    event: &EventSet,
    grid: &HbarGrid,
    tol: &Tolerance,
) -> Result<StraightenedFamily> {
    if !family.is_normalized() {
        return Err(invalid("straightening needs a normalized family"));
    }
    let points = grid
        .tail()
        .iter()
        .map(|&h| {
            let a = family.at(h)?.apply(event)?;
            Ok(StraightenedPoint {
                hbar: h,
                straightened: straighten_at(&a, Some(h), tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StraightenedFamily {
        event: event.clone(),
        points,
    })
}

/// `tr(A_ħ(Δ) − A_ħ(Δ)²)`.
pub fn trace_defect(family: &AsmFamily, event: &EventSet, hbar: f64) -> Result<f64> {
    let a = family.at(hbar)?.apply(event)?;
    let t = (&a - &(&a * &a)).trace();
    if t.im.abs() > 1e-10 {
        return Err(invalid(format!("trace defect has imaginary part {}", t.im)));
    }
    Ok(t.re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateCount {
    /// `N_Δ`, the common rank of the straightened projections.
    pub count: usize,
    /// `|tr A_ħmin(Δ) − N_Δ|`.
    pub trace_residual: f64,
    pub ranks: Vec<usize>,
}

/// Semiclassical state count `N_Δ`; the rank must be constant over the tail.
pub fn count_states(family: &AsmFamily, event: &EventSet, grid: &HbarGrid, tol: &Tolerance) -> Result<StateCount> {
    let sf = straighten_family(family, event, grid, tol)?;
    let ranks = sf.ranks(tol);
    let count = ranks[0];
    if ranks.iter().any(|&r| r != count) {
        return Err(Error::NonConvergent { ranks });
    }
    let tr = family.at(grid.min())?.apply(event)?.trace().re;
    Ok(StateCount {
        count,
        trace_residual: (tr - count as f64).abs(),
        ranks,
    })
}

/// Per tail ħ: `(ħ, ‖E_ħ(Δ₁)E_ħ(Δ₂)‖, ‖A_ħ(Δ₁)A_ħ(Δ₂) − A_ħ(Δ₁∩Δ₂)‖)`.
pub fn exclusivity(
    family: &AsmFamily,
    d1: &EventSet,
    d2: &EventSet,
    grid: &HbarGrid,
    tol: &Tolerance,
) -> Result<Vec<(f64, f64, f64)>> {
    if !d1.is_disjoint(d2) {
        return Err(invalid("exclusivity is defined for disjoint events"));
    }
    let s1 = straighten_family(family, d1, grid, tol)?;
    let s2 = straighten_family(family, d2, grid, tol)?;
    s1.points
        .iter()
        .zip(&s2.points)
        .map(|(p, q)| {
            let prod = (&p.straightened.projection * &q.straightened.projection).norm();
            let pd = proj_defect_of(&family.at(p.hbar)?, d1, d2)?;
            Ok((p.hbar, prod, pd))
        })
        .collect()
}

/// Per tail ħ rows: trace, trace_defect, rank, straighten_error.
pub fn semiclassical_report(
    family: &AsmFamily,
    event: &EventSet,
    grid: &HbarGrid,
    tol: &Tolerance,
) -> Result<DefectReport> {
    let sf = straighten_family(family, event, grid, tol)?;
    let subject = event.describe();
    let mut report = DefectReport::new();
    for p in &sf.points {
        let a = family.at(p.hbar)?.apply(event)?;
        report.push(p.hbar, DefectKind::Trace, subject.as_str(), a.trace().re.max(0.0))?;
        report.push(
            p.hbar,
            DefectKind::TraceDefect,
            subject.as_str(),
            trace_defect(family, event, p.hbar)?.max(0.0),
        )?;
        report.push(
            p.hbar,
            DefectKind::Rank,
            subject.as_str(),
            rank_tol(&p.straightened.projection, tol) as f64,
        )?;
        report.push(
            p.hbar,
            DefectKind::StraightenError,
            subject.as_str(),
            p.straightened.error,
        )?;
    }
    Ok(report)
}

/// Least-squares constant `C` in `trace_defect(ħ)/N_Δ ≈ C·ħ` over the tail.
pub fn fitted_trace_constant(family: &AsmFamily, event: &EventSet, grid: &HbarGrid, count: usize) -> Result<f64> {
    if count == 0 {
        return Err(invalid("no semiclassical states to normalise by"));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &h in grid.tail() {
        let t = trace_defect(family, event, h)? / count as f64;
        num += t * h;
        den += h * h;
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotic::Generator;
    use crate::measure::{pvm_from_selfadjoint, Povm, SampleSpace};
    use alloc::sync::Arc;
    use alloc::vec;

    #[test]
    fn straighten_examples() {
        let tol = Tolerance::default();
        let s = straighten(&Operator::diag_real(&[0.9, 0.1]).unwrap(), &tol).unwrap();
        assert!((&s.projection - &Operator::diag_real(&[1.0, 0.0]).unwrap()).norm() < 1e-15);

        let p = Operator::diag_real(&[1.0, 0.0, 1.0]).unwrap();
        let s = straighten(&p, &tol).unwrap();
        assert!((&s.projection - &p).norm() < 1e-10);

        let a = Operator::diag_real(&[0.8, 0.15, 0.95]).unwrap();
        let s = straighten(&a, &tol).unwrap();
        assert!((s.defect - 0.16).abs() < 1e-15);
        assert!((&s.projection - &p).norm() < 1e-15);
        assert!((s.error - 0.2).abs() < 1e-15);
        assert!((s.bound() - 0.2).abs() < 1e-15);
        assert!(s.error <= s.bound() + 1e-9);
    }

    #[test]
    fn straighten_errors() {
        let tol = Tolerance::default();
        let wide = Operator::diag_real(&[0.6, 0.0]).unwrap();
        assert!(matches!(straighten(&wide, &tol), Err(Error::GapViolation { .. })));
        let neg = Operator::diag_real(&[-0.2, 1.0]).unwrap();
        assert!(matches!(straighten(&neg, &tol), Err(Error::InvalidInput(_))));
    }

    fn diag_family() -> AsmFamily {
        // A_ħ({a}) = diag(1−ħ/2, ħ/3), A_ħ({b}) = I − that
        let space = Arc::new(SampleSpace::labeled(&["a", "b"]).unwrap());
        let s = Arc::clone(&space);
        let gen: Generator = Arc::new(move |h| {
            let a = Operator::diag_real(&[1.0 - h / 2.0, h / 3.0]).unwrap();
            let b = &Operator::identity(2) - &a;
            Povm::new(Arc::clone(&s), vec![a, b], &Tolerance::default())
        });
        AsmFamily::new("diag", space, gen, vec![], true).unwrap()
    }

    #[test]
    fn trace_defect_scalar_case() {
        let f = diag_family();
        let e = EventSet::singleton(f.space(), 0).unwrap();
        for h in [1.0, 0.5, 0.1] {
            let expect = (1.0 - h / 2.0) * (h / 2.0) + (h / 3.0) * (1.0 - h / 3.0);
            assert!((trace_defect(&f, &e, h).unwrap() - expect).abs() < 1e-15);
        }
        let grid = HbarGrid::geometric(0.5, 0.5, 4).unwrap();
        let c = count_states(&f, &e, &grid, &Tolerance::default()).unwrap();
        assert_eq!(c.count, 1);
    }

    #[test]
    fn constant_pvm_counts_rank() {
        let tol = Tolerance::default();
        let t = Operator::diag_real(&[1.0, 1.0, 1.0, -1.0]).unwrap();
        let p = pvm_from_selfadjoint(&t, &tol).unwrap().into_povm();
        let f = AsmFamily::constant("c", p);
        let grid = HbarGrid::geometric(1.0, 0.5, 4).unwrap();
        let e = EventSet::singleton(f.space(), 1).unwrap();
        let c = count_states(&f, &e, &grid, &tol).unwrap();
        assert_eq!(c.count, 3);
        assert!(c.trace_residual < 1e-12);
        assert!(trace_defect(&f, &e, 0.5).unwrap().abs() < 1e-12);
        let sf = straighten_family(&f, &e, &grid, &tol).unwrap();
        for pt in &sf.points {
            assert!((&pt.straightened.projection - f.at(pt.hbar).unwrap().effect(1)).norm() < 1e-12);
        }
    }

    #[test]
    fn rank_jump_is_non_convergent() {
        // A_ħ({a}) = diag(1, 1 − ħ) leaves the gap regime at ħ = ½ … use a
        // family whose second eigenvalue crosses ½ between tail points.
        let space = Arc::new(SampleSpace::labeled(&["a", "b"]).unwrap());
        let s = Arc::clone(&space);
        let gen: Generator = Arc::new(move |h| {
            let second = if h > 0.3 { 0.05 } else { 0.95 };
            let a = Operator::diag_real(&[1.0, second]).unwrap();
            let b = &Operator::identity(2) - &a;
            Povm::new(Arc::clone(&s), vec![a, b], &Tolerance::default())
        });
        let f = AsmFamily::new("jump", space, gen, vec![], true).unwrap();
        let grid = HbarGrid::geometric(1.0, 0.5, 4).unwrap();
        let e = EventSet::singleton(f.space(), 0).unwrap();
        assert!(matches!(
            count_states(&f, &e, &grid, &Tolerance::default()),
            Err(Error::NonConvergent { .. })
        ));
    }

    #[test]
    fn gap_violation_reports_hbar() {
        let f = diag_family();
        let e = EventSet::singleton(f.space(), 0).unwrap();
        let grid = HbarGrid::new(vec![1.0, 0.99], 2).unwrap();
        // ħ = 1: diag(0.5, 1/3) has defect 0.25
        match straighten_family(&f, &e, &grid, &Tolerance::default()) {
            Err(Error::GapViolation { hbar: Some(h), .. }) => assert_eq!(h, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
