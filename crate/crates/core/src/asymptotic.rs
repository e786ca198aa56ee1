//! ħ-indexed POVM families and their defect functionals.
//!
//! Limits `ħ → 0` are sampled on an [`HbarGrid`]: the value at the smallest
//! grid point plus the trend over the grid tail.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::measure::{same_space, AtomFn, EventSet, Povm, SampleSpace};
use crate::operator::Tolerance;

/// Strictly decreasing ħ values in `(0,1]`; the last `tail_len` of them form
/// the limit tail.
#[derive(Debug, Clone, PartialEq)]
pub struct HbarGrid {
    values: Vec<f64>,
    tail_len: usize,
}

impl HbarGrid {
    pub fn new(values: Vec<f64>, tail_len: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("hbar grid is empty"));
        }
        for &h in &values {
            check_hbar(h)?;
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("hbar grid must be strictly decreasing"));
        }
        if tail_len < 2 || tail_len > values.len() {
            return Err(invalid(format!(
                "tail length {tail_len} must lie in [2, {}]",
                values.len()
            )));
        }
        Ok(HbarGrid { values, tail_len })
    }

    /// `start, start·ratio, …` (`count` points), tail of `min(3, count)`.
    pub fn geometric(start: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(invalid(format!("geometric ratio {ratio} must lie in (0,1)")));
        }
        let mut values = Vec::with_capacity(count);
        let mut h = start;
        for _ in 0..count {
            values.push(h);
            h *= ratio;
        }
        HbarGrid::new(values, count.clamp(2, 3))
    }

    pub fn with_tail(mut self, tail_len: usize) -> Result<Self> {
        if tail_len < 2 || tail_len > self.values.len() {
            return Err(invalid(format!("tail length {tail_len} out of range")));
        }
        self.tail_len = tail_len;
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_len(&self) -> usize {
        self.tail_len
    }

    pub fn tail(&self) -> &[f64] {
        &self.values[self.values.len() - self.tail_len..]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("grid is non-empty")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) fn check_hbar(h: f64) -> Result<()> {
    if h > 0.0 && h <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("hbar = {h} lies outside (0,1]")))
    }
}

pub type Generator = Arc<dyn Fn(f64) -> Result<Povm> + Send + Sync>;

/// A family `ħ ↦ A_ħ` of POVMs on one sample space with a designated
/// asymptotic carrier.
#[derive(Clone)]
pub struct AsmFamily {
    label: String,
    space: Arc<SampleSpace>,
    generator: Generator,
    carrier: Vec<EventSet>,
    normalized: bool,
}

impl fmt::Debug for AsmFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AsmFamily")
            .field("label", &self.label)
            .field("atoms", &self.space.len())
            .field("carrier", &self.carrier.len())
            .field("normalized", &self.normalized)
            .finish()
    }
}

impl AsmFamily {
    pub fn new(
        label: impl Into<String>,
        space: Arc<SampleSpace>,
        generator: Generator,
        carrier: Vec<EventSet>,
        normalized: bool,
    ) -> Result<Self> {
        if carrier.iter().any(|e| !same_space(e.space(), &space)) {
            return Err(invalid("carrier events must live on the family's space"));
        }
        Ok(AsmFamily {
            label: label.into(),
            space,
            generator,
            carrier,
            normalized,
        })
    }

    /// Constant family `A_ħ = A`; the carrier is every singleton.
    pub fn constant(label: impl Into<String>, povm: Povm) -> Self {
        let space = Arc::clone(povm.space());
        let carrier = singletons(&space);
        let normalized = povm.is_normalized();
        AsmFamily {
            label: label.into(),
            space,
            generator: Arc::new(move |_| Ok(povm.clone())),
            carrier,
            normalized,
        }
    }

    /// Family known only at tabulated ħ values; no interpolation.
    pub fn tabulated(label: impl Into<String>, table: Vec<(f64, Povm)>) -> Result<Self> {
        let first = table
            .first()
            .ok_or_else(|| invalid("tabulated family needs at least one entry"))?;
        let space = Arc::clone(first.1.space());
        if table.iter().any(|(_, p)| !same_space(p.space(), &space)) {
            return Err(invalid("tabulated POVMs must share one sample space"));
        }
        let normalized = table.iter().all(|(_, p)| p.is_normalized());
        let carrier = singletons(&space);
        let table: Arc<Vec<(f64, Povm)>> = Arc::new(table);
        Ok(AsmFamily {
            label: label.into(),
            space,
            generator: Arc::new(move |h| {
                table
                    .iter()
                    .find(|(t, _)| *t == h)
                    .map(|(_, p)| p.clone())
                    .ok_or_else(|| invalid(format!("hbar = {h} is not tabulated")))
            }),
            carrier,
            normalized,
        })
    }

    pub fn with_carrier(mut self, carrier: Vec<EventSet>) -> Result<Self> {
        if carrier.iter().any(|e| !same_space(e.space(), &self.space)) {
            return Err(invalid("carrier events must live on the family's space"));
        }
        self.carrier = carrier;
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn carrier(&self) -> &[EventSet] {
        &self.carrier
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `A_ħ`.
    pub fn at(&self, hbar: f64) -> Result<Povm> {
        check_hbar(hbar)?;
        let p = (self.generator)(hbar)?;
        if !same_space(p.space(), &self.space) {
            return Err(invalid("generator returned a POVM on a foreign space"));
        }
        Ok(p)
    }

    /// Checks every grid POVM, normalization when claimed, and the mild
    /// bound `‖A_ħ(X)‖ ≤ 1 + psd_tol` on the tail.
    pub fn validate(&self, grid: &HbarGrid, tol: &Tolerance) -> Result<()> {
        for &h in grid.values() {
            let p = self.at(h)?;
            if self.normalized && !p.is_normalized() {
                return Err(invalid(format!("A_hbar is not normalized at hbar = {h}")));
            }
        }
        for &h in grid.tail() {
            let n = self.at(h)?.total().norm();
            if n > 1.0 + tol.psd_tol {
                return Err(invalid(format!("‖A_hbar(X)‖ = {n} exceeds 1 at hbar = {h}")));
            }
        }
        Ok(())
    }

    /// `‖A_ħ(Δ₁∩Δ₂) − A_ħ(Δ₁)A_ħ(Δ₂)‖`.
    pub fn proj_defect(&self, d1: &EventSet, d2: &EventSet, hbar: f64) -> Result<f64> {
        let a = self.at(hbar)?;
        proj_defect_of(&a, d1, d2)
    }

    /// `‖Q_ħ(fg) − Q_ħ(f)Q_ħ(g)‖` with `Q_ħ = ∫ · dA_ħ`.
    pub fn mult_defect(&self, f: &AtomFn, g: &AtomFn, hbar: f64) -> Result<f64> {
        let a = self.at(hbar)?;
        let fg = a.integrate(&f.product(g)?)?;
        let qf = a.integrate(f)?;
        let qg = a.integrate(g)?;
        Ok((&fg - &(&qf * &qg)).norm())
    }

    /// `‖A_ħ(Δ) − B_ħ(Δ)‖`.
    pub fn equiv_defect(&self, other: &AsmFamily, event: &EventSet, hbar: f64) -> Result<f64> {
        if !same_space(&self.space, &other.space) {
            return Err(invalid("families live on different sample spaces"));
        }
        let a = self.at(hbar)?.apply(event)?;
        let b = other.at(hbar)?.apply(event)?;
        Ok((&a - &b).norm())
    }

    /// Finite `liminf` proxy: minimum of `‖A_ħ(Δ)‖` over the grid tail.
    pub fn injectivity_profile(
        &self,
        sets: &[EventSet],
        grid: &HbarGrid,
        tol: &Tolerance,
    ) -> Result<InjectivityProfile> {
        let mut entries = Vec::with_capacity(sets.len());
        for s in sets {
            if s.is_empty() {
                return Err(invalid("injectivity is only defined on nonempty events"));
            }
            let mut min = f64::INFINITY;
            for &h in grid.tail() {
                min = min.min(self.at(h)?.apply(s)?.norm());
            }
            entries.push((s.describe(), min));
        }
        let injective = entries.iter().all(|(_, m)| *m > tol.rank_tol);
        Ok(InjectivityProfile { entries, injective })
    }

    /// `|‖f‖_∞ − ‖Q_ħ(f)‖|` at the smallest grid ħ, with the tail trend.
    pub fn norm_recovery_residual(&self, f: &AtomFn, grid: &HbarGrid, tol: &Tolerance) -> Result<NormRecovery> {
        let sup = f.sup_norm();
        let mut trend = Vec::with_capacity(grid.tail_len());
        for &h in grid.tail() {
            let q = self.at(h)?.integrate(f)?.norm();
            trend.push((h, (sup - q).abs()));
        }
        let injective = self.injectivity_profile(&nonempty(&self.carrier), grid, tol)?.injective;
        Ok(NormRecovery {
            residual: trend.last().map_or(0.0, |t| t.1),
            trend,
            injective,
        })
    }

    /// Max over adjacent grid pairs of `‖A_ħᵢ(Δ) − A_ħᵢ₊₁(Δ)‖`.
    pub fn continuity_defect(&self, event: &EventSet, grid: &HbarGrid) -> Result<f64> {
        let mut worst = 0.0f64;
        let mut prev: Option<crate::operator::Operator> = None;
        for &h in grid.values() {
            let cur = self.at(h)?.apply(event)?;
            if let Some(p) = &prev {
                let d = (&cur - p).norm();
                if !d.is_finite() {
                    return Err(invalid(format!("continuity defect is not finite at hbar = {h}")));
                }
                worst = worst.max(d);
            }
            prev = Some(cur);
        }
        Ok(worst)
    }
}

fn singletons(space: &Arc<SampleSpace>) -> Vec<EventSet> {
    (0..space.len())
        .map(|i| EventSet::singleton(space, i).expect("index in range"))
        .collect()
}

fn nonempty(sets: &[EventSet]) -> Vec<EventSet> {
    sets.iter().filter(|s| !s.is_empty()).cloned().collect()
}

pub(crate) fn proj_defect_of(a: &Povm, d1: &EventSet, d2: &EventSet) -> Result<f64> {
    let both = a.apply(&d1.intersection(d2)?)?;
    let prod = &a.apply(d1)? * &a.apply(d2)?;
    Ok((&both - &prod).norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectivityProfile {
    /// `(subject, min over tail of ‖A_ħ(Δ)‖)`.
    pub entries: Vec<(String, f64)>,
    pub injective: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormRecovery {
    pub residual: f64,
    /// `(ħ, residual)` over the tail, decreasing ħ.
    pub trend: Vec<(f64, f64)>,
    pub injective: bool,
}

impl NormRecovery {
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.trend.windows(2).all(|w| w[1].1 <= w[0].1 + slack)
    }
}

/// What quantity a report row carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DefectKind {
    Projectivity,
    Multiplicativity,
    Equivalence,
    Continuity,
    Trace,
    TraceDefect,
    Rank,
    StraightenError,
    Exclusivity,
    Norm,
    Residual,
    Sensitivity,
    Chsh,
}

impl DefectKind {
    pub const ALL: [DefectKind; 13] = [
        DefectKind::Projectivity,
        DefectKind::Multiplicativity,
        DefectKind::Equivalence,
        DefectKind::Continuity,
        DefectKind::Trace,
        DefectKind::TraceDefect,
        DefectKind::Rank,
        DefectKind::StraightenError,
        DefectKind::Exclusivity,
        DefectKind::Norm,
        DefectKind::Residual,
        DefectKind::Sensitivity,
        DefectKind::Chsh,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            DefectKind::Projectivity => "proj",
            DefectKind::Multiplicativity => "mult",
            DefectKind::Equivalence => "equiv",
            DefectKind::Continuity => "continuity",
            DefectKind::Trace => "trace",
            DefectKind::TraceDefect => "trace_defect",
            DefectKind::Rank => "rank",
            DefectKind::StraightenError => "straighten_error",
            DefectKind::Exclusivity => "exclusivity",
            DefectKind::Norm => "norm",
            DefectKind::Residual => "residual",
            DefectKind::Sensitivity => "sensitivity",
            DefectKind::Chsh => "chsh",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        DefectKind::ALL.iter().copied().find(|k| k.tag() == tag)
    }
}

impl fmt::Display for DefectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectRow {
    pub hbar: f64,
    pub kind: DefectKind,
    pub subject: String,
    pub value: f64,
}

/// Ordered table of `(ħ, kind, subject, value)` rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DefectReport {
    rows: Vec<DefectRow>,
}

pub const CSV_HEADER: &str = "hbar,kind,subject,value";

/// Decimal with 17 significant digits; parses back to the same `f64`.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

impl DefectReport {
    pub fn new() -> Self {
        DefectReport::default()
    }

    pub fn push(&mut self, hbar: f64, kind: DefectKind, subject: impl Into<String>, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(invalid(format!("report value {value} must be finite and nonnegative")));
        }
        let subject = subject.into();
        if subject.contains(',') || subject.contains('\n') || subject.contains('"') {
            return Err(invalid(format!(
                "subject {subject:?} may not contain ',', '\"' or newlines"
            )));
        }
        self.rows.push(DefectRow {
            hbar,
            kind,
            subject,
            value,
        });
        Ok(())
    }

    pub fn rows(&self) -> &[DefectRow] {
        &self.rows
    }

    pub fn extend(&mut self, other: DefectReport) {
        self.rows.extend(other.rows);
    }

    /// Values of one `(kind, subject)` column in row order.
    pub fn column(&self, kind: DefectKind, subject: &str) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.kind == kind && r.subject == subject)
            .map(|r| (r.hbar, r.value))
            .collect()
    }

    pub fn max_value(&self, kind: DefectKind) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.value)
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                format_g17(r.hbar),
                r.kind,
                r.subject,
                format_g17(r.value)
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(CSV_HEADER) {
            return Err(invalid("missing defect report CSV header"));
        }
        let mut report = DefectReport::new();
        for (n, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(invalid(format!("row {} has {} fields", n + 1, fields.len())));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| invalid(format!("row {}: bad number {s:?}", n + 1)))
            };
            let kind = DefectKind::from_tag(fields[1])
                .ok_or_else(|| invalid(format!("row {}: unknown kind {:?}", n + 1, fields[1])))?;
            report.push(parse(fields[0])?, kind, fields[2], parse(fields[3])?)?;
        }
        Ok(report)
    }
}

/// Inputs for [`defect_report`].
#[derive(Default)]
pub struct ReportRequest<'a> {
    pub event_pairs: Vec<(EventSet, EventSet)>,
    pub function_pairs: Vec<(String, AtomFn, AtomFn)>,
    /// Second family and events on which to measure `‖A_ħ(Δ) − B_ħ(Δ)‖`.
    pub equivalence: Option<(&'a AsmFamily, Vec<EventSet>)>,
}

/// Projectivity, multiplicativity and equivalence defects over the grid,
/// grid-major and in request order within each ħ.
pub fn defect_report(family: &AsmFamily, grid: &HbarGrid, request: &ReportRequest<'_>) -> Result<DefectReport> {
    let mut report = DefectReport::new();
    for &h in grid.values() {
        let a = family.at(h)?;
        for (d1, d2) in &request.event_pairs {
            let subject = format!("{}*{}", d1.describe(), d2.describe());
            report.push(h, DefectKind::Projectivity, subject, proj_defect_of(&a, d1, d2)?)?;
        }
        for (name, f, g) in &request.function_pairs {
            let fg = a.integrate(&f.product(g)?)?;
            let prod = &a.integrate(f)? * &a.integrate(g)?;
            report.push(h, DefectKind::Multiplicativity, name.as_str(), (&fg - &prod).norm())?;
        }
        if let Some((other, events)) = &request.equivalence {
            for e in events {
                report.push(
                    h,
                    DefectKind::Equivalence,
                    e.describe(),
                    family.equiv_defect(other, e, h)?,
                )?;
            }
        }
    }
    Ok(report)
}

/// Least-squares slope of `log(value)` against `log(ħ)`; `None` unless at
/// least two points are strictly positive.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, v)| *h > 0.0 && *v > 0.0)
        .map(|(h, v)| (h.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// True when each value is at most the previous one plus `slack`.
pub fn is_nonincreasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::measure::pvm_from_selfadjoint;
    use crate::operator::Operator;
    use alloc::vec;
    use num_complex::Complex64;

    fn sigma3_pvm() -> Povm {
        pvm_from_selfadjoint(&Operator::diag_real(&[1.0, -1.0]).unwrap(), &Tolerance::default())
            .unwrap()
            .into_povm()
    }

    /// `A_ħ({a}) = ħ·P`, `A_ħ({b}) = I − ħ·P`.
    fn vanishing_family() -> AsmFamily {
        let space = Arc::new(SampleSpace::labeled(&["a", "b"]).unwrap());
        let s = Arc::clone(&space);
        let gen: Generator = Arc::new(move |h| {
            let p = Operator::diag_real(&[1.0, 0.0]).unwrap();
            let a = p.scale_real(h);
            let b = &Operator::identity(2) - &a;
            Povm::new(Arc::clone(&s), vec![a, b], &Tolerance::default())
        });
        let carrier = singletons(&space);
        AsmFamily::new("vanishing", space, gen, carrier, true).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(HbarGrid::new(vec![1.0, 0.5, 0.5], 2).is_err());
        assert!(HbarGrid::new(vec![1.5, 0.5], 2).is_err());
        assert!(HbarGrid::new(vec![1.0, 0.0], 2).is_err());
        assert!(HbarGrid::new(vec![1.0, 0.5], 3).is_err());
        let g = HbarGrid::geometric(1.0, 0.5, 4).unwrap();
        assert_eq!(g.values(), &[1.0, 0.5, 0.25, 0.125]);
        assert_eq!(g.tail(), &[0.5, 0.25, 0.125]);
        assert_eq!(g.min(), 0.125);
    }

    #[test]
    fn constant_pvm_family_has_no_defects() {
        let p = sigma3_pvm();
        let f = AsmFamily::constant("sigma3", p);
        let grid = HbarGrid::geometric(1.0, 0.5, 5).unwrap();
        f.validate(&grid, &Tolerance::default()).unwrap();
        let s = f.space().clone();
        let e0 = EventSet::singleton(&s, 0).unwrap();
        let e1 = EventSet::singleton(&s, 1).unwrap();
        for &h in grid.values() {
            assert!(f.proj_defect(&e0, &e1, h).unwrap() <= 1e-12);
            assert!(f.proj_defect(&e0, &e0, h).unwrap() <= 1e-12);
            let fa = AtomFn::real(&[2.0, -3.0]);
            let ga = AtomFn::real(&[0.5, 4.0]);
            assert!(f.mult_defect(&fa, &ga, h).unwrap() <= 1e-10);
            assert_eq!(f.mult_defect(&fa, &AtomFn::real(&[0.0, 0.0]), h).unwrap(), 0.0);
            assert_eq!(f.equiv_defect(&f, &e0, h).unwrap(), 0.0);
        }
        assert!(matches!(f.proj_defect(&e0, &e0, 0.0), Err(Error::InvalidInput(_))));
        assert!(f.proj_defect(&e0, &e0, 1.5).is_err());
    }

    #[test]
    fn indicator_mult_defect_matches_proj_defect() {
        let f = vanishing_family();
        let s = f.space().clone();
        let d1 = EventSet::singleton(&s, 0).unwrap();
        let d2 = EventSet::full(&s);
        for h in [1.0, 0.3, 0.01] {
            let a = f.proj_defect(&d1, &d1, h).unwrap();
            let b = f
                .mult_defect(&AtomFn::indicator(&d1), &AtomFn::indicator(&d1), h)
                .unwrap();
            assert_eq!(a, b);
            let a = f.proj_defect(&d1, &d2, h).unwrap();
            let b = f
                .mult_defect(&AtomFn::indicator(&d1), &AtomFn::indicator(&d2), h)
                .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn distinct_constant_pvms_have_constant_equiv_defect() {
        let a = AsmFamily::constant("z", sigma3_pvm());
        let sx = Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let tol = Tolerance::default();
        let bx = pvm_from_selfadjoint(&sx, &tol).unwrap().into_povm();
        // re-home on the same labels so the spaces agree
        let bx = Povm::new(Arc::clone(a.space()), bx.effects().to_vec(), &tol).unwrap();
        let b = AsmFamily::constant("x", bx);
        let e = EventSet::singleton(a.space(), 1).unwrap();
        let v1 = a.equiv_defect(&b, &e, 1.0).unwrap();
        let v2 = a.equiv_defect(&b, &e, 0.01).unwrap();
        assert!(v1 > 0.5);
        assert_eq!(v1, v2);
    }

    #[test]
    fn injectivity_and_norm_recovery() {
        let tol = Tolerance::default();
        let grid = HbarGrid::new(vec![1.0, 0.1, 0.01, 1e-4, 1e-9], 3).unwrap();
        let c = AsmFamily::constant("z", sigma3_pvm());
        let sets = c.carrier().to_vec();
        let prof = c.injectivity_profile(&sets, &grid, &tol).unwrap();
        assert!(prof.injective);
        assert!(prof.entries.iter().all(|(_, m)| (*m - 1.0).abs() < 1e-12));
        let f = AtomFn::real(&[0.3, -2.0]);
        let nr = c.norm_recovery_residual(&f, &grid, &tol).unwrap();
        assert!(nr.residual <= 1e-10);
        assert!(nr.injective);
        let zero = AtomFn::real(&[0.0, 0.0]);
        assert_eq!(c.norm_recovery_residual(&zero, &grid, &tol).unwrap().residual, 0.0);

        let v = vanishing_family();
        let a_set = EventSet::singleton(v.space(), 0).unwrap();
        let prof = v.injectivity_profile(&[a_set], &grid, &tol).unwrap();
        assert!(!prof.injective);
        assert!(prof.entries[0].1 <= 1e-9);

        let empty = EventSet::empty(v.space());
        assert!(v.injectivity_profile(&[empty], &grid, &tol).is_err());
    }

    #[test]
    fn report_is_grid_major_and_deterministic() {
        let f = vanishing_family();
        let s = f.space().clone();
        let grid = HbarGrid::geometric(1.0, 0.5, 3).unwrap();
        let e0 = EventSet::singleton(&s, 0).unwrap();
        let e1 = EventSet::singleton(&s, 1).unwrap();
        let req = ReportRequest {
            event_pairs: vec![(e0.clone(), e0.clone()), (e0.clone(), e1.clone())],
            function_pairs: vec![(
                "f*g".into(),
                AtomFn::real(&[1.0, 2.0]),
                AtomFn::new(vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)]),
            )],
            equivalence: Some((&f, vec![e0.clone()])),
        };
        let r1 = defect_report(&f, &grid, &req).unwrap();
        let r2 = defect_report(&f, &grid, &req).unwrap();
        assert_eq!(r1.to_csv(), r2.to_csv());
        assert_eq!(r1.rows().len(), 3 * 4);
        let hs: Vec<f64> = r1.rows().iter().map(|r| r.hbar).collect();
        assert!(hs.windows(2).all(|w| w[1] <= w[0]));
        // ‖ħP − ħ²P‖ = ħ − ħ²
        let col = r1.column(DefectKind::Projectivity, "{a}*{a}");
        for (h, v) in col {
            assert!((v - (h - h * h)).abs() < 1e-15);
        }
        let back = DefectReport::from_csv(&r1.to_csv()).unwrap();
        assert_eq!(back, r1);
    }

    #[test]
    fn report_rejects_negative_values() {
        let mut r = DefectReport::new();
        assert!(r.push(1.0, DefectKind::Projectivity, "x", -1.0).is_err());
        assert!(r.push(1.0, DefectKind::Projectivity, "x", f64::NAN).is_err());
        assert!(r.push(1.0, DefectKind::Projectivity, "a,b", 1.0).is_err());
    }

    #[test]
    fn continuity_is_finite_and_matches_step() {
        let f = vanishing_family();
        let grid = HbarGrid::geometric(1.0, 0.5, 4).unwrap();
        let e0 = EventSet::singleton(f.space(), 0).unwrap();
        let c = f.continuity_defect(&e0, &grid).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tabulated_family_has_no_interpolation() {
        let p = sigma3_pvm();
        let f = AsmFamily::tabulated("t", vec![(1.0, p.clone()), (0.5, p)]).unwrap();
        assert!(f.at(0.5).is_ok());
        assert!(f.at(0.75).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 0.5, 0.25].iter().map(|&h| (h, 3.0 * h * h)).collect();
        assert!((loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&[(1.0, 0.0), (0.5, 0.0)]), None);
    }
}
