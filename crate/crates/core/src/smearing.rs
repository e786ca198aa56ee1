//! ASMs built by smearing a fixed PVM with a confidence kernel.
//!
//! Given a PVM `E` on `X₁` and row-stochastic tables `p_ħ[ω][δ]`, the family
//! `A_ħ({δ}) = Σ_ω p_ħ[ω][δ]·E({ω})` is an ASM on `X₂` whenever the kernel
//! defect `‖p_ħ(Δ₁,·)p_ħ(Δ₂,·) − p_ħ(Δ₁∩Δ₂,·)‖_∞` vanishes. The projectivity
//! defect of the smeared family is bounded by that kernel defect.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::asymptotic::{check_hbar, proj_defect_of, AsmFamily, Generator, HbarGrid};
use crate::error::{invalid, Result};
use crate::measure::{same_space, EventSet, Povm, Pvm, SampleSpace};
use crate::operator::{Operator, Tolerance};

const ROW_SUM_TOL: f64 = 1e-12;

/// Row-stochastic table `p[ω][δ]` with rows indexed by source atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    rows: Vec<Vec<f64>>,
}

impl KernelTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || width == 0 {
            return Err(invalid("kernel table must be non-empty"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(invalid(format!("kernel row {i} has the wrong width")));
            }
            if r.iter().any(|&x| !(-ROW_SUM_TOL..=1.0 + ROW_SUM_TOL).contains(&x)) {
                return Err(invalid(format!("kernel row {i} has entries outside [0,1]")));
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(invalid(format!("kernel row {i} sums to {s}, not 1")));
            }
        }
        Ok(KernelTable { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `p(Δ, ω) = Σ_{δ∈Δ} p[ω][δ]`.
    pub fn prob(&self, event: &EventSet, omega: usize) -> f64 {
        event.members().iter().map(|&d| self.rows[omega][d]).sum()
    }
}

pub type KernelGenerator = Arc<dyn Fn(f64) -> Result<KernelTable> + Send + Sync>;

/// A confidence kernel `ħ ↦ p_ħ` from `X₁` to `X₂`.
#[derive(Clone)]
pub struct ConfidenceKernel {
    name: String,
    source: Arc<SampleSpace>,
    target: Arc<SampleSpace>,
    generator: KernelGenerator,
}

impl fmt::Debug for ConfidenceKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConfidenceKernel")
            .field("name", &self.name)
            .field("source_atoms", &self.source.len())
            .field("target_atoms", &self.target.len())
            .finish()
    }
}

impl ConfidenceKernel {
    pub fn new(
        name: impl Into<String>,
        source: Arc<SampleSpace>,
        target: Arc<SampleSpace>,
        generator: KernelGenerator,
    ) -> Self {
        ConfidenceKernel {
            name: name.into(),
            source,
            target,
            generator,
        }
    }

    /// Fixed table at every ħ.
    pub fn fixed(
        name: impl Into<String>,
        source: Arc<SampleSpace>,
        target: Arc<SampleSpace>,
        table: KernelTable,
    ) -> Result<Self> {
        check_shape(&table, &source, &target)?;
        Ok(ConfidenceKernel::new(
            name,
            source,
            target,
            Arc::new(move |_| Ok(table.clone())),
        ))
    }

    /// Deterministic kernel sending source atom `ω` to target atom `map[ω]`.
    pub fn deterministic(source: Arc<SampleSpace>, target: Arc<SampleSpace>, map: &[usize]) -> Result<Self> {
        if map.len() != source.len() || map.iter().any(|&d| d >= target.len()) {
            return Err(invalid("deterministic kernel map does not fit the spaces"));
        }
        let rows = map
            .iter()
            .map(|&d| {
                let mut r = alloc::vec![0.0; target.len()];
                r[d] = 1.0;
                r
            })
            .collect();
        ConfidenceKernel::fixed("deterministic", source, target, KernelTable::new(rows)?)
    }

    /// Two-outcome symmetric flip kernel `(1−ħ/2, ħ/2; ħ/2, 1−ħ/2)`.
    pub fn stochastic2(space: Arc<SampleSpace>) -> Result<Self> {
        if space.len() != 2 {
            return Err(invalid("stochastic2 needs a two-atom space"));
        }
        Ok(ConfidenceKernel::new(
            "stochastic2",
            Arc::clone(&space),
            space,
            Arc::new(|h| {
                let keep = 1.0 - h / 2.0;
                let flip = h / 2.0;
                KernelTable::new(alloc::vec![alloc::vec![keep, flip], alloc::vec![flip, keep]])
            }),
        ))
    }

    /// Gaussian blur between embedded spaces with width `sigma_scale·ħ`:
    /// `p[ω][δ] ∝ w_δ exp(−|x_ω − x_δ|²/(2σ²))`, with `w_δ` the cell weight
    /// (1 when absent).
    pub fn gaussian_grid(source: Arc<SampleSpace>, target: Arc<SampleSpace>, sigma_scale: f64) -> Result<Self> {
        if !(sigma_scale > 0.0 && sigma_scale.is_finite()) {
            return Err(invalid("sigma_scale must be positive"));
        }
        let coords = |s: &SampleSpace| -> Result<Vec<Vec<f64>>> {
            s.atoms()
                .iter()
                .map(|a| {
                    a.coord
                        .clone()
                        .ok_or_else(|| invalid(format!("atom {:?} has no coordinate", a.label)))
                })
                .collect()
        };
        let xs = coords(&source)?;
        let ys = coords(&target)?;
        if source.embed_dim() != target.embed_dim() {
            return Err(invalid("gaussian_grid spaces have different embedding dimensions"));
        }
        let weights: Vec<f64> = target.atoms().iter().map(|a| a.weight.unwrap_or(1.0)).collect();
        Ok(ConfidenceKernel::new(
            "gaussian_grid",
            source,
            target,
            Arc::new(move |h| {
                let sigma = sigma_scale * h;
                let rows = xs
                    .iter()
                    .map(|x| {
                        let d2: Vec<f64> = ys
                            .iter()
                            .map(|y| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
                            .collect();
                        // shift by the nearest distance so the largest term is O(1)
                        let m = d2.iter().copied().fold(f64::INFINITY, f64::min);
                        let raw: Vec<f64> = d2
                            .iter()
                            .zip(&weights)
                            .map(|(d, w)| w * (-(d - m) / (2.0 * sigma * sigma)).exp())
                            .collect();
                        let z: f64 = raw.iter().sum();
                        raw.into_iter().map(|r| r / z).collect()
                    })
                    .collect();
                KernelTable::new(rows)
            }),
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Arc<SampleSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SampleSpace> {
        &self.target
    }

    pub fn table(&self, hbar: f64) -> Result<KernelTable> {
        check_hbar(hbar)?;
        let t = (self.generator)(hbar)?;
        check_shape(&t, &self.source, &self.target)?;
        Ok(t)
    }

    /// `max_ω |p(Δ₁,ω)p(Δ₂,ω) − p(Δ₁∩Δ₂,ω)|`.
    pub fn kernel_defect(&self, d1: &EventSet, d2: &EventSet, hbar: f64) -> Result<f64> {
        self.check_target(d1)?;
        self.check_target(d2)?;
        let t = self.table(hbar)?;
        let both = d1.intersection(d2)?;
        Ok((0..self.source.len())
            .map(|w| (t.prob(d1, w) * t.prob(d2, w) - t.prob(&both, w)).abs())
            .fold(0.0, f64::max))
    }

    /// `max_ω |p_ħ(Δ,ω) − p_ħ₀(Δ,ω)|`.
    pub fn continuity_gap(&self, event: &EventSet, h: f64, h0: f64) -> Result<f64> {
        self.check_target(event)?;
        let (a, b) = (self.table(h)?, self.table(h0)?);
        Ok((0..self.source.len())
            .map(|w| (a.prob(event, w) - b.prob(event, w)).abs())
            .fold(0.0, f64::max))
    }

    fn check_target(&self, e: &EventSet) -> Result<()> {
        if same_space(e.space(), &self.target) {
            Ok(())
        } else {
            Err(invalid("event is not defined on the kernel's target space"))
        }
    }
}

fn check_shape(t: &KernelTable, source: &SampleSpace, target: &SampleSpace) -> Result<()> {
    if t.rows.len() != source.len() || t.rows[0].len() != target.len() {
        return Err(invalid(format!(
            "kernel table is {}x{}, spaces need {}x{}",
            t.rows.len(),
            t.rows[0].len(),
            source.len(),
            target.len()
        )));
    }
    Ok(())
}

/// Effects `B_δ = Σ_ω p[ω][δ]·E({ω})` for one kernel table.
pub fn smear_povm(pvm: &Pvm, kernel: &ConfidenceKernel, hbar: f64, tol: &Tolerance) -> Result<Povm> {
    let t = kernel.table(hbar)?;
    let effects = (0..kernel.target.len())
        .map(|d| {
            let mut acc = Operator::zeros(pvm.dim());
            for (w, row) in t.rows.iter().enumerate() {
                if row[d] != 0.0 {
                    acc.axpy(Complex64::new(row[d], 0.0), pvm.effect(w));
                }
            }
            acc
        })
        .collect();
    Povm::new(Arc::clone(&kernel.target), effects, tol)
}

/// The smeared family `ħ ↦ ∫ p_ħ(·, ω) dE(ω)`.
pub fn smear(pvm: &Pvm, kernel: &ConfidenceKernel, tol: &Tolerance) -> Result<AsmFamily> {
    if !pvm.is_normalized() {
        return Err(invalid("smearing needs a normalized PVM"));
    }
    if !same_space(pvm.space(), &kernel.source) {
        return Err(invalid("kernel source space differs from the PVM space"));
    }
    if !pvm.is_projective() {
        return Err(invalid("smearing bounds require a projection-valued measure"));
    }
    let (p, k, t) = (pvm.clone(), kernel.clone(), *tol);
    let generator: Generator = Arc::new(move |h| smear_povm(&p, &k, h, &t));
    let target = Arc::clone(&kernel.target);
    let carrier = (0..target.len())
        .map(|i| EventSet::singleton(&target, i))
        .collect::<Result<Vec<_>>>()?;
    AsmFamily::new(format!("smear[{}]", kernel.name), target, generator, carrier, true)
}

/// `max(0, proj_defect − kernel_defect)`; should never exceed round-off.
pub fn smear_defect_bound_residual(
    pvm: &Pvm,
    kernel: &ConfidenceKernel,
    d1: &EventSet,
    d2: &EventSet,
    hbar: f64,
    tol: &Tolerance,
) -> Result<f64> {
    let a = smear_povm(pvm, kernel, hbar, tol)?;
    let lhs = proj_defect_of(&a, d1, d2)?;
    let rhs = kernel.kernel_defect(d1, d2, hbar)?;
    Ok((lhs - rhs).max(0.0))
}

/// Max over adjacent grid pairs of `‖A_ħ(Δ) − A_ħ₀(Δ)‖ − ‖p_ħ(Δ,·) − p_ħ₀(Δ,·)‖_∞`,
/// clamped at zero.
pub fn continuity_transport_residual(
    pvm: &Pvm,
    kernel: &ConfidenceKernel,
    event: &EventSet,
    grid: &HbarGrid,
    tol: &Tolerance,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for w in grid.values().windows(2) {
        let a = smear_povm(pvm, kernel, w[0], tol)?.apply(event)?;
        let b = smear_povm(pvm, kernel, w[1], tol)?.apply(event)?;
        let lhs = (&a - &b).norm();
        let rhs = kernel.continuity_gap(event, w[0], w[1])?;
        worst = worst.max(lhs - rhs);
    }
    Ok(worst.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{pvm_from_selfadjoint, DensityOperator};
    use alloc::vec;

    fn sigma3_pvm() -> Pvm {
        pvm_from_selfadjoint(&Operator::diag_real(&[1.0, -1.0]).unwrap(), &Tolerance::default()).unwrap()
    }

    #[test]
    fn table_validation() {
        assert!(KernelTable::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(KernelTable::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(KernelTable::new(vec![vec![0.25, 0.75], vec![1.0, 0.0]]).is_ok());
    }

    #[test]
    fn deterministic_kernel_is_sharp() {
        let e = sigma3_pvm();
        let s = Arc::clone(e.space());
        let k = ConfidenceKernel::deterministic(Arc::clone(&s), Arc::clone(&s), &[0, 1]).unwrap();
        let e0 = EventSet::singleton(&s, 0).unwrap();
        let e1 = EventSet::singleton(&s, 1).unwrap();
        let full = EventSet::full(&s);
        for h in [1.0, 0.5, 0.1] {
            assert_eq!(k.kernel_defect(&e0, &e1, h).unwrap(), 0.0);
            assert_eq!(k.kernel_defect(&e0, &e0, h).unwrap(), 0.0);
            assert_eq!(k.kernel_defect(&full, &e1, h).unwrap(), 0.0);
            assert_eq!(
                smear_defect_bound_residual(&e, &k, &e0, &e0, h, &Tolerance::default()).unwrap(),
                0.0
            );
        }
        let fam = smear(&e, &k, &Tolerance::default()).unwrap();
        let a = fam.at(0.3).unwrap();
        for i in 0..2 {
            assert_eq!(a.effect(i), e.effect(i));
        }
    }

    #[test]
    fn stochastic2_kernel_defect_closed_form() {
        let s = Arc::new(SampleSpace::labeled(&["+", "-"]).unwrap());
        let k = ConfidenceKernel::stochastic2(Arc::clone(&s)).unwrap();
        let plus = EventSet::singleton(&s, 0).unwrap();
        let full = EventSet::full(&s);
        for h in [1.0, 0.5, 0.25, 0.125] {
            let d = k.kernel_defect(&plus, &plus, h).unwrap();
            let p = h / 2.0;
            assert!((d - p * (1.0 - p)).abs() < 1e-15);
            assert!(k.kernel_defect(&full, &plus, h).unwrap() < 1e-15);
        }
    }

    #[test]
    fn stochastic2_smearing_of_sigma3() {
        let tol = Tolerance::default();
        // order atoms (+1, -1) to match the kernel's (+, -) rows
        let e = sigma3_pvm();
        let s = Arc::clone(e.space());
        let k = ConfidenceKernel::stochastic2(Arc::clone(&s)).unwrap();
        let fam = smear(&e, &k, &tol).unwrap();
        let grid = HbarGrid::geometric(1.0, 0.5, 6).unwrap();
        fam.validate(&grid, &tol).unwrap();
        let plus = s.index_of("1.0").unwrap();
        for &h in grid.values() {
            let a = fam.at(h).unwrap();
            let expect = Operator::diag_real(&[1.0 - h / 2.0, h / 2.0]).unwrap();
            assert!((a.effect(plus) - &expect).norm() < 1e-15);
            assert!((&a.total() - &Operator::identity(2)).norm() <= 1e-10);
            let ev = EventSet::singleton(&s, plus).unwrap();
            let defect = fam.proj_defect(&ev, &ev, h).unwrap();
            let kd = k.kernel_defect(&ev, &ev, h).unwrap();
            assert!((defect - kd).abs() < 1e-15);
        }
        let ev = EventSet::singleton(&s, plus).unwrap();
        assert!(continuity_transport_residual(&e, &k, &ev, &grid, &tol).unwrap() <= 1e-10);
    }

    #[test]
    fn eigenstate_expectation_is_kernel_probability() {
        let tol = Tolerance::default();
        let e = sigma3_pvm();
        let s = Arc::clone(e.space());
        let k = ConfidenceKernel::stochastic2(Arc::clone(&s)).unwrap();
        let fam = smear(&e, &k, &tol).unwrap();
        let up = DensityOperator::pure(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], &tol).unwrap();
        let omega = s.index_of("1.0").unwrap();
        for d in 0..2 {
            let ev = EventSet::singleton(&s, d).unwrap();
            let h = 0.3;
            let p = fam.at(h).unwrap().born_prob(&ev, &up).unwrap();
            let expect = k.table(h).unwrap().prob(&ev, omega);
            assert!((p - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn smear_rejects_non_pvm() {
        let tol = Tolerance::default();
        let s = Arc::new(SampleSpace::labeled(&["a", "b"]).unwrap());
        let half = Operator::identity(2).scale_real(0.5);
        let povm = Povm::new(Arc::clone(&s), vec![half.clone(), half], &tol).unwrap();
        assert!(Pvm::new(povm).is_err());
    }

    #[test]
    fn gaussian_grid_sharpens() {
        let s = Arc::new(SampleSpace::on_line(&[0.0, 1.0, 2.0]).unwrap());
        let k = ConfidenceKernel::gaussian_grid(Arc::clone(&s), Arc::clone(&s), 1.0).unwrap();
        let e1 = EventSet::singleton(&s, 1).unwrap();
        let coarse = k.kernel_defect(&e1, &e1, 1.0).unwrap();
        let fine = k.kernel_defect(&e1, &e1, 0.1).unwrap();
        assert!(coarse > 0.1);
        assert!(fine < 1e-12);
        let t = k.table(0.5).unwrap();
        for r in t.rows() {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
