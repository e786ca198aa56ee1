//! Atomic POVMs on finite sample spaces.
//!
//! Every σ-algebra here is the power set of a finite atom list, so
//! σ-additivity reduces to finite sums of per-atom effects. Integration of an
//! atom function `f` is `Σᵢ f(i)·Eᵢ`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::ops::Deref;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::operator::{fun_calc, hermitian_eig, is_positive, Operator, Tolerance};

/// Mutual-orthogonality tolerance for projection-valued measures.
pub const PROJECTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub label: String,
    pub coord: Option<Vec<f64>>,
    pub weight: Option<f64>,
}

impl Atom {
    pub fn labeled(label: impl Into<String>) -> Self {
        Atom {
            label: label.into(),
            coord: None,
            weight: None,
        }
    }

    pub fn at(label: impl Into<String>, coord: Vec<f64>) -> Self {
        Atom {
            label: label.into(),
            coord: Some(coord),
            weight: None,
        }
    }
}

/// Ordered finite outcome space, optionally embedded in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpace {
    atoms: Vec<Atom>,
    embed_dim: Option<usize>,
}

impl SampleSpace {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("sample space needs at least one atom"));
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].iter().any(|b| b.label == a.label) {
                return Err(invalid(format!("duplicate atom label {:?}", a.label)));
            }
            if let Some(w) = a.weight {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(invalid(format!("cell weight of {:?} must be positive", a.label)));
                }
            }
            if let Some(c) = &a.coord {
                if c.iter().any(|x| !x.is_finite()) {
                    return Err(invalid(format!("coordinate of {:?} is not finite", a.label)));
                }
            }
        }
        let dims: Vec<usize> = atoms.iter().filter_map(|a| a.coord.as_ref().map(Vec::len)).collect();
        let embed_dim = match dims.first() {
            Some(&d) if dims.iter().all(|&e| e == d) => Some(d),
            Some(_) => return Err(invalid("atom coordinates have inconsistent dimensions")),
            None => None,
        };
        Ok(SampleSpace { atoms, embed_dim })
    }

    /// Atoms with the given labels and no geometry.
    pub fn labeled<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        SampleSpace::new(labels.iter().map(|l| Atom::labeled(l.as_ref())).collect())
    }

    /// Atoms on the real line, labelled by their coordinate.
    pub fn on_line(points: &[f64]) -> Result<Self> {
        SampleSpace::new(
            points
                .iter()
                .map(|&x| Atom::at(format!("{x:?}"), alloc::vec![x]))
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn embed_dim(&self) -> Option<usize> {
        self.embed_dim
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a.label == label)
    }
}

pub(crate) fn same_space(a: &Arc<SampleSpace>, b: &Arc<SampleSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A subset of atoms of a sample space.
#[derive(Debug, Clone)]
pub struct EventSet {
    space: Arc<SampleSpace>,
    members: Vec<usize>,
}

impl PartialEq for EventSet {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.members == other.members
    }
}

impl EventSet {
    pub fn new(space: &Arc<SampleSpace>, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&m) = members.last() {
            if m >= space.len() {
                return Err(invalid(format!(
                    "atom index {m} out of range for a space of {} atoms",
                    space.len()
                )));
            }
        }
        Ok(EventSet {
            space: Arc::clone(space),
            members,
        })
    }

    pub fn from_labels(space: &Arc<SampleSpace>, labels: &[&str]) -> Result<Self> {
        let idx = labels
            .iter()
            .map(|l| {
                space
                    .index_of(l)
                    .ok_or_else(|| invalid(format!("unknown atom label {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        EventSet::new(space, idx)
    }

    pub fn empty(space: &Arc<SampleSpace>) -> Self {
        EventSet {
            space: Arc::clone(space),
            members: Vec::new(),
        }
    }

    pub fn full(space: &Arc<SampleSpace>) -> Self {
        EventSet {
            space: Arc::clone(space),
            members: (0..space.len()).collect(),
        }
    }

    pub fn singleton(space: &Arc<SampleSpace>, atom: usize) -> Result<Self> {
        EventSet::new(space, [atom])
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.members.binary_search(&atom).is_ok()
    }

    fn check_same(&self, other: &EventSet) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(invalid("events live on different sample spaces"))
        }
    }

    pub fn intersection(&self, other: &EventSet) -> Result<EventSet> {
        self.check_same(other)?;
        let members = self.members.iter().copied().filter(|m| other.contains(*m)).collect();
        Ok(EventSet {
            space: Arc::clone(&self.space),
            members,
        })
    }

    pub fn union(&self, other: &EventSet) -> Result<EventSet> {
        self.check_same(other)?;
        EventSet::new(&self.space, self.members.iter().chain(other.members.iter()).copied())
    }

    pub fn complement(&self) -> EventSet {
        EventSet {
            space: Arc::clone(&self.space),
            members: (0..self.space.len()).filter(|m| !self.contains(*m)).collect(),
        }
    }

    pub fn is_disjoint(&self, other: &EventSet) -> bool {
        self.members.iter().all(|m| !other.contains(*m))
    }

    /// Carrier sets on embedded spaces are those whose atoms all carry
    /// coordinates; on abstract spaces every event qualifies.
    pub fn is_carrier_eligible(&self) -> bool {
        self.space.embed_dim.is_none() || self.members.iter().all(|&m| self.space.atoms[m].coord.is_some())
    }

    /// Human-readable subject string, e.g. `{+1/2,-1/2}`.
    pub fn describe(&self) -> String {
        let labels: Vec<&str> = self
            .members
            .iter()
            .map(|&m| self.space.atoms[m].label.as_str())
            .collect();
        format!("{{{}}}", labels.join(";"))
    }
}

/// A complex-valued function on atoms, stored as one value per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFn(Vec<Complex64>);

impl AtomFn {
    pub fn new(values: Vec<Complex64>) -> Self {
        AtomFn(values)
    }

    pub fn real(values: &[f64]) -> Self {
        AtomFn(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn constant(space: &SampleSpace, c: Complex64) -> Self {
        AtomFn(alloc::vec![c; space.len()])
    }

    pub fn indicator(event: &EventSet) -> Self {
        let mut v = alloc::vec![Complex64::new(0.0, 0.0); event.space.len()];
        for &m in &event.members {
            v[m] = Complex64::new(1.0, 0.0);
        }
        AtomFn(v)
    }

    /// Evaluate `f` on atom coordinates; fails if an atom has none.
    pub fn from_coords(space: &SampleSpace, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        space
            .atoms
            .iter()
            .map(|a| {
                a.coord
                    .as_deref()
                    .map(&f)
                    .ok_or_else(|| invalid(format!("atom {:?} has no coordinate", a.label)))
            })
            .collect::<Result<Vec<_>>>()
            .map(AtomFn)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn product(&self, other: &AtomFn) -> Result<AtomFn> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(AtomFn(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0 && z.re >= 0.0)
    }
}

/// A positive linear map from atom functions into operators.
///
/// On a finite space every such map is integration against a unique POVM;
/// [`Povm::from_positive_map`] reads it back.
pub trait PositiveMap {
    fn space(&self) -> &Arc<SampleSpace>;
    fn operator_dim(&self) -> usize;
    fn eval(&self, f: &AtomFn) -> Result<Operator>;
}

/// Atomic positive operator-valued measure.
#[derive(Debug, Clone)]
pub struct Povm {
    space: Arc<SampleSpace>,
    effects: Vec<Operator>,
    dim: usize,
    normalized: bool,
}

impl Povm {
    pub fn new(space: Arc<SampleSpace>, effects: Vec<Operator>, tol: &Tolerance) -> Result<Self> {
        if effects.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                actual: effects.len(),
            });
        }
        let dim = effects[0].dim();
        for (i, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: e.dim(),
                });
            }
            if !is_positive(e, tol) {
                return Err(invalid(format!(
                    "effect of atom {:?} is not positive",
                    space.atoms()[i].label
                )));
            }
        }
        let povm = Povm {
            space,
            effects,
            dim,
            normalized: false,
        };
        let total = povm.total();
        let id = Operator::identity(dim);
        // total ⪯ (1 + psd_tol) I  ⇔  spectrum of total ≤ 1 + psd_tol
        let top = hermitian_eig(&total, tol)?.values.last().copied().unwrap_or(0.0);
        if top > 1.0 + tol.psd_tol {
            return Err(invalid(format!(
                "total effect exceeds the identity: top eigenvalue {top}"
            )));
        }
        let normalized = (&total - &id).norm() <= tol.psd_tol;
        Ok(Povm { normalized, ..povm })
    }

    /// Read a POVM off a positive map via indicators of atoms.
    pub fn from_positive_map(map: &impl PositiveMap, tol: &Tolerance) -> Result<Self> {
        let space = Arc::clone(map.space());
        let effects = (0..space.len())
            .map(|i| map.eval(&AtomFn::indicator(&EventSet::singleton(&space, i)?)))
            .collect::<Result<Vec<_>>>()?;
        Povm::new(space, effects, tol)
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn effects(&self) -> &[Operator] {
        &self.effects
    }

    pub fn effect(&self, atom: usize) -> &Operator {
        &self.effects[atom]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_atoms(&self) -> usize {
        self.effects.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `A(X) = Σ effects`.
    pub fn total(&self) -> Operator {
        let mut acc = Operator::zeros(self.dim);
        for e in &self.effects {
            acc += e;
        }
        acc
    }

    fn check_event(&self, event: &EventSet) -> Result<()> {
        if same_space(&self.space, &event.space) {
            Ok(())
        } else {
            Err(invalid("event is defined on a different sample space"))
        }
    }

    /// `A(Δ) = Σ_{i∈Δ} effects[i]`, summed in ascending atom order.
    pub fn apply(&self, event: &EventSet) -> Result<Operator> {
        self.check_event(event)?;
        let mut acc = Operator::zeros(self.dim);
        for &m in &event.members {
            acc += &self.effects[m];
        }
        Ok(acc)
    }

    /// `∫ f dA = Σᵢ f(i)·effects[i]`.
    pub fn integrate(&self, f: &AtomFn) -> Result<Operator> {
        if f.len() != self.n_atoms() {
            return Err(Error::DimensionMismatch {
                expected: self.n_atoms(),
                actual: f.len(),
            });
        }
        let mut acc = Operator::zeros(self.dim);
        for (c, e) in f.values().iter().zip(&self.effects) {
            if *c == Complex64::new(1.0, 0.0) {
                acc += e;
            } else if *c != Complex64::new(0.0, 0.0) {
                acc.axpy(*c, e);
            }
        }
        Ok(acc)
    }

    /// `max(0, ‖∫f dA‖ − 2‖f‖_∞‖A(X)‖)`; the atomic sharp constant would be 1.
    pub fn riesz_bound_residual(&self, f: &AtomFn) -> Result<f64> {
        let lhs = self.integrate(f)?.norm();
        let rhs = 2.0 * f.sup_norm() * self.total().norm();
        Ok((lhs - rhs).max(0.0))
    }

    /// Atoms whose effect norm exceeds `rank_tol`.
    pub fn spectrum(&self, tol: &Tolerance) -> EventSet {
        EventSet {
            space: Arc::clone(&self.space),
            members: (0..self.n_atoms())
                .filter(|&i| self.effects[i].norm() > tol.rank_tol)
                .collect(),
        }
    }

    /// Atoms carrying no mass (the atomic cospectrum).
    pub fn cospectrum(&self, tol: &Tolerance) -> EventSet {
        self.spectrum(tol).complement()
    }

    /// `tr(ρ A(Δ))`.
    pub fn born_prob(&self, event: &EventSet, rho: &DensityOperator) -> Result<f64> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rho.dim(),
            });
        }
        let t = (rho.operator() * &self.apply(event)?).trace();
        if t.im.abs() > 1e-10 {
            return Err(invalid(format!("Born probability has imaginary part {}", t.im)));
        }
        Ok(t.re)
    }

    /// Largest `‖EᵢEⱼ − δᵢⱼEᵢ‖` over atom pairs.
    pub fn projectivity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.effects.iter().enumerate() {
            for (j, b) in self.effects.iter().enumerate().skip(i) {
                let prod = a * b;
                let r = if i == j { (&prod - a).norm() } else { prod.norm() };
                worst = worst.max(r);
            }
        }
        worst
    }

    pub fn is_projective(&self) -> bool {
        self.projectivity_residual() <= PROJECTIVE_TOL
    }
}

impl PositiveMap for Povm {
    fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    fn operator_dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, f: &AtomFn) -> Result<Operator> {
        self.integrate(f)
    }
}

/// Projection-valued measure: a POVM with mutually orthogonal projections.
#[derive(Debug, Clone)]
pub struct Pvm(Povm);

impl Pvm {
    pub fn new(povm: Povm) -> Result<Self> {
        let r = povm.projectivity_residual();
        if r > PROJECTIVE_TOL {
            return Err(invalid(format!(
                "effects are not orthogonal projections (residual {r:e})"
            )));
        }
        Ok(Pvm(povm))
    }

    pub fn into_povm(self) -> Povm {
        self.0
    }
}

impl Deref for Pvm {
    type Target = Povm;
    fn deref(&self) -> &Povm {
        &self.0
    }
}

/// Spectral measure of a self-adjoint operator; atoms are the distinct
/// eigenvalues (clustered by chains of gaps ≤ `eig_tol`).
pub fn pvm_from_selfadjoint(t: &Operator, tol: &Tolerance) -> Result<Pvm> {
    let eig = hermitian_eig(t, tol)?;
    let n = t.dim();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match clusters.last_mut() {
            Some(c) if eig.values[k] - eig.values[*c.last().unwrap()] <= tol.eig_tol => c.push(k),
            _ => clusters.push(alloc::vec![k]),
        }
    }
    let mut atoms = Vec::with_capacity(clusters.len());
    let mut effects = Vec::with_capacity(clusters.len());
    for c in &clusters {
        let value = c.iter().map(|&k| eig.values[k]).sum::<f64>() / c.len() as f64;
        atoms.push(Atom::at(format!("{value:?}"), alloc::vec![value]));
        let mut p = Operator::zeros(n);
        for &k in c {
            let v = eig.vector(k);
            p += &Operator::outer(&v, &v)?;
        }
        effects.push(p);
    }
    let space = Arc::new(SampleSpace::new(atoms)?);
    Pvm::new(Povm::new(space, effects, tol)?)
}

/// Isometry `V : ℂ^cols → ℂ^rows` stored row-major.
#[derive(Debug, Clone)]
pub struct Isometry {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Isometry {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    /// `V* B V`.
    pub fn compress(&self, big: &Operator) -> Result<Operator> {
        if big.dim() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: big.dim(),
            });
        }
        let (r, c) = (self.rows, self.cols);
        // BV first, then V*(BV)
        let mut bv = alloc::vec![Complex64::new(0.0, 0.0); r * c];
        for i in 0..r {
            for k in 0..r {
                let b = big[(i, k)];
                if b.re == 0.0 && b.im == 0.0 {
                    continue;
                }
                for j in 0..c {
                    bv[i * c + j] += b * self.data[k * c + j];
                }
            }
        }
        let mut out = Operator::zeros(c);
        for i in 0..c {
            for j in 0..c {
                out[(i, j)] = (0..r).map(|k| self.data[k * c + i].conj() * bv[k * c + j]).sum();
            }
        }
        Ok(out)
    }

    /// `V* V`, the identity for a genuine isometry.
    pub fn gram(&self) -> Operator {
        let c = self.cols;
        let mut out = Operator::zeros(c);
        for i in 0..c {
            for j in 0..c {
                out[(i, j)] = (0..self.rows)
                    .map(|k| self.data[k * c + i].conj() * self.data[k * c + j])
                    .sum();
            }
        }
        out
    }
}

/// Naimark dilation: a PVM on the enlarged space and the isometry it
/// compresses through.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    pub pvm: Pvm,
    pub isometry: Isometry,
}

impl NaimarkDilation {
    /// `max_i ‖V* E({i}) V − A({i})‖`.
    pub fn compression_residual(&self, povm: &Povm) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..povm.n_atoms() {
            let c = self.isometry.compress(self.pvm.effect(i))?;
            worst = worst.max((&c - povm.effect(i)).norm());
        }
        Ok(worst)
    }
}

/// Canonical block dilation `V = [√A₀; √A₁; …]`, `E({i})` = selector of
/// block `i`. Not minimal.
pub fn naimark_dilate(povm: &Povm, tol: &Tolerance) -> Result<NaimarkDilation> {
    if !povm.is_normalized() {
        return Err(invalid("Naimark dilation requires a normalized POVM"));
    }
    let d = povm.dim();
    let n = povm.n_atoms();
    let big = d * n;
    let mut data = alloc::vec![Complex64::new(0.0, 0.0); big * d];
    for (b, e) in povm.effects().iter().enumerate() {
        let root = fun_calc(e, |x| x.max(0.0).sqrt(), tol)?;
        for i in 0..d {
            for j in 0..d {
                data[(b * d + i) * d + j] = root[(i, j)];
            }
        }
    }
    let selectors = (0..n)
        .map(|b| {
            let mut p = Operator::zeros(big);
            for i in 0..d {
                p[(b * d + i, b * d + i)] = Complex64::new(1.0, 0.0);
            }
            p
        })
        .collect();
    let pvm = Pvm::new(Povm::new(Arc::clone(povm.space()), selectors, tol)?)?;
    Ok(NaimarkDilation {
        pvm,
        isometry: Isometry {
            rows: big,
            cols: d,
            data,
        },
    })
}

/// Positive, unit-trace operator.
#[derive(Debug, Clone)]
pub struct DensityOperator(Operator);

impl DensityOperator {
    pub fn new(rho: Operator, tol: &Tolerance) -> Result<Self> {
        if !is_positive(&rho, tol) {
            return Err(invalid("density operator must be positive"));
        }
        let t = rho.trace();
        if (t.re - 1.0).abs() > 1e-9 || t.im.abs() > 1e-9 {
            return Err(invalid(format!("density operator must have unit trace, got {t}")));
        }
        Ok(DensityOperator(rho))
    }

    /// Pure state `|ψ⟩⟨ψ|` of a (normalised on input) vector.
    pub fn pure(psi: &[Complex64], tol: &Tolerance) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(invalid("state vector is zero"));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        DensityOperator::new(Operator::outer(&v, &v)?, tol)
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}
