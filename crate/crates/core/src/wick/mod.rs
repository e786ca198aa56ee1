//! Wick (Toeplitz) quantization on truncated Fock space.
//!
//! Fock space here is spanned by `e_n(z) = zⁿ/√(n!)`, `n ≤ N`, inside
//! `L²(ℂ, π^{-1} e^{−|z|²} dλ)`. The matrix of the compression of
//! multiplication by `f` is
//!
//! `T_kn = (π√(k!n!))^{-1} ∫ f(w) wⁿ w̄ᵏ e^{−|w|²} dλ(w)`,
//!
//! which, for a separable term `g(θ)s(r)`, is `ĝ(k−n)·R_s(k,n)` with the
//! radial integral `R_s(k,n) = ∫₀^∞ s(√t) t^{(k+n)/2} e^{−t} dt / √(k!n!)`.
//! Bands and ramps have incomplete-gamma closed forms; other profiles go
//! through Gauss–Laguerre at order `2N+8`, checked against order `2N+16`.

pub mod quadrature;
pub mod special;
pub mod symbol;

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub use symbol::{Angular, AngularFn, Cell, Radial, RadialFn, Symbol, Term};

use crate::asymptotic::{check_hbar, AsmFamily, Generator, HbarGrid};
use crate::error::{invalid, Error, Result};
use crate::measure::{Atom, EventSet, Povm, SampleSpace};
use crate::operator::{max_dim, Operator, Tolerance};
use quadrature::{gauss_laguerre, LaguerreRule};
use special::{gamma_band, ln_gamma, reg_gamma};

/// Truncation `span{e_0, …, e_N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockTrunc {
    degree: usize,
}

impl FockTrunc {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(invalid("Fock truncation degree must be at least 1"));
        }
        if degree + 1 > max_dim() {
            return Err(Error::DimensionTooLarge {
                dim: degree + 1,
                max: max_dim(),
            });
        }
        Ok(FockTrunc { degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn radial_order(&self) -> usize {
        2 * self.degree + 8
    }

    pub fn angular_points(&self) -> usize {
        4 * self.degree + 16
    }

    /// Truncation at `⌊N/2⌋` (at least 1), for sensitivity estimates.
    pub fn half(&self) -> FockTrunc {
        FockTrunc {
            degree: (self.degree / 2).max(1),
        }
    }
}

/// `lnΓ(s/2 + 1)` for `s = 0..=2N`, exact log-factorials at even `s`.
struct LogGammaTable(Vec<f64>);

impl LogGammaTable {
    fn new(n: usize) -> Self {
        let mut table = vec![0.0; 2 * n + 1];
        let mut lnfact = 0.0;
        for (s, slot) in table.iter_mut().enumerate() {
            if s % 2 == 0 {
                if s > 0 {
                    lnfact += ((s / 2) as f64).ln();
                }
                *slot = lnfact;
            } else {
                *slot = ln_gamma(s as f64 / 2.0 + 1.0);
            }
        }
        LogGammaTable(table)
    }

    fn half_sum(&self, k: usize, n: usize) -> f64 {
        0.5 * (self.0[2 * k] + self.0[2 * n])
    }
}

enum RadialEval {
    One,
    Band {
        x1: f64,
        x2: f64,
    },
    Ramp {
        r0: f64,
        power: f64,
    },
    /// `J(s) = Σ wᵢ tᵢ^{s/2−α} s(√tᵢ) / Γ(s/2+1)` for `s = 0..=2N`.
    Quadrature(Vec<f64>),
}

fn profile_sums(rule0: &LaguerreRule, rule_half: &LaguerreRule, f: &RadialFn, lg: &LogGammaTable) -> Result<Vec<f64>> {
    let eval = |rule: &LaguerreRule| -> Result<Vec<f64>> {
        let v: Vec<f64> = rule.nodes.iter().map(|&t| f(t.sqrt())).collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(invalid("radial profile is not bounded on the quadrature nodes"));
        }
        Ok(v)
    };
    let (v0, vh) = (eval(rule0)?, eval(rule_half)?);
    Ok((0..lg.0.len())
        .map(|s| {
            let (rule, vals) = if s % 2 == 0 { (rule0, &v0) } else { (rule_half, &vh) };
            let power = s as f64 / 2.0 - rule.alpha;
            rule.nodes
                .iter()
                .zip(&rule.ln_weights)
                .zip(vals)
                .map(|((&t, &lw), &fv)| {
                    if fv == 0.0 {
                        0.0
                    } else {
                        (lw + power * t.ln() - lg.0[s]).exp() * fv
                    }
                })
                .sum()
        })
        .collect())
}

impl RadialEval {
    fn new(radial: &Radial, fock: &FockTrunc, lg: &LogGammaTable) -> Result<Self> {
        Ok(match radial {
            Radial::Band { inner, outer } if *inner == 0.0 && outer.is_infinite() => RadialEval::One,
            Radial::Band { inner, outer } => RadialEval::Band {
                x1: inner * inner,
                x2: outer * outer,
            },
            Radial::Ramp { r0, power } => RadialEval::Ramp { r0: *r0, power: *power },
            Radial::Profile { f, .. } => {
                let q = fock.radial_order();
                let lo = profile_sums(&gauss_laguerre(q, 0.0)?, &gauss_laguerre(q, 0.5)?, f, lg)?;
                let hi = profile_sums(&gauss_laguerre(q + 8, 0.0)?, &gauss_laguerre(q + 8, 0.5)?, f, lg)?;
                let diff = lo.iter().zip(&hi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if diff > 1e-8 {
                    return Err(Error::Precision { difference: diff });
                }
                RadialEval::Quadrature(hi)
            }
        })
    }

    /// `R(k, n)`.
    fn entry(&self, k: usize, n: usize, lg: &LogGammaTable) -> Result<f64> {
        let s = k + n;
        // Γ(s/2+1)/√(k!n!) ≤ 1 by log-convexity
        let scale = (lg.0[s] - lg.half_sum(k, n)).exp();
        let a = s as f64 / 2.0 + 1.0;
        Ok(match self {
            RadialEval::One => scale,
            RadialEval::Band { x1, x2 } => {
                if x1 >= x2 {
                    0.0
                } else {
                    scale * gamma_band(a, *x1, *x2)?
                }
            }
            RadialEval::Ramp { r0, power } => {
                let x = r0 * r0;
                let b = a + power / 2.0;
                let inside = (ln_gamma(b) - power * r0.ln() - lg.half_sum(k, n)).exp() * reg_gamma(b, x)?.0;
                inside + scale * reg_gamma(a, x)?.1
            }
            RadialEval::Quadrature(j) => scale * j[s],
        })
    }
}

/// Matrix of `T_f` on the truncation. `f ≡ 1` gives the identity exactly.
pub fn toeplitz(f: &Symbol, fock: &FockTrunc) -> Result<Operator> {
    let n = fock.degree();
    let lg = LogGammaTable::new(n);
    let mut t = Operator::zeros(fock.dim());
    for term in f.terms() {
        if term.coef == Complex64::new(0.0, 0.0) {
            continue;
        }
        let coeffs = term.angular.coefficients(n, fock.angular_points())?;
        if coeffs.is_empty() {
            continue;
        }
        let radial = RadialEval::new(&term.radial, fock, &lg)?;
        for (j, c) in coeffs {
            for col in 0..=n {
                let row = col as i64 + j;
                if row < 0 || row > n as i64 {
                    continue;
                }
                let row = row as usize;
                let r = radial.entry(row, col, &lg)?;
                if r != 0.0 {
                    t[(row, col)] += term.coef * c * r;
                }
            }
        }
    }
    if !t.is_finite() {
        return Err(invalid(format!(
            "symbol {} produced non-finite matrix entries",
            f.label()
        )));
    }
    Ok(t)
}

fn check_indicator(cell: &Symbol) -> Result<Vec<Cell>> {
    cell.as_cells().ok_or_else(|| {
        invalid(format!(
            "{} is not an indicator of disks, annuli or grid cells",
            cell.label()
        ))
    })
}

/// `A_ħ(Δ) = T_{χ_Δ(ħ·)}`, the Wick effect of the dilated set `ħ^{-1}Δ`.
pub fn wick_povm(cell: &Symbol, hbar: f64, fock: &FockTrunc) -> Result<Operator> {
    check_indicator(cell)?;
    check_hbar(hbar)?;
    toeplitz(&cell.rescale(hbar), fock)
}

/// Largest `|⟨e_N, A_ħ(Δ) e_N⟩|` over the cells: how much of each cell sits
/// at the truncation edge. Near 0 means the truncation resolves the cells.
pub fn truncation_edge(cells: &[Symbol], hbar: f64, fock: &FockTrunc) -> Result<f64> {
    let n = fock.degree();
    let mut edge = 0.0f64;
    for c in cells {
        edge = edge.max(wick_povm(c, hbar, fock)?[(n, n)].norm());
    }
    Ok(edge)
}

/// Label of the residual (complement) atom of [`wick_asm`].
pub const REST: &str = "rest";

/// Atomic ASM on the given disjoint bounded cells plus the complement;
/// the effects are the Wick effects of the dilated cells and the complement
/// gets `I − Σ`. The carrier is the bounded cells.
pub fn wick_asm(cells: &[Symbol], fock: &FockTrunc, grid: &HbarGrid, tol: &Tolerance) -> Result<AsmFamily> {
    if cells.is_empty() {
        return Err(invalid("Wick partition needs at least one cell"));
    }
    let mut seen: Vec<Cell> = Vec::new();
    for c in cells {
        for piece in check_indicator(c)? {
            if !piece.is_bounded() {
                return Err(invalid(format!("cell {} is unbounded", c.label())));
            }
            if seen.iter().any(|s| s.overlaps(&piece)) {
                return Err(invalid(format!("cell {} overlaps another cell", c.label())));
            }
            seen.push(piece);
        }
    }
    let mut atoms: Vec<Atom> = cells.iter().map(|c| Atom::labeled(c.label())).collect();
    atoms.push(Atom::labeled(REST));
    let space = Arc::new(SampleSpace::new(atoms)?);
    let cells: Vec<Symbol> = cells.to_vec();
    let (s, f, t) = (Arc::clone(&space), *fock, *tol);
    let generator: Generator = Arc::new(move |h| {
        let mut effects = Vec::with_capacity(cells.len() + 1);
        let mut rest = Operator::identity(f.dim());
        for c in &cells {
            let e = wick_povm(c, h, &f)?;
            rest = &rest - &e;
            effects.push(e);
        }
        effects.push(rest);
        Povm::new(Arc::clone(&s), effects, &t)
    });
    let carrier = (0..space.len() - 1)
        .map(|i| EventSet::singleton(&space, i))
        .collect::<Result<Vec<_>>>()?;
    let label: String = format!("wick[N={}]", fock.degree());
    let family = AsmFamily::new(label, space, generator, carrier, true)?;
    family.validate(grid, tol)?;
    Ok(family)
}

/// `‖T(α_ħ(fg)) − T(α_ħ f)·T(α_ħ g)‖` at truncation `N`, and at `⌊N/2⌋`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultDefect {
    pub value: f64,
    pub half_value: f64,
}

impl MultDefect {
    /// `|value − half_value| / value`; 0 when both vanish.
    pub fn sensitivity(&self) -> f64 {
        let d = (self.value - self.half_value).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.value.abs()
        }
    }
}

fn mult_defect_at(f: &Symbol, g: &Symbol, fg: &Symbol, fock: &FockTrunc) -> Result<f64> {
    let tf = toeplitz(f, fock)?;
    let tg = toeplitz(g, fock)?;
    let tfg = toeplitz(fg, fock)?;
    crate::operator::op_norm(&(&tfg - &(&tf * &tg)))
}

/// Multiplicativity defect of the Wick morphism on flat symbols.
pub fn cdelta_mult_defect(f: &Symbol, g: &Symbol, hbar: f64, fock: &FockTrunc) -> Result<MultDefect> {
    check_hbar(hbar)?;
    for s in [f, g] {
        if !s.is_flat() {
            return Err(invalid(format!(
                "{} is not continuous on the radial compactification",
                s.label()
            )));
        }
    }
    let (fh, gh) = (f.rescale(hbar), g.rescale(hbar));
    let fg = f.product(g).rescale(hbar);
    Ok(MultDefect {
        value: mult_defect_at(&fh, &gh, &fg, fock)?,
        half_value: mult_defect_at(&fh, &gh, &fg, &fock.half())?,
    })
}

/// Smoothing radius of the winding symbols used by [`index_witness`].
pub const WINDING_SMOOTHING: f64 = 0.1;

fn rank_with_gap(sv: &[f64], threshold: f64) -> Result<usize> {
    if let Some(&v) = sv.iter().find(|&&v| v > threshold * 1e-2 && v < threshold * 1e2) {
        return Err(Error::Indeterminate { value: v, threshold });
    }
    Ok(sv.iter().filter(|&&v| v > threshold).count())
}

/// `dim ker − dim coker` of the winding-`m` Toeplitz operator, read off the
/// first `D = N+1−2|m|` basis vectors: kernel of `T` restricted to
/// `span{e_0..e_{D−1}}` and cokernel of its range compressed to the same span.
/// Winding `+1` acts as a weighted forward shift, so the result is `−m`.
pub fn index_witness(m: i64, fock: &FockTrunc, tol: &Tolerance) -> Result<i64> {
    let n = fock.degree();
    if 4 * m.unsigned_abs() as usize > n {
        return Err(invalid(format!("winding {m} needs 4|m| ≤ N = {n}")));
    }
    let t = toeplitz(&Symbol::winding(m, WINDING_SMOOTHING)?, fock)?;
    let d = n + 1 - 2 * m.unsigned_abs() as usize;
    let threshold = tol.rank_tol * t.norm().max(1.0);
    let domain = t.block_columns(0..n + 1, 0..d);
    let range: Vec<Vec<Complex64>> = (0..d).map(|i| (0..=n).map(|j| t[(i, j)].conj()).collect()).collect();
    let ker = d - rank_with_gap(&crate::operator::singular_values_of_columns(domain), threshold)?;
    let coker = d - rank_with_gap(&crate::operator::singular_values_of_columns(range), threshold)?;
    Ok(ker as i64 - coker as i64)
}
