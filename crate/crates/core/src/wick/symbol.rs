//! Separable symbols `f(re^{iθ}) = Σ c·g(θ)·s(r)` on the plane.
//!
//! Every symbol kind used here (disks, annuli, polar cells, windings,
//! radial profiles, flat symbols) is a finite sum of separable terms, which
//! makes the Fock matrix element factor into an angular Fourier coefficient
//! times a one-dimensional radial integral.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// `x mod 2π` in `[0, 2π)`.
fn wrap_angle(x: f64) -> f64 {
    let r = x - TAU * (x / TAU).floor();
    if r >= TAU {
        0.0
    } else {
        r
    }
}

use crate::error::{invalid, Error, Result};

pub type AngularFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const TAU: f64 = 2.0 * PI;
const ARC_SLACK: f64 = 1e-12;

#[derive(Clone)]
pub enum Angular {
    /// Finite Fourier series `Σ c_j e^{ijθ}`.
    Fourier(Vec<(i64, Complex64)>),
    /// Indicator of the counterclockwise arc `[from, to)`.
    Sector {
        from: f64,
        to: f64,
    },
    Sampled(AngularFn),
}

impl fmt::Debug for Angular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angular::Fourier(c) => f.debug_tuple("Fourier").field(c).finish(),
            Angular::Sector { from, to } => f.debug_struct("Sector").field("from", from).field("to", to).finish(),
            Angular::Sampled(_) => f.write_str("Sampled"),
        }
    }
}

impl Angular {
    pub fn one() -> Self {
        Angular::Fourier(vec![(0, Complex64::new(1.0, 0.0))])
    }

    fn constant_value(&self) -> Option<Complex64> {
        match self {
            Angular::Fourier(c) if c.iter().all(|&(j, _)| j == 0) => Some(c.iter().map(|&(_, v)| v).sum()),
            Angular::Sector { from, to } if to - from >= TAU - ARC_SLACK => Some(Complex64::new(1.0, 0.0)),
            _ => None,
        }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        match self {
            Angular::Fourier(c) => c
                .iter()
                .map(|&(j, v)| v * Complex64::from_polar(1.0, j as f64 * theta))
                .sum(),
            Angular::Sector { from, to } => {
                let off = wrap_angle(theta - from);
                if off < to - from {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Angular::Sampled(g) => g(theta),
        }
    }

    fn conj(&self) -> Angular {
        match self {
            Angular::Fourier(c) => Angular::Fourier(c.iter().map(|&(j, v)| (-j, v.conj())).collect()),
            Angular::Sector { .. } => self.clone(),
            Angular::Sampled(g) => {
                let g = Arc::clone(g);
                Angular::Sampled(Arc::new(move |t| g(t).conj()))
            }
        }
    }

    fn product(&self, other: &Angular) -> Angular {
        if let (Angular::Fourier(a), Angular::Fourier(b)) = (self, other) {
            let mut out: Vec<(i64, Complex64)> = Vec::new();
            for &(j, u) in a {
                for &(k, v) in b {
                    match out.iter_mut().find(|(f, _)| *f == j + k) {
                        Some(slot) => slot.1 += u * v,
                        None => out.push((j + k, u * v)),
                    }
                }
            }
            out.sort_by_key(|&(j, _)| j);
            return Angular::Fourier(out);
        }
        let (a, b) = (self.clone(), other.clone());
        Angular::Sampled(Arc::new(move |t| a.eval(t) * b.eval(t)))
    }

    /// Nonzero Fourier coefficients `ĝ(j) = (1/2π)∫ g e^{−ijθ}`, `|j| ≤ n`.
    /// Sampled profiles use a `points`-point trapezoid checked against
    /// twice as many points.
    pub fn coefficients(&self, n: usize, points: usize) -> Result<Vec<(i64, Complex64)>> {
        let n = n as i64;
        match self {
            Angular::Fourier(c) => Ok(c
                .iter()
                .filter(|&&(j, v)| j.abs() <= n && v != Complex64::new(0.0, 0.0))
                .copied()
                .collect()),
            Angular::Sector { from, to } => {
                if self.constant_value().is_some() {
                    return Ok(vec![(0, Complex64::new(1.0, 0.0))]);
                }
                Ok((-n..=n)
                    .map(|j| {
                        let c = if j == 0 {
                            Complex64::new((to - from) / TAU, 0.0)
                        } else {
                            let jf = j as f64;
                            (Complex64::from_polar(1.0, -jf * from) - Complex64::from_polar(1.0, -jf * to))
                                / Complex64::new(0.0, TAU * jf)
                        };
                        (j, c)
                    })
                    .collect())
            }
            Angular::Sampled(g) => {
                let coarse = trapezoid(g, n, points)?;
                let fine = trapezoid(g, n, 2 * points)?;
                let diff = coarse
                    .iter()
                    .zip(&fine)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                if diff > 1e-8 {
                    return Err(Error::Precision { difference: diff });
                }
                Ok((-n..=n).zip(fine).filter(|(_, c)| c.norm() > 0.0).collect())
            }
        }
    }
}

fn trapezoid(g: &AngularFn, n: i64, points: usize) -> Result<Vec<Complex64>> {
    let samples: Vec<Complex64> = (0..points).map(|l| g(TAU * l as f64 / points as f64)).collect();
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(invalid("angular profile is not finite"));
    }
    Ok((-n..=n)
        .map(|j| {
            let s: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(l, &v)| v * Complex64::from_polar(1.0, -(j as f64) * TAU * l as f64 / points as f64))
                .sum();
            s / points as f64
        })
        .collect())
}

#[derive(Clone)]
pub enum Radial {
    /// Indicator of `inner ≤ r < outer`; `outer` may be infinite.
    Band { inner: f64, outer: f64 },
    /// `min(r/r₀, 1)^power`.
    Ramp { r0: f64, power: f64 },
    /// Arbitrary bounded profile with an optional limit at infinity.
    Profile { f: RadialFn, limit: Option<f64> },
}

impl fmt::Debug for Radial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radial::Band { inner, outer } => f
                .debug_struct("Band")
                .field("inner", inner)
                .field("outer", outer)
                .finish(),
            Radial::Ramp { r0, power } => f.debug_struct("Ramp").field("r0", r0).field("power", power).finish(),
            Radial::Profile { limit, .. } => f.debug_struct("Profile").field("limit", limit).finish(),
        }
    }
}

impl Radial {
    pub fn one() -> Self {
        Radial::Band {
            inner: 0.0,
            outer: f64::INFINITY,
        }
    }

    fn is_one(&self) -> bool {
        matches!(self, Radial::Band { inner, outer } if *inner == 0.0 && outer.is_infinite())
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Radial::Band { inner, outer } => {
                if *inner <= r && r < *outer {
                    1.0
                } else {
                    0.0
                }
            }
            Radial::Ramp { r0, power } => (r / r0).min(1.0).powf(*power),
            Radial::Profile { f, .. } => f(r),
        }
    }

    pub fn limit(&self) -> Option<f64> {
        match self {
            Radial::Band { outer, .. } => Some(if outer.is_infinite() { 1.0 } else { 0.0 }),
            Radial::Ramp { .. } => Some(1.0),
            Radial::Profile { limit, .. } => *limit,
        }
    }

    /// `r ↦ s(h·r)`.
    fn dilate(&self, h: f64) -> Radial {
        match self {
            Radial::Band { inner, outer } => Radial::Band {
                inner: inner / h,
                outer: outer / h,
            },
            Radial::Ramp { r0, power } => Radial::Ramp {
                r0: r0 / h,
                power: *power,
            },
            Radial::Profile { f, limit } => {
                let f = Arc::clone(f);
                Radial::Profile {
                    f: Arc::new(move |r| f(h * r)),
                    limit: *limit,
                }
            }
        }
    }

    fn product(&self, other: &Radial) -> Radial {
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        match (self, other) {
            (Radial::Band { inner: a0, outer: a1 }, Radial::Band { inner: b0, outer: b1 }) => {
                let inner = a0.max(*b0);
                let outer = a1.min(*b1).max(inner);
                Radial::Band { inner, outer }
            }
            (Radial::Ramp { r0: a, power: p }, Radial::Ramp { r0: b, power: q }) if a == b => {
                Radial::Ramp { r0: *a, power: p + q }
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                let limit = match (self.limit(), other.limit()) {
                    (Some(x), Some(y)) => Some(x * y),
                    _ => None,
                };
                Radial::Profile {
                    f: Arc::new(move |r| a.eval(r) * b.eval(r)),
                    limit,
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Term {
    pub coef: Complex64,
    pub angular: Angular,
    pub radial: Radial,
}

/// A polar rectangle `{inner ≤ r < outer, θ ∈ arc}`; `arc = None` is the
/// full circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub inner: f64,
    pub outer: f64,
    pub arc: Option<(f64, f64)>,
}

impl Cell {
    fn arcs_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
        let (la, lb) = (a.1 - a.0, b.1 - b.0);
        let ab = wrap_angle(b.0 - a.0);
        let ba = wrap_angle(a.0 - b.0);
        ab < la - ARC_SLACK || ba < lb - ARC_SLACK
    }

    pub fn overlaps(&self, other: &Cell) -> bool {
        let radial = self.inner.max(other.inner) < self.outer.min(other.outer);
        radial
            && match (self.arc, other.arc) {
                (Some(a), Some(b)) => Cell::arcs_overlap(a, b),
                _ => true,
            }
    }

    pub fn is_bounded(&self) -> bool {
        self.outer.is_finite()
    }
}

#[derive(Debug, Clone)]
pub struct Symbol {
    label: String,
    terms: Vec<Term>,
}

fn check_radius(r: f64, what: &str) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid(format!("{what} must be positive and finite, got {r}")));
    }
    Ok(())
}

fn check_arc(from: f64, to: f64) -> Result<()> {
    if !(from.is_finite() && to.is_finite() && to > from && to - from <= TAU + ARC_SLACK) {
        return Err(invalid(format!("arc [{from}, {to}) must have length in (0, 2π]")));
    }
    Ok(())
}

impl Symbol {
    pub fn from_terms(label: impl Into<String>, terms: Vec<Term>) -> Self {
        Symbol {
            label: label.into(),
            terms,
        }
    }

    fn single(label: String, angular: Angular, radial: Radial) -> Self {
        Symbol {
            label,
            terms: vec![Term {
                coef: Complex64::new(1.0, 0.0),
                angular,
                radial,
            }],
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut s = Symbol::single(format!("const({c:?})"), Angular::one(), Radial::one());
        s.terms[0].coef = Complex64::new(c, 0.0);
        s
    }

    pub fn disk(r: f64) -> Result<Self> {
        check_radius(r, "disk radius")?;
        Ok(Symbol::single(
            format!("disk({r:?})"),
            Angular::one(),
            Radial::Band { inner: 0.0, outer: r },
        ))
    }

    pub fn annulus(r1: f64, r2: f64) -> Result<Self> {
        check_radius(r1, "inner radius")?;
        check_radius(r2, "outer radius")?;
        if r1 >= r2 {
            return Err(invalid(format!("annulus radii must be ordered, got {r1} ≥ {r2}")));
        }
        Ok(Symbol::single(
            format!("annulus({r1:?},{r2:?})"),
            Angular::one(),
            Radial::Band { inner: r1, outer: r2 },
        ))
    }

    /// Indicator of one polar-mesh cell `[r₁, r₂) × [θ₀, θ₁)`.
    pub fn cell(r1: f64, r2: f64, from: f64, to: f64) -> Result<Self> {
        if !(r1 >= 0.0 && r1 < r2 && r2.is_finite()) {
            return Err(invalid(format!(
                "cell radii must satisfy 0 ≤ r1 < r2 < ∞, got {r1}, {r2}"
            )));
        }
        check_arc(from, to)?;
        Ok(Symbol::single(
            format!("cell({r1:?},{r2:?};{from:?},{to:?})"),
            Angular::Sector { from, to },
            Radial::Band { inner: r1, outer: r2 },
        ))
    }

    /// Piecewise constant symbol on the polar mesh with radial edges
    /// `radii` (starting at 0) and `sectors` equal arcs; `values` is
    /// row-major over (ring, sector).
    pub fn polar_grid(radii: &[f64], sectors: usize, values: &[f64]) -> Result<Self> {
        if radii.len() < 2
            || radii[0] != 0.0
            || radii.windows(2).any(|w| w[0].is_nan() || w[0] >= w[1])
            || !radii[radii.len() - 1].is_finite()
        {
            return Err(invalid("polar grid radii must start at 0 and increase strictly"));
        }
        let rings = radii.len() - 1;
        if sectors == 0 || values.len() != rings * sectors {
            return Err(invalid(format!(
                "polar grid needs {} values, got {}",
                rings * sectors,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("polar grid values must be finite"));
        }
        let width = TAU / sectors as f64;
        let mut terms = Vec::new();
        for i in 0..rings {
            for j in 0..sectors {
                let v = values[i * sectors + j];
                if v == 0.0 {
                    continue;
                }
                let angular = if sectors == 1 {
                    Angular::one()
                } else {
                    Angular::Sector {
                        from: j as f64 * width,
                        to: (j + 1) as f64 * width,
                    }
                };
                terms.push(Term {
                    coef: Complex64::new(v, 0.0),
                    angular,
                    radial: Radial::Band {
                        inner: radii[i],
                        outer: radii[i + 1],
                    },
                });
            }
        }
        Ok(Symbol::from_terms(format!("grid({rings}x{sectors})"), terms))
    }

    /// `e^{imθ}·min(r/r₀, 1)`: the winding-`m` phase smoothed to 0 at the origin.
    pub fn winding(m: i64, r0: f64) -> Result<Self> {
        check_radius(r0, "smoothing radius")?;
        Ok(Symbol::single(
            format!("winding({m})"),
            Angular::Fourier(vec![(m, Complex64::new(1.0, 0.0))]),
            Radial::Ramp { r0, power: 1.0 },
        ))
    }

    /// Radial profile `s(|z|)`; `limit` is its value at infinity if it has one.
    pub fn radial(label: impl Into<String>, s: RadialFn, limit: Option<f64>) -> Self {
        Symbol::single(label.into(), Angular::one(), Radial::Profile { f: s, limit })
    }

    /// `g(θ)·s(r)` with `s(0) = 0` and `s(∞) = 1`: continuous on the radial
    /// compactification with boundary values `g`.
    pub fn flat(label: impl Into<String>, g: AngularFn, s: RadialFn) -> Result<Self> {
        if s(0.0).abs() > 1e-12 {
            return Err(invalid("flat envelope must vanish at the origin"));
        }
        Ok(Symbol::single(
            label.into(),
            Angular::Sampled(g),
            Radial::Profile { f: s, limit: Some(1.0) },
        ))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let (r, theta) = (z.norm(), z.arg());
        self.terms
            .iter()
            .map(|t| t.coef * t.angular.eval(theta) * t.radial.eval(r))
            .sum()
    }

    /// `α_h f(z) = f(h z)`.
    pub fn rescale(&self, h: f64) -> Symbol {
        Symbol {
            label: format!("{}@{h:?}", self.label),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coef: t.coef,
                    angular: t.angular.clone(),
                    radial: t.radial.dilate(h),
                })
                .collect(),
        }
    }

    pub fn conj(&self) -> Symbol {
        Symbol {
            label: format!("conj({})", self.label),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coef: t.coef.conj(),
                    angular: t.angular.conj(),
                    radial: t.radial.clone(),
                })
                .collect(),
        }
    }

    pub fn product(&self, other: &Symbol) -> Symbol {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut coef = a.coef * b.coef;
                let angular = match (a.angular.constant_value(), b.angular.constant_value()) {
                    (Some(u), _) => {
                        coef *= u;
                        b.angular.clone()
                    }
                    (_, Some(v)) => {
                        coef *= v;
                        a.angular.clone()
                    }
                    _ => a.angular.product(&b.angular),
                };
                terms.push(Term {
                    coef,
                    angular,
                    radial: a.radial.product(&b.radial),
                });
            }
        }
        Symbol {
            label: format!("{}*{}", self.label, other.label),
            terms,
        }
    }

    /// `Some(cells)` when the symbol is the indicator of a disjoint union of
    /// polar rectangles.
    pub fn as_cells(&self) -> Option<Vec<Cell>> {
        let mut cells: Vec<Cell> = Vec::new();
        for t in &self.terms {
            if t.coef != Complex64::new(1.0, 0.0) {
                return None;
            }
            let Radial::Band { inner, outer } = t.radial else {
                return None;
            };
            let arc = match &t.angular {
                a if a.constant_value() == Some(Complex64::new(1.0, 0.0)) => None,
                Angular::Sector { from, to } => Some((*from, *to)),
                _ => return None,
            };
            let c = Cell { inner, outer, arc };
            if cells.iter().any(|o| o.overlaps(&c)) {
                return None;
            }
            cells.push(c);
        }
        Some(cells)
    }

    /// Continuous on the radial compactification: no bands other than the
    /// constant, profiles with a limit, and nonconstant angular parts only
    /// on envelopes vanishing at the origin.
    pub fn is_flat(&self) -> bool {
        self.terms.iter().all(|t| {
            let radial_ok = match &t.radial {
                Radial::Band { .. } => t.radial.is_one(),
                Radial::Ramp { .. } => true,
                Radial::Profile { limit, .. } => limit.is_some(),
            };
            let angular_ok = match &t.angular {
                Angular::Sector { .. } => t.angular.constant_value().is_some(),
                a if a.constant_value().is_some() => true,
                _ => t.radial.eval(0.0).abs() <= 1e-12,
            };
            radial_ok && angular_ok
        })
    }
}
