//! Spin-½ POVMs as points of the closed unit ball.
//!
//! `A_x^± = ½(I ± x·σ)` puts two-outcome spin POVMs in bijection with
//! `x ∈ B³`; the POVM is projective exactly when `‖x‖ = 1`. A spin ASM is a
//! path `ħ ↦ x(ħ)` in the ball approaching the sphere.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::asymptotic::{AsmFamily, Generator, HbarGrid};
use crate::error::{invalid, Result};
use crate::measure::{EventSet, Povm, SampleSpace};
use crate::operator::{Operator, Tolerance};

pub type Vec3 = [f64; 3];

const BALL_SLACK: f64 = 1e-12;

/// Pauli matrix `σ_k` for `k ∈ {1, 2, 3}`.
///
/// # Panics
/// For any other `k`.
pub fn pauli(k: usize) -> Operator {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let rows = match k {
        1 => [[z, one], [one, z]],
        2 => [[z, -i], [i, z]],
        3 => [[one, z], [z, -one]],
        _ => panic!("Pauli index must be 1, 2 or 3"),
    };
    Operator::new(2, rows.iter().flatten().copied().collect()).expect("2x2 is valid")
}

/// `x·σ`.
pub fn pauli_dot(x: &Vec3) -> Operator {
    let mut m = Operator::zeros(2);
    for (k, &c) in x.iter().enumerate() {
        m.axpy(Complex64::new(c, 0.0), &pauli(k + 1));
    }
    m
}

fn norm3(x: &Vec3) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn scale3(c: f64, x: &Vec3) -> Vec3 {
    [c * x[0], c * x[1], c * x[2]]
}

fn check_unit(n: &Vec3, what: &str) -> Result<()> {
    let l = norm3(n);
    if (l - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("{what} must be a unit vector, has norm {l}")));
    }
    Ok(())
}

/// A point of the closed unit ball `B³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallPoint {
    x: Vec3,
}

impl BallPoint {
    pub fn new(x: Vec3) -> Result<Self> {
        if x.iter().any(|c| !c.is_finite()) {
            return Err(invalid("ball point must be finite"));
        }
        let l = norm3(&x);
        if l > 1.0 + BALL_SLACK {
            return Err(invalid(format!(
                "point has norm {l} > 1; its POVM would not be positive"
            )));
        }
        Ok(BallPoint { x })
    }

    pub fn coords(&self) -> Vec3 {
        self.x
    }

    /// `λ = ‖x‖`.
    pub fn lambda(&self) -> f64 {
        norm3(&self.x)
    }

    pub fn is_sharp(&self) -> bool {
        (self.lambda() - 1.0).abs() <= 1e-10
    }
}

/// Two-outcome spin POVM `{A⁺, A⁻}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinPovm {
    plus: Operator,
    minus: Operator,
}

impl SpinPovm {
    pub fn new(plus: Operator, minus: Operator, tol: &Tolerance) -> Result<Self> {
        if plus.dim() != 2 || minus.dim() != 2 {
            return Err(invalid("spin POVM effects are 2x2"));
        }
        let sum = &plus + &minus;
        if (&sum - &Operator::identity(2)).max_abs_entry() > 1e-12 {
            return Err(invalid("A⁺ + A⁻ must equal the identity"));
        }
        for (name, e) in [("A⁺", &plus), ("A⁻", &minus)] {
            let t = e.trace();
            if (t.re - 1.0).abs() > 1e-12 || t.im.abs() > 1e-12 {
                return Err(invalid(format!("tr({name}) must equal 1, got {t}")));
            }
            if !crate::operator::is_positive(e, tol) {
                return Err(invalid(format!("{name} is not positive")));
            }
        }
        Ok(SpinPovm { plus, minus })
    }

    pub fn plus(&self) -> &Operator {
        &self.plus
    }

    pub fn minus(&self) -> &Operator {
        &self.minus
    }

    /// Atoms ordered `(−½, +½)` as in [`spin_space`].
    pub fn to_povm(&self, space: &Arc<SampleSpace>, tol: &Tolerance) -> Result<Povm> {
        Povm::new(
            Arc::clone(space),
            alloc::vec![self.minus.clone(), self.plus.clone()],
            tol,
        )
    }

    /// `A⁺ − A⁻`.
    pub fn observable(&self) -> Operator {
        &self.plus - &self.minus
    }
}

/// `A^± = ½(I ± x·σ)`.
pub fn povm_from_point(x: &BallPoint) -> SpinPovm {
    let half_id = Operator::identity(2).scale_real(0.5);
    let s = pauli_dot(&x.x).scale_real(0.5);
    SpinPovm {
        plus: &half_id + &s,
        minus: &half_id - &s,
    }
}

/// Inverse of [`povm_from_point`]: `xᵢ = tr(A⁺σᵢ)`.
pub fn point_from_povm(a: &SpinPovm) -> Result<BallPoint> {
    let mut x = [0.0; 3];
    for (k, xk) in x.iter_mut().enumerate() {
        let t = (&a.plus * &pauli(k + 1)).trace();
        if t.im.abs() > 1e-10 {
            return Err(invalid(format!("tr(A⁺σ{}) is not real: {t}", k + 1)));
        }
        *xk = t.re;
    }
    BallPoint::new(x)
}

/// Degree of reality `r = (1+λ)/2` and unsharpness `u = (1−λ)/2`.
pub fn reality_unsharpness(x: &BallPoint) -> (f64, f64) {
    let l = x.lambda();
    ((1.0 + l) / 2.0, (1.0 - l) / 2.0)
}

/// `‖4[(A⁺)² − A⁺] + (1 − λ²)I‖`, identically zero.
pub fn projectivity_identity_residual(x: &BallPoint) -> f64 {
    let a = povm_from_point(x).plus;
    let l2 = dot3(&x.x, &x.x);
    let mut m = (&(&a * &a) - &a).scale_real(4.0);
    m.axpy(Complex64::new(1.0 - l2, 0.0), &Operator::identity(2));
    m.norm()
}

fn det2(m: &Operator) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// `|‖x − y‖² + 4 det(A_x⁺ − A_y⁺)|`.
///
/// `det(v·σ) = −‖v‖²`, so the distance identity reads
/// `‖x − y‖² = −det((x−y)·σ) = −4 det(A_x⁺ − A_y⁺)`.
pub fn det_distance_residual(x: &BallPoint, y: &BallPoint) -> f64 {
    let d = [x.x[0] - y.x[0], x.x[1] - y.x[1], x.x[2] - y.x[2]];
    let diff = &povm_from_point(x).plus - &povm_from_point(y).plus;
    let det = det2(&diff);
    (dot3(&d, &d) + 4.0 * det.re).abs().max(det.im.abs())
}

/// The outcome space `{−½, +½}`.
pub fn spin_space() -> Arc<SampleSpace> {
    Arc::new(
        SampleSpace::new(alloc::vec![
            crate::measure::Atom::at("-1/2", alloc::vec![-0.5]),
            crate::measure::Atom::at("+1/2", alloc::vec![0.5]),
        ])
        .expect("static space is valid"),
    )
}

/// Index of the `+½` atom in [`spin_space`].
pub const PLUS: usize = 1;
/// Index of the `−½` atom in [`spin_space`].
pub const MINUS: usize = 0;

pub type PathFn = Arc<dyn Fn(f64) -> Vec3 + Send + Sync>;

/// A continuous path `ħ ↦ x(ħ)` in the ball.
#[derive(Clone)]
pub struct SpinPath {
    label: String,
    path: PathFn,
}

impl fmt::Debug for SpinPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpinPath").field("label", &self.label).finish()
    }
}

impl SpinPath {
    pub fn new(label: impl Into<String>, path: PathFn) -> Self {
        SpinPath {
            label: label.into(),
            path,
        }
    }

    /// Constant path at a unit vector (a sharp PVM at every ħ).
    pub fn constant(n: Vec3) -> Result<Self> {
        check_unit(&n, "direction")?;
        Ok(SpinPath::new("constant", Arc::new(move |_| n)))
    }

    /// `ħ ↦ λ(ħ)·n` for a scalar sharpness profile.
    pub fn radial(
        label: impl Into<String>,
        n: Vec3,
        lambda: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_unit(&n, "direction")?;
        Ok(SpinPath::new(label, Arc::new(move |h| scale3(lambda(h), &n))))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn at(&self, hbar: f64) -> Result<BallPoint> {
        crate::asymptotic::check_hbar(hbar)?;
        BallPoint::new((self.path)(hbar))
    }

    /// `1 − ‖x(ħ)‖` along the tail; should decrease toward 0.
    pub fn sharpness_gaps(&self, grid: &HbarGrid) -> Result<Vec<f64>> {
        grid.tail().iter().map(|&h| Ok(1.0 - self.at(h)?.lambda())).collect()
    }
}

/// `ħ ↦ (1 − ħ)·n`.
pub fn roy_kar_path(n: Vec3) -> Result<SpinPath> {
    SpinPath::radial("roy-kar", n, |h| 1.0 - h)
}

/// Two-atom family `A_ħ^± = ½(I ± x(ħ)·σ)`; the path is checked on the grid.
pub fn spin_asm(path: &SpinPath, grid: &HbarGrid, tol: &Tolerance) -> Result<AsmFamily> {
    for &h in grid.values() {
        path.at(h)?;
    }
    let space = spin_space();
    let (p, s, t) = (path.clone(), Arc::clone(&space), *tol);
    let generator: Generator = Arc::new(move |h| povm_from_point(&p.at(h)?).to_povm(&s, &t));
    let carrier = alloc::vec![EventSet::singleton(&space, MINUS)?, EventSet::singleton(&space, PLUS)?];
    AsmFamily::new(format!("spin[{}]", path.label), space, generator, carrier, true)
}

/// CHSH measurement directions `(a, a′, b, b′)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettings {
    pub a: Vec3,
    pub a_prime: Vec3,
    pub b: Vec3,
    pub b_prime: Vec3,
}

impl ChshSettings {
    /// Directions in the x–z plane at the given angles from the z axis.
    pub fn coplanar(angles: [f64; 4]) -> Self {
        let dir = |t: f64| [t.sin(), 0.0, t.cos()];
        ChshSettings {
            a: dir(angles[0]),
            a_prime: dir(angles[1]),
            b: dir(angles[2]),
            b_prime: dir(angles[3]),
        }
    }

    fn check(&self) -> Result<()> {
        check_unit(&self.a, "setting a")?;
        check_unit(&self.a_prime, "setting a'")?;
        check_unit(&self.b, "setting b")?;
        check_unit(&self.b_prime, "setting b'")
    }
}

/// `¼(I⊗I − Σ σᵢ⊗σᵢ)`.
pub fn singlet() -> Operator {
    let mut rho = Operator::identity(4);
    for k in 1..=3 {
        let s = pauli(k);
        rho.axpy(Complex64::new(-1.0, 0.0), &s.kron(&s).expect("4x4"));
    }
    rho.scale_real(0.25)
}

/// `tr(ρ · O_A ⊗ O_B)` on the singlet.
fn correlation(rho: &Operator, oa: &Operator, ob: &Operator) -> f64 {
    (rho * &oa.kron(ob).expect("4x4")).trace().re
}

fn observable_along(path: &SpinPath, dir: &Vec3, hbar: f64) -> Result<Operator> {
    let l = path.at(hbar)?.lambda();
    Ok(povm_from_point(&BallPoint::new(scale3(l, dir))?).observable())
}

/// `S = E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)` on the singlet, each side
/// measured along its setting with the sharpness of its path at ħ.
pub fn chsh_value(path_a: &SpinPath, path_b: &SpinPath, settings: &ChshSettings, hbar: f64) -> Result<f64> {
    settings.check()?;
    let rho = singlet();
    let oa = observable_along(path_a, &settings.a, hbar)?;
    let oa2 = observable_along(path_a, &settings.a_prime, hbar)?;
    let ob = observable_along(path_b, &settings.b, hbar)?;
    let ob2 = observable_along(path_b, &settings.b_prime, hbar)?;
    Ok(
        correlation(&rho, &oa, &ob) + correlation(&rho, &oa, &ob2) + correlation(&rho, &oa2, &ob)
            - correlation(&rho, &oa2, &ob2),
    )
}

/// Correlation tensor `Cᵢⱼ = tr(ρ · λ_Aσᵢ ⊗ λ_Bσⱼ)`, so `E(a,b) = aᵀCb`.
fn correlation_tensor(path_a: &SpinPath, path_b: &SpinPath, hbar: f64) -> Result<[[f64; 3]; 3]> {
    let rho = singlet();
    let la = path_a.at(hbar)?.lambda();
    let lb = path_b.at(hbar)?.lambda();
    let mut c = [[0.0; 3]; 3];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, cij) in row.iter_mut().enumerate() {
            *cij = correlation(&rho, &pauli(i + 1).scale_real(la), &pauli(j + 1).scale_real(lb));
        }
    }
    Ok(c)
}

fn coplanar_chsh(c: &[[f64; 3]; 3], t: &[f64; 4]) -> f64 {
    // x–z plane: direction (sin t, 0, cos t) touches tensor indices 0 and 2
    let e = |p: f64, q: f64| {
        let (sp, cp, sq, cq) = (p.sin(), p.cos(), q.sin(), q.cos());
        sp * c[0][0] * sq + sp * c[0][2] * cq + cp * c[2][0] * sq + cp * c[2][2] * cq
    };
    e(t[0], t[2]) + e(t[0], t[3]) + e(t[1], t[2]) - e(t[1], t[3])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshOptimum {
    pub value: f64,
    pub settings: ChshSettings,
    /// Coplanar angles from the z axis for `(a, a′, b, b′)`.
    pub angles: [f64; 4],
}

/// Maximum of `S` over coplanar settings: coarse angle grid, then a
/// pattern search down to 1e-10 rad.
pub fn chsh_max(path_a: &SpinPath, path_b: &SpinPath, hbar: f64) -> Result<ChshOptimum> {
    const STEPS: usize = 24;
    let c = correlation_tensor(path_a, path_b, hbar)?;
    let step = 2.0 * PI / STEPS as f64;
    let mut best = ([0.0; 4], f64::NEG_INFINITY);
    for i in 0..STEPS {
        for j in 0..STEPS {
            for k in 0..STEPS {
                for l in 0..STEPS {
                    let t = [i as f64 * step, j as f64 * step, k as f64 * step, l as f64 * step];
                    let s = coplanar_chsh(&c, &t);
                    if s > best.1 {
                        best = (t, s);
                    }
                }
            }
        }
    }
    let (mut t, mut s) = best;
    let mut h = step / 2.0;
    while h > 1e-10 {
        let mut improved = false;
        for k in 0..4 {
            for sign in [1.0, -1.0] {
                let mut trial = t;
                trial[k] += sign * h;
                let v = coplanar_chsh(&c, &trial);
                if v > s {
                    t = trial;
                    s = v;
                    improved = true;
                }
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    let settings = ChshSettings::coplanar(t);
    // Report the directly computed tensor value for the final settings.
    let value = chsh_value(path_a, path_b, &settings, hbar)?;
    Ok(ChshOptimum {
        value,
        settings,
        angles: t,
    })
}

/// `1 − 2^{−1/4}`: below this ħ symmetric Roy–Kar paths violate CHSH, since
/// `S_max = 2√2(1−ħ)²`.
pub fn symmetric_violation_threshold() -> f64 {
    1.0 - 2f64.powf(-0.25)
}

/// `1 − √2(√2 − 1)^{1/2}`, the constant quoted for the eavesdropping
/// scenario; it is not the symmetric CHSH threshold.
pub fn eavesdropping_threshold_constant() -> f64 {
    let r2 = 2f64.sqrt();
    1.0 - r2 * (r2 - 1.0).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdScan {
    /// Every grid ħ violates `S ≤ 2`.
    AlwaysViolated,
    /// No grid ħ violates.
    NeverViolated,
    /// Largest violating grid value, and the bisection-refined crossing
    /// between it and the next larger grid value.
    Crossing { grid_hbar: f64, refined: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellScan {
    pub outcome: ThresholdScan,
    /// `(ħ, max S)` on the grid.
    pub samples: Vec<(f64, f64)>,
    pub eavesdropping_constant: f64,
}

/// Scan the grid for the largest ħ with `max S > 2`, refine the crossing by
/// bisection to `1e-8`.
pub fn bell_threshold_scan(path_a: &SpinPath, path_b: &SpinPath, grid: &HbarGrid) -> Result<BellScan> {
    let samples = grid
        .values()
        .iter()
        .map(|&h| Ok((h, chsh_max(path_a, path_b, h)?.value)))
        .collect::<Result<Vec<_>>>()?;
    let violating = |h: f64| -> Result<bool> { Ok(chsh_max(path_a, path_b, h)?.value > 2.0) };
    let outcome = match samples.iter().position(|&(_, s)| s > 2.0) {
        None => ThresholdScan::NeverViolated,
        Some(0) => ThresholdScan::AlwaysViolated,
        Some(i) => {
            let (mut lo, mut hi) = (samples[i].0, samples[i - 1].0);
            while hi - lo > 1e-8 {
                let mid = 0.5 * (lo + hi);
                if violating(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            ThresholdScan::Crossing {
                grid_hbar: samples[i].0,
                refined: 0.5 * (lo + hi),
            }
        }
    };
    Ok(BellScan {
        outcome,
        samples,
        eavesdropping_constant: eavesdropping_threshold_constant(),
    })
}
