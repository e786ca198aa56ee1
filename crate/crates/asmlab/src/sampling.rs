//! Seeded random instances for sweeps. Everything is driven by a
//! [`ChaCha8Rng`] so the same seed gives the same cases on every platform.

use std::sync::Arc;

use asmlab_core::measure::{AtomFn, EventSet, Povm, Pvm, SampleSpace};
use asmlab_core::operator::{fun_calc, hermitian_eig, Operator, Tolerance};
use asmlab_core::smearing::{ConfidenceKernel, KernelTable};
use asmlab_core::spin::BallPoint;
use asmlab_core::{Complex64, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform point of the closed unit ball; one in ten is put on the sphere.
pub fn ball_point(rng: &mut impl Rng) -> BallPoint {
    let v = [normal(rng), normal(rng), normal(rng)];
    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let r = if rng.random_bool(0.1) {
        1.0
    } else {
        rng.random::<f64>().cbrt()
    };
    let x = v.map(|c| r * c / len);
    BallPoint::new(x).unwrap_or_else(|_| BallPoint::new(x.map(|c| c * (1.0 - 1e-15))).expect("inside the ball"))
}

/// Complex Ginibre matrix.
pub fn ginibre(rng: &mut impl Rng, dim: usize) -> Operator {
    let data = (0..dim * dim)
        .map(|_| Complex64::new(normal(rng), normal(rng)))
        .collect();
    Operator::new(dim, data).expect("square")
}

pub fn hermitian(rng: &mut impl Rng, dim: usize) -> Operator {
    ginibre(rng, dim).hermitian_part()
}

/// Random unitary from the eigenvectors of a random Hermitian matrix.
pub fn unitary(rng: &mut impl Rng, dim: usize, tol: &Tolerance) -> Result<Operator> {
    let eig = hermitian_eig(&hermitian(rng, dim), tol)?;
    let mut u = Operator::zeros(dim);
    for k in 0..dim {
        for (i, c) in eig.vector(k).into_iter().enumerate() {
            u[(i, k)] = c;
        }
    }
    Ok(u)
}

pub fn labeled_space(atoms: usize) -> Arc<SampleSpace> {
    let labels: Vec<String> = (0..atoms).map(|i| format!("w{i}")).collect();
    Arc::new(SampleSpace::labeled(&labels).expect("distinct labels"))
}

/// Normalized POVM `E_i = S^{-1/2} G_i*G_i S^{-1/2}` with `S = Σ G_i*G_i`.
pub fn povm(rng: &mut impl Rng, space: &Arc<SampleSpace>, dim: usize, tol: &Tolerance) -> Result<Povm> {
    let grams: Vec<Operator> = (0..space.len())
        .map(|_| {
            let g = ginibre(rng, dim);
            (&g.adjoint() * &g).hermitian_part()
        })
        .collect();
    let mut s = Operator::zeros(dim);
    for g in &grams {
        s += g;
    }
    let inv_sqrt = fun_calc(&s, |x| 1.0 / x.sqrt(), tol)?;
    let effects = grams
        .iter()
        .map(|g| (&(&inv_sqrt * g) * &inv_sqrt).hermitian_part())
        .collect();
    Povm::new(Arc::clone(space), effects, tol)
}

/// PVM assigning each column of a random unitary to a random atom.
pub fn pvm(rng: &mut impl Rng, space: &Arc<SampleSpace>, dim: usize, tol: &Tolerance) -> Result<Pvm> {
    let u = unitary(rng, dim, tol)?;
    let mut effects = vec![Operator::zeros(dim); space.len()];
    for k in 0..dim {
        let col: Vec<Complex64> = (0..dim).map(|i| u[(i, k)]).collect();
        let atom = rng.random_range(0..space.len());
        effects[atom] += &Operator::outer(&col, &col)?;
    }
    Pvm::new(Povm::new(
        Arc::clone(space),
        effects.into_iter().map(|e| e.hermitian_part()).collect(),
        tol,
    )?)
}

/// Random subset of the atoms (possibly empty).
pub fn event(rng: &mut impl Rng, space: &Arc<SampleSpace>) -> EventSet {
    let members: Vec<usize> = (0..space.len()).filter(|_| rng.random_bool(0.5)).collect();
    EventSet::new(space, members).expect("indices in range")
}

/// Kernel `p_ħ(ω, ·) = (1−ħ)δ_{σ(ω)} + ħ q_ω` for a random map `σ` and
/// random distributions `q_ω`.
pub fn kernel(rng: &mut impl Rng, source: &Arc<SampleSpace>, target: &Arc<SampleSpace>) -> ConfidenceKernel {
    let m = target.len();
    let map: Vec<usize> = (0..source.len()).map(|_| rng.random_range(0..m)).collect();
    let noise: Vec<Vec<f64>> = (0..source.len())
        .map(|_| {
            let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| x / total).collect()
        })
        .collect();
    ConfidenceKernel::new(
        "random",
        Arc::clone(source),
        Arc::clone(target),
        Arc::new(move |h| {
            let rows = map
                .iter()
                .zip(&noise)
                .map(|(&d, q)| {
                    let mut row: Vec<f64> = q.iter().map(|&x| h * x).collect();
                    row[d] += 1.0 - h;
                    // keep the row sum at 1 after rounding
                    let err: f64 = row.iter().sum::<f64>() - 1.0;
                    row[d] -= err;
                    row
                })
                .collect();
            KernelTable::new(rows)
        }),
    )
}

/// Random atom function with values in the closed unit disk.
pub fn atom_fn(rng: &mut impl Rng, atoms: usize) -> AtomFn {
    AtomFn::new(
        (0..atoms)
            .map(|_| Complex64::from_polar(rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>()))
            .collect(),
    )
}

/// Positive contraction `a = U diag(λ) U*` with every `λ − λ² ≤ ε` for a
/// random `ε ∈ (0, 3/16]`; returns `(a, ε)`.
pub fn quasiprojector(rng: &mut impl Rng, dim: usize, tol: &Tolerance) -> Result<(Operator, f64)> {
    let eps = (3.0 / 16.0) * (1.0 - rng.random::<f64>());
    // x − x² ≤ ε on [0, ½) means x ≤ (1−√(1−4ε))/2
    let hi = (1.0 - (1.0 - 4.0 * eps).sqrt()) / 2.0;
    let values: Vec<f64> = (0..dim)
        .map(|_| {
            let x = hi * rng.random::<f64>();
            if rng.random_bool(0.5) {
                1.0 - x
            } else {
                x
            }
        })
        .collect();
    let u = unitary(rng, dim, tol)?;
    let a = (&(&u * &Operator::diag_real(&values)?) * &u.adjoint()).hermitian_part();
    Ok((a, eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_repeat() {
        let a: Vec<[f64; 3]> = {
            let mut r = rng(7);
            (0..5).map(|_| ball_point(&mut r).coords()).collect()
        };
        let b: Vec<[f64; 3]> = {
            let mut r = rng(7);
            (0..5).map(|_| ball_point(&mut r).coords()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn samples_are_valid() {
        let tol = Tolerance::default();
        let mut r = rng(1);
        let space = labeled_space(4);
        for dim in 1..6 {
            let p = povm(&mut r, &space, dim, &tol).unwrap();
            assert!(p.is_normalized());
            let e = pvm(&mut r, &space, dim, &tol).unwrap();
            assert!(e.is_projective() && e.is_normalized());
            let u = unitary(&mut r, dim, &tol).unwrap();
            assert!((&(&u * &u.adjoint()) - &Operator::identity(dim)).max_abs_entry() < 1e-12);
            let (a, eps) = quasiprojector(&mut r, dim, &tol).unwrap();
            assert!((&a - &(&a * &a)).norm() <= eps + 1e-12);
        }
        let k = kernel(&mut r, &space, &labeled_space(3));
        for h in [1.0, 0.5, 1e-3] {
            k.table(h).unwrap();
        }
    }
}
