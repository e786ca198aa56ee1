use std::sync::Arc;

use asmlab_core::asymptotic::AsmFamily;
use asmlab_core::measure::{naimark_dilate, pvm_from_selfadjoint, AtomFn, EventSet, Povm, Pvm, SampleSpace};
use asmlab_core::operator::{fun_calc, hermitian_eig, is_positive, Operator, Tolerance};
use asmlab_core::quasiprojector::straighten;
use asmlab_core::smearing::{smear_defect_bound_residual, ConfidenceKernel, KernelTable};
use asmlab_core::spin::{
    det_distance_residual, point_from_povm, povm_from_point, projectivity_identity_residual, BallPoint,
};
use asmlab_core::wick::{toeplitz, FockTrunc, Symbol};
use asmlab_core::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn square(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    let data = (0..dim * dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Operator::new(dim, data).unwrap()
}

fn hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    square(rng, dim).hermitian_part()
}

fn space(atoms: usize) -> Arc<SampleSpace> {
    let labels: Vec<String> = (0..atoms).map(|i| format!("a{i}")).collect();
    Arc::new(SampleSpace::labeled(&labels).unwrap())
}

/// `A_i = S^{-1/2} G_i G_i* S^{-1/2}` with `S = Σ G_i G_i*`.
fn povm(rng: &mut ChaCha8Rng, atoms: usize, dim: usize) -> Povm {
    let sp = space(atoms);
    let pos: Vec<Operator> = (0..atoms)
        .map(|_| {
            let g = square(rng, dim);
            (&g * &g.adjoint()).hermitian_part()
        })
        .collect();
    let mut s = Operator::zeros(dim);
    for p in &pos {
        s += p;
    }
    let root = fun_calc(&s, |x| 1.0 / x.sqrt(), &tol()).unwrap();
    let effects = pos.iter().map(|p| (&(&root * p) * &root).hermitian_part()).collect();
    Povm::new(sp, effects, &tol()).unwrap()
}

fn pvm(rng: &mut ChaCha8Rng, atoms: usize, dim: usize) -> Pvm {
    // eigenvalues are atom indices; some atoms may be empty
    let h = hermitian(rng, dim);
    let eig = hermitian_eig(&h, &tol()).unwrap();
    let labels: Vec<f64> = (0..dim).map(|_| rng.random_range(0..atoms) as f64).collect();
    let mut effects = vec![Operator::zeros(dim); atoms];
    for (k, &a) in labels.iter().enumerate() {
        let v = eig.vector(k);
        effects[a as usize] += &Operator::outer(&v, &v).unwrap();
    }
    Pvm::new(Povm::new(space(atoms), effects, &tol()).unwrap()).unwrap()
}

fn event(rng: &mut ChaCha8Rng, sp: &Arc<SampleSpace>) -> EventSet {
    EventSet::new(sp, (0..sp.len()).filter(|_| rng.random_bool(0.5))).unwrap()
}

fn gap(a: &Operator, b: &Operator) -> f64 {
    (a - b).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_rebuilds(seed in any::<u64>(), dim in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = hermitian(&mut rng, dim);
        let eig = hermitian_eig(&h, &tol()).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(gap(&eig.rebuild(|x| x), &h) <= 1e-11 * h.norm().max(1.0));
    }

    #[test]
    fn functional_calculus_composes(seed in any::<u64>(), dim in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = hermitian(&mut rng, dim);
        let sq = fun_calc(&h, |x| x * x, &tol()).unwrap();
        prop_assert!(gap(&sq, &(&h * &h)) <= 1e-11 * h.norm().powi(2).max(1.0));
        let e = fun_calc(&h, f64::exp, &tol()).unwrap();
        let back = fun_calc(&e, f64::ln, &tol()).unwrap();
        prop_assert!(gap(&back, &h) <= 1e-9 * h.norm().max(1.0));
    }

    #[test]
    fn operator_norm_is_submultiplicative(seed in any::<u64>(), dim in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (square(&mut rng, dim), square(&mut rng, dim));
        prop_assert!((&a * &b).norm() <= a.norm() * b.norm() * (1.0 + 1e-12) + 1e-12);
        prop_assert!(a.norm() <= a.frobenius_norm() * (1.0 + 1e-12));
        prop_assert!((a.adjoint().norm() - a.norm()).abs() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn integration_is_positive_and_bounded(seed in any::<u64>(), atoms in 1usize..6, dim in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = povm(&mut rng, atoms, dim);
        let f: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.0..3.0)).collect();
        let q = p.integrate(&AtomFn::real(&f)).unwrap();
        prop_assert!(is_positive(&q, &tol()));
        let sup = f.iter().cloned().fold(0.0, f64::max);
        // sharp atomic bound for a normalized POVM and real f ≥ 0
        prop_assert!(q.norm() <= sup * (1.0 + 1e-10) + 1e-12);
        let g: Vec<Complex64> = (0..atoms).map(|_| Complex64::from_polar(rng.random(), rng.random_range(0.0..6.3))).collect();
        prop_assert_eq!(p.riesz_bound_residual(&AtomFn::new(g)).unwrap(), 0.0);
        // additivity over a split into two events
        let e = event(&mut rng, p.space());
        let whole = EventSet::full(p.space());
        let split = &p.apply(&e).unwrap() + &p.apply(&e.complement()).unwrap();
        prop_assert!(gap(&split, &p.apply(&whole).unwrap()) <= 1e-12);
    }

    #[test]
    fn naimark_compresses_back(seed in any::<u64>(), atoms in 1usize..5, dim in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = povm(&mut rng, atoms, dim);
        let d = naimark_dilate(&p, &tol()).unwrap();
        prop_assert!(d.compression_residual(&p).unwrap() <= 1e-8);
    }

    #[test]
    fn smearing_defect_obeys_kernel_bound(seed in any::<u64>(), atoms in 2usize..5, dim in 1usize..7, h in 0.001f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = pvm(&mut rng, atoms, dim);
        let target = space(rng.random_range(2..5));
        let rows: Vec<Vec<f64>> = (0..atoms)
            .map(|_| {
                let w: Vec<f64> = (0..target.len()).map(|_| rng.random::<f64>() + 1e-3).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let k = ConfidenceKernel::fixed("random", e.space().clone(), target.clone(), KernelTable::new(rows).unwrap()).unwrap();
        let (d1, d2) = (event(&mut rng, &target), event(&mut rng, &target));
        prop_assert!(smear_defect_bound_residual(&e, &k, &d1, &d2, h, &tol()).unwrap() <= 1e-9);
    }

    #[test]
    fn straightening_within_bound(seed in any::<u64>(), dim in 1usize..9, eps in 0.0f64..0.1875) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hi = (1.0 - (1.0 - 4.0 * eps).sqrt()) / 2.0;
        let values: Vec<f64> = (0..dim)
            .map(|_| {
                let x = hi * rng.random::<f64>();
                if rng.random_bool(0.5) { 1.0 - x } else { x }
            })
            .collect();
        let eig = hermitian_eig(&hermitian(&mut rng, dim), &tol()).unwrap();
        let mut a = Operator::zeros(dim);
        for (k, &l) in values.iter().enumerate() {
            let v = eig.vector(k);
            a += &Operator::outer(&v, &v).unwrap().scale_real(l);
        }
        let a = a.hermitian_part();
        let s = straighten(&a, &tol()).unwrap();
        prop_assert!(s.error <= s.bound() + 1e-9);
        prop_assert!(gap(&(&s.projection * &s.projection), &s.projection) <= 1e-9);
    }

    #[test]
    fn spin_identities(x in prop::array::uniform3(-1.0f64..1.0), y in prop::array::uniform3(-1.0f64..1.0)) {
        let shrink = |v: [f64; 3]| {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1.0 { [v[0] / n, v[1] / n, v[2] / n] } else { v }
        };
        let (px, py) = (BallPoint::new(shrink(x)).unwrap(), BallPoint::new(shrink(y)).unwrap());
        prop_assert!(projectivity_identity_residual(&px) <= 1e-12);
        prop_assert!(det_distance_residual(&px, &py) <= 1e-12);
        let back = point_from_povm(&povm_from_point(&px)).unwrap().coords();
        for (b, x) in back.iter().zip(px.coords()) {
            prop_assert!((b - x).abs() <= 1e-12);
        }
    }

    #[test]
    fn equivalence_defect_is_a_pseudometric(seed in any::<u64>(), atoms in 1usize..5, dim in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fams: Vec<AsmFamily> = (0..3)
            .map(|i| AsmFamily::constant(format!("f{i}"), povm(&mut rng, atoms, dim)))
            .collect();
        // all three must share one sample space
        let sp = fams[0].space().clone();
        let fams: Vec<AsmFamily> = fams
            .into_iter()
            .map(|f| {
                let p = f.at(0.5).unwrap();
                AsmFamily::constant(f.label().to_string(), Povm::new(sp.clone(), p.effects().to_vec(), &tol()).unwrap())
            })
            .collect();
        let e = event(&mut rng, &sp);
        let d = |i: usize, j: usize| fams[i].equiv_defect(&fams[j], &e, 0.5).unwrap();
        prop_assert_eq!(d(0, 0), 0.0);
        prop_assert!((d(0, 1) - d(1, 0)).abs() <= 1e-14);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
    }

    #[test]
    fn toeplitz_of_nonnegative_symbol(seed in any::<u64>(), rings in 1usize..4, sectors in 1usize..5, h in 0.2f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut radii = vec![0.0];
        for _ in 0..rings {
            let last = *radii.last().unwrap();
            radii.push(last + rng.random_range(0.2..1.0));
        }
        let values: Vec<f64> = (0..rings * sectors).map(|_| rng.random_range(0.0..2.0)).collect();
        let sup = values.iter().cloned().fold(0.0, f64::max);
        let f = Symbol::polar_grid(&radii, sectors, &values).unwrap().rescale(h);
        let t = toeplitz(&f, &FockTrunc::new(12).unwrap()).unwrap();
        prop_assert!(t.is_hermitian(&tol()));
        prop_assert!(is_positive(&t, &tol()));
        prop_assert!(t.norm() <= sup + 1e-9);
    }
}

#[test]
fn constant_pvm_family_is_exact() {
    let e = pvm_from_selfadjoint(&Operator::diag_real(&[2.0, -1.0, 2.0]).unwrap(), &tol()).unwrap();
    let fam = AsmFamily::constant("c", e.into_povm());
    let all = EventSet::full(fam.space());
    for &h in &[1.0, 0.25, 1e-3] {
        for i in 0..fam.space().len() {
            let s = EventSet::singleton(fam.space(), i).unwrap();
            assert_eq!(fam.proj_defect(&s, &s, h).unwrap(), 0.0);
            assert!(fam.proj_defect(&s, &all, h).unwrap() <= 1e-15);
        }
    }
}
