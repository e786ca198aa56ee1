//! One-sided (Hestenes) Jacobi singular values.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

const MAX_SWEEPS: usize = 80;

/// Singular values, descending, of the matrix whose columns are given.
///
/// Works for any `rows × cols` shape; when `cols > rows` the trailing values
/// are (numerically) zero.
pub fn singular_values_of_columns(mut cols: Vec<Vec<Complex64>>) -> Vec<f64> {
    let n = cols.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (left, right) = cols.split_at_mut(j);
                let x = &mut left[i];
                let y = &mut right[0];
                let alpha: f64 = x.iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = y.iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let wc = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (a, b) in x.iter_mut().zip(y.iter_mut()) {
                    let yb = *b * wc;
                    let xa = *a;
                    *a = xa * c - yb * s;
                    *b = xa * s + yb * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
