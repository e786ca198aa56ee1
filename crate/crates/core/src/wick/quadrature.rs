//! Generalized Gauss–Laguerre rules for `∫₀^∞ t^α e^{−t} g(t) dt`.
//!
//! Nodes come from the Golub–Welsch tridiagonal matrix (implicit QL, values
//! only), polished by Newton on the Laguerre recurrence. Weights are kept as
//! logarithms: the ones far out in the tail are below `1e-200`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::special::ln_gamma;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreRule {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub ln_weights: Vec<f64>,
}

impl LaguerreRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ wᵢ g(tᵢ)`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&t, &lw)| lw.exp() * g(t))
            .sum()
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix (diagonal `d`,
/// off-diagonal `e[1..]`), ascending.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::Precision { difference: e[l].abs() });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// `L_n^(α)(z)`, `L_{n−1}^(α)(z)` and a common log scale factor.
fn laguerre_pair(n: usize, alpha: f64, z: f64) -> (f64, f64, f64) {
    let (mut p1, mut p2) = (1.0f64, 0.0f64);
    let mut ln_scale = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf + 1.0 + alpha - z) * p2 - (jf + alpha) * p3) / (jf + 1.0);
        if p1.abs() > 1e150 {
            p1 *= 1e-150;
            p2 *= 1e-150;
            ln_scale += 150.0 * core::f64::consts::LN_10;
        }
    }
    (p1, p2, ln_scale)
}

/// Gauss–Laguerre rule of the given order for weight `t^α e^{−t}`, α > −1.
pub fn gauss_laguerre(order: usize, alpha: f64) -> Result<LaguerreRule> {
    if order == 0 || alpha.is_nan() || alpha <= -1.0 {
        return Err(invalid("Gauss–Laguerre needs order ≥ 1 and α > −1"));
    }
    let n = order;
    let nf = n as f64;
    let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 1.0 + alpha).collect();
    let mut off = vec![0.0; n];
    for (i, o) in off.iter_mut().enumerate().skip(1) {
        let fi = i as f64;
        *o = (fi * (fi + alpha)).sqrt();
    }
    let guesses = tridiagonal_eigenvalues(diag, off)?;
    let ln_norm = ln_gamma(alpha + nf) - ln_gamma(nf);
    let mut nodes = Vec::with_capacity(n);
    let mut ln_weights = Vec::with_capacity(n);
    for mut z in guesses {
        let mut pp = 0.0;
        let mut p2 = 0.0;
        let mut ln_scale = 0.0;
        for _ in 0..8 {
            let (q1, q2, s) = laguerre_pair(n, alpha, z);
            pp = (nf * q1 - (nf + alpha) * q2) / z;
            p2 = q2;
            ln_scale = s;
            let step = q1 / pp;
            z -= step;
            if step.abs() <= 4.0 * f64::EPSILON * z.abs() {
                break;
            }
        }
        if !z.is_finite() || z <= 0.0 {
            return Err(Error::Precision { difference: z });
        }
        nodes.push(z);
        ln_weights.push(ln_norm - pp.abs().ln() - nf.ln() - p2.abs().ln() - 2.0 * ln_scale);
    }
    Ok(LaguerreRule {
        alpha,
        nodes,
        ln_weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rule_matches_tabulated() {
        // order 2, α = 0: nodes 2 ∓ √2, weights (2 ± √2)/4
        let r = gauss_laguerre(2, 0.0).unwrap();
        let s = 2f64.sqrt();
        assert!((r.nodes[0] - (2.0 - s)).abs() < 1e-14);
        assert!((r.nodes[1] - (2.0 + s)).abs() < 1e-14);
        assert!((r.ln_weights[0].exp() - (2.0 + s) / 4.0).abs() < 1e-14);
        assert!((r.ln_weights[1].exp() - (2.0 - s) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn moments_are_exact() {
        for &alpha in &[0.0, 0.5] {
            for &order in &[8usize, 40, 136, 200] {
                let r = gauss_laguerre(order, alpha).unwrap();
                assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
                // ∫ t^k t^α e^{−t} = Γ(k+α+1), relative to the exact value
                for k in [0usize, 1, 5, 7, order.min(60)] {
                    let lg = ln_gamma(k as f64 + alpha + 1.0);
                    let got: f64 = r
                        .nodes
                        .iter()
                        .zip(&r.ln_weights)
                        .map(|(&t, &lw)| (lw + k as f64 * t.ln() - lg).exp())
                        .sum();
                    assert!((got - 1.0).abs() < 1e-11, "order {order} α {alpha} k {k}: {got}");
                }
            }
        }
    }

    #[test]
    fn smooth_integrand() {
        // ∫ e^{−t} e^{−t} dt = ½
        let r = gauss_laguerre(60, 0.0).unwrap();
        let v = r.integrate(|t| (-t).exp());
        assert!((v - 0.5).abs() < 1e-12, "{v}");
    }
}
