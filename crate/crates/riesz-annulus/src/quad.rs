//! Gauss–Jacobi quadrature via the Golub–Welsch algorithm.
//!
//! Rules are generated on the reference interval [-1, 1] for the weight
//! (1-t)^alpha (1+t)^beta and cached; affine maps to arbitrary intervals
//! carry a length^(alpha+beta+1) scale on the weights.

use crate::error::{Error, Result};
use crate::special::beta as beta_fn;
use nalgebra::DMatrix;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// A quadrature rule on the reference interval [-1, 1].
///
/// Integrates f(t) (1-t)^alpha (1+t)^beta exactly for polynomials f of
/// degree up to 2n-1.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    pub alpha: f64,
    pub beta: f64,
    /// Nodes in strictly increasing order, all inside (-1, 1).
    pub nodes: Vec<f64>,
    /// Positive weights for the weight function above.
    pub weights: Vec<f64>,
}

impl JacobiRule {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Total integral of the weight function: 2^(alpha+beta+1) B(alpha+1, beta+1).
    pub fn weight_integral(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn compute_rule(n: usize, alpha: f64, beta: f64) -> Result<JacobiRule> {
    if n < 1 {
        return Err(Error::Domain("quadrature needs n >= 1".into()));
    }
    if !(alpha > -1.0) || !(beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::Domain(format!(
            "jacobi exponents must be > -1, got alpha={alpha}, beta={beta}"
        )));
    }
    let ab = alpha + beta;
    // symmetric tridiagonal Jacobi matrix from the three-term recurrence
    let mut m = DMatrix::<f64>::zeros(n, n);
    m[(0, 0)] = (beta - alpha) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        m[(k, k)] = if denom != 0.0 { (beta * beta - alpha * alpha) / denom } else { 0.0 };
        let off2 = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0).powi(2) * (ab + 3.0))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab)
                / ((2.0 * kf + ab).powi(2) * (2.0 * kf + ab + 1.0) * (2.0 * kf + ab - 1.0))
        };
        let off = off2.sqrt();
        m[(k - 1, k)] = off;
        m[(k, k - 1)] = off;
    }
    let eig = m.symmetric_eigen();
    let mu0 = 2f64.powf(ab + 1.0) * beta_fn(alpha + 1.0, beta + 1.0)?;
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mu0 * v * v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(JacobiRule {
        alpha,
        beta,
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

fn cache() -> &'static Mutex<HashMap<(usize, u64, u64), Arc<JacobiRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64, u64), Arc<JacobiRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached Gauss–Jacobi rule on [-1, 1].
pub fn jacobi_rule(n: usize, alpha: f64, beta: f64) -> Result<Arc<JacobiRule>> {
    let key = (n, alpha.to_bits(), beta.to_bits());
    if let Some(r) = cache().lock().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(compute_rule(n, alpha, beta)?);
    cache().lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// Cached Gauss–Legendre rule on [-1, 1].
pub fn legendre_rule(n: usize) -> Result<Arc<JacobiRule>> {
    jacobi_rule(n, 0.0, 0.0)
}

/// Nodes and weights on the physical interval [a, b] for the weight
/// ((b-x)^alpha (x-a)^beta); the weights absorb the Jacobian and the
/// edge-factor scaling h^(alpha+beta).
pub fn mapped(rule: &JacobiRule, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let h = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let scale = h.powf(rule.alpha + rule.beta + 1.0);
    let nodes = rule.nodes.iter().map(|&t| mid + h * t).collect();
    let weights = rule.weights.iter().map(|&w| w * scale).collect();
    (nodes, weights)
}

/// Integrate f over [a, b] against ((b-x)^alpha (x-a)^beta) with an n-point rule.
pub fn integrate_jacobi<F: FnMut(f64) -> f64>(
    n: usize,
    alpha: f64,
    beta: f64,
    a: f64,
    b: f64,
    mut f: F,
) -> Result<f64> {
    let rule = jacobi_rule(n, alpha, beta)?;
    let (x, w) = mapped(&rule, a, b);
    Ok(x.iter().zip(&w).map(|(&xi, &wi)| wi * f(xi)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn legendre_n2_classical_values() {
        let r = legendre_rule(2).unwrap();
        let inv_sqrt3 = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + inv_sqrt3).abs() < 1e-14);
        assert!((r.nodes[1] - inv_sqrt3).abs() < 1e-14);
        assert!((r.weights[0] - 1.0).abs() < 1e-14);
        assert!((r.weights[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn weight_sum_matches_beta_integral() {
        // int_{-1}^{1} (1-x^2)^{-0.15} dx = 2^{0.7} B(0.85, 0.85)
        let r = jacobi_rule(16, -0.15, -0.15).unwrap();
        let expect = 2f64.powf(0.7) * crate::special::beta(0.85, 0.85).unwrap();
        assert!((r.weight_integral() - expect).abs() < 1e-12);
    }

    #[test]
    fn nodes_inside_weights_positive() {
        let r = jacobi_rule(40, -0.35, 0.6).unwrap();
        for (&t, &w) in r.nodes.iter().zip(&r.weights) {
            assert!(t > -1.0 && t < 1.0);
            assert!(w > 0.0);
        }
        for i in 1..r.n() {
            assert!(r.nodes[i] > r.nodes[i - 1]);
        }
    }

    #[test]
    fn degree_exactness() {
        // int x^k (1-x)^a (1+x)^b via moments against high-n reference
        let (a, b) = (-0.3, -0.3);
        let lo = jacobi_rule(6, a, b).unwrap();
        let hi = jacobi_rule(40, a, b).unwrap();
        for k in 0..=11u32 {
            let i_lo: f64 = lo.nodes.iter().zip(&lo.weights).map(|(&t, &w)| w * t.powi(k as i32)).sum();
            let i_hi: f64 = hi.nodes.iter().zip(&hi.weights).map(|(&t, &w)| w * t.powi(k as i32)).sum();
            assert!((i_lo - i_hi).abs() < 1e-12, "k={k}: {i_lo} vs {i_hi}");
        }
    }

    #[test]
    fn mapped_rule_scales_weights() {
        // int over [0, 2] of (2-x)^{-0.2}(x-0)^{-0.2} dx = 2^{0.6} B(0.8, 0.8)
        let r = jacobi_rule(12, -0.2, -0.2).unwrap();
        let (_, w) = mapped(&r, 0.0, 2.0);
        let total: f64 = w.iter().sum();
        let expect = 2f64.powf(0.6) * crate::special::beta(0.8, 0.8).unwrap();
        assert!((total - expect).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(jacobi_rule(8, -1.0, 0.0).is_err());
        assert!(jacobi_rule(8, 0.0, -1.5).is_err());
        assert!(jacobi_rule(8, f64::NAN, 0.0).is_err());
    }

    /// Adaptive-refinement oracle: power substitutions flatten the endpoint
    /// singularities on each half, then Simpson refinement to convergence.
    fn weight_integral_oracle(alpha: f64, beta: f64) -> f64 {
        fn simpson_refine<F: Fn(f64) -> f64>(f: F) -> f64 {
            // integral over [0, 1]
            let mut n = 64;
            let mut prev = f64::NAN;
            loop {
                let h = 1.0 / n as f64;
                let mut s = f(0.0) + f(1.0);
                for i in 1..n {
                    s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
                }
                s *= h / 3.0;
                if (s - prev).abs() < 1e-12 || n > 1 << 20 {
                    return s;
                }
                prev = s;
                n *= 2;
            }
        }
        // right half [0,1]: x = 1 - u^p, (1-x)^a dx = p u^{p(1+a)-1} (2-u^p)^b-ish
        let pa = (2.0 / (1.0 + alpha)).ceil().max(1.0);
        let right = simpson_refine(|u| {
            let x = 1.0 - u.powf(pa);
            pa * u.powf(pa * (1.0 + alpha) - 1.0) * (1.0 + x).powf(beta)
        });
        let pb = (2.0 / (1.0 + beta)).ceil().max(1.0);
        let left = simpson_refine(|u| {
            let x = u.powf(pb) - 1.0;
            pb * u.powf(pb * (1.0 + beta) - 1.0) * (1.0 - x).powf(alpha)
        });
        left + right
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn weight_sum_matches_adaptive_oracle(
            alpha in -0.9f64..1.5,
            beta in -0.9f64..1.5,
        ) {
            let r = jacobi_rule(20, alpha, beta).unwrap();
            let oracle = weight_integral_oracle(alpha, beta);
            prop_assert!((r.weight_integral() - oracle).abs() < 1e-8,
                "alpha={} beta={}: {} vs {}", alpha, beta, r.weight_integral(), oracle);
        }
    }
}
