//! Shabat polynomials: polynomials whose only critical values are `1` and
//! `-1`. The preimage of `[-1, 1]` is a plane tree, and every plane tree
//! arises this way, uniquely up to affine changes of variable.

mod eval;
mod newton;
mod solve;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use eval::ProductForm;
pub use newton::{homotopy_solve, jacobian, newton_solve, residual, NewtonError, NewtonFailure, NewtonOptions, ShabatSystem, State};
pub use solve::{initial_state_from_hint, radial_layout, solve, solve_traced, solver_coloring, SolveError, SolveOptions};

use crate::geom_tree::Similarity;
use crate::poly::{aberth_roots, cluster_roots, compose_affine, derivative, from_roots, horner, integrate, sup_distance};

/// A critical point of a Shabat polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// Tree vertex this critical point realizes, when known.
    pub vertex: Option<usize>,
    #[serde(with = "crate::io::complex_string")]
    pub position: C64,
    /// Order of the zero of `p'`; the vertex degree minus one.
    pub multiplicity: usize,
    /// Critical value, `1` or `-1`.
    pub target: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShabatPolynomial {
    pub degree: usize,
    /// Coefficients in increasing degree.
    #[serde(with = "crate::io::complex_string_list")]
    pub coefficients: Vec<C64>,
    pub critical_points: Vec<CriticalPoint>,
    /// Largest `|p(a_v) - target_v|` at acceptance.
    pub residual: f64,
    /// Newton iterations used by the accepted solve.
    #[serde(default)]
    pub iterations: usize,
    /// Maps normal-form coordinates back to the input coordinates.
    #[serde(default)]
    pub similarity: Similarity,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShabatError {
    #[error("degrees differ: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("polynomial has degree zero")]
    Constant,
    #[error("critical value {0} is not within {1:e} of 1 or -1")]
    NotShabat(String, f64),
    #[error("root finding failed: {0}")]
    Roots(#[from] crate::poly::RootError),
}

/// Coefficients of `c0 + n * integral_0^z prod (w - a_v)^{m_v} dw`.
pub fn expand(critical: &[(C64, usize)], c0: C64) -> Vec<C64> {
    let n = critical.iter().map(|c| c.1).sum::<usize>() + 1;
    let dp: Vec<C64> = from_roots(critical).into_iter().map(|x| x * n as f64).collect();
    integrate(&dp, c0)
}

impl ShabatPolynomial {
    /// Builds the polynomial from its critical data; coefficients are
    /// expanded for output only.
    pub fn from_critical(critical_points: Vec<CriticalPoint>, c0: C64, residual: f64) -> Self {
        let crit: Vec<(C64, usize)> = critical_points.iter().map(|c| (c.position, c.multiplicity)).collect();
        let coefficients = expand(&crit, c0);
        ShabatPolynomial {
            degree: coefficients.len() - 1,
            coefficients,
            critical_points,
            residual,
            iterations: 0,
            similarity: Similarity::identity(),
        }
    }

    /// Recovers critical points and values from coefficients by root
    /// finding; for small degrees only.
    pub fn from_coefficients(coefficients: Vec<C64>) -> Result<Self, ShabatError> {
        let mut coefficients = coefficients;
        while coefficients.len() > 1 && coefficients.last() == Some(&C64::new(0.0, 0.0)) {
            coefficients.pop();
        }
        let degree = coefficients.len() - 1;
        if degree == 0 {
            return Err(ShabatError::Constant);
        }
        let dp = derivative(&coefficients);
        let roots = if degree >= 2 { aberth_roots(&dp)? } else { vec![] };
        let clusters = cluster_roots(&roots, 1e-6);
        let mut critical_points = Vec::new();
        let mut residual: f64 = 0.0;
        for cl in clusters {
            let value = horner(&coefficients, cl.centre);
            let target: i8 = if value.re >= 0.0 { 1 } else { -1 };
            let err = (value - target as f64).norm();
            if err > 1e-6 {
                return Err(ShabatError::NotShabat(format!("{value}"), 1e-6));
            }
            residual = residual.max(err);
            critical_points.push(CriticalPoint {
                vertex: None,
                position: cl.centre,
                multiplicity: cl.multiplicity,
                target,
            });
        }
        Ok(ShabatPolynomial {
            degree,
            coefficients,
            critical_points,
            residual,
            iterations: 0,
            similarity: Similarity::identity(),
        })
    }

    pub fn critical_pairs(&self) -> Vec<(C64, usize)> {
        self.critical_points.iter().map(|c| (c.position, c.multiplicity)).collect()
    }

    /// Product-form evaluator for this polynomial.
    pub fn product_form(&self) -> ProductForm {
        ProductForm::with_leading(self.degree, &self.critical_pairs(), self.coefficients[self.degree])
    }

    /// `p(z)` by Horner's rule; reliable only at small degree.
    pub fn eval_expanded(&self, z: C64) -> C64 {
        horner(&self.coefficients, z)
    }

    pub fn c0(&self) -> C64 {
        self.coefficients[0]
    }
}

/// Precomposes with `z -> lambda z + mu` so the result is monic with
/// critical points centred at the origin. Returns the normal form and the
/// similarity `z -> lambda z + mu`.
pub fn normalize(p: &ShabatPolynomial) -> (ShabatPolynomial, Similarity) {
    let n = p.degree;
    let lead = p.coefficients[n];
    let lambda = if (lead - C64::new(1.0, 0.0)).norm() < 1e-15 {
        C64::new(1.0, 0.0)
    } else {
        lead.powf(-1.0 / n as f64)
    };
    let mu = -p.coefficients[n - 1] / (n as f64 * lead);
    let mu = if mu.norm() < 1e-300 { C64::new(0.0, 0.0) } else { mu };
    let mut coefficients = compose_affine(&p.coefficients, lambda, mu);
    coefficients[n] = C64::new(1.0, 0.0);
    if n >= 2 {
        // Centred critical points: the next coefficient vanishes exactly.
        coefficients[n - 1] = C64::new(0.0, 0.0);
    } else {
        coefficients[0] = C64::new(0.0, 0.0);
    }
    let critical_points = p
        .critical_points
        .iter()
        .map(|c| CriticalPoint { position: (c.position - mu) / lambda, ..*c })
        .collect();
    let sim = Similarity::from_linear(lambda, mu);
    let q = ShabatPolynomial {
        degree: n,
        coefficients,
        critical_points,
        residual: p.residual,
        iterations: p.iterations,
        similarity: p.similarity.compose(&sim),
    };
    (q, sim)
}

/// Coefficient distance between normal forms, minimized over the maps
/// `z -> zeta z` that keep the normal form monic, and over the sign change
/// `p -> -p(zeta z)` that swaps the two critical values.
pub fn compare_up_to_similarity(p: &ShabatPolynomial, q: &ShabatPolynomial) -> Result<f64, ShabatError> {
    if p.degree != q.degree {
        return Err(ShabatError::DegreeMismatch(p.degree, q.degree));
    }
    let n = p.degree;
    let (pn, _) = normalize(p);
    let (qn, _) = normalize(q);
    let mut best = f64::INFINITY;
    for k in 0..2 * n {
        // zeta^n = 1 for even k, -1 for odd k.
        let zeta = C64::from_polar(1.0, std::f64::consts::PI * k as f64 / n as f64);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut power = C64::new(sign, 0.0);
        let cand: Vec<C64> = qn
            .coefficients
            .iter()
            .map(|&c| {
                let v = c * power;
                power *= zeta;
                v
            })
            .collect();
        best = best.min(sup_distance(&pn.coefficients, &cand));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn chebyshev(n: usize) -> Vec<C64> {
        let mut t0 = vec![c(1.0, 0.0)];
        let mut t1 = vec![c(0.0, 0.0), c(1.0, 0.0)];
        for _ in 1..n {
            let mut t2 = vec![c(0.0, 0.0); t1.len() + 1];
            for (k, &x) in t1.iter().enumerate() {
                t2[k + 1] += 2.0 * x;
            }
            for (k, &x) in t0.iter().enumerate() {
                t2[k] -= x;
            }
            t0 = t1;
            t1 = t2;
        }
        if n == 0 { t0 } else { t1 }
    }

    #[test]
    fn expand_examples() {
        assert_eq!(expand(&[(c(0.0, 0.0), 2)], c(-1.0, 0.0)), vec![c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(expand(&[], c(0.0, 0.0)), vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let p = expand(&[(c(0.0, 0.0), 1)], c(-1.0, 0.0));
        assert!((horner(&p, c(2f64.sqrt(), 0.0)) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn normalize_scales() {
        let p = ShabatPolynomial::from_coefficients(vec![c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
        let (q, sim) = normalize(&p);
        assert!(sup_distance(&q.coefficients, &[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]) < 1e-15);
        assert!((sim.scale - 0.5f64.powf(1.0 / 3.0)).abs() < 1e-15);
        let (q2, sim2) = normalize(&q);
        assert_eq!(q2.coefficients, q.coefficients);
        assert_eq!(sim2, Similarity::identity());
    }

    #[test]
    fn chebyshev_critical_data() {
        let t3 = ShabatPolynomial::from_coefficients(chebyshev(3)).unwrap();
        assert_eq!(t3.critical_points.len(), 2);
        for cp in &t3.critical_points {
            assert!((cp.position.re.abs() - 0.5).abs() < 1e-12);
            assert_eq!(cp.target as f64, -cp.position.re.signum());
        }
    }

    #[test]
    fn comparison_ignores_similarity() {
        let p = ShabatPolynomial::from_coefficients(chebyshev(4)).unwrap();
        let moved = compose_affine(&p.coefficients, C64::from_polar(1.7, 0.4), c(0.3, -0.2));
        let q = ShabatPolynomial::from_coefficients(moved).unwrap();
        assert!(compare_up_to_similarity(&p, &q).unwrap() < 1e-10);
        let star = ShabatPolynomial::from_coefficients(expand(&[(c(0.0, 0.0), 3)], c(-1.0, 0.0))).unwrap();
        assert!(compare_up_to_similarity(&p, &star).unwrap() > 0.1);
        // Swapping the critical values is the same tree.
        let neg: Vec<C64> = p.coefficients.iter().map(|&x| -x).collect();
        let neg = ShabatPolynomial::from_coefficients(neg).unwrap();
        assert!(compare_up_to_similarity(&p, &neg).unwrap() < 1e-10);
    }

    #[test]
    fn json_round_trip() {
        let p = ShabatPolynomial::from_coefficients(chebyshev(3)).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains(r#""coefficients":[["0","0"],["-3","0"]"#));
        let back: ShabatPolynomial = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
