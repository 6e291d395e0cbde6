//! Dense complex polynomials in ascending-power order, Gauss–Legendre
//! quadrature, and an Aberth–Ehrlich all-roots solver.

use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64 as C64;

/// Evaluates `sum coeffs[k] z^k` by Horner's rule.
pub fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Horner evaluation together with a running bound on `sum |c_k| |z|^k`,
/// the usual condition estimate for monomial evaluation.
pub fn horner_with_bound(coeffs: &[C64], z: C64) -> (C64, f64) {
    let r = z.norm();
    let mut acc = C64::new(0.0, 0.0);
    let mut bound = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
        bound = bound * r + c.norm();
    }
    (acc, bound)
}

pub fn derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Antiderivative with constant term `c0`.
pub fn integrate(coeffs: &[C64], c0: C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(coeffs.len() + 1);
    out.push(c0);
    out.extend(
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c / (k as f64 + 1.0)),
    );
    out
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Multiplies in place by `(z - root)`.
pub fn mul_linear(coeffs: &mut Vec<C64>, root: C64) {
    coeffs.push(C64::new(0.0, 0.0));
    for k in (0..coeffs.len()).rev() {
        let lower = if k > 0 { coeffs[k - 1] } else { C64::new(0.0, 0.0) };
        coeffs[k] = lower - root * coeffs[k];
    }
}

/// Monic product `prod (z - r)^m` over `(r, m)` pairs.
pub fn from_roots(roots: &[(C64, usize)]) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for &(r, m) in roots {
        for _ in 0..m {
            mul_linear(&mut out, r);
        }
    }
    out
}

/// Synthetic division by `(z - root)`; the remainder is discarded.
pub fn deflate(coeffs: &[C64], root: C64) -> Vec<C64> {
    let n = coeffs.len();
    if n <= 1 {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); n - 1];
    let mut acc = coeffs[n - 1];
    out[n - 2] = acc;
    for k in (1..n - 1).rev() {
        acc = coeffs[k] + acc * root;
        out[k - 1] = acc;
    }
    out
}

/// Coefficients of `p(lambda z + mu)`.
pub fn compose_affine(coeffs: &[C64], lambda: C64, mu: C64) -> Vec<C64> {
    // Taylor shift by mu (repeated synthetic division), then scale.
    let mut shifted = coeffs.to_vec();
    let n = shifted.len();
    for i in 0..n {
        for k in (i..n - 1).rev() {
            let hi = shifted[k + 1];
            shifted[k] += mu * hi;
        }
    }
    let mut scale = C64::new(1.0, 0.0);
    for c in shifted.iter_mut() {
        *c *= scale;
        scale *= lambda;
    }
    shifted
}

pub fn sup_distance(a: &[C64], b: &[C64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).copied().unwrap_or_default();
            let y = b.get(k).copied().unwrap_or_default();
            (x - y).norm()
        })
        .fold(0.0, f64::max)
}

/// Nodes and weights of the `q`-point Gauss–Legendre rule on [-1, 1].
///
/// Rules are cached; the rule is exact for polynomials of degree `2q - 1`.
pub fn gauss_legendre(q: usize) -> std::sync::Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<Vec<Option<std::sync::Arc<GaussRule>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    if guard.len() <= q {
        guard.resize(q + 1, None);
    }
    if let Some(rule) = &guard[q] {
        return rule.clone();
    }
    let rule = std::sync::Arc::new(GaussRule::compute(q.max(1)));
    guard[q] = Some(rule.clone());
    rule
}

#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn compute(q: usize) -> Self {
        let mut nodes = vec![0.0; q];
        let mut weights = vec![0.0; q];
        for i in 0..q.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_q.
            let mut x = ((i as f64 + 0.75) / (q as f64 + 0.5) * PI).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(q, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(q, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[q - 1 - i] = x;
            weights[i] = w;
            weights[q - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    /// Integral of `f` along the straight segment from `a` to `b`.
    pub fn integrate_segment<F: FnMut(C64) -> C64>(&self, a: C64, b: C64, mut f: F) -> C64 {
        let half = (b - a) * 0.5;
        let mid = (a + b) * 0.5;
        let mut acc = C64::new(0.0, 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * w;
        }
        acc * half
    }
}

fn legendre(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("polynomial has no roots (degree 0 or zero leading coefficient)")]
    Degenerate,
    #[error("Aberth iteration did not converge after {iterations} sweeps (max correction {max_step:e})")]
    NoConvergence { iterations: usize, max_step: f64 },
}

/// All complex roots by Aberth–Ehrlich simultaneous iteration.
///
/// Multiple roots converge only linearly and land as clusters of radius
/// roughly `eps^(1/m)`; see [`cluster_roots`].
pub fn aberth_roots(coeffs: &[C64]) -> Result<Vec<C64>, RootError> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
        coeffs.pop();
    }
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Err(RootError::Degenerate);
    }
    let lead = coeffs[n];
    let monic: Vec<C64> = coeffs.iter().map(|&c| c / lead).collect();
    if n == 1 {
        return Ok(vec![-monic[0]]);
    }
    let dmonic = derivative(&monic);
    // Fujiwara-type radius bound for the initial circle.
    let radius = (0..n)
        .map(|k| monic[k].norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let centre = -monic[n - 1] / n as f64;
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / n as f64 + 0.4;
            centre + C64::from_polar(radius, angle)
        })
        .collect();
    let scale = radius + centre.norm() + 1.0;
    let max_iter = 2000;
    let mut max_step = f64::INFINITY;
    let mut settled = 0;
    for it in 0..max_iter {
        max_step = 0.0;
        for i in 0..n {
            let p = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let dp = horner(&dmonic, z[i]);
            let ratio = p / dp;
            let mut sum = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        sum += diff.inv();
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - ratio * sum;
            let step = if denom.norm() > 0.0 { ratio / denom } else { ratio };
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm());
            }
        }
        if max_step <= 1e-15 * scale {
            settled += 1;
            if settled > 2 {
                return Ok(z);
            }
        } else if it > 200 && max_step <= 1e-9 * scale {
            // Clusters around multiple roots creep; accept once stagnant.
            settled += 1;
            if settled > 50 {
                return Ok(z);
            }
        }
    }
    if max_step <= 1e-6 * scale {
        return Ok(z);
    }
    Err(RootError::NoConvergence { iterations: max_iter, max_step })
}

/// A root with its multiplicity (size of the cluster it was built from).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCluster {
    pub centre: C64,
    pub multiplicity: usize,
}

/// Groups numerically multiple roots.
///
/// Roots closer than `rel_radius * scale` are merged; clusters of size
/// `a` and `b` are additionally merged when closer than the spread an
/// `(a+b)`-fold root exhibits in double precision. The cluster centroid
/// is returned, which is far more accurate than any single member.
pub fn cluster_roots(roots: &[C64], rel_radius: f64) -> Vec<RootCluster> {
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut clusters: Vec<(C64, usize)> = roots.iter().map(|&z| (z, 1)).collect();
    loop {
        let mut merged = false;
        'outer: for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (ci, mi) = clusters[i];
                let (cj, mj) = clusters[j];
                let m = (mi + mj) as f64;
                let spread = 4.0 * scale * (1e-14f64).powf(1.0 / m);
                let radius = (rel_radius * scale).max(if mi + mj > 1 { spread } else { 0.0 });
                if (ci - cj).norm() < radius {
                    let centre = (ci * mi as f64 + cj * mj as f64) / m;
                    clusters[i] = (centre, mi + mj);
                    clusters.remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    clusters
        .into_iter()
        .map(|(centre, multiplicity)| RootCluster { centre, multiplicity })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn integrate_then_differentiate() {
        let p = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0)];
        let q = derivative(&integrate(&p, c(7.0, 0.0)));
        assert!(sup_distance(&p, &q) < 1e-15);
    }

    #[test]
    fn from_roots_and_deflate() {
        let p = from_roots(&[(c(1.0, 0.0), 2), (c(0.0, 1.0), 1)]);
        assert_eq!(p.len(), 4);
        assert!(horner(&p, c(1.0, 0.0)).norm() < 1e-14);
        assert!(horner(&p, c(0.0, 1.0)).norm() < 1e-14);
        let q = deflate(&p, c(0.0, 1.0));
        let expect = from_roots(&[(c(1.0, 0.0), 2)]);
        assert!(sup_distance(&q, &expect) < 1e-14);
    }

    #[test]
    fn compose_affine_matches_pointwise() {
        let p = vec![c(0.3, -1.0), c(2.0, 0.0), c(-1.0, 0.5), c(0.0, 0.0), c(1.0, 0.0)];
        let lambda = c(0.7, -0.2);
        let mu = c(-0.4, 1.1);
        let q = compose_affine(&p, lambda, mu);
        for z in [c(0.1, 0.2), c(-1.0, 0.3), c(2.0, -1.0)] {
            let lhs = horner(&q, z);
            let rhs = horner(&p, lambda * z + mu);
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        for q in [1, 2, 5, 16, 40] {
            let rule = gauss_legendre(q);
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "q={q}");
            // x^(2q-2) integrates to 2/(2q-1).
            let deg = 2 * q - 2;
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| w * x.powi(deg as i32))
                .sum();
            assert!((got - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "q={q}");
        }
    }

    #[test]
    fn aberth_simple_roots() {
        let roots = [c(1.0, 0.0), c(-2.0, 0.5), c(0.0, -1.0), c(3.0, 3.0)];
        let p = from_roots(&roots.map(|r| (r, 1)));
        let found = aberth_roots(&p).unwrap();
        for r in roots {
            let best = found.iter().map(|z| (z - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "missing {r}");
        }
    }

    #[test]
    fn clustering_recovers_multiplicity() {
        // z^3 (z - 1)^2 (z + 2)
        let p = from_roots(&[(c(0.0, 0.0), 3), (c(1.0, 0.0), 2), (c(-2.0, 0.0), 1)]);
        let found = aberth_roots(&p).unwrap();
        let mut clusters = cluster_roots(&found, 1e-6);
        clusters.sort_by(|a, b| a.centre.re.partial_cmp(&b.centre.re).unwrap());
        let mults: Vec<usize> = clusters.iter().map(|c| c.multiplicity).collect();
        assert_eq!(mults, vec![1, 3, 2]);
        assert!((clusters[1].centre).norm() < 1e-8);
        assert!((clusters[2].centre - c(1.0, 0.0)).norm() < 1e-8);
    }
}
