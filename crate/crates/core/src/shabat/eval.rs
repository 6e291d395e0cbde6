//! Evaluation of a polynomial given by its critical points.
//!
//! With `p' = n * prod (z - a_v)^{m_v}`, values of `p` are integrals of a
//! well-conditioned product. Integrals run along short chords of a
//! Euclidean minimum spanning tree of the critical points, using a
//! Gauss-Legendre rule that is exact for the integrand's degree. Expanded
//! coefficients are never needed, so the evaluation stays accurate at
//! degrees where the monomial basis has lost every digit.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::poly::{gauss_legendre, GaussRule};

#[derive(Debug, Clone)]
pub struct ProductForm {
    n: usize,
    /// `n` times the leading coefficient of `p`.
    factor: C64,
    crit: Vec<(C64, usize)>,
    rule: Arc<GaussRule>,
    /// Critical points in spanning-tree order; the first is the root.
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
}

impl ProductForm {
    /// `crit` holds `(a_v, m_v)` with `sum m_v = n - 1`.
    pub fn new(n: usize, crit: &[(C64, usize)]) -> Self {
        Self::with_leading(n, crit, C64::new(1.0, 0.0))
    }

    /// As [`ProductForm::new`] for a polynomial with the given leading
    /// coefficient.
    pub fn with_leading(n: usize, crit: &[(C64, usize)], leading: C64) -> Self {
        debug_assert_eq!(crit.iter().map(|c| c.1).sum::<usize>() + 1, n.max(1));
        let (order, parent) = spanning_order(crit);
        ProductForm {
            n,
            factor: leading * n as f64,
            crit: crit.to_vec(),
            rule: gauss_legendre(n.div_ceil(2).max(1)),
            order,
            parent,
        }
    }

    pub fn factor(&self) -> C64 {
        self.factor
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn critical_points(&self) -> &[(C64, usize)] {
        &self.crit
    }

    /// `p'(z)`.
    pub fn derivative(&self, z: C64) -> C64 {
        let mut acc = self.factor;
        for &(a, m) in &self.crit {
            acc *= (z - a).powi(m as i32);
        }
        acc
    }

    /// `p'(z) / (z - a_v)`, computed without dividing.
    pub fn derivative_without(&self, z: C64, v: usize) -> C64 {
        let mut acc = self.factor;
        for (u, &(a, m)) in self.crit.iter().enumerate() {
            let e = if u == v { m - 1 } else { m };
            acc *= (z - a).powi(e as i32);
        }
        acc
    }

    /// `p(b) - p(a)` by quadrature along the segment.
    pub fn integral(&self, a: C64, b: C64) -> C64 {
        self.rule.integrate_segment(a, b, |z| self.derivative(z))
    }

    /// `p(a_v) - c0` for every critical point.
    pub fn critical_integrals(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.crit.len()];
        for &w in &self.order {
            let (from, base) = match self.parent[w] {
                Some(p) => (self.crit[p].0, out[p]),
                None => (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
            };
            out[w] = base + self.integral(from, self.crit[w].0);
        }
        out
    }

    /// `d p(a_w) / d a_v` for all `w` (rows) and `v` (columns).
    ///
    /// Uses `p'(a_w) = 0`, so only the dependence of the integrand counts:
    /// `-m_v * integral_0^{a_w} p'(z) / (z - a_v) dz`.
    pub fn critical_jacobian(&self) -> Vec<Vec<C64>> {
        let k = self.crit.len();
        let mut out = vec![vec![C64::new(0.0, 0.0); k]; k];
        let mut row = vec![C64::new(0.0, 0.0); k];
        for &w in &self.order {
            let from = self.parent[w].map_or(C64::new(0.0, 0.0), |p| self.crit[p].0);
            let to = self.crit[w].0;
            let half = (to - from) * 0.5;
            let mid = (to + from) * 0.5;
            row.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            for (&x, &wt) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let z = mid + half * x;
                let full = self.derivative(z);
                for (v, r) in row.iter_mut().enumerate() {
                    let d = z - self.crit[v].0;
                    let term = if d == C64::new(0.0, 0.0) { self.derivative_without(z, v) } else { full / d };
                    *r += term * wt;
                }
            }
            let base = self.parent[w].map(|p| out[p].clone());
            for v in 0..k {
                let chord = -(self.crit[v].1 as f64) * row[v] * half;
                out[w][v] = base.as_ref().map_or(C64::new(0.0, 0.0), |b| b[v]) + chord;
            }
        }
        out
    }

    /// `p(z) - p(a)` where `a` is the critical point nearest to `z` (or
    /// `p(z) - p(0)` when there are none), and the index of that anchor.
    pub fn anchored(&self, z: C64) -> (Option<usize>, C64) {
        let anchor = self
            .crit
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 .0 - z).norm_sqr().total_cmp(&(y.1 .0 - z).norm_sqr()))
            .map(|(i, _)| i);
        let from = anchor.map_or(C64::new(0.0, 0.0), |i| self.crit[i].0);
        (anchor, self.integral(from, z))
    }
}

/// Prim's algorithm on the complete Euclidean graph, rooted at the point
/// nearest the origin.
fn spanning_order(crit: &[(C64, usize)]) -> (Vec<usize>, Vec<Option<usize>>) {
    let k = crit.len();
    let mut order = Vec::with_capacity(k);
    let mut parent = vec![None; k];
    if k == 0 {
        return (order, parent);
    }
    let root = (0..k)
        .min_by(|&x, &y| crit[x].0.norm_sqr().total_cmp(&crit[y].0.norm_sqr()))
        .expect("nonempty");
    let mut best = vec![(f64::INFINITY, usize::MAX); k];
    let mut done = vec![false; k];
    let mut current = root;
    loop {
        done[current] = true;
        order.push(current);
        for v in 0..k {
            if !done[v] {
                let d = (crit[v].0 - crit[current].0).norm_sqr();
                if d < best[v].0 {
                    best[v] = (d, current);
                }
            }
        }
        let next = (0..k).filter(|&v| !done[v]).min_by(|&x, &y| best[x].0.total_cmp(&best[y].0));
        match next {
            Some(v) => {
                parent[v] = Some(best[v].1);
                current = v;
            }
            None => break,
        }
    }
    (order, parent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{from_roots, horner, integrate};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matches_expanded() {
        let crit = vec![(c(0.3, 0.1), 2), (c(-0.5, 0.4), 1), (c(0.1, -0.7), 3)];
        let n = 7;
        let f = ProductForm::new(n, &crit);
        let dp: Vec<C64> = from_roots(&crit).into_iter().map(|x| x * n as f64).collect();
        let p = integrate(&dp, C64::new(0.0, 0.0));
        let vals = f.critical_integrals();
        for (i, &(a, _)) in crit.iter().enumerate() {
            assert!((vals[i] - horner(&p, a)).norm() < 1e-13);
        }
        let z = c(0.2, 0.25);
        let (anchor, delta) = f.anchored(z);
        let a = crit[anchor.unwrap()].0;
        assert!((delta - (horner(&p, z) - horner(&p, a))).norm() < 1e-13);
    }

    #[test]
    fn jacobian_by_differences() {
        let crit = vec![(c(0.3, 0.1), 2), (c(-0.5, 0.4), 1), (c(0.1, -0.7), 1)];
        let n = 5;
        let jac = ProductForm::new(n, &crit).critical_jacobian();
        let h = 1e-6;
        for v in 0..3 {
            let mut plus = crit.clone();
            let mut minus = crit.clone();
            plus[v].0 += h;
            minus[v].0 -= h;
            let fp = ProductForm::new(n, &plus).critical_integrals();
            let fm = ProductForm::new(n, &minus).critical_integrals();
            for w in 0..3 {
                let fd = (fp[w] - fm[w]) / (2.0 * h);
                // The moving upper limit contributes p'(a_w) = 0 only at w.
                let chain = if w == v { ProductForm::new(n, &crit).derivative(crit[w].0) } else { C64::new(0.0, 0.0) };
                assert!((fd - jac[w][v] - chain).norm() < 1e-6, "{w} {v}");
            }
        }
    }
}
