//! The critical-point system and its damped Newton solver.
//!
//! Unknowns are one critical point `a_v` per internal vertex plus the
//! constant term `c0`. Equations are `p(a_v) = target_v` and the centring
//! condition `sum m_v a_v = 0`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{CriticalPoint, ProductForm, ShabatPolynomial};
use crate::plane_tree::{BipartiteColoring, PlaneTree};

/// The equations for one plane tree and coloring.
#[derive(Debug, Clone, PartialEq)]
pub struct ShabatSystem {
    pub degree: usize,
    /// Internal vertices, in the order of the unknowns.
    pub internal: Vec<usize>,
    pub multiplicity: Vec<usize>,
    pub target: Vec<i8>,
}

impl ShabatSystem {
    pub fn new(tree: &PlaneTree, coloring: &BipartiteColoring) -> Self {
        let internal = tree.internal_vertices();
        ShabatSystem {
            degree: tree.edge_count(),
            multiplicity: internal.iter().map(|&v| tree.degree(v) - 1).collect(),
            target: internal.iter().map(|&v| coloring.color(v)).collect(),
            internal,
        }
    }

    /// Number of complex unknowns.
    pub fn size(&self) -> usize {
        self.internal.len() + 1
    }

    fn critical(&self, state: &State) -> Vec<(C64, usize)> {
        state.a.iter().copied().zip(self.multiplicity.iter().copied()).collect()
    }

    pub fn product_form(&self, state: &State) -> ProductForm {
        ProductForm::new(self.degree, &self.critical(state))
    }
}

/// Critical points (in [`ShabatSystem::internal`] order) and `c0`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub a: Vec<C64>,
    pub c0: C64,
}

impl State {
    fn to_vector(&self) -> DVector<C64> {
        DVector::from_iterator(self.a.len() + 1, self.a.iter().copied().chain(std::iter::once(self.c0)))
    }

    fn from_vector(x: &DVector<C64>) -> Self {
        let k = x.len() - 1;
        State { a: x.iter().take(k).copied().collect(), c0: x[k] }
    }

    /// Smallest distance between two critical points.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.a.len() {
            for j in i + 1..self.a.len() {
                best = best.min((self.a[i] - self.a[j]).norm());
            }
        }
        best
    }
}

/// `p(a_v) - target_v` for each internal vertex, then the centring sum.
/// A one-edge tree has no critical points; its single equation is `c0 = 0`.
pub fn residual(system: &ShabatSystem, state: &State) -> Vec<C64> {
    if system.internal.is_empty() {
        return vec![state.c0];
    }
    let values = system.product_form(state).critical_integrals();
    let mut out: Vec<C64> = values
        .iter()
        .zip(&system.target)
        .map(|(&v, &t)| state.c0 + v - t as f64)
        .collect();
    out.push(state.a.iter().zip(&system.multiplicity).map(|(&a, &m)| a * m as f64).sum());
    out
}

/// Analytic Jacobian of [`residual`] with respect to `(a, c0)`.
pub fn jacobian(system: &ShabatSystem, state: &State) -> Vec<Vec<C64>> {
    let k = system.internal.len();
    if k == 0 {
        return vec![vec![C64::new(1.0, 0.0)]];
    }
    let inner = system.product_form(state).critical_jacobian();
    let mut out = vec![vec![C64::new(0.0, 0.0); k + 1]; k + 1];
    for w in 0..k {
        out[w][..k].copy_from_slice(&inner[w]);
        out[w][k] = C64::new(1.0, 0.0);
    }
    for v in 0..k {
        out[k][v] = C64::new(system.multiplicity[v] as f64, 0.0);
    }
    out
}

fn sup_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NewtonError {
    MaxIterations,
    SingularJacobian,
    StepUnderflow,
    CoincidentCriticalPoints,
    /// The residual at the initial state is not finite.
    NonFinite,
}

/// A failed Newton run with enough context to retry.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonFailure {
    pub kind: NewtonError,
    pub residual: f64,
    pub iterations: usize,
    pub state: State,
}

/// Newton parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    /// Accepted when the iteration stalls above `tol` but below this.
    pub stall_tol: f64,
    pub max_iterations: usize,
    pub backtrack: f64,
    pub min_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-12, stall_tol: 1e-10, max_iterations: 200, backtrack: 0.5, min_step: (-20f64).exp2() }
    }
}

/// Damped Newton: take the full step, halving it while the residual
/// sup-norm fails to decrease.
pub fn newton_solve(
    system: &ShabatSystem,
    initial: &State,
    opts: &NewtonOptions,
) -> Result<(ShabatPolynomial, State), NewtonFailure> {
    let mut state = initial.clone();
    let mut f = residual(system, &state);
    let mut norm = sup_norm(&f);
    let mut iterations = 0;
    let fail = |kind, norm, iterations, state: &State| NewtonFailure { kind, residual: norm, iterations, state: state.clone() };
    if state.a.len() > 1 && state.min_separation() == 0.0 {
        return Err(fail(NewtonError::CoincidentCriticalPoints, norm, 0, &state));
    }
    if !norm.is_finite() {
        return Err(fail(NewtonError::NonFinite, norm, 0, &state));
    }
    while norm > opts.tol {
        if iterations >= opts.max_iterations {
            return Err(fail(NewtonError::MaxIterations, norm, iterations, &state));
        }
        iterations += 1;
        let j = jacobian(system, &state);
        let n = j.len();
        let mat = DMatrix::from_fn(n, n, |r, c| j[r][c]);
        let rhs = DVector::from_vec(f.clone());
        let Some(step) = mat.lu().solve(&rhs) else {
            return Err(fail(NewtonError::SingularJacobian, norm, iterations, &state));
        };
        if step.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(fail(NewtonError::SingularJacobian, norm, iterations, &state));
        }
        let x = state.to_vector();
        let scale = state.a.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut t = 1.0;
        let accepted = loop {
            let trial = State::from_vector(&(&x - &step * C64::new(t, 0.0)));
            let separated = trial.a.len() < 2 || trial.min_separation() > 1e-10 * scale;
            if separated {
                let ft = residual(system, &trial);
                let nt = sup_norm(&ft);
                if nt < norm {
                    break Some((trial, ft, nt));
                }
            }
            t *= opts.backtrack;
            if t < opts.min_step {
                break None;
            }
        };
        match accepted {
            Some((s, ft, nt)) => {
                state = s;
                f = ft;
                norm = nt;
            }
            None if norm <= opts.stall_tol => break,
            None => {
                let kind = if state.a.len() > 1 && state.min_separation() <= 1e-8 * scale {
                    NewtonError::CoincidentCriticalPoints
                } else {
                    NewtonError::StepUnderflow
                };
                return Err(fail(kind, norm, iterations, &state));
            }
        }
    }
    let critical_points = system
        .internal
        .iter()
        .enumerate()
        .map(|(i, &v)| CriticalPoint {
            vertex: Some(v),
            position: state.a[i],
            multiplicity: system.multiplicity[i],
            target: system.target[i],
        })
        .collect();
    let residual_norm = if system.internal.is_empty() { 0.0 } else { sup_norm(&f[..f.len() - 1]) };
    let mut p = ShabatPolynomial::from_critical(critical_points, state.c0, residual_norm);
    p.iterations = iterations;
    Ok((p, state))
}

/// Follows `F(x) = (1 - s) F(x0)` from `s = 0` to `s = 1` with an Euler
/// predictor and Newton corrector, then polishes with [`newton_solve`].
/// Slower than plain Newton but stays on the branch through the seed.
pub fn homotopy_solve(
    system: &ShabatSystem,
    initial: &State,
    opts: &NewtonOptions,
) -> Result<(ShabatPolynomial, State), NewtonFailure> {
    let f0 = residual(system, initial);
    let norm0 = sup_norm(&f0);
    let fail = |kind, state: &State| NewtonFailure { kind, residual: norm0, iterations: 0, state: state.clone() };
    if !norm0.is_finite() {
        return Err(fail(NewtonError::NonFinite, initial));
    }
    let rhs0 = DVector::from_vec(f0);
    let solve_at = |state: &State, rhs: &DVector<C64>| {
        let j = jacobian(system, state);
        let n = j.len();
        DMatrix::from_fn(n, n, |r, c| j[r][c]).lu().solve(rhs).filter(|x| x.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    };
    let corrector_tol = 1e-9 * norm0.max(1.0);
    let mut state = initial.clone();
    let mut s = 0.0;
    let mut ds = 0.1f64;
    while s < 1.0 {
        let Some(tangent) = solve_at(&state, &rhs0) else {
            return Err(fail(NewtonError::SingularJacobian, &state));
        };
        let scale = state.a.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let next_s = (s + ds).min(1.0);
        let mut x = state.to_vector() - &tangent * C64::new(next_s - s, 0.0);
        let mut converged = false;
        for _ in 0..8 {
            let trial = State::from_vector(&x);
            if trial.a.len() > 1 && trial.min_separation() <= 1e-8 * scale {
                break;
            }
            let h = DVector::from_vec(residual(system, &trial)) - &rhs0 * C64::new(1.0 - next_s, 0.0);
            if h.iter().map(|z| z.norm()).fold(0.0, f64::max) <= corrector_tol {
                converged = true;
                break;
            }
            let Some(step) = solve_at(&trial, &h) else { break };
            // A large correction means the predictor left the branch.
            if step.iter().map(|z| z.norm()).fold(0.0, f64::max) > 0.1 * scale {
                break;
            }
            x -= step;
        }
        if converged {
            state = State::from_vector(&x);
            s = next_s;
            ds = (ds * 1.5).min(0.25);
        } else {
            ds *= 0.5;
            if ds < opts.min_step {
                return Err(fail(NewtonError::StepUnderflow, &state));
            }
        }
    }
    newton_solve(system, &state, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn star_system(n: usize) -> ShabatSystem {
        let t = PlaneTree::star(n);
        ShabatSystem::new(&t, &t.bipartite_coloring(1))
    }

    #[test]
    fn star_exact_solution() {
        let sys = star_system(4);
        // Leaves are +1, so the centre is -1.
        let s = State { a: vec![c(0.0, 0.0)], c0: c(-1.0, 0.0) };
        assert!(sup_norm(&residual(&sys, &s)) == 0.0);
    }

    #[test]
    fn one_edge_system() {
        let t = PlaneTree::path(1);
        let sys = ShabatSystem::new(&t, &t.bipartite_coloring(0));
        let s = State { a: vec![], c0: c(0.3, 0.0) };
        assert_eq!(jacobian(&sys, &s), vec![vec![c(1.0, 0.0)]]);
        let (p, _) = newton_solve(&sys, &s, &NewtonOptions::default()).unwrap();
        assert_eq!(p.coefficients, vec![c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn star3_converges() {
        let sys = star_system(3);
        let s = State { a: vec![c(0.1, 0.2)], c0: c(-0.9, 0.0) };
        let (p, st) = newton_solve(&sys, &s, &NewtonOptions::default()).unwrap();
        assert!(st.a[0].norm() < 1e-14);
        assert!((st.c0 + 1.0).norm() < 1e-12);
        assert!(p.residual <= 1e-12);
    }

    #[test]
    fn converged_input_is_fixed() {
        let sys = star_system(3);
        let s = State { a: vec![c(0.0, 0.0)], c0: c(-1.0, 0.0) };
        let (p, st) = newton_solve(&sys, &s, &NewtonOptions::default()).unwrap();
        assert_eq!(p.iterations, 0);
        assert_eq!(st, s);
    }

    #[test]
    fn path3_chebyshev_residual() {
        // Path 0-1-2-3 coloured from leaf 0 = +1: vertex 1 is -1, vertex 2 is +1.
        let t = PlaneTree::path(3);
        let sys = ShabatSystem::new(&t, &t.bipartite_coloring(0));
        // Normalized T3: q(z) = T3(lambda z), lambda^3 = 1/4, critical points +-1/(2 lambda).
        let lambda = 0.25f64.powf(1.0 / 3.0);
        let s = State { a: vec![c(0.5 / lambda, 0.0), c(-0.5 / lambda, 0.0)], c0: c(0.0, 0.0) };
        let r = sup_norm(&residual(&sys, &s));
        assert!(r < 1e-12, "{r}");
    }
}
