//! Solving for the Shabat polynomial of a plane tree.
//!
//! Initial guesses come from a geometric hint or a radial layout. Every
//! Newton result is traced and accepted only if the traced tree is
//! equivalent to the input, since Newton may land on another tree with the
//! same degree sequence. When direct attempts fail, the tree is grown from
//! a single edge one leaf at a time, each true form seeding the next.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::newton::{homotopy_solve, newton_solve, NewtonOptions, ShabatSystem, State};
use super::{ProductForm, ShabatPolynomial};
use crate::geom_tree::GeomTree;
use crate::plane_tree::{BipartiteColoring, PlaneTree, TreeViolation};
use crate::tracer::{local_directions, trace_edge, trace_tree, EdgeEnd, TracedTree, TreeVertex};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Residual sup-norm for acceptance.
    pub tol: f64,
    /// Accepted when Newton stalls above `tol` but below this.
    pub stall_tol: f64,
    pub max_iterations: usize,
    pub backtrack: f64,
    pub min_step: f64,
    /// Retry perturbation, relative to the nearest-neighbour distance of
    /// the initial critical points.
    pub perturbation: f64,
    /// Perturbed retries per initial guess.
    pub max_retries: usize,
    pub seed: u64,
    /// Fall back to growth continuation.
    pub continuation: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        let newton = NewtonOptions::default();
        SolveOptions {
            tol: newton.tol,
            stall_tol: newton.stall_tol,
            max_iterations: newton.max_iterations,
            backtrack: newton.backtrack,
            min_step: newton.min_step,
            perturbation: 0.15,
            max_retries: 6,
            seed: 0,
            continuation: true,
        }
    }
}

impl SolveOptions {
    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.tol,
            stall_tol: self.stall_tol.max(self.tol),
            max_iterations: self.max_iterations,
            backtrack: self.backtrack,
            min_step: self.min_step,
        }
    }

    fn validate(&self) -> Result<(), SolveError> {
        let ok = self.tol > 0.0
            && self.tol.is_finite()
            && self.backtrack > 0.0
            && self.backtrack < 1.0
            && self.min_step > 0.0
            && self.perturbation >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(SolveError::InvalidOptions(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid tree: {0}")]
    InvalidTree(#[from] TreeViolation),
    #[error("hint has {found} vertices but the tree has {expected}")]
    HintMismatch { expected: usize, found: usize },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("no verified solution; best residual {best_residual:e}; {diagnosis}")]
    Exhausted { best_residual: f64, diagnosis: String },
}

/// Colouring used by the solver: the lowest-numbered leaf gets `+1`.
pub fn solver_coloring(tree: &PlaneTree) -> BipartiteColoring {
    let root = tree.leaves().first().copied().unwrap_or(0);
    tree.bipartite_coloring(root)
}

/// A vertex of least eccentricity, lowest id first.
fn centre(tree: &PlaneTree) -> usize {
    (0..tree.vertex_count())
        .min_by_key(|&v| (tree.distances(v).into_iter().max().unwrap_or(0), v))
        .unwrap_or(0)
}

/// Planar embedding of the tree respecting its rotation system.
///
/// The centre sits at the origin and each subtree gets a wedge of angles
/// proportional to its leaf count, at radius equal to its depth. Children
/// of a vertex, taken counterclockwise after the parent, get increasing
/// angles, which is the counterclockwise order seen from the vertex.
pub fn radial_layout(tree: &PlaneTree) -> Vec<C64> {
    let n = tree.vertex_count();
    let root = centre(tree);
    let mut parent = vec![usize::MAX; n];
    let mut order = vec![root];
    parent[root] = root;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        for &w in tree.rotation(v) {
            if parent[w] == usize::MAX {
                parent[w] = v;
                order.push(w);
            }
        }
        i += 1;
    }
    let mut leaves = vec![0usize; n];
    for &v in order.iter().rev() {
        if tree.degree(v) <= 1 {
            leaves[v] += 1;
        }
        if v != root {
            leaves[parent[v]] += leaves[v];
        }
    }
    let mut pos = vec![C64::new(0.0, 0.0); n];
    let mut range = vec![(0.0, 2.0 * PI); n];
    let mut depth = vec![0usize; n];
    for &v in &order {
        let rot = tree.rotation(v);
        let start = if v == root { 0 } else { rot.iter().position(|&w| w == parent[v]).expect("parent adjacent") + 1 };
        let children: Vec<usize> =
            (0..rot.len()).map(|k| rot[(start + k) % rot.len()]).filter(|&w| w != parent[v] || v == root).collect();
        let total: usize = children.iter().map(|&w| leaves[w]).sum();
        let (lo, hi) = range[v];
        let mut at = lo;
        for &w in &children {
            let width = (hi - lo) * leaves[w] as f64 / total.max(1) as f64;
            range[w] = (at, at + width);
            depth[w] = depth[v] + 1;
            pos[w] = C64::from_polar(depth[w] as f64, at + width / 2.0);
            at += width;
        }
    }
    pos
}

/// Initial state from hint positions of the internal vertices.
///
/// The centred hint `b` defines `P_b = n * integral_0 prod (z - b_v)^{m_v}`.
/// Scaling the critical points by `s` multiplies the integrals by `s^n`, so
/// `c0` and `sigma = s^n` are fitted by least squares to `c0 + sigma P_b(b_v)
/// = target_v`, and `a_v = s b_v`.
pub fn initial_state_from_hint(system: &ShabatSystem, positions: &[C64]) -> State {
    fit_hint(system, positions).0
}

/// As [`initial_state_from_hint`], also returning `(centre, factor)` with
/// `a_v = (b_v - centre) * factor`.
fn fit_hint(system: &ShabatSystem, positions: &[C64]) -> (State, C64, C64) {
    let k = system.internal.len();
    if k == 0 {
        return (State { a: Vec::new(), c0: C64::new(0.0, 0.0) }, C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    }
    let weight: f64 = system.multiplicity.iter().sum::<usize>() as f64;
    let centroid: C64 = positions.iter().zip(&system.multiplicity).map(|(&b, &m)| b * m as f64).sum::<C64>() / weight;
    let radius = positions.iter().map(|&b| (b - centroid).norm()).fold(0.0, f64::max);
    let unit = if radius > 0.0 && radius.is_finite() { radius } else { 1.0 };
    let b: Vec<C64> = positions.iter().map(|&z| (z - centroid) / unit).collect();
    let crit: Vec<(C64, usize)> = b.iter().copied().zip(system.multiplicity.iter().copied()).collect();
    let values = ProductForm::new(system.degree, &crit).critical_integrals();
    let targets: Vec<f64> = system.target.iter().map(|&t| f64::from(t)).collect();
    let mean_i = values.iter().sum::<C64>() / k as f64;
    let mean_t = targets.iter().sum::<f64>() / k as f64;
    let spread: f64 = values.iter().map(|v| (v - mean_i).norm_sqr()).sum();
    let sigma = values.iter().zip(&targets).map(|(&v, &t)| (v - mean_i).conj() * (t - mean_t)).sum::<C64>() / spread;
    let usable = spread > 0.0 && sigma.norm() > 0.0 && sigma.re.is_finite() && sigma.im.is_finite();
    if usable {
        let s = sigma.powf(1.0 / system.degree as f64);
        let state = State { a: b.iter().map(|&z| z * s).collect(), c0: C64::new(mean_t, 0.0) - sigma * mean_i };
        (state, centroid, s / unit)
    } else {
        let c0 = targets.iter().zip(&values).map(|(&t, &v)| t - v).sum::<C64>() / k as f64;
        (State { a: b, c0 }, centroid, C64::new(1.0 / unit, 0.0))
    }
}

/// Moves each point by up to `amplitude` times its nearest-neighbour
/// distance, uniformly in a disk.
fn perturb(points: &[C64], amplitude: f64, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let spread = points.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    points
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let nearest = points
                .iter()
                .enumerate()
                .filter(|&(j, &w)| j != i && w != z)
                .map(|(_, &w)| (w - z).norm())
                .fold(spread, f64::min);
            let r = amplitude * nearest * rng.random::<f64>().sqrt();
            z + C64::from_polar(r, 2.0 * PI * rng.random::<f64>())
        })
        .collect()
}

/// Solves for the Shabat polynomial of `tree`.
///
/// `hint` is a straight-line or curved embedding indexed like the tree;
/// only its vertex positions are used.
pub fn solve(tree: &PlaneTree, hint: Option<&GeomTree>, opts: &SolveOptions) -> Result<ShabatPolynomial, SolveError> {
    solve_traced(tree, hint, opts).map(|(p, _)| p)
}

/// As [`solve`], also returning the verifying trace.
pub fn solve_traced(
    tree: &PlaneTree,
    hint: Option<&GeomTree>,
    opts: &SolveOptions,
) -> Result<(ShabatPolynomial, TracedTree), SolveError> {
    tree.validate()?;
    opts.validate()?;
    if let Some(h) = hint {
        if h.vertices.len() != tree.vertex_count() {
            return Err(SolveError::HintMismatch { expected: tree.vertex_count(), found: h.vertices.len() });
        }
    }
    let positions = match hint {
        Some(h) => h.vertices.clone(),
        None => radial_layout(tree),
    };
    let mut best = Attempts::default();
    if let Some(found) = attempts(tree, &positions, opts, &mut best) {
        return Ok(found);
    }
    if opts.continuation && tree.edge_count() >= 2 {
        match grow(tree, opts, &mut best) {
            Some(found) => return Ok(found),
            None => log::debug!("growth failed for a tree with {} edges", tree.edge_count()),
        }
    }
    Err(SolveError::Exhausted { best_residual: best.residual, diagnosis: best.diagnosis })
}

#[derive(Debug)]
struct Attempts {
    residual: f64,
    diagnosis: String,
}

impl Default for Attempts {
    fn default() -> Self {
        Attempts { residual: f64::INFINITY, diagnosis: "no attempt made".to_string() }
    }
}

impl Attempts {
    fn record(&mut self, residual: f64, diagnosis: String) {
        if residual <= self.residual || self.residual.is_nan() {
            self.residual = residual;
            self.diagnosis = diagnosis;
        }
    }
}

/// Newton from the given vertex positions, then perturbed retries; each
/// converged result must trace back to `tree`.
fn attempts(
    tree: &PlaneTree,
    positions: &[C64],
    opts: &SolveOptions,
    best: &mut Attempts,
) -> Option<(ShabatPolynomial, TracedTree)> {
    let system = ShabatSystem::new(tree, &solver_coloring(tree));
    let base: Vec<C64> = system.internal.iter().map(|&v| positions[v]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for retry in 0..=opts.max_retries {
        let guess = if retry == 0 { base.clone() } else { perturb(&base, opts.perturbation * retry as f64, &mut rng) };
        let state = initial_state_from_hint(&system, &guess);
        match newton_solve(&system, &state, &opts.newton()) {
            Ok((p, _)) => match trace_tree(&p) {
                Ok(traced) if traced.plane_tree.is_equivalent(tree) => return Some((p, traced)),
                Ok(_) => best.record(p.residual, "converged to a different plane tree".to_string()),
                Err(e) => best.record(p.residual, format!("trace failed: {e}")),
            },
            Err(f) => best.record(f.residual, format!("newton: {:?} after {} iterations", f.kind, f.iterations)),
        }
        if system.internal.len() <= 1 && retry == 0 {
            // One critical point admits no perturbation that helps.
            break;
        }
    }
    None
}

/// Hop distances from `source` within the present vertices.
fn distances_within(tree: &PlaneTree, present: &[bool], source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; tree.vertex_count()];
    dist[source] = 0;
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &w in tree.rotation(v) {
            if present[w] && dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

fn farthest(dist: &[usize]) -> usize {
    (0..dist.len()).filter(|&v| dist[v] != usize::MAX).max_by_key(|&v| (dist[v], std::cmp::Reverse(v))).unwrap_or(0)
}

/// Diameter of the subtree on the present vertices, with the two BFS
/// distance arrays from the ends of a longest path.
fn diameter_within(tree: &PlaneTree, present: &[bool]) -> (usize, Vec<usize>, Vec<usize>) {
    let start = present.iter().position(|&p| p).unwrap_or(0);
    let a = farthest(&distances_within(tree, present, start));
    let da = distances_within(tree, present, a);
    let b = farthest(&da);
    let db = distances_within(tree, present, b);
    (da[b], da, db)
}

/// Leaves in the order they are removed down to a single edge. Each
/// removal keeps the diameter as large as possible; ties go to the lowest
/// edge id.
pub fn peeling_order(tree: &PlaneTree) -> Vec<usize> {
    let n = tree.vertex_count();
    let edge_ids: std::collections::HashMap<(usize, usize), usize> =
        tree.edges().into_iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut present = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|v| tree.degree(v)).collect();
    let mut order = Vec::with_capacity(n.saturating_sub(2));
    for _ in 0..n.saturating_sub(2) {
        let mut leaves: Vec<(usize, usize)> = (0..n)
            .filter(|&v| present[v] && degree[v] == 1)
            .map(|v| {
                let w = *tree.rotation(v).iter().find(|&&w| present[w]).expect("leaf has a neighbour");
                (edge_ids[&(v.min(w), v.max(w))], v)
            })
            .collect();
        leaves.sort_unstable();
        let (diam, da, db) = diameter_within(tree, &present);
        // A leaf ending no longest path can go without shortening it.
        let keeps = |l: usize, present: &mut Vec<bool>| {
            if da[l].max(db[l]) < diam {
                return true;
            }
            present[l] = false;
            let d = diameter_within(tree, present).0;
            present[l] = true;
            d == diam
        };
        let leaf = leaves.iter().map(|&(_, l)| l).find(|&l| keeps(l, &mut present)).unwrap_or(leaves[0].1);
        present[leaf] = false;
        for &w in tree.rotation(leaf) {
            if present[w] {
                degree[w] -= 1;
            }
        }
        order.push(leaf);
    }
    order
}

/// The tree on the present vertices, renumbered in increasing order, and
/// the original id of each new vertex.
fn subtree(tree: &PlaneTree, present: &[bool]) -> (PlaneTree, Vec<usize>) {
    let ids: Vec<usize> = (0..tree.vertex_count()).filter(|&v| present[v]).collect();
    let mut index = vec![usize::MAX; tree.vertex_count()];
    for (i, &v) in ids.iter().enumerate() {
        index[v] = i;
    }
    let rotations = ids
        .iter()
        .map(|&v| tree.rotation(v).iter().filter(|&&w| present[w]).map(|&w| index[w]).collect())
        .collect();
    (PlaneTree::from_rotations_unchecked(rotations), ids)
}

/// State of the growth continuation: the true form of the present subtree
/// and the critical-point index of each original vertex in it.
#[derive(Clone)]
struct Grown {
    poly: Option<ShabatPolynomial>,
    critical: Vec<Option<usize>>,
}

impl Grown {
    fn position(&self, v: usize) -> Option<C64> {
        Some(self.poly.as_ref()?.critical_points[self.critical[v]?].position)
    }

    /// Traces the edges at the internal vertex `u` and pairs them with its
    /// present neighbours counterclockwise. Internal neighbours pin the
    /// pairing; around a star every pairing is an automorphism. Returns
    /// `(neighbour, direction, far end)`, or `None` if no pairing matches.
    fn edges_at(
        &self,
        tree: &PlaneTree,
        present: &[bool],
        coloring: &BipartiteColoring,
        u: usize,
    ) -> Option<Vec<(usize, f64, C64)>> {
        let p = self.poly.as_ref()?;
        let i = self.critical[u]?;
        let cp = p.critical_points[i];
        let vertex = TreeVertex { position: cp.position, value: coloring.color(u), degree: cp.multiplicity + 1 };
        let dirs = local_directions(p, &vertex);
        let ends: Vec<Option<EdgeEnd>> = dirs.iter().map(|&d| trace_edge(p, &vertex, d).ok().map(|e| e.end)).collect();
        let local: Vec<usize> = tree.rotation(u).iter().copied().filter(|&x| present[x]).collect();
        let len = local.len();
        if len != dirs.len() {
            return None;
        }
        let fits = |shift: usize| {
            (0..len).all(|j| match (ends[(shift + j) % len], self.critical[local[j]]) {
                (Some(EdgeEnd::Leaf(_)), None) => true,
                (Some(EdgeEnd::Critical(k)), Some(c)) => k == c,
                _ => false,
            })
        };
        let shift = (0..len).find(|&s| fits(s))?;
        Some(
            (0..len)
                .map(|j| {
                    let k = (shift + j) % len;
                    let end = match ends[k] {
                        Some(EdgeEnd::Leaf(z)) => z,
                        Some(EdgeEnd::Critical(c)) => p.critical_points[c].position,
                        None => unreachable!("checked by fits"),
                    };
                    (local[j], dirs[k].arg(), end)
                })
                .collect(),
        )
    }

    /// Where `leaf` attaches at `w`: the position of `w`, the direction of
    /// the rotational gap the new edge fills, and the length of the
    /// shortest edge at `w`.
    fn gap(&self, tree: &PlaneTree, present: &[bool], coloring: &BipartiteColoring, leaf: usize, w: usize) -> Option<(C64, f64, f64)> {
        let u = *tree.rotation(w).iter().find(|&&x| present[x])?;
        if self.critical[w].is_none() {
            // `w` is still a leaf: continue straight on.
            let (at, from) = match self.poly {
                None => (C64::new(coloring.value(w), 0.0), C64::new(coloring.value(u), 0.0)),
                Some(_) => {
                    let edges = self.edges_at(tree, present, coloring, u)?;
                    (edges.iter().find(|e| e.0 == w)?.2, self.position(u)?)
                }
            };
            return Some((at, (at - from).arg(), (at - from).norm()));
        }
        let at = self.position(w)?;
        let edges = self.edges_at(tree, present, coloring, w)?;
        let rot: Vec<usize> = tree.rotation(w).iter().copied().filter(|&x| present[x] || x == leaf).collect();
        let slot = rot.iter().position(|&x| x == leaf)?;
        let d = rot.len();
        let dir = |x: usize| edges.iter().find(|e| e.0 == x).map(|e| e.1);
        let prev = dir(rot[(slot + d - 1) % d])?;
        let next = dir(rot[(slot + 1) % d])?;
        let gap = (next - prev).rem_euclid(2.0 * PI);
        let beta = prev + if gap == 0.0 { PI } else { gap / 2.0 };
        let reach = edges.iter().map(|e| (e.2 - at).norm()).fold(f64::INFINITY, f64::min);
        Some((at, beta, reach))
    }
}

/// Steps between full traces during growth.
const CHECK_EVERY: usize = 8;

/// Solves by growth: peel leaves down to one edge, whose true form is
/// `p(z) = z`, then add them back one at a time. Each step seeds the
/// homotopy with the previous critical points, the attachment vertex
/// nudged along the gap where the new edge goes, and checks the edges at
/// that vertex. The whole tree is traced every few steps; on a mismatch
/// growth returns to the last verified state and redoes the steps with a
/// full trace each.
fn grow(tree: &PlaneTree, opts: &SolveOptions, best: &mut Attempts) -> Option<(ShabatPolynomial, TracedTree)> {
    let n = tree.vertex_count();
    let coloring = solver_coloring(tree);
    let order: Vec<usize> = peeling_order(tree).into_iter().rev().collect();
    let present_after = |k: usize| {
        let mut present = vec![true; n];
        for &l in &order[k..] {
            present[l] = false;
        }
        present
    };
    let verify = |state: &Grown, present: &[bool]| {
        let traced = trace_tree(state.poly.as_ref()?).ok()?;
        traced.plane_tree.is_equivalent(&subtree(tree, present).0).then_some(traced)
    };
    let mut state = Grown { poly: None, critical: vec![None; n] };
    let mut checkpoint = (0, state.clone());
    let mut strict_until = 0;
    let mut k = 0;
    let mut present = present_after(0);
    while k < order.len() {
        let (leaf, strict) = (order[k], k < strict_until);
        let w = *tree.rotation(leaf).iter().find(|&&x| present[x])?;
        let found = state.gap(tree, &present, &coloring, leaf, w).and_then(|(at, beta, reach)| {
            present[leaf] = true;
            let (sub, ids) = subtree(tree, &present);
            let root = ids.iter().position(|&v| coloring.color(v) > 0)?;
            let system = ShabatSystem::new(&sub, &sub.bipartite_coloring(root));
            let reach = if reach.is_finite() && reach > 0.0 { reach } else { 1.0 };
            for offset in [0.5, 0.8, 0.3, 1.2, -0.5, 0.15] {
                let seed = at + C64::from_polar(offset * reach, beta);
                let guess: Option<Vec<C64>> =
                    system.internal.iter().map(|&s| if ids[s] == w { Some(seed) } else { state.position(ids[s]) }).collect();
                let (initial, _, _) = fit_hint(&system, &guess?);
                let p = match homotopy_solve(&system, &initial, &opts.newton()) {
                    Ok((p, _)) => p,
                    Err(f) => {
                        best.record(f.residual, format!("growth step {k}: newton {:?}", f.kind));
                        continue;
                    }
                };
                let residual = p.residual;
                let mut critical = vec![None; n];
                for (i, &s) in system.internal.iter().enumerate() {
                    critical[ids[s]] = Some(i);
                }
                let next = Grown { poly: Some(p), critical };
                if next.edges_at(tree, &present, &coloring, w).is_some() && (!strict || verify(&next, &present).is_some()) {
                    return Some(next);
                }
                best.record(residual, format!("growth step {k}: new edge misplaced"));
            }
            None
        });
        // The first step to redo if something failed.
        let failed_from = match found {
            Some(next) => {
                state = next;
                k += 1;
                let due = k == order.len() || k - checkpoint.0 >= CHECK_EVERY;
                if strict || !due || verify(&state, &present).is_some() {
                    if strict || due {
                        checkpoint = (k, state.clone());
                    }
                    continue;
                }
                k
            }
            None => k + 1,
        };
        if strict || failed_from <= checkpoint.0 + 1 {
            log::debug!("growth stopped after {k} of {} steps", order.len());
            return None;
        }
        // Some step since the checkpoint went astray: redo them carefully.
        strict_until = failed_from;
        k = checkpoint.0;
        state = checkpoint.1.clone();
        present = present_after(k);
    }
    let p = state.poly.clone()?;
    match verify(&state, &present) {
        Some(traced) => Some((p, traced)),
        None => {
            best.record(p.residual, "growth reached a different plane tree".to_string());
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane_tree::enumerate_plane_trees;
    use crate::shabat::{compare_up_to_similarity, expand};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn one_edge_is_identity() {
        let p = solve(&PlaneTree::path(1), None, &SolveOptions::default()).unwrap();
        assert_eq!(p.coefficients, vec![c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn star8() {
        let p = solve(&PlaneTree::star(8), None, &SolveOptions::default()).unwrap();
        let want = expand(&[(c(0.0, 0.0), 7)], c(-1.0, 0.0));
        assert!(crate::poly::sup_distance(&p.coefficients, &want) < 1e-12);
    }

    #[test]
    fn radial_layout_respects_rotations() {
        for tree in enumerate_plane_trees(5).unwrap() {
            let pos = radial_layout(&tree);
            let geom = GeomTree::straight(&tree, &pos);
            geom.validate().unwrap();
            assert!(geom.derive_rotation_system().unwrap().is_equivalent(&tree));
        }
    }

    #[test]
    fn all_small_trees_solve() {
        let opts = SolveOptions::default();
        for n in 1..=5 {
            for tree in enumerate_plane_trees(n).unwrap() {
                let p = solve(&tree, None, &opts).unwrap_or_else(|e| panic!("{:?}: {e}", tree.rotations()));
                assert!(p.residual <= opts.stall_tol);
            }
        }
    }

    #[test]
    fn path3_from_grid_hint() {
        let tree = PlaneTree::path(3);
        let pos = vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let hint = GeomTree::straight(&tree, &pos);
        let p = solve(&tree, Some(&hint), &SolveOptions::default()).unwrap();
        let t3 = ShabatPolynomial::from_coefficients(vec![c(0.0, 0.0), c(-3.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert!(compare_up_to_similarity(&p, &t3).unwrap() < 1e-10);
    }

    #[test]
    fn hint_size_is_checked() {
        let tree = PlaneTree::path(2);
        let hint = GeomTree::straight(&PlaneTree::path(1), &[c(0.0, 0.0), c(1.0, 0.0)]);
        let err = solve(&tree, Some(&hint), &SolveOptions::default()).unwrap_err();
        assert_eq!(err, SolveError::HintMismatch { expected: 3, found: 2 });
    }

    #[test]
    fn growth_alone_solves_small_trees() {
        let opts = SolveOptions::default();
        let mut best = Attempts::default();
        for tree in enumerate_plane_trees(7).unwrap() {
            let (p, traced) = grow(&tree, &opts, &mut best).unwrap_or_else(|| panic!("{:?}", tree.rotations()));
            assert!(traced.plane_tree.is_equivalent(&tree));
            assert!(p.residual <= opts.stall_tol);
        }
    }

    #[test]
    fn peeling_keeps_a_diameter() {
        // A spider with legs 1, 2, 3 peels its short legs first.
        let tree = PlaneTree::new(vec![vec![1, 2, 4], vec![0], vec![0, 3], vec![2], vec![0, 5], vec![4, 6], vec![5]]).unwrap();
        let order = peeling_order(&tree);
        assert_eq!(order.len(), 5);
        assert_eq!(&order[..3], &[1, 3, 2]);
    }
}
