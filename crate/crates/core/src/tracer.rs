//! Reconstruction of the tree `p^{-1}([-1, 1])` from a Shabat polynomial.
//!
//! Each edge is the preimage of `[-1, 1]` joining a vertex with `p = e` to
//! one with `p = -e`. It is followed by continuation in `t = p(z)`, starting
//! on the branch given by the local model `p(a + h) - e ~ c_d h^d` at the
//! starting vertex.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::geom_tree::{GeomEdge, GeomTree};
use crate::plane_tree::{PlaneTree, TreeViolation};
use crate::poly::{aberth_roots, cluster_roots};
use crate::shabat::{ProductForm, ShabatPolynomial};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraceError {
    #[error("root finding failed: {0}")]
    Roots(#[from] crate::poly::RootError),
    #[error("step size collapsed at t = {t} near {z} (wrong polynomial or a critical point off the tree?)")]
    StepCollapse { t: f64, z: String },
    #[error("the local model could not be matched at vertex {vertex}")]
    BadStart { vertex: usize },
    #[error("traced {found} edges but the degree is {expected}")]
    EdgeCountMismatch { found: usize, expected: usize },
    #[error("half-edge from vertex {vertex} direction {direction} has no partner")]
    UnmatchedHalfEdge { vertex: usize, direction: usize },
    #[error("traces of the same edge from both ends disagree by {0:e}")]
    Inconsistent(f64),
    #[error("traced combinatorics are invalid: {0}")]
    Combinatorics(#[from] TreeViolation),
}

/// A vertex of the tree: a root of `p - value` of order `degree`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeVertex {
    #[serde(with = "crate::io::complex_string")]
    pub position: C64,
    pub value: i8,
    pub degree: usize,
}

/// All vertices by root finding on `p - 1` and `p + 1` with clustering.
///
/// Works from the expanded coefficients, so it is meant for small degrees;
/// [`trace_tree`] finds leaves by continuation instead.
pub fn vertices(p: &ShabatPolynomial) -> Result<Vec<TreeVertex>, TraceError> {
    let mut out = Vec::new();
    for value in [1i8, -1] {
        let mut q = p.coefficients.clone();
        q[0] -= value as f64;
        let roots = aberth_roots(&q)?;
        for cl in cluster_roots(&roots, 1e-6) {
            out.push(TreeVertex { position: cl.centre, value, degree: cl.multiplicity });
        }
    }
    Ok(out)
}

/// `p` through the product form, anchored at the nearest critical point.
pub(crate) struct Evaluator {
    form: ProductForm,
    values: Vec<C64>,
    c0: C64,
}

impl Evaluator {
    pub(crate) fn new(p: &ShabatPolynomial) -> Self {
        let form = p.product_form();
        let c0 = p.c0();
        let values = form.critical_integrals().into_iter().map(|v| v + c0).collect();
        Evaluator { form, values, c0 }
    }

    pub(crate) fn p(&self, z: C64) -> C64 {
        let (anchor, delta) = self.form.anchored(z);
        anchor.map_or(self.c0, |i| self.values[i]) + delta
    }

    pub(crate) fn dp(&self, z: C64) -> C64 {
        self.form.derivative(z)
    }

    /// Leading Taylor coefficient of `p - p(a)` at `a`, of order `d`.
    fn leading(&self, a: C64, d: usize, skip: Option<usize>) -> C64 {
        let mut acc = self.form.factor() / d as f64;
        for (u, &(b, m)) in self.form.critical_points().iter().enumerate() {
            if Some(u) != skip {
                acc *= (a - b).powi(m as i32);
            }
        }
        acc
    }

    /// Distance from `a` to the nearest critical point other than `skip`.
    fn separation(&self, a: C64, skip: Option<usize>) -> f64 {
        self.form
            .critical_points()
            .iter()
            .enumerate()
            .filter(|(u, _)| Some(*u) != skip)
            .map(|(_, &(b, _))| (a - b).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Directions at `a` along which `p` enters `(-1, 1)` from `value`: the
/// solutions of `arg c_d + d theta = (value = 1 ? pi : 0) mod 2 pi`.
pub fn directions_from_leading(c_d: C64, d: usize, value: i8) -> Vec<f64> {
    let target = if value > 0 { PI } else { 0.0 };
    (0..d)
        .map(|k| ((target - c_d.arg() + 2.0 * PI * k as f64) / d as f64).rem_euclid(2.0 * PI))
        .collect()
}

/// Unit directions of the edges leaving `vertex`, in counterclockwise order.
pub fn local_directions(p: &ShabatPolynomial, vertex: &TreeVertex) -> Vec<C64> {
    let ev = Evaluator::new(p);
    let skip = critical_index(&ev, vertex.position);
    let c = ev.leading(vertex.position, vertex.degree, skip);
    let mut th = directions_from_leading(c, vertex.degree, vertex.value);
    th.sort_by(f64::total_cmp);
    th.into_iter().map(|t| C64::from_polar(1.0, t)).collect()
}

fn critical_index(ev: &Evaluator, a: C64) -> Option<usize> {
    let scale = ev.form.critical_points().iter().map(|c| c.0.norm()).fold(1.0, f64::max);
    ev.form
        .critical_points()
        .iter()
        .position(|&(b, _)| (a - b).norm() <= 1e-9 * scale)
}

/// Where a traced edge ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeEnd {
    Critical(usize),
    Leaf(C64),
}

/// One traced edge.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedEdge {
    pub polyline: Vec<C64>,
    /// `p` (real) at each polyline point.
    pub params: Vec<f64>,
    pub end: EdgeEnd,
}

const START_GAP: f64 = 1e-8;
const END_GAP: f64 = 1e-6;
/// Largest gap at which a local-model snap to the end vertex is tried.
const SNAP_GAP: f64 = 1e-2;
const MAX_DU: f64 = 1.0 / 32.0;
const MAX_STEPS: usize = 100_000;

/// Starting radius at a vertex: where the local model puts `|p - e|` at
/// `gap`, capped well below the distance to other critical points.
fn start_radius(ev: &Evaluator, a: C64, d: usize, skip: Option<usize>, gap: f64) -> (f64, f64) {
    let c = ev.leading(a, d, skip).norm();
    let mut r = (gap / c).powf(1.0 / d as f64);
    let sep = ev.separation(a, skip);
    if r > 0.05 * sep {
        r = 0.05 * sep;
    }
    (r, (c * r.powi(d as i32)).min(gap))
}

pub(crate) fn newton_to(ev: &Evaluator, mut z: C64, t: f64, iters: usize) -> (C64, usize, bool) {
    for k in 0..iters {
        let f = ev.p(z) - t;
        let d = ev.dp(z);
        if d.norm() == 0.0 {
            return (z, k, false);
        }
        let dz = f / d;
        z -= dz;
        if dz.norm() <= 1e-15 * (1.0 + z.norm()) || f.norm() <= 1e-15 {
            return (z, k + 1, true);
        }
    }
    let ok = (ev.p(z) - t).norm() <= 1e-11;
    (z, iters, ok)
}

/// Follows the edge leaving `start` (value `value`, degree `d`) in
/// direction `theta` until it reaches a critical point or a leaf.
fn trace_from(
    ev: &Evaluator,
    start: C64,
    d: usize,
    value: i8,
    skip: Option<usize>,
    theta: f64,
) -> Result<TracedEdge, TraceError> {
    let e = value as f64;
    let (r0, gap) = start_radius(ev, start, d, skip, START_GAP);
    let u0 = (1.0 - gap).acos() / PI;
    let t0 = e * (PI * u0).cos();
    let (mut z, _, ok) = newton_to(ev, start + C64::from_polar(r0, theta), t0, 20);
    let moved = (z - start).norm();
    if !ok || (z - start - C64::from_polar(moved, theta)).norm() > 0.5 * moved {
        return Err(TraceError::BadStart { vertex: skip.unwrap_or(usize::MAX) });
    }
    let mut polyline = vec![start, z];
    let mut params = vec![e, t0];
    let mut u = u0;
    let mut t = t0;
    let mut h = MAX_DU / 2.0;
    let mut steps = 0;
    // Critical points the edge may end at, with their end radii factors.
    let ends: Vec<(usize, C64, usize, f64)> = ev
        .form
        .critical_points()
        .iter()
        .enumerate()
        .filter(|(i, _)| ev.values[*i].re * e < 0.0)
        .map(|(i, &(a, m))| (i, a, m + 1, ev.leading(a, m + 1, Some(i)).norm()))
        .collect();
    loop {
        steps += 1;
        if steps > MAX_STEPS || h < 1e-12 {
            return Err(TraceError::StepCollapse { t, z: format!("{z}") });
        }
        let u1 = (u + h).min(1.0);
        let t1 = e * (PI * u1).cos();
        let dp = ev.dp(z);
        let zp = z + (t1 - t) / dp;
        let (zc, iters, ok) = newton_to(ev, zp, t1, 4);
        let step = zp - z;
        let bend = if polyline.len() >= 2 {
            let prev = z - polyline[polyline.len() - 2];
            let next = zc - z;
            if prev.norm() > 0.0 && next.norm() > 0.0 { (next / prev).arg().abs() } else { 0.0 }
        } else {
            0.0
        };
        // Steps stay within half the distance to the nearest critical
        // point, where the linear predictor is trustworthy.
        let reach = 0.5 * ev.separation(z, None);
        let good = ok
            && (zc - zp).norm() <= 0.3 * step.norm() + 1e-14
            && bend <= 0.25
            && (zc - z).norm() > 0.0
            && (zc - z).norm() <= reach;
        if !good {
            h *= 0.5;
            continue;
        }
        z = zc;
        u = u1;
        t = t1;
        polyline.push(z);
        params.push(t);
        if iters <= 3 {
            h = (h * 1.5).min(MAX_DU);
        }
        let gap_end = (t + e).abs();
        if gap_end <= SNAP_GAP {
            for &(i, a, dd, c) in &ends {
                let r = (gap_end.max(1e-300) / c).powf(1.0 / dd as f64);
                let near = (z - a).norm() <= 4.0 * r;
                // Inside the basin of `a` the local model already fits.
                let model = ev.leading(a, dd, Some(i)) * (z - a).powi(dd as i32);
                let fits = (model - (t + e)).norm() <= 0.05 * gap_end && (z - a).norm() <= 0.2 * ev.separation(a, Some(i));
                if (near && gap_end <= END_GAP) || fits {
                    polyline.push(a);
                    params.push(-e);
                    return Ok(TracedEdge { polyline, params, end: EdgeEnd::Critical(i) });
                }
            }
        }
        if u >= 1.0 {
            let (leaf, _, ok) = newton_to(ev, z, -e, 20);
            if !ok {
                return Err(TraceError::StepCollapse { t, z: format!("{z}") });
            }
            *polyline.last_mut().expect("nonempty") = leaf;
            *params.last_mut().expect("nonempty") = -e;
            return Ok(TracedEdge { polyline, params, end: EdgeEnd::Leaf(leaf) });
        }
    }
}

/// Traces the edge leaving a vertex in the given direction.
pub fn trace_edge(p: &ShabatPolynomial, vertex: &TreeVertex, direction: C64) -> Result<TracedEdge, TraceError> {
    let ev = Evaluator::new(p);
    let skip = critical_index(&ev, vertex.position);
    trace_from(&ev, vertex.position, vertex.degree, vertex.value, skip, direction.arg())
}

/// The traced tree with its combinatorics.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedTree {
    pub geometry: GeomTree,
    /// Critical points first (in the polynomial's order), then leaves.
    pub vertices: Vec<TreeVertex>,
    /// Values of `p` along each edge polyline.
    pub params: Vec<Vec<f64>>,
    pub plane_tree: PlaneTree,
}

/// Point on a traced edge where `p = 0`, by interpolation and polishing.
fn midpoint(ev: &Evaluator, edge: &TracedEdge) -> C64 {
    let k = edge
        .params
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(k, _)| k)
        .expect("nonempty");
    newton_to(ev, edge.polyline[k], 0.0, 20).0
}

/// Traces every edge and recovers the plane tree.
pub fn trace_tree(p: &ShabatPolynomial) -> Result<TracedTree, TraceError> {
    let ev = Evaluator::new(p);
    let n = p.degree;
    let crit = ev.form.critical_points().to_vec();
    let scale = crit.iter().map(|c| c.0.norm()).fold(0.0, f64::max).max(ev.c0.norm()).max(1e-300);
    let snap = 1e-7 * scale.max(1.0);

    if crit.is_empty() {
        // A single edge between the two roots of the linear polynomial.
        let c1 = p.coefficients[1];
        let a = (C64::new(1.0, 0.0) - ev.c0) / c1;
        let b = (C64::new(-1.0, 0.0) - ev.c0) / c1;
        let th = directions_from_leading(c1, 1, 1)[0];
        let edge = trace_from(&ev, a, 1, 1, None, th)?;
        let geometry = GeomTree {
            vertices: vec![a, b],
            edges: vec![GeomEdge { from: 0, to: 1, polyline: edge.polyline }],
        };
        return Ok(TracedTree {
            geometry,
            vertices: vec![
                TreeVertex { position: a, value: 1, degree: 1 },
                TreeVertex { position: b, value: -1, degree: 1 },
            ],
            params: vec![edge.params],
            plane_tree: PlaneTree::new(vec![vec![1], vec![0]])?,
        });
    }

    let values: Vec<i8> = ev.values.iter().map(|v| if v.re >= 0.0 { 1 } else { -1 }).collect();
    let mut vertices: Vec<TreeVertex> = crit
        .iter()
        .zip(&values)
        .map(|(&(a, m), &value)| TreeVertex { position: a, value, degree: m + 1 })
        .collect();
    // Directions at each critical point, counterclockwise.
    let dirs: Vec<Vec<f64>> = crit
        .iter()
        .enumerate()
        .map(|(i, &(a, m))| {
            let mut th = directions_from_leading(ev.leading(a, m + 1, Some(i)), m + 1, values[i]);
            th.sort_by(f64::total_cmp);
            th
        })
        .collect();

    let jobs: Vec<(usize, usize)> = dirs.iter().enumerate().flat_map(|(i, d)| (0..d.len()).map(move |k| (i, k))).collect();
    let traced: Vec<Result<TracedEdge, TraceError>> = {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|&(i, k)| trace_from(&ev, crit[i].0, crit[i].1 + 1, values[i], Some(i), dirs[i][k]))
            .collect()
    };

    let mut neighbours: Vec<Vec<usize>> = dirs.iter().map(|d| vec![usize::MAX; d.len()]).collect();
    let mut arrivals: Vec<Vec<Option<(usize, usize)>>> = dirs.iter().map(|d| vec![None; d.len()]).collect();
    let mut edges: Vec<GeomEdge> = Vec::new();
    let mut params: Vec<Vec<f64>> = Vec::new();
    let mut leaf_rotations: Vec<Vec<usize>> = Vec::new();
    let mut internal: Vec<(usize, usize, TracedEdge)> = Vec::new();
    for (&(i, k), res) in jobs.iter().zip(traced) {
        let edge = res?;
        match edge.end {
            EdgeEnd::Critical(j) => {
                let before = edge.polyline[edge.polyline.len() - 2];
                let arrival = (before - crit[j].0).arg().rem_euclid(2.0 * PI);
                arrivals[i][k] = Some((j, nearest_angle(&dirs[j], arrival)));
                neighbours[i][k] = j;
                internal.push((i, k, edge));
            }
            EdgeEnd::Leaf(z) => {
                if let Some(existing) = vertices[crit.len()..].iter().position(|v| (v.position - z).norm() <= snap) {
                    return Err(TraceError::UnmatchedHalfEdge { vertex: crit.len() + existing, direction: 0 });
                }
                let id = vertices.len();
                vertices.push(TreeVertex { position: z, value: -values[i], degree: 1 });
                leaf_rotations.push(vec![i]);
                neighbours[i][k] = id;
                // Trace back from the leaf as a check.
                let back_dir = directions_from_leading(ev.dp(z), 1, -values[i])[0];
                let back = trace_from(&ev, z, 1, -values[i], None, back_dir)?;
                if back.end != EdgeEnd::Critical(i) {
                    return Err(TraceError::UnmatchedHalfEdge { vertex: id, direction: 0 });
                }
                let gap = (midpoint(&ev, &edge) - midpoint(&ev, &back)).norm();
                if gap > 1e-8 * scale.max(1.0) {
                    return Err(TraceError::Inconsistent(gap));
                }
                edges.push(GeomEdge { from: i, to: id, polyline: edge.polyline });
                params.push(edge.params);
            }
        }
    }
    // Edges between critical points are traced from both ends; the two
    // traces must pair up and agree.
    let mut partner: std::collections::HashMap<(usize, usize), &TracedEdge> = Default::default();
    for (i, k, edge) in &internal {
        partner.insert((*i, *k), edge);
    }
    for (i, k, edge) in &internal {
        let (j, l) = arrivals[*i][*k].expect("recorded");
        if arrivals[j][l] != Some((*i, *k)) {
            return Err(TraceError::UnmatchedHalfEdge { vertex: *i, direction: *k });
        }
        if *i < j {
            let gap = (midpoint(&ev, edge) - midpoint(&ev, partner[&(j, l)])).norm();
            if gap > 1e-8 * scale.max(1.0) {
                return Err(TraceError::Inconsistent(gap));
            }
            edges.push(GeomEdge { from: *i, to: j, polyline: edge.polyline.clone() });
            params.push(edge.params.clone());
        }
    }
    if edges.len() != n {
        return Err(TraceError::EdgeCountMismatch { found: edges.len(), expected: n });
    }
    if neighbours.iter().flatten().any(|&x| x == usize::MAX) {
        return Err(TraceError::EdgeCountMismatch { found: edges.len(), expected: n });
    }
    let mut rotations = neighbours;
    rotations.extend(leaf_rotations);
    let plane_tree = PlaneTree::new(rotations)?;
    let geometry = GeomTree { vertices: vertices.iter().map(|v| v.position).collect(), edges };
    Ok(TracedTree { geometry, vertices, params, plane_tree })
}

fn nearest_angle(list: &[f64], x: f64) -> usize {
    let dist = |a: f64| {
        let d = (a - x).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    };
    (0..list.len()).min_by(|&a, &b| dist(list[a]).total_cmp(&dist(list[b]))).expect("nonempty")
}
