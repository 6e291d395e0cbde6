//! Grid trees: cover a compact set by closed dyadic squares, take a
//! spanning tree of the square corners, and pad every vertex to degree 1 or 4
//! with quarter-length stubs.
//!
//! Coordinates are integers in units of a quarter cell, so all of the
//! geometry is exact.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::geom_tree::{GeomEdge, GeomTree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("point set is empty")]
    EmptyInput,
    #[error("point set contains a non-finite coordinate")]
    NonFinite,
    #[error("depth {0} is outside the supported range")]
    DepthOutOfRange(i32),
    #[error("cover is disconnected: {components} components (is K connected and sampled finer than the grid?)")]
    Disconnected { components: usize },
}

/// Closed squares `[i, i+1] x [j, j+1]` scaled by `2^-depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicCover {
    pub depth: i32,
    pub squares: BTreeSet<(i64, i64)>,
    /// Largest gap between consecutive input samples, in cells. Values at or
    /// above 1 mean the cover may miss parts of a continuum.
    pub max_gap_cells: f64,
}

impl DyadicCover {
    pub fn cell_size(&self) -> f64 {
        (-self.depth as f64).exp2()
    }

    pub fn undersampled(&self) -> bool {
        self.max_gap_cells >= 1.0
    }
}

fn check_depth(depth: i32) -> Result<(), GridError> {
    if (-20..=40).contains(&depth) {
        Ok(())
    } else {
        Err(GridError::DepthOutOfRange(depth))
    }
}

/// Cells along one axis that contain coordinate `x` (two when `x` is on a
/// grid line).
fn cells_1d(x: f64, depth: i32) -> impl Iterator<Item = i64> {
    let s = x * (depth as f64).exp2();
    let f = s.floor();
    let i = f as i64;
    let on_line = s == f;
    (if on_line { i - 1 } else { i })..=i
}

/// All closed dyadic squares of side `2^-depth` that contain a sample.
pub fn dyadic_cover(k: &[C64], depth: i32) -> Result<DyadicCover, GridError> {
    check_depth(depth)?;
    if k.is_empty() {
        return Err(GridError::EmptyInput);
    }
    if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(GridError::NonFinite);
    }
    let mut squares = BTreeSet::new();
    for z in k {
        for i in cells_1d(z.re, depth) {
            for j in cells_1d(z.im, depth) {
                squares.insert((i, j));
            }
        }
    }
    let cell = (-depth as f64).exp2();
    let max_gap = k.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max) / cell;
    if max_gap >= 1.0 {
        log::warn!(
            "samples are {max_gap:.2} cells apart at depth {depth}; the cover may not be connected"
        );
    }
    Ok(DyadicCover { depth, squares, max_gap_cells: max_gap })
}

const DIRECTIONS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Spanning tree of the corner/edge graph of a cover, in cell units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpanningTree {
    pub depth: i32,
    /// Corners in breadth-first discovery order; the root is first.
    pub corners: Vec<(i64, i64)>,
    /// `(parent, child)` corner indices, in discovery order.
    pub edges: Vec<(usize, usize)>,
}

/// Breadth-first spanning tree from the lexicographically least corner,
/// exploring neighbours in E, N, W, S order.
pub fn spanning_tree(cover: &DyadicCover) -> Result<GridSpanningTree, GridError> {
    if cover.squares.is_empty() {
        return Err(GridError::EmptyInput);
    }
    let mut graph_edges: BTreeSet<((i64, i64), (i64, i64))> = BTreeSet::new();
    let mut all_corners: BTreeSet<(i64, i64)> = BTreeSet::new();
    for &(i, j) in &cover.squares {
        let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
        for k in 0..4 {
            let (a, b) = (c[k], c[(k + 1) % 4]);
            graph_edges.insert((a.min(b), a.max(b)));
            all_corners.insert(c[k]);
        }
    }
    let root = *all_corners.iter().next().expect("nonempty");
    let mut index: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut corners = vec![root];
    let mut edges = Vec::new();
    index.insert(root, 0);
    let mut queue = VecDeque::from([root]);
    while let Some(p) = queue.pop_front() {
        for (dx, dy) in DIRECTIONS {
            let q = (p.0 + dx, p.1 + dy);
            if index.contains_key(&q) || !graph_edges.contains(&(p.min(q), p.max(q))) {
                continue;
            }
            index.insert(q, corners.len());
            edges.push((index[&p], corners.len()));
            corners.push(q);
            queue.push_back(q);
        }
    }
    if corners.len() != all_corners.len() {
        return Err(GridError::Disconnected { components: count_components(&all_corners, &graph_edges) });
    }
    Ok(GridSpanningTree { depth: cover.depth, corners, edges })
}

fn count_components(corners: &BTreeSet<(i64, i64)>, edges: &BTreeSet<((i64, i64), (i64, i64))>) -> usize {
    let mut seen: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut count = 0;
    for &start in corners {
        if !seen.insert(start) {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            for (dx, dy) in DIRECTIONS {
                let q = (p.0 + dx, p.1 + dy);
                if edges.contains(&(p.min(q), p.max(q))) && seen.insert(q) {
                    stack.push(q);
                }
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridEdgeKind {
    Grid,
    Stub,
}

/// A grid tree: every vertex has degree 1 or 4 and every edge is axis
/// parallel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTree {
    pub depth: i32,
    /// Vertex positions in quarter-cell units.
    pub lattice: Vec<(i64, i64)>,
    pub edges: Vec<(usize, usize)>,
    pub kinds: Vec<GridEdgeKind>,
}

impl GridTree {
    /// Side of a quarter cell, `2^-(depth+2)`.
    pub fn unit(&self) -> f64 {
        (-(self.depth as f64) - 2.0).exp2()
    }

    pub fn position(&self, v: usize) -> C64 {
        let (x, y) = self.lattice[v];
        C64::new(x as f64, y as f64) * self.unit()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.lattice.len()];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn to_geom(&self) -> GeomTree {
        let vertices: Vec<C64> = (0..self.lattice.len()).map(|v| self.position(v)).collect();
        let edges = self
            .edges
            .iter()
            .map(|&(a, b)| GeomEdge::straight(a, b, vertices[a], vertices[b]))
            .collect();
        GeomTree { vertices, edges }
    }
}

/// Pads every vertex of degree 2 or 3 with stubs of a quarter cell in its
/// unused directions, taken in E, N, W, S order.
pub fn fix_degrees(tree: &GridSpanningTree) -> GridTree {
    let mut lattice: Vec<(i64, i64)> = tree.corners.iter().map(|&(x, y)| (4 * x, 4 * y)).collect();
    let mut edges = tree.edges.clone();
    let mut kinds = vec![GridEdgeKind::Grid; edges.len()];
    let mut used = vec![[false; 4]; lattice.len()];
    for &(a, b) in &tree.edges {
        let (pa, pb) = (tree.corners[a], tree.corners[b]);
        let d = (pb.0 - pa.0, pb.1 - pa.1);
        let k = DIRECTIONS.iter().position(|&q| q == d).expect("unit grid edge");
        used[a][k] = true;
        used[b][(k + 2) % 4] = true;
    }
    let corner_count = lattice.len();
    for v in 0..corner_count {
        let degree = used[v].iter().filter(|&&u| u).count();
        if degree == 1 || degree == 4 {
            continue;
        }
        assert!(degree >= 2, "spanning tree vertex of degree {degree}");
        for k in 0..4 {
            if used[v][k] {
                continue;
            }
            let (x, y) = lattice[v];
            let tip = (x + DIRECTIONS[k].0, y + DIRECTIONS[k].1);
            lattice.push(tip);
            edges.push((v, lattice.len() - 1));
            kinds.push(GridEdgeKind::Stub);
        }
    }
    let out = GridTree { depth: tree.depth, lattice, edges, kinds };
    debug_assert!(out.degrees().iter().all(|&d| d == 1 || d == 4) || out.edges.is_empty());
    out
}

/// Cover, spanning tree and degree fixing in one step. The result is within
/// `2^(1-depth)` of `k` in the Hausdorff metric.
pub fn approximate(k: &[C64], depth: i32) -> Result<GridTree, GridError> {
    let cover = dyadic_cover(k, depth)?;
    let tree = spanning_tree(&cover)?;
    Ok(fix_degrees(&tree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom_tree::hausdorff_distance;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_point_cover() {
        let cov = dyadic_cover(&[c(0.1, 0.1)], 0).unwrap();
        assert_eq!(cov.squares.into_iter().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn closed_cells_on_lines() {
        let cov = dyadic_cover(&[c(0.5, 0.0)], 1).unwrap();
        let want: BTreeSet<_> = [(0, -1), (0, 0), (1, -1), (1, 0)].into_iter().collect();
        assert_eq!(cov.squares, want);
    }

    #[test]
    fn single_cell_bfs() {
        let cov = dyadic_cover(&[c(0.5, 0.5)], 0).unwrap();
        let t = spanning_tree(&cov).unwrap();
        assert_eq!(t.corners, vec![(0, 0), (1, 0), (0, 1), (1, 1)]);
        // BFS from (0,0): E, N, then N from (1,0); the top side is left out.
        assert_eq!(t.edges, vec![(0, 1), (0, 2), (1, 3)]);
    }

    #[test]
    fn two_cells() {
        let cov = dyadic_cover(&[c(0.5, 0.5), c(1.5, 0.5)], 0).unwrap();
        let t = spanning_tree(&cov).unwrap();
        assert_eq!(t.corners.len(), 6);
        assert_eq!(t.edges.len(), 5);
    }

    #[test]
    fn disconnected_reported() {
        let cov = dyadic_cover(&[c(0.5, 0.5), c(5.5, 0.5)], 0).unwrap();
        assert!(cov.undersampled());
        assert_eq!(spanning_tree(&cov), Err(GridError::Disconnected { components: 2 }));
    }

    #[test]
    fn stubs_on_straight_and_corner() {
        // Straight path (0,0)-(1,0)-(2,0).
        let t = GridSpanningTree { depth: 0, corners: vec![(0, 0), (1, 0), (2, 0)], edges: vec![(0, 1), (1, 2)] };
        let g = fix_degrees(&t);
        assert_eq!(g.lattice[3..], [(4, 1), (4, -1)]);
        assert!(g.degrees().iter().all(|&d| d == 1 || d == 4));
        // Corner with arms E and N gets W and S stubs.
        let t = GridSpanningTree { depth: 0, corners: vec![(0, 0), (1, 0), (0, 1)], edges: vec![(0, 1), (0, 2)] };
        let g = fix_degrees(&t);
        assert_eq!(g.lattice[3..], [(-1, 0), (0, -1)]);
    }

    #[test]
    fn empty_input() {
        assert_eq!(dyadic_cover(&[], 2), Err(GridError::EmptyInput));
    }

    #[test]
    fn single_point_within_bound() {
        let k = [c(0.3, 0.7)];
        let g = approximate(&k, 2).unwrap();
        let geom = g.to_geom();
        geom.validate().unwrap();
        let d = hausdorff_distance(&geom.sample_points(1e-3), &k).unwrap();
        assert!(d <= 0.5, "{d}");
    }
}
