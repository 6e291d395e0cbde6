//! Combinatorial plane trees: a tree together with a rotation system, the
//! counterclockwise cyclic order of neighbours around every vertex.
//!
//! Two plane trees are equivalent when an orientation-preserving
//! homeomorphism of the plane carries one onto the other. That is the same
//! as an isomorphism of rotation systems, and it is decided here through a
//! canonical boundary-walk code.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// First invariant a candidate tree breaks.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeViolation {
    #[error("tree has no vertices")]
    Empty,
    #[error("vertex {vertex} lists neighbour {neighbour}, which does not exist")]
    NeighbourOutOfRange { vertex: usize, neighbour: usize },
    #[error("vertex {vertex} lists itself as a neighbour")]
    SelfLoop { vertex: usize },
    #[error("vertex {vertex} lists neighbour {neighbour} more than once")]
    DuplicateNeighbour { vertex: usize, neighbour: usize },
    #[error("vertex {vertex} lists {neighbour} but not conversely")]
    Asymmetric { vertex: usize, neighbour: usize },
    #[error("cycle: {edges} edges on {vertices} vertices (a tree has {})", vertices - 1)]
    Cycle { vertices: usize, edges: usize },
    #[error("disconnected: vertex {unreached} is not reachable from vertex 0")]
    Disconnected { unreached: usize },
}

/// A finite plane tree given by its rotation system.
///
/// `rotations[v]` lists the neighbours of `v` in counterclockwise order.
/// The starting point of each list is irrelevant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeJson", into = "TreeJson")]
pub struct PlaneTree {
    rotations: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    vertices: usize,
    rotations: Vec<Vec<usize>>,
}

impl TryFrom<TreeJson> for PlaneTree {
    type Error = String;

    fn try_from(raw: TreeJson) -> Result<Self, Self::Error> {
        if raw.vertices != raw.rotations.len() {
            return Err(format!(
                "\"vertices\" is {} but {} rotation lists were given",
                raw.vertices,
                raw.rotations.len()
            ));
        }
        PlaneTree::new(raw.rotations).map_err(|e| e.to_string())
    }
}

impl From<PlaneTree> for TreeJson {
    fn from(t: PlaneTree) -> Self {
        TreeJson { vertices: t.rotations.len(), rotations: t.rotations }
    }
}

/// Per-vertex target critical value, `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteColoring {
    colors: Vec<i8>,
}

impl BipartiteColoring {
    pub fn color(&self, v: usize) -> i8 {
        self.colors[v]
    }

    pub fn value(&self, v: usize) -> f64 {
        f64::from(self.colors[v])
    }

    pub fn colors(&self) -> &[i8] {
        &self.colors
    }

    pub fn negated(&self) -> Self {
        BipartiteColoring { colors: self.colors.iter().map(|c| -c).collect() }
    }
}

/// Boundary-walk code over the alphabet `d` (descend) / `u` (return).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalCode(String);

impl CanonicalCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A directed edge, encoded as (tail vertex, index into the tail's rotation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart {
    pub vertex: usize,
    pub slot: usize,
}

impl PlaneTree {
    pub fn new(rotations: Vec<Vec<usize>>) -> Result<Self, TreeViolation> {
        let tree = PlaneTree { rotations };
        tree.validate()?;
        Ok(tree)
    }

    /// Builds a tree without checking invariants. Use [`validate`](Self::validate)
    /// before relying on it.
    pub fn from_rotations_unchecked(rotations: Vec<Vec<usize>>) -> Self {
        PlaneTree { rotations }
    }

    pub fn validate(&self) -> Result<(), TreeViolation> {
        let n = self.rotations.len();
        if n == 0 {
            return Err(TreeViolation::Empty);
        }
        for (v, rot) in self.rotations.iter().enumerate() {
            let mut seen = vec![false; n];
            for &w in rot {
                if w >= n {
                    return Err(TreeViolation::NeighbourOutOfRange { vertex: v, neighbour: w });
                }
                if w == v {
                    return Err(TreeViolation::SelfLoop { vertex: v });
                }
                if seen[w] {
                    return Err(TreeViolation::DuplicateNeighbour { vertex: v, neighbour: w });
                }
                seen[w] = true;
            }
        }
        for (v, rot) in self.rotations.iter().enumerate() {
            for &w in rot {
                if !self.rotations[w].contains(&v) {
                    return Err(TreeViolation::Asymmetric { vertex: v, neighbour: w });
                }
            }
        }
        let edges = self.edge_count();
        if edges >= n {
            return Err(TreeViolation::Cycle { vertices: n, edges });
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.rotations[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if let Some(unreached) = seen.iter().position(|&s| !s) {
            return Err(TreeViolation::Disconnected { unreached });
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.rotations.len()
    }

    pub fn edge_count(&self) -> usize {
        self.rotations.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotations[v].len()
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotations[v]
    }

    pub fn rotations(&self) -> &[Vec<usize>] {
        &self.rotations
    }

    /// Vertices of degree greater than one.
    pub fn internal_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&v| self.degree(v) > 1).collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&v| self.degree(v) == 1).collect()
    }

    /// Edges as `(u, v)` with `u < v`, sorted; an edge's id is its index here.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .rotations
            .iter()
            .enumerate()
            .flat_map(|(u, rot)| rot.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges().binary_search(&key).ok()
    }

    /// The path with `n` edges, vertices numbered along the path.
    pub fn path(n: usize) -> Self {
        let rotations = (0..=n)
            .map(|v| {
                let mut r = Vec::new();
                if v > 0 {
                    r.push(v - 1);
                }
                if v < n {
                    r.push(v + 1);
                }
                r
            })
            .collect();
        PlaneTree { rotations }
    }

    /// The star with centre 0 and leaves `1..=n` in counterclockwise order.
    pub fn star(n: usize) -> Self {
        let mut rotations = vec![(1..=n).collect::<Vec<_>>()];
        rotations.extend((1..=n).map(|_| vec![0]));
        PlaneTree { rotations }
    }

    /// Tree of a Dyck word over `d`/`u`, rooted at vertex 0.
    ///
    /// Children appear in walk order, which is counterclockwise after the
    /// parent in each rotation. Returns `None` for a malformed word.
    pub fn from_dyck(word: &str) -> Option<Self> {
        let mut rotations: Vec<Vec<usize>> = vec![Vec::new()];
        let mut stack = vec![0usize];
        for ch in word.chars() {
            match ch {
                'd' => {
                    let parent = *stack.last()?;
                    let child = rotations.len();
                    rotations.push(vec![parent]);
                    rotations[parent].push(child);
                    stack.push(child);
                }
                'u' => {
                    stack.pop();
                    if stack.is_empty() {
                        return None;
                    }
                }
                _ => return None,
            }
        }
        (stack.len() == 1).then_some(PlaneTree { rotations })
    }

    /// Applies `perm` (old id -> new id) to vertex labels.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut rotations = vec![Vec::new(); self.vertex_count()];
        for (v, rot) in self.rotations.iter().enumerate() {
            rotations[perm[v]] = rot.iter().map(|&w| perm[w]).collect();
        }
        PlaneTree { rotations }
    }

    /// Cyclically shifts every rotation list by the given offsets.
    pub fn rotate_lists(&self, offsets: &[usize]) -> Self {
        let rotations = self
            .rotations
            .iter()
            .zip(offsets)
            .map(|(rot, &k)| {
                if rot.is_empty() {
                    return Vec::new();
                }
                let k = k % rot.len();
                rot[k..].iter().chain(&rot[..k]).copied().collect()
            })
            .collect();
        PlaneTree { rotations }
    }

    /// Reflection: all rotations reversed.
    pub fn mirror(&self) -> Self {
        let rotations = self
            .rotations
            .iter()
            .map(|r| r.iter().rev().copied().collect())
            .collect();
        PlaneTree { rotations }
    }

    pub fn dart_head(&self, d: Dart) -> usize {
        self.rotations[d.vertex][d.slot]
    }

    /// Next dart of the contour walk: leave the head of `d` along the
    /// neighbour that follows `d`'s tail counterclockwise.
    ///
    /// The walk keeps the tree on its left; a dart `u -> v` stands for the
    /// right-hand side of the directed edge `u -> v`.
    pub fn next_dart(&self, d: Dart) -> Dart {
        let head = self.dart_head(d);
        let rot = &self.rotations[head];
        let back = rot.iter().position(|&w| w == d.vertex).expect("rotation system is symmetric");
        Dart { vertex: head, slot: (back + 1) % rot.len() }
    }

    /// All `2 * edge_count` darts of the contour walk beginning at `start`.
    pub fn contour_from(&self, start: Dart) -> Vec<Dart> {
        let total = 2 * self.edge_count();
        let mut out = Vec::with_capacity(total);
        let mut d = start;
        for _ in 0..total {
            out.push(d);
            d = self.next_dart(d);
        }
        out
    }

    /// Contour walk starting at the first dart of vertex 0.
    pub fn contour(&self) -> Vec<Dart> {
        if self.edge_count() == 0 {
            return Vec::new();
        }
        let v = (0..self.vertex_count()).find(|&v| self.degree(v) > 0).unwrap_or(0);
        self.contour_from(Dart { vertex: v, slot: 0 })
    }

    fn walk_code(&self, start: Dart, edge_index: &BTreeMap<(usize, usize), usize>) -> Vec<u8> {
        let total = 2 * self.edge_count();
        let mut seen = vec![false; total / 2];
        let mut out = Vec::with_capacity(total);
        let mut d = start;
        for _ in 0..total {
            let head = self.dart_head(d);
            let e = edge_index[&(d.vertex.min(head), d.vertex.max(head))];
            out.push(if seen[e] { b'u' } else { b'd' });
            seen[e] = true;
            d = self.next_dart(d);
        }
        out
    }

    /// A starting dart whose walk word is least, with that word.
    fn canonical_start(&self) -> Option<(Dart, Vec<u8>)> {
        let edge_index: BTreeMap<(usize, usize), usize> =
            self.edges().into_iter().enumerate().map(|(i, e)| (e, i)).collect();
        (0..self.vertex_count())
            .flat_map(|v| (0..self.degree(v)).map(move |slot| Dart { vertex: v, slot }))
            .map(|d| (d, self.walk_code(d, &edge_index)))
            .min_by(|a, b| a.1.cmp(&b.1))
    }

    /// Lexicographically least boundary-walk word over all starting darts.
    pub fn canonical_code(&self) -> CanonicalCode {
        let best = self.canonical_start().map(|s| s.1).unwrap_or_default();
        CanonicalCode(String::from_utf8(best).expect("code is ASCII"))
    }

    /// A vertex map `self -> other` preserving rotations, if the trees are
    /// equivalent. Symmetric trees have several; one is returned.
    pub fn isomorphism(&self, other: &PlaneTree) -> Option<Vec<usize>> {
        if self.vertex_count() != other.vertex_count() {
            return None;
        }
        if self.edge_count() == 0 {
            return Some(vec![0]);
        }
        let (d0, c0) = self.canonical_start()?;
        let (d1, c1) = other.canonical_start()?;
        if c0 != c1 {
            return None;
        }
        let mut map = vec![usize::MAX; self.vertex_count()];
        for (a, b) in self.contour_from(d0).into_iter().zip(other.contour_from(d1)) {
            map[a.vertex] = b.vertex;
        }
        Some(map)
    }

    /// The tree without `leaf`, with vertex ids above it shifted down.
    /// Returns `None` if `leaf` is not a leaf or the tree has one edge.
    pub fn remove_leaf(&self, leaf: usize) -> Option<PlaneTree> {
        if self.degree(leaf) != 1 || self.edge_count() < 2 {
            return None;
        }
        let shift = |w: usize| if w > leaf { w - 1 } else { w };
        let rotations = self
            .rotations
            .iter()
            .enumerate()
            .filter(|&(v, _)| v != leaf)
            .map(|(_, rot)| rot.iter().filter(|&&w| w != leaf).map(|&w| shift(w)).collect())
            .collect();
        Some(PlaneTree { rotations })
    }

    /// Hop distances from `source`.
    pub fn distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.rotations[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Number of edges on a longest path.
    pub fn diameter(&self) -> usize {
        let far = |d: &[usize]| (0..d.len()).max_by_key(|&v| (d[v], std::cmp::Reverse(v))).unwrap_or(0);
        let a = far(&self.distances(0));
        let d = self.distances(a);
        d[far(&d)]
    }

    /// Orientation-preserving plane equivalence.
    pub fn is_equivalent(&self, other: &PlaneTree) -> bool {
        self.vertex_count() == other.vertex_count()
            && self.canonical_code() == other.canonical_code()
    }

    /// Equivalence allowing reflections as well.
    pub fn is_mirror_equivalent(&self, other: &PlaneTree) -> bool {
        self.is_equivalent(other) || self.is_equivalent(&other.mirror())
    }

    /// Alternating `+1 / -1` colours with `root` coloured `+1`.
    pub fn bipartite_coloring(&self, root: usize) -> BipartiteColoring {
        let mut colors = vec![0i8; self.vertex_count()];
        colors[root] = 1;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.rotations[v] {
                if colors[w] == 0 {
                    colors[w] = -colors[v];
                    queue.push_back(w);
                }
            }
        }
        BipartiteColoring { colors }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumerationError {
    #[error("edge count must be at least 1")]
    Empty,
    #[error("exhaustive enumeration is limited to {max} edges (asked for {requested})")]
    TooLarge { requested: usize, max: usize },
}

pub const MAX_ENUMERATION_EDGES: usize = 9;

/// One representative per plane-equivalence class of trees with `n` edges,
/// sorted by canonical code.
pub fn enumerate_plane_trees(n: usize) -> Result<Vec<PlaneTree>, EnumerationError> {
    if n == 0 {
        return Err(EnumerationError::Empty);
    }
    if n > MAX_ENUMERATION_EDGES {
        return Err(EnumerationError::TooLarge { requested: n, max: MAX_ENUMERATION_EDGES });
    }
    let mut classes: BTreeMap<CanonicalCode, PlaneTree> = BTreeMap::new();
    let mut word = Vec::with_capacity(2 * n);
    dyck_words(n, 0, 0, &mut word, &mut |w| {
        let tree = PlaneTree::from_dyck(std::str::from_utf8(w).expect("ascii"))
            .expect("generated words are balanced");
        classes.entry(tree.canonical_code()).or_insert(tree);
    });
    Ok(classes.into_values().collect())
}

fn dyck_words(n: usize, open: usize, close: usize, word: &mut Vec<u8>, f: &mut dyn FnMut(&[u8])) {
    if close == n {
        f(word);
        return;
    }
    if open < n {
        word.push(b'd');
        dyck_words(n, open + 1, close, word, f);
        word.pop();
    }
    if close < open {
        word.push(b'u');
        dyck_words(n, open, close + 1, word, f);
        word.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        assert_eq!(PlaneTree::new(vec![vec![1], vec![0]]).map(|_| ()), Ok(()));
        let triangle = PlaneTree::from_rotations_unchecked(vec![vec![1, 2], vec![0, 2], vec![0, 1]]);
        let err = triangle.validate().unwrap_err();
        assert_eq!(err, TreeViolation::Cycle { vertices: 3, edges: 3 });
        assert!(err.to_string().starts_with("cycle"));
        let star = PlaneTree::from_rotations_unchecked(vec![
            vec![3, 1, 4, 2],
            vec![0],
            vec![0],
            vec![0],
            vec![0],
        ]);
        assert!(star.validate().is_ok());
    }

    #[test]
    fn validate_reports_other_violations() {
        let asym = PlaneTree::from_rotations_unchecked(vec![vec![1], vec![]]);
        assert!(matches!(asym.validate(), Err(TreeViolation::Asymmetric { .. })));
        let forest = PlaneTree::from_rotations_unchecked(vec![vec![1], vec![0], vec![3], vec![2]]);
        assert!(matches!(forest.validate(), Err(TreeViolation::Cycle { .. }) | Err(TreeViolation::Disconnected { .. })));
        let forest2 =
            PlaneTree::from_rotations_unchecked(vec![vec![1], vec![0], vec![3], vec![2], vec![]]);
        assert!(matches!(forest2.validate(), Err(TreeViolation::Disconnected { .. })));
        let lp = PlaneTree::from_rotations_unchecked(vec![vec![0]]);
        assert_eq!(lp.validate(), Err(TreeViolation::SelfLoop { vertex: 0 }));
        assert_eq!(PlaneTree::from_rotations_unchecked(vec![]).validate(), Err(TreeViolation::Empty));
    }

    #[test]
    fn coloring_examples() {
        let path = PlaneTree::path(2);
        assert_eq!(path.bipartite_coloring(0).colors(), &[1, -1, 1]);
        let star = PlaneTree::star(4);
        assert_eq!(star.bipartite_coloring(0).colors(), &[1, -1, -1, -1, -1]);
        let flipped = path.bipartite_coloring(1);
        assert_eq!(flipped, path.bipartite_coloring(0).negated());
    }

    #[test]
    fn codes_distinguish_path_and_star() {
        let p = PlaneTree::path(3);
        let s = PlaneTree::star(3);
        assert_ne!(p.canonical_code(), s.canonical_code());
        assert!(!p.is_equivalent(&s));
        assert_eq!(p.canonical_code().as_str().len(), 6);
    }

    #[test]
    fn path_code_is_label_invariant() {
        let p = PlaneTree::path(2);
        let q = p.relabel(&[2, 0, 1]);
        assert_eq!(p.canonical_code(), q.canonical_code());
    }

    #[test]
    fn dyck_round_trip() {
        let t = PlaneTree::from_dyck("ddudduuu").unwrap();
        assert_eq!(t.vertex_count(), 5);
        assert!(t.validate().is_ok());
        assert!(PlaneTree::from_dyck("du u").is_none());
        assert!(PlaneTree::from_dyck("udd").is_none());
    }

    #[test]
    fn enumeration_small_counts() {
        assert_eq!(enumerate_plane_trees(1).unwrap().len(), 1);
        assert_eq!(enumerate_plane_trees(2).unwrap().len(), 1);
        assert!(matches!(enumerate_plane_trees(10), Err(EnumerationError::TooLarge { .. })));
        assert_eq!(enumerate_plane_trees(0), Err(EnumerationError::Empty));
    }

    #[test]
    fn internal_degrees_sum() {
        for t in enumerate_plane_trees(6).unwrap() {
            let s: usize = t.internal_vertices().iter().map(|&v| t.degree(v) - 1).sum();
            assert_eq!(s, t.edge_count() - 1);
        }
    }

    #[test]
    fn json_schema() {
        let t = PlaneTree::star(3);
        let text = serde_json::to_string(&t).unwrap();
        assert_eq!(text, r#"{"vertices":4,"rotations":[[1,2,3],[0],[0],[0]]}"#);
        let back: PlaneTree = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<PlaneTree>(r#"{"vertices":3,"rotations":[[1,2],[0,2],[0,1]]}"#).is_err());
    }
    #[test]
    fn isomorphism_preserves_rotations() {
        let t = PlaneTree::from_dyck("ddudduuu").unwrap();
        let perm = [3, 0, 4, 1, 2];
        let moved = t.relabel(&perm).rotate_lists(&[1, 0, 2, 1, 0]);
        let map = t.isomorphism(&moved).unwrap();
        for v in 0..t.vertex_count() {
            let image: Vec<usize> = t.rotation(v).iter().map(|&w| map[w]).collect();
            let target = moved.rotation(map[v]);
            let k = target.iter().position(|&w| w == image[0]).unwrap();
            let rotated: Vec<usize> = target[k..].iter().chain(&target[..k]).copied().collect();
            assert_eq!(image, rotated);
        }
        assert!(t.isomorphism(&PlaneTree::path(4)).is_none());
    }

    #[test]
    fn leaf_removal_and_diameter() {
        let t = PlaneTree::star(3);
        let s = t.remove_leaf(2).unwrap();
        assert_eq!(s.rotations(), &[vec![1, 2], vec![0], vec![0]]);
        assert!(t.remove_leaf(0).is_none());
        assert!(PlaneTree::path(1).remove_leaf(0).is_none());
        assert_eq!(PlaneTree::path(5).diameter(), 5);
        assert_eq!(t.diameter(), 2);
    }
}
