//! Harmonic measure from infinity on an embedded tree, estimated by
//! walk-on-spheres and attributed to each side of each edge.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom_tree::{bounding_box, point_segment_distance, GeomTree};

/// Side of an oriented edge `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: C64,
    b: C64,
    edge: usize,
    /// Arclength fractions of `a` and `b` along the edge.
    s0: f64,
    s1: f64,
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: C64,
    hi: C64,
}

impl Aabb {
    fn of(seg: &Segment) -> Self {
        Aabb {
            lo: C64::new(seg.a.re.min(seg.b.re), seg.a.im.min(seg.b.im)),
            hi: C64::new(seg.a.re.max(seg.b.re), seg.a.im.max(seg.b.im)),
        }
    }

    fn union(&self, o: &Aabb) -> Self {
        Aabb {
            lo: C64::new(self.lo.re.min(o.lo.re), self.lo.im.min(o.lo.im)),
            hi: C64::new(self.hi.re.max(o.hi.re), self.hi.im.max(o.hi.im)),
        }
    }

    fn distance(&self, p: C64) -> f64 {
        let dx = (self.lo.re - p.re).max(0.0).max(p.re - self.hi.re);
        let dy = (self.lo.im - p.im).max(0.0).max(p.im - self.hi.im);
        dx.hypot(dy)
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Inner { bbox: Aabb, left: usize, right: usize },
    Leaf { bbox: Aabb, start: usize, end: usize },
}

impl Node {
    fn bbox(&self) -> &Aabb {
        match self {
            Node::Inner { bbox, .. } | Node::Leaf { bbox, .. } => bbox,
        }
    }
}

/// Result of a nearest-segment query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub distance: f64,
    pub edge: usize,
    /// Global index of the polyline segment.
    pub segment: usize,
    /// Closest point on the tree.
    pub point: C64,
    /// Arclength fraction of the closest point along its edge, from `from`.
    pub param: f64,
}

/// Bounding volume hierarchy over all polyline segments of a tree.
#[derive(Debug, Clone)]
pub struct SegmentIndex {
    segments: Vec<Segment>,
    /// Segment ids in leaf order.
    order: Vec<usize>,
    nodes: Vec<Node>,
}

const LEAF_SIZE: usize = 4;

impl SegmentIndex {
    pub fn new(tree: &GeomTree) -> Self {
        let mut segments = Vec::new();
        for (ei, e) in tree.edges.iter().enumerate() {
            let total = e.length();
            let mut run = 0.0;
            for w in e.polyline.windows(2) {
                let len = (w[1] - w[0]).norm();
                let s0 = if total > 0.0 { run / total } else { 0.0 };
                run += len;
                let s1 = if total > 0.0 { (run / total).min(1.0) } else { 1.0 };
                segments.push(Segment { a: w[0], b: w[1], edge: ei, s0, s1 });
            }
        }
        let mut order: Vec<usize> = (0..segments.len()).collect();
        let mut nodes = Vec::new();
        if !segments.is_empty() {
            build(&segments, &mut order, 0, segments.len(), &mut nodes);
        }
        SegmentIndex { segments, order, nodes }
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    fn evaluate(&self, p: C64, i: usize) -> (f64, f64) {
        let s = &self.segments[i];
        point_segment_distance(p, s.a, s.b)
    }

    fn nearest_from(&self, i: usize, t: f64, d: f64) -> Nearest {
        let s = &self.segments[i];
        Nearest {
            distance: d,
            edge: s.edge,
            segment: i,
            point: s.a + (s.b - s.a) * t,
            param: s.s0 + (s.s1 - s.s0) * t,
        }
    }

    /// Nearest segment to `p`; ties go to the lowest segment index.
    pub fn nearest(&self, p: C64) -> Option<Nearest> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, usize::MAX, 0.0);
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.bbox().distance(p) > best.0 {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &i in &self.order[start..end] {
                        let (d, t) = self.evaluate(p, i);
                        if d < best.0 || d == best.0 && i < best.1 {
                            best = (d, i, t);
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[left].bbox().distance(p);
                    let dr = self.nodes[right].bbox().distance(p);
                    // Visit the nearer child first.
                    if dl <= dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        Some(self.nearest_from(best.1, best.2, best.0))
    }

    /// Linear scan; the reference the hierarchy must reproduce.
    pub fn nearest_brute_force(&self, p: C64) -> Option<Nearest> {
        let mut best: Option<(f64, usize, f64)> = None;
        for i in 0..self.segments.len() {
            let (d, t) = self.evaluate(p, i);
            if best.is_none_or(|b| d < b.0) {
                best = Some((d, i, t));
            }
        }
        best.map(|(d, i, t)| self.nearest_from(i, t, d))
    }

    /// Segment direction at the nearest point of a query.
    fn direction(&self, n: &Nearest) -> C64 {
        let s = &self.segments[n.segment];
        s.b - s.a
    }
}

fn build(segs: &[Segment], order: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let bbox = order[start..end]
        .iter()
        .map(|&i| Aabb::of(&segs[i]))
        .reduce(|a, b| a.union(&b))
        .expect("nonempty range");
    let me = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { bbox, start, end });
        return me;
    }
    nodes.push(Node::Leaf { bbox, start, end });
    let centre = |i: usize| (segs[i].a + segs[i].b) * 0.5;
    let ext = bbox.hi - bbox.lo;
    let mid = (start + end) / 2;
    let slice = &mut order[start..end];
    if ext.re >= ext.im {
        slice.select_nth_unstable_by(mid - start, |&x, &y| centre(x).re.total_cmp(&centre(y).re).then(x.cmp(&y)));
    } else {
        slice.select_nth_unstable_by(mid - start, |&x, &y| centre(x).im.total_cmp(&centre(y).im).then(x.cmp(&y)));
    }
    let left = build(segs, order, start, mid, nodes);
    let right = build(segs, order, mid, end, nodes);
    nodes[me] = Node::Inner { bbox, left, right };
    me
}

/// Walk-on-spheres parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Launch circle radius over the circumscribed radius of the tree.
    pub launch_factor: f64,
    /// Stopping distance relative to the tree diameter.
    pub stop_rel: f64,
    /// A hit closer than `vertex_factor * stop` to a tree vertex is
    /// continued with a tenfold smaller stopping distance.
    pub vertex_factor: f64,
    /// Maximum number of refinements near vertices.
    pub max_escalations: u32,
    pub max_steps: u32,
    pub bins: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            launch_factor: 64.0,
            stop_rel: 1e-6,
            vertex_factor: 10.0,
            max_escalations: 3,
            max_steps: 100_000,
            bins: 64,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarmonicError {
    #[error("tree has no edges")]
    EmptyTree,
    #[error("invalid walk configuration: {0}")]
    BadConfig(&'static str),
    #[error("walker count must be positive")]
    NoWalkers,
    #[error("edge {edge} {side:?} side has {hits} hits; at least {needed} are needed")]
    InsufficientHits { edge: usize, side: Side, hits: u64, needed: u64 },
    #[error("edge {0} is not in the table")]
    UnknownEdge(usize),
}

impl WalkConfig {
    fn check(&self) -> Result<(), HarmonicError> {
        if !(self.launch_factor > 1.0) {
            return Err(HarmonicError::BadConfig("launch factor must exceed 1"));
        }
        if !(self.stop_rel > 0.0) {
            return Err(HarmonicError::BadConfig("stopping distance must be positive"));
        }
        if !(self.vertex_factor >= 0.0) {
            return Err(HarmonicError::BadConfig("vertex tolerance must be nonnegative"));
        }
        if self.bins == 0 {
            return Err(HarmonicError::BadConfig("need at least one bin"));
        }
        Ok(())
    }
}

/// Where one walker first hit the tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub edge: usize,
    pub side: Side,
    /// Arclength fraction along the edge, from `from`.
    pub param: f64,
}

/// Everything the walkers need, built once per tree.
pub struct Walker<'a> {
    tree: &'a GeomTree,
    index: SegmentIndex,
    centre: C64,
    radius: f64,
    launch: f64,
    stop: f64,
    config: WalkConfig,
}

impl<'a> Walker<'a> {
    pub fn new(tree: &'a GeomTree, config: WalkConfig) -> Result<Self, HarmonicError> {
        config.check()?;
        if tree.edges.is_empty() {
            return Err(HarmonicError::EmptyTree);
        }
        let (lo, hi) = bounding_box(tree.all_points()).expect("tree has points");
        let centre = (lo + hi) * 0.5;
        let radius = tree
            .all_points()
            .map(|z| (z - centre).norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let diameter = (hi - lo).norm().max(f64::MIN_POSITIVE);
        Ok(Walker {
            tree,
            index: SegmentIndex::new(tree),
            centre,
            radius,
            launch: config.launch_factor * radius,
            stop: config.stop_rel * diameter,
            config,
        })
    }

    pub fn index(&self) -> &SegmentIndex {
        &self.index
    }

    /// Runs walker `i`; `None` if it exceeded the step budget.
    pub fn walk(&self, i: u64) -> Option<Hit> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(i);
        let theta = rng.random::<f64>() * 2.0 * PI;
        let mut z = self.centre + C64::from_polar(self.launch, theta);
        let far = 2.0 * self.radius;
        let mut stop = self.stop;
        let mut escalations = 0;
        let mut steps = 0u32;
        loop {
            if steps >= self.config.max_steps {
                return None;
            }
            steps += 1;
            let rel = z - self.centre;
            let r = rel.norm();
            if r > far {
                // Exact exterior hitting distribution on the circle of radius
                // `far`: reflect to the interior point 1/conj(u) and push a
                // uniform point through the disk automorphism moving 0 there.
                let a = (rel / far).conj().inv();
                let u = C64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI);
                let w = (u + a) / (C64::new(1.0, 0.0) + a.conj() * u);
                z = self.centre + w * far;
                continue;
            }
            let near = self.index.nearest(z).expect("nonempty index");
            if near.distance >= stop {
                z += C64::from_polar(near.distance, rng.random::<f64>() * 2.0 * PI);
                continue;
            }
            let dir = self.index.direction(&near);
            let off = z - near.point;
            let cross = dir.re * off.im - dir.im * off.re;
            let e = &self.tree.edges[near.edge];
            let vert_tol = self.config.vertex_factor * stop;
            let near_vertex = (near.point - self.tree.vertices[e.from]).norm() < vert_tol
                || (near.point - self.tree.vertices[e.to]).norm() < vert_tol;
            let ambiguous = cross.abs() <= 1e-9 * dir.norm() * off.norm();
            if (near_vertex || ambiguous) && escalations < self.config.max_escalations {
                escalations += 1;
                stop /= 10.0;
                continue;
            }
            let side = if cross >= 0.0 { Side::Left } else { Side::Right };
            return Some(Hit { edge: near.edge, side, param: near.param });
        }
    }

    /// Runs walkers `0..count` in index order.
    pub fn hits(&self, count: u64) -> Vec<Option<Hit>> {
        (0..count).into_par_iter().map(|i| self.walk(i)).collect()
    }
}

/// Measure of one side of one edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideMeasure {
    pub edge: usize,
    pub side: Side,
    pub hits: u64,
    pub measure: f64,
    pub stderr: f64,
    /// Hit counts over equal arclength bins, from `from` to `to`.
    pub histogram: Vec<u64>,
}

/// Per-edge, per-side harmonic measure estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureTable {
    pub edge_count: usize,
    pub walkers: u64,
    pub discarded: u64,
    pub seed: u64,
    pub bins: usize,
    /// Two entries per edge, left then right.
    pub sides: Vec<SideMeasure>,
    pub summary: MeasureSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    /// `max / min` of the two side measures of each edge; infinite (null
    /// in JSON) when a side has no hits.
    #[serde(with = "crate::io::ratio_list")]
    pub side_ratio: Vec<f64>,
    #[serde(with = "crate::io::ratio")]
    pub max_side_ratio: f64,
    pub max_edge_measure: f64,
    pub min_edge_measure: f64,
}

impl MeasureTable {
    /// Builds a table from hit outcomes in walker order.
    pub fn from_hits(edge_count: usize, hits: &[Option<Hit>], seed: u64, bins: usize) -> Self {
        let mut counts = vec![0u64; 2 * edge_count];
        let mut hist = vec![vec![0u64; bins]; 2 * edge_count];
        let mut discarded = 0;
        for h in hits {
            match h {
                None => discarded += 1,
                Some(h) => {
                    let k = 2 * h.edge + h.side.index();
                    counts[k] += 1;
                    let b = ((h.param * bins as f64) as usize).min(bins - 1);
                    hist[k][b] += 1;
                }
            }
        }
        let total = hits.len() as u64 - discarded;
        let sides = counts
            .iter()
            .zip(hist)
            .enumerate()
            .map(|(k, (&c, histogram))| {
                let p = if total > 0 { c as f64 / total as f64 } else { 0.0 };
                SideMeasure {
                    edge: k / 2,
                    side: if k % 2 == 0 { Side::Left } else { Side::Right },
                    hits: c,
                    measure: p,
                    stderr: if total > 0 { (p * (1.0 - p) / total as f64).sqrt() } else { 0.0 },
                    histogram,
                }
            })
            .collect();
        let mut table = MeasureTable {
            edge_count,
            walkers: hits.len() as u64,
            discarded,
            seed,
            bins,
            sides,
            summary: MeasureSummary { side_ratio: vec![], max_side_ratio: 0.0, max_edge_measure: 0.0, min_edge_measure: 0.0 },
        };
        table.summary = table.summarize();
        table
    }

    fn summarize(&self) -> MeasureSummary {
        let side_ratio: Vec<f64> = (0..self.edge_count)
            .map(|e| {
                let l = self.measure(e, Side::Left);
                let r = self.measure(e, Side::Right);
                l.max(r) / l.min(r)
            })
            .collect();
        let edges: Vec<f64> = (0..self.edge_count).map(|e| self.edge_measure(e)).collect();
        MeasureSummary {
            max_side_ratio: side_ratio.iter().copied().fold(0.0, f64::max),
            side_ratio,
            max_edge_measure: edges.iter().copied().fold(0.0, f64::max),
            min_edge_measure: edges.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn entry(&self, edge: usize, side: Side) -> &SideMeasure {
        &self.sides[2 * edge + side.index()]
    }

    pub fn measure(&self, edge: usize, side: Side) -> f64 {
        self.entry(edge, side).measure
    }

    pub fn stderr(&self, edge: usize, side: Side) -> f64 {
        self.entry(edge, side).stderr
    }

    pub fn edge_measure(&self, edge: usize) -> f64 {
        self.measure(edge, Side::Left) + self.measure(edge, Side::Right)
    }

    /// Walkers that reached the tree.
    pub fn accepted(&self) -> u64 {
        self.walkers - self.discarded
    }
}

/// Estimates harmonic measure from infinity with `walkers` walkers.
///
/// The result depends only on the tree, the configuration and the walker
/// count, not on thread scheduling.
pub fn estimate_measures(tree: &GeomTree, config: &WalkConfig, walkers: u64) -> Result<MeasureTable, HarmonicError> {
    if walkers == 0 {
        return Err(HarmonicError::NoWalkers);
    }
    let w = Walker::new(tree, *config)?;
    let hits = w.hits(walkers);
    let table = MeasureTable::from_hits(tree.edges.len(), &hits, config.seed, config.bins);
    if table.discarded > 0 {
        log::warn!("{} of {} walkers exceeded the step budget", table.discarded, walkers);
    }
    Ok(table)
}

/// Piecewise-linear cumulative measure along one side of an edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cumulative {
    /// `(arclength fraction, cumulative measure)`, starting at `(0, 0)`.
    pub knots: Vec<(f64, f64)>,
}

impl Cumulative {
    pub fn total(&self) -> f64 {
        self.knots.last().map_or(0.0, |k| k.1)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let k = self.knots.partition_point(|&(x, _)| x < s);
        if k == 0 {
            return self.knots[0].1;
        }
        let (x0, y0) = self.knots[k - 1];
        let (x1, y1) = self.knots[k.min(self.knots.len() - 1)];
        if x1 > x0 {
            y0 + (y1 - y0) * (s - x0) / (x1 - x0)
        } else {
            y1
        }
    }

    /// Smallest arclength fraction where the cumulative measure reaches `q`.
    pub fn inverse(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, self.total());
        let k = self.knots.partition_point(|&(_, y)| y < q);
        if k == 0 {
            return self.knots[0].0;
        }
        let (x0, y0) = self.knots[k - 1];
        let (x1, y1) = self.knots[k.min(self.knots.len() - 1)];
        if y1 > y0 {
            x0 + (x1 - x0) * (q - y0) / (y1 - y0)
        } else {
            x1
        }
    }
}

/// Minimum hits on a side before its distribution is used.
pub const MIN_CUMULATIVE_HITS: u64 = 100;

/// Cumulative measure along an edge side from its positional histogram.
pub fn estimate_cumulative(table: &MeasureTable, edge: usize, side: Side) -> Result<Cumulative, HarmonicError> {
    if edge >= table.edge_count {
        return Err(HarmonicError::UnknownEdge(edge));
    }
    let entry = table.entry(edge, side);
    if entry.hits < MIN_CUMULATIVE_HITS {
        return Err(HarmonicError::InsufficientHits { edge, side, hits: entry.hits, needed: MIN_CUMULATIVE_HITS });
    }
    let bins = entry.histogram.len();
    let total = table.accepted() as f64;
    let mut knots = Vec::with_capacity(bins + 1);
    knots.push((0.0, 0.0));
    let mut run = 0u64;
    for (k, &c) in entry.histogram.iter().enumerate() {
        run += c;
        knots.push(((k + 1) as f64 / bins as f64, run as f64 / total));
    }
    Ok(Cumulative { knots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom_tree::GeomEdge;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub(crate) fn plus() -> GeomTree {
        let v = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        let edges = (1..5).map(|k| GeomEdge::straight(0, k, v[0], v[k])).collect();
        GeomTree { vertices: v, edges }
    }

    fn segment() -> GeomTree {
        GeomTree {
            vertices: vec![c(-1.0, 0.0), c(1.0, 0.0)],
            edges: vec![GeomEdge::straight(0, 1, c(-1.0, 0.0), c(1.0, 0.0))],
        }
    }

    #[test]
    fn table_with_empty_side_round_trips() {
        let hits = vec![Some(Hit { edge: 0, side: Side::Left, param: 0.5 }); 10];
        let t = MeasureTable::from_hits(1, &hits, 0, 4);
        assert!(t.summary.max_side_ratio.is_infinite());
        let back: MeasureTable = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn plus_queries() {
        let idx = SegmentIndex::new(&plus());
        let n = idx.nearest(c(2.0, 0.0)).unwrap();
        assert_eq!((n.distance, n.edge, n.param), (1.0, 0, 1.0));
        assert_eq!(idx.nearest(c(0.0, 1.0)).unwrap().distance, 0.0);
    }

    #[test]
    fn bvh_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // A zigzag with many segments.
        let pts: Vec<C64> = (0..200).map(|k| c(k as f64 * 0.01, if k % 2 == 0 { 0.0 } else { 0.03 })).collect();
        let tree = GeomTree {
            vertices: vec![pts[0], pts[199]],
            edges: vec![GeomEdge { from: 0, to: 1, polyline: pts }],
        };
        let idx = SegmentIndex::new(&tree);
        for _ in 0..1000 {
            let p = c(rng.random_range(-0.5..2.5), rng.random_range(-1.0..1.0));
            assert_eq!(idx.nearest(p), idx.nearest_brute_force(p));
        }
    }

    #[test]
    fn segment_sides_balanced() {
        let cfg = WalkConfig { seed: 3, ..Default::default() };
        let t = estimate_measures(&segment(), &cfg, 20_000).unwrap();
        let l = t.measure(0, Side::Left);
        assert!((l - 0.5).abs() < 4.0 * t.stderr(0, Side::Left), "{l}");
        assert_eq!(t.discarded, 0);
        let sum: f64 = t.sides.iter().map(|s| s.measure).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let cfg = WalkConfig { seed: 11, ..Default::default() };
        let a = estimate_measures(&plus(), &cfg, 2000).unwrap();
        let b = estimate_measures(&plus(), &cfg, 2000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cumulative_monotone_and_total() {
        let cfg = WalkConfig { seed: 5, bins: 16, ..Default::default() };
        let t = estimate_measures(&segment(), &cfg, 5000).unwrap();
        let f = estimate_cumulative(&t, 0, Side::Right).unwrap();
        assert!(f.knots.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!((f.total() - t.measure(0, Side::Right)).abs() < 1e-12);
        assert!((f.inverse(f.eval(0.3)) - 0.3).abs() < 1e-9);
        let small = estimate_measures(&segment(), &cfg, 50).unwrap();
        assert!(matches!(estimate_cumulative(&small, 0, Side::Left), Err(HarmonicError::InsufficientHits { .. })));
    }

    #[test]
    fn bad_config() {
        let cfg = WalkConfig { launch_factor: 1.0, ..Default::default() };
        assert!(matches!(estimate_measures(&plus(), &cfg, 1), Err(HarmonicError::BadConfig(_))));
    }
}
