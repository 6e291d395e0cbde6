//! Heights of the segments `K` along each edge side.
//!
//! Every edge loses a corner zone of length `delta` at each end of degree
//! at least 2, widened to `delta / tan(theta / 2)` where the smallest angle
//! `theta` at that vertex is below a right angle. What is left is cut into `K` segments of a common dyadic
//! length `|K|`. A segment on one side looks up its position on the circle
//! through the measured cumulative distribution of that side, and an
//! interval of length `2^m 2^(-n-N)` there gives it height `m`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::intervals::IntervalSet;
use super::{boundary_walk, BalanceError, WalkStep};
use crate::geom_tree::GeomTree;
use crate::harmonic::{estimate_cumulative, MeasureTable, Side};

/// Segments of one edge side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidePlan {
    pub edge: usize,
    pub side: Side,
    /// Arclength from `from` where the segments begin and end.
    pub start: f64,
    pub end: f64,
    /// Heights ordered from `start` to `end`.
    pub heights: Vec<u32>,
    /// Whether `from` and `to` are degree-1 vertices.
    pub tip_from: bool,
    pub tip_to: bool,
    /// The cumulative measure of this side was too thin and arclength was
    /// used instead.
    pub uniform_fallback: bool,
}

impl SidePlan {
    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / self.heights.len() as f64
    }

    /// Arclength from the nearer degree-1 endpoint of segment `i`, or
    /// infinity when neither end is a tip.
    pub fn tip_distance(&self, i: usize, length: f64) -> f64 {
        let h = self.spacing();
        let mut d = f64::INFINITY;
        if self.tip_from {
            d = d.min(self.start + i as f64 * h);
        }
        if self.tip_to {
            d = d.min(length - (self.start + (i + 1) as f64 * h));
        }
        d
    }
}

/// Heights for every edge side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToothPlan {
    /// Finest interval level: the shortest interval has length `2^-n`.
    pub n: u32,
    /// Heights lie in `[N, 2N]`.
    #[serde(rename = "N")]
    pub big_n: u32,
    pub delta: f64,
    /// Segment length `|K|`, a power of 2 with `2 N |K| < delta`.
    pub k_len: f64,
    /// Two entries per edge, left then right.
    pub sides: Vec<SidePlan>,
    /// Height increments made to restore the facts.
    pub repairs: usize,
}

impl ToothPlan {
    pub fn side(&self, edge: usize, side: Side) -> &SidePlan {
        &self.sides[2 * edge + side.index()]
    }

    /// Checks facts (1) to (4) along the boundary walk of `tree`.
    pub fn check_facts(&self, tree: &GeomTree) -> Result<(), BalanceError> {
        let walk = boundary_walk(tree)?;
        let seq = Sequence::new(self, tree, &walk);
        let h = seq.read(self);
        match seq.first_violation(&h) {
            None => Ok(()),
            Some((fact, k)) => Err(BalanceError::Fact { fact, edge: seq.items[k].0 / 2 }),
        }
    }
}

/// Segments of the whole tree in boundary walk order, with the groups
/// that facts (3) and (4) constrain.
struct Sequence {
    /// `(side plan index, segment index)`.
    items: Vec<(usize, usize)>,
    groups: Vec<(u8, Vec<usize>)>,
}

impl Sequence {
    fn new(plan: &ToothPlan, tree: &GeomTree, walk: &[WalkStep]) -> Self {
        let degrees = tree.degrees();
        let mut items = Vec::new();
        let mut runs = Vec::with_capacity(walk.len());
        for step in walk {
            let p = 2 * step.edge + step.side.index();
            let count = plan.sides[p].heights.len();
            let begin = items.len();
            if step.side == Side::Right {
                items.extend((0..count).map(|i| (p, i)));
            } else {
                items.extend((0..count).rev().map(|i| (p, i)));
            }
            runs.push((begin, items.len()));
        }
        let total = items.len();
        let mut groups = Vec::new();
        for (w, step) in walk.iter().enumerate() {
            let (_, end) = runs[w];
            let (next_begin, _) = runs[(w + 1) % walk.len()];
            if degrees[step.head] >= 2 {
                let g = [end + total - 2, end + total - 1, next_begin, next_begin + 1]
                    .iter()
                    .map(|&k| k % total)
                    .collect();
                groups.push((4, g));
            }
        }
        for (v, &d) in degrees.iter().enumerate() {
            if d != 1 {
                continue;
            }
            let g: Vec<usize> = (0..total)
                .filter(|&k| {
                    let (p, i) = items[k];
                    let sp = &plan.sides[p];
                    let e = &tree.edges[sp.edge];
                    let len = e.length();
                    let from_v = if e.from == v { sp.start + i as f64 * sp.spacing() } else { f64::INFINITY };
                    let to_v = if e.to == v { len - (sp.start + (i + 1) as f64 * sp.spacing()) } else { f64::INFINITY };
                    from_v.min(to_v) < plan.delta * (1.0 - 1e-9)
                })
                .collect();
            if !g.is_empty() {
                groups.push((3, g));
            }
        }
        Sequence { items, groups }
    }

    fn read(&self, plan: &ToothPlan) -> Vec<u32> {
        self.items.iter().map(|&(p, i)| plan.sides[p].heights[i]).collect()
    }

    fn first_violation(&self, h: &[u32]) -> Option<(u8, usize)> {
        let n = h.len();
        for k in 0..n {
            if h[k].abs_diff(h[(k + 1) % n]) > 1 {
                return Some((1, k));
            }
        }
        for k in 0..n {
            if h[k] != h[(k + n - 1) % n] && h[k] != h[(k + 1) % n] {
                return Some((2, k));
            }
        }
        for (fact, g) in &self.groups {
            if g.iter().any(|&k| h[k] != h[g[0]]) {
                return Some((*fact, g[0]));
            }
        }
        None
    }

    /// Raises heights until every fact holds; returns the number of raises.
    fn repair(&self, h: &mut [u32]) -> usize {
        let n = h.len();
        let mut raises = 0;
        loop {
            let mut changed = false;
            let mut raise = |h: &mut [u32], k: usize, to: u32| {
                if h[k] < to {
                    h[k] = to;
                    raises += 1;
                    changed = true;
                }
            };
            for (_, g) in &self.groups {
                let top = g.iter().map(|&k| h[k]).max().unwrap_or(0);
                for &k in g {
                    raise(h, k, top);
                }
            }
            for k in 0..n {
                let j = (k + 1) % n;
                if h[k] + 1 < h[j] {
                    raise(h, k, h[j] - 1);
                } else if h[j] + 1 < h[k] {
                    raise(h, j, h[k] - 1);
                }
            }
            for k in 0..n {
                let prev = h[(k + n - 1) % n];
                let next = h[(k + 1) % n];
                if h[k] == prev || h[k] == next {
                    continue;
                }
                let higher = [prev, next].into_iter().filter(|&x| x > h[k]).min();
                match higher {
                    Some(x) => raise(h, k, x),
                    None => raise(h, (k + 1) % n, h[k]),
                }
            }
            if !changed {
                return raises;
            }
        }
    }
}

fn is_power_of_two(x: f64) -> bool {
    x > 0.0 && x.is_finite() && x.log2().fract() == 0.0
}

/// Corner zone length at each vertex. Teeth of length below `delta` on
/// two edges meeting at angle `theta` stay apart once their feet are
/// `delta / tan(theta / 2)` from the corner.
fn corner_zones(tree: &GeomTree, delta: f64) -> Vec<f64> {
    let mut angles = vec![Vec::new(); tree.vertices.len()];
    for e in &tree.edges {
        let p = &e.polyline;
        let n = p.len();
        angles[e.from].push((p[1] - p[0]).arg());
        angles[e.to].push((p[n - 2] - p[n - 1]).arg());
    }
    angles
        .into_iter()
        .map(|mut a| {
            if a.len() < 2 {
                return delta;
            }
            a.sort_by(f64::total_cmp);
            let wrap = a[0] + 2.0 * PI - a[a.len() - 1];
            let theta = a.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::min);
            if theta >= FRAC_PI_2 {
                delta
            } else {
                delta / (theta / 2.0).tan()
            }
        })
        .collect()
}

/// Assigns a height to every segment `K` on both sides of every edge.
///
/// `delta` is the corner offset in the units of `tree` and must be a power
/// of 2. Statistical noise that breaks a fact is repaired by raising
/// heights; the number of raises is recorded in the plan.
pub fn assign_heights(
    intervals: &IntervalSet,
    tree: &GeomTree,
    table: &MeasureTable,
    delta: f64,
) -> Result<ToothPlan, BalanceError> {
    if !is_power_of_two(delta) {
        return Err(BalanceError::BadDelta(delta));
    }
    if table.edge_count != tree.edges.len() {
        return Err(BalanceError::EdgeCountMismatch { table: table.edge_count, tree: tree.edges.len() });
    }
    let n = intervals.max_level();
    let big_n = (n - intervals.min_level()).max(1);
    let mut k_len = 1.0f64;
    while 2.0 * big_n as f64 * k_len >= delta {
        k_len /= 2.0;
    }
    let degrees = tree.degrees();
    let zones = corner_zones(tree, delta);
    let mut sides = Vec::with_capacity(2 * tree.edges.len());
    for (ei, e) in tree.edges.iter().enumerate() {
        let length = e.length();
        let start = if degrees[e.from] >= 2 { zones[e.from] } else { 0.0 };
        let end = length - if degrees[e.to] >= 2 { zones[e.to] } else { 0.0 };
        if end - start < k_len {
            return Err(BalanceError::EdgeTooShort { edge: ei, length, delta });
        }
        let count = ((end - start) / k_len).round().max(1.0) as usize;
        let spacing = (end - start) / count as f64;
        for side in Side::BOTH {
            let (a, b) = intervals.span(ei, side).ok_or(BalanceError::MissingArc { edge: ei, side })?;
            let cum = estimate_cumulative(table, ei, side).ok();
            let heights = (0..count)
                .map(|i| {
                    let x = (start + (i as f64 + 0.5) * spacing) / length;
                    let q = match &cum {
                        Some(c) if c.total() > 0.0 => c.eval(x) / c.total(),
                        _ => x,
                    };
                    let q = if side == Side::Right { q } else { 1.0 - q };
                    let pos = (a as f64 + q * (b - a) as f64) as u64;
                    let level = intervals.at(pos.clamp(a, b - 1)).level;
                    n + big_n - level
                })
                .collect();
            sides.push(SidePlan {
                edge: ei,
                side,
                start,
                end,
                heights,
                tip_from: degrees[e.from] == 1,
                tip_to: degrees[e.to] == 1,
                uniform_fallback: cum.is_none(),
            });
        }
    }
    let mut plan = ToothPlan { n, big_n, delta, k_len, sides, repairs: 0 };
    let walk = boundary_walk(tree)?;
    let seq = Sequence::new(&plan, tree, &walk);
    let mut h = seq.read(&plan);
    plan.repairs = seq.repair(&mut h);
    if plan.repairs > 0 {
        log::info!("height facts needed {} raises", plan.repairs);
    }
    for (&(p, i), &v) in seq.items.iter().zip(&h) {
        plan.sides[p].heights[i] = v;
    }
    if let Some((fact, k)) = seq.first_violation(&h) {
        return Err(BalanceError::Fact { fact, edge: seq.items[k].0 / 2 });
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::intervals::{circle_layout, subdivide};
    use super::*;

    fn plan_for(tree: &GeomTree, counts: &[u64], delta: f64) -> ToothPlan {
        let t = table(counts, 16);
        let set = subdivide(&circle_layout(&t, tree).unwrap()).unwrap();
        assign_heights(&set, tree, &t, delta).unwrap()
    }

    #[test]
    fn balanced_plus_has_equal_heights() {
        let t = plus();
        let plan = plan_for(&t, &[1000; 8], 0.125);
        let h0 = plan.sides[0].heights[0];
        for s in &plan.sides {
            assert!(s.heights.iter().all(|&h| h == h0));
        }
        assert_eq!(plan.repairs, 0);
        plan.check_facts(&t).unwrap();
    }

    #[test]
    fn teeth_fit_in_delta() {
        let t = plus();
        let plan = plan_for(&t, &[1000, 2000, 1000, 4000, 1000, 1000, 3000, 1000], 0.125);
        assert!(2.0 * plan.big_n as f64 * plan.k_len < plan.delta);
        for s in &plan.sides {
            for &h in &s.heights {
                assert!(h >= plan.big_n && h <= 2 * plan.big_n, "height {h}");
            }
        }
        plan.check_facts(&t).unwrap();
    }

    #[test]
    fn heavier_side_is_taller() {
        let t = segment();
        let plan = plan_for(&t, &[2000, 1000], 0.25);
        let mean = |s: Side| {
            let h = &plan.side(0, s).heights;
            h.iter().map(|&x| x as f64).sum::<f64>() / h.len() as f64
        };
        let diff = mean(Side::Left) - mean(Side::Right);
        assert!(diff > 0.0, "mean height difference {diff}");
        assert!(plan.side(0, Side::Left).heights.iter().zip(&plan.side(0, Side::Right).heights).all(|(l, r)| l.abs_diff(*r) <= 1));
    }

    #[test]
    fn tip_zone_is_constant() {
        let t = plus();
        let plan = plan_for(&t, &[1000, 2000, 1000, 4000, 1000, 1000, 3000, 1000], 0.125);
        for e in 0..4 {
            let len = t.edges[e].length();
            let mut zone = Vec::new();
            for s in Side::BOTH {
                let sp = plan.side(e, s);
                for i in 0..sp.heights.len() {
                    if sp.tip_distance(i, len) < plan.delta * (1.0 - 1e-9) {
                        zone.push(sp.heights[i]);
                    }
                }
            }
            assert!(!zone.is_empty());
            assert!(zone.iter().all(|&h| h == zone[0]), "edge {e}: {zone:?}");
        }
    }

    #[test]
    fn repairs_restore_facts() {
        let t = plus();
        let plan = plan_for(&t, &[10, 3000, 7000, 40, 100, 900, 5000, 120], 0.125);
        plan.check_facts(&t).unwrap();
    }

    #[test]
    fn rejects_bad_delta() {
        let t = segment();
        let tb = table(&[1000, 1000], 8);
        let set = subdivide(&circle_layout(&tb, &t).unwrap()).unwrap();
        assert_eq!(assign_heights(&set, &t, &tb, 0.3).unwrap_err(), BalanceError::BadDelta(0.3));
    }
}
