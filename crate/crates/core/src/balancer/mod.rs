//! Dyadic subdivision of the circle, tooth heights, and the decorated tree
//! `T'` that nearly balances harmonic measure on an embedded tree.
//!
//! The pipeline is [`circle_layout`] (boundary walk arcs weighted by
//! measured side measures), [`subdivide`] (dyadic intervals with the
//! neighbour invariants), [`assign_heights`] (a height per segment `K` of
//! each edge side), [`build_teeth`] (perpendicular teeth), and
//! [`balance_report`] (before/after statistics).

mod heights;
mod intervals;
mod report;
mod teeth;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geom_tree::{GeomError, GeomTree};
use crate::harmonic::Side;

pub use heights::{assign_heights, SidePlan, ToothPlan};
pub use intervals::{circle_layout, circle_layout_floored, subdivide, Arc, CircleInterval, InitialPartition, IntervalSet, MAX_LEVEL, ONE};
pub use report::{balance_report, balance_summary, BalanceReport, BalanceSummary, MIN_RESOLVED_HITS};
pub use teeth::{build_teeth, DecoratedTree, Provenance};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BalanceError {
    #[error("measure table has {table} edges but the tree has {tree}")]
    EdgeCountMismatch { table: usize, tree: usize },
    #[error("edge {edge} {side:?} side has zero estimated measure; use more walkers")]
    ZeroMeasure { edge: usize, side: Side },
    #[error("arc {arc} is below the dyadic resolution 2^-{MAX_LEVEL}; coarsen the partition")]
    Resolution { arc: usize },
    #[error("interval set fails certification: {0}")]
    Certification(String),
    #[error("delta must be a positive power of two, got {0}")]
    BadDelta(f64),
    #[error("edge {edge} of length {length} cannot lose {delta} at its corner ends")]
    EdgeTooShort { edge: usize, length: f64, delta: f64 },
    #[error("interval set does not cover {edge} {side:?}")]
    MissingArc { edge: usize, side: Side },
    #[error("height fact ({fact}) fails at edge {edge}; use more walkers or a larger delta")]
    Fact { fact: u8, edge: usize },
    #[error("tooth of length {length} exceeds delta {delta}")]
    ToothTooLong { length: f64, delta: f64 },
    #[error("geometry: {0}")]
    Geometry(#[from] GeomError),
}

/// One step of the boundary walk: the walk runs along `side` of `edge`
/// and arrives at `head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkStep {
    pub edge: usize,
    pub side: Side,
    pub head: usize,
}

/// Boundary walk of an embedded tree, `2 * edges` steps.
///
/// The walk keeps the tree on its left, so running `from -> to` along an
/// edge visits its right side.
pub fn boundary_walk(tree: &GeomTree) -> Result<Vec<WalkStep>, GeomError> {
    let rot = tree.derive_rotation_system()?;
    let mut ids = HashMap::with_capacity(2 * tree.edges.len());
    for (i, e) in tree.edges.iter().enumerate() {
        ids.insert((e.from, e.to), i);
        ids.insert((e.to, e.from), i);
    }
    Ok(rot
        .contour()
        .into_iter()
        .map(|d| {
            let u = d.vertex;
            let v = rot.dart_head(d);
            let edge = ids[&(u, v)];
            let side = if tree.edges[edge].from == u { Side::Right } else { Side::Left };
            WalkStep { edge, side, head: v }
        })
        .collect())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use num_complex::Complex64 as C64;

    use crate::geom_tree::{GeomEdge, GeomTree};
    use crate::harmonic::{Hit, MeasureTable, Side};

    pub fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub fn segment() -> GeomTree {
        GeomTree {
            vertices: vec![c(-1.0, 0.0), c(1.0, 0.0)],
            edges: vec![GeomEdge::straight(0, 1, c(-1.0, 0.0), c(1.0, 0.0))],
        }
    }

    pub fn plus() -> GeomTree {
        let v = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        let edges = (1..5).map(|k| GeomEdge::straight(0, k, v[0], v[k])).collect();
        GeomTree { vertices: v, edges }
    }

    /// Table with `counts[2e + side]` hits spread uniformly along each side.
    pub fn table(counts: &[u64], bins: usize) -> MeasureTable {
        let mut hits = Vec::new();
        for (k, &c) in counts.iter().enumerate() {
            let side = if k % 2 == 0 { Side::Left } else { Side::Right };
            for i in 0..c {
                hits.push(Some(Hit { edge: k / 2, side, param: (i as f64 + 0.5) / c as f64 }));
            }
        }
        MeasureTable::from_hits(counts.len() / 2, &hits, 0, bins)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn walk_visits_every_side_once() {
        let t = plus();
        let walk = boundary_walk(&t).unwrap();
        assert_eq!(walk.len(), 8);
        let mut seen: Vec<(usize, Side)> = walk.iter().map(|s| (s.edge, s.side)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn walk_steps_chain() {
        let t = plus();
        let walk = boundary_walk(&t).unwrap();
        for k in 0..walk.len() {
            let s = walk[k];
            let e = &t.edges[s.edge];
            let tail = if s.side == Side::Right { e.from } else { e.to };
            let prev = walk[(k + walk.len() - 1) % walk.len()];
            assert_eq!(prev.head, tail);
        }
    }
}
