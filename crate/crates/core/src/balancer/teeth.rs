//! The decorated tree: perpendicular teeth between adjacent segments.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::heights::ToothPlan;
use super::BalanceError;
use crate::geom_tree::{GeomEdge, GeomTree};
use crate::harmonic::Side;

/// Where an edge of the decorated tree comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Provenance {
    /// A piece of edge `edge` of the original tree.
    Base { edge: usize },
    /// A tooth on `side` of `edge`.
    Tooth { edge: usize, side: Side },
    /// A tooth within delta of a degree-1 vertex, shortened by the cone.
    TipTooth { edge: usize, side: Side },
}

impl Provenance {
    pub fn edge(&self) -> usize {
        match *self {
            Provenance::Base { edge } | Provenance::Tooth { edge, .. } | Provenance::TipTooth { edge, .. } => edge,
        }
    }

    pub fn is_tooth(&self) -> bool {
        !matches!(self, Provenance::Base { .. })
    }
}

/// `T'`: the original tree with teeth, one provenance per edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoratedTree {
    pub tree: GeomTree,
    pub provenance: Vec<Provenance>,
    pub delta: f64,
    /// Longest tooth; bounds the Hausdorff distance to the original tree.
    pub max_tooth: f64,
}

impl DecoratedTree {
    pub fn tooth_count(&self) -> usize {
        self.provenance.iter().filter(|p| p.is_tooth()).count()
    }
}

/// Polyline with cumulative arclength.
struct Measured<'a> {
    points: &'a [C64],
    cum: Vec<f64>,
}

impl<'a> Measured<'a> {
    fn new(points: &'a [C64]) -> Self {
        let mut cum = Vec::with_capacity(points.len());
        let mut s = 0.0;
        cum.push(0.0);
        for w in points.windows(2) {
            s += (w[1] - w[0]).norm();
            cum.push(s);
        }
        Measured { points, cum }
    }

    fn segment(&self, s: f64) -> usize {
        self.cum.partition_point(|&c| c <= s).clamp(1, self.points.len() - 1) - 1
    }

    fn point(&self, s: f64) -> C64 {
        let k = self.segment(s);
        let len = self.cum[k + 1] - self.cum[k];
        if len == 0.0 {
            return self.points[k];
        }
        self.points[k] + (self.points[k + 1] - self.points[k]) * ((s - self.cum[k]) / len)
    }

    fn tangent(&self, s: f64) -> C64 {
        let k = self.segment(s);
        let d = self.points[k + 1] - self.points[k];
        d / d.norm()
    }

    /// Sub-polyline between arclengths `a < b`, endpoints replaced by the
    /// given vertex positions.
    fn cut(&self, a: f64, b: f64, pa: C64, pb: C64) -> Vec<C64> {
        let mut out = vec![pa];
        for (k, &c) in self.cum.iter().enumerate() {
            if c > a && c < b {
                out.push(self.points[k]);
            }
        }
        out.push(pb);
        out
    }
}

/// Builds `T'`: at every interior segment endpoint a tooth on each side,
/// perpendicular to the edge, as long as the lower of the two adjacent
/// heights times `|K|`. Teeth near a degree-1 vertex are no longer than
/// their distance to it. The result is validated as a plane tree.
pub fn build_teeth(plan: &ToothPlan, tree: &GeomTree) -> Result<DecoratedTree, BalanceError> {
    let mut vertices = tree.vertices.clone();
    let mut edges = Vec::new();
    let mut provenance = Vec::new();
    let mut max_tooth: f64 = 0.0;
    for (ei, e) in tree.edges.iter().enumerate() {
        let left = plan.side(ei, Side::Left);
        let right = plan.side(ei, Side::Right);
        let line = Measured::new(&e.polyline);
        let length = *line.cum.last().expect("nonempty polyline");
        let count = left.heights.len();
        let spacing = left.spacing();
        let mut prev_s = 0.0;
        let mut prev_v = e.from;
        for i in 1..count {
            let s = left.start + i as f64 * spacing;
            let tip = left.tip_distance(i, length).min(left.tip_distance(i - 1, length));
            let foot = line.point(s);
            let normal = line.tangent(s) * C64::i();
            let foot_v = vertices.len();
            vertices.push(foot);
            edges.push(GeomEdge { from: prev_v, to: foot_v, polyline: line.cut(prev_s, s, vertices[prev_v], foot) });
            provenance.push(Provenance::Base { edge: ei });
            for (sp, sign) in [(left, 1.0), (right, -1.0)] {
                let m = sp.heights[i - 1].min(sp.heights[i]);
                let cone = if left.tip_from { s } else { f64::INFINITY }.min(if left.tip_to { length - s } else { f64::INFINITY });
                let h = (m as f64 * plan.k_len).min(cone);
                if !(h > 0.0) {
                    continue;
                }
                max_tooth = max_tooth.max(h);
                let end = foot + normal * (sign * h);
                let v = vertices.len();
                vertices.push(end);
                edges.push(GeomEdge::straight(foot_v, v, foot, end));
                provenance.push(if tip < plan.delta * (1.0 - 1e-9) {
                    Provenance::TipTooth { edge: ei, side: sp.side }
                } else {
                    Provenance::Tooth { edge: ei, side: sp.side }
                });
            }
            prev_s = s;
            prev_v = foot_v;
        }
        edges.push(GeomEdge { from: prev_v, to: e.to, polyline: line.cut(prev_s, length, vertices[prev_v], tree.vertices[e.to]) });
        provenance.push(Provenance::Base { edge: ei });
    }
    if max_tooth > plan.delta {
        return Err(BalanceError::ToothTooLong { length: max_tooth, delta: plan.delta });
    }
    let out = GeomTree { vertices, edges };
    out.validate()?;
    Ok(DecoratedTree { tree: out, provenance, delta: plan.delta, max_tooth })
}
