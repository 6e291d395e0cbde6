//! Circle partitions: boundary walk arcs and their dyadic refinement.
//!
//! Circle positions are integers in `[0, ONE)`, so every dyadic length
//! `2^-j` with `j <= MAX_LEVEL` is exact.

use serde::{Deserialize, Serialize};

use super::{boundary_walk, BalanceError};
use crate::geom_tree::GeomTree;
use crate::harmonic::{MeasureTable, Side};

/// Length of the whole circle.
pub const ONE: u64 = 1 << 62;
/// Finest dyadic level `subdivide` will produce before giving up.
pub const MAX_LEVEL: u32 = 60;

/// One arc of the initial partition: a side of an edge, with its measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub edge: usize,
    pub side: Side,
    pub length: f64,
}

/// Arcs in boundary walk order. Every arc endpoint is a vertex preimage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialPartition {
    pub arcs: Vec<Arc>,
}

impl InitialPartition {
    /// Arcs with the given lengths, tagged `(i, Left)`; for tests and
    /// synthetic inputs.
    pub fn from_lengths(lengths: &[f64]) -> Self {
        InitialPartition {
            arcs: lengths.iter().enumerate().map(|(i, &length)| Arc { edge: i, side: Side::Left, length }).collect(),
        }
    }
}

/// Lays the measured side measures of `tree` around the circle in
/// boundary walk order.
pub fn circle_layout(table: &MeasureTable, tree: &GeomTree) -> Result<InitialPartition, BalanceError> {
    layout(table, tree, None)
}

/// As [`circle_layout`], but a side without hits is given the measure of
/// `floor_hits` hits instead of failing. Deep pockets of grid trees have
/// sides whose measure is far below what any feasible walk resolves.
pub fn circle_layout_floored(table: &MeasureTable, tree: &GeomTree, floor_hits: f64) -> Result<InitialPartition, BalanceError> {
    layout(table, tree, Some(floor_hits))
}

fn layout(table: &MeasureTable, tree: &GeomTree, floor_hits: Option<f64>) -> Result<InitialPartition, BalanceError> {
    if table.edge_count != tree.edges.len() {
        return Err(BalanceError::EdgeCountMismatch { table: table.edge_count, tree: tree.edges.len() });
    }
    let walk = boundary_walk(tree)?;
    let mut arcs = Vec::with_capacity(walk.len());
    for step in walk {
        let entry = table.entry(step.edge, step.side);
        let length = match floor_hits {
            Some(f) if entry.hits == 0 && f > 0.0 && table.accepted() > 0 => f / table.accepted() as f64,
            _ => entry.measure,
        };
        if !(length > 0.0) {
            return Err(BalanceError::ZeroMeasure { edge: step.edge, side: step.side });
        }
        arcs.push(Arc { edge: step.edge, side: step.side, length });
    }
    let total: f64 = arcs.iter().map(|a| a.length).sum();
    for a in &mut arcs {
        a.length /= total;
    }
    Ok(InitialPartition { arcs })
}

/// A dyadic circle interval `[start, start + 2^-level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleInterval {
    pub start: u64,
    pub level: u32,
    /// Index of the arc of the initial partition this interval refines.
    pub arc: usize,
    pub edge: usize,
    pub side: Side,
    /// A vertex preimage sits at `start`.
    pub mark: bool,
}

impl CircleInterval {
    pub fn len(&self) -> u64 {
        ONE >> self.level
    }

    pub fn end(&self) -> u64 {
        self.start + self.len()
    }

    /// Length as a fraction of the circle.
    pub fn fraction(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    fn halves(&self) -> [CircleInterval; 2] {
        let a = CircleInterval { level: self.level + 1, ..*self };
        let b = CircleInterval { start: self.start + a.len(), mark: false, ..a };
        [a, b]
    }
}

/// Circle intervals of dyadic lengths, in circle order, starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub intervals: Vec<CircleInterval>,
}

impl IntervalSet {
    pub fn min_level(&self) -> u32 {
        self.intervals.iter().map(|i| i.level).min().unwrap_or(0)
    }

    pub fn max_level(&self) -> u32 {
        self.intervals.iter().map(|i| i.level).max().unwrap_or(0)
    }

    /// The interval containing circle position `p`.
    pub fn at(&self, p: u64) -> &CircleInterval {
        let k = self.intervals.partition_point(|i| i.start <= p);
        &self.intervals[k.saturating_sub(1)]
    }

    /// `[start, end)` covered by the intervals of one edge side.
    pub fn span(&self, edge: usize, side: Side) -> Option<(u64, u64)> {
        let mut it = self.intervals.iter().filter(|i| i.edge == edge && i.side == side);
        let first = it.next()?;
        let last = it.last().unwrap_or(first);
        Some((first.start, last.end()))
    }

    /// Checks the four interval invariants, plus contiguity and dyadic
    /// alignment.
    pub fn certify(&self) -> Result<(), BalanceError> {
        let fail = |msg: String| Err(BalanceError::Certification(msg));
        let iv = &self.intervals;
        let k = iv.len();
        if k < 2 {
            return fail(format!("{k} intervals"));
        }
        if iv[0].start != 0 {
            return fail("first interval does not start at 0".into());
        }
        let mut total: u128 = 0;
        for (i, a) in iv.iter().enumerate() {
            if a.level > MAX_LEVEL {
                return fail(format!("interval {i} has level {}", a.level));
            }
            if a.start % a.len() != 0 {
                return fail(format!("interval {i} is not dyadically aligned"));
            }
            if i + 1 < k && iv[i + 1].start != a.end() {
                return fail(format!("gap or overlap after interval {i}"));
            }
            total += a.len() as u128;
        }
        if total != ONE as u128 {
            return fail(format!("lengths sum to {total}, not {ONE}"));
        }
        for i in 0..k {
            let a = iv[i].level;
            let prev = iv[(i + k - 1) % k].level;
            let next = iv[(i + 1) % k].level;
            if a.abs_diff(next) > 1 {
                return fail(format!("intervals {i} and {} differ by more than a factor 2", (i + 1) % k));
            }
            if a != prev && a != next {
                return fail(format!("interval {i} has no equal neighbour"));
            }
            if iv[i].mark && a != prev {
                return fail(format!("unequal flanks at the mark before interval {i}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    start: u64,
    len: u64,
    arc: usize,
    first: bool,
}

impl Piece {
    fn end(&self) -> u64 {
        self.start + self.len
    }
}

/// Splits the larger of two cyclic neighbours until every ratio is at
/// most 2. The shortest piece is never split.
fn balance_pieces(mut pieces: Vec<Piece>) -> Vec<Piece> {
    loop {
        let k = pieces.len();
        let mut out = Vec::with_capacity(k);
        let mut changed = false;
        for i in 0..k {
            let p = pieces[i];
            let nb = pieces[(i + k - 1) % k].len.min(pieces[(i + 1) % k].len);
            if p.len > 2 * nb {
                let h = p.len / 2;
                out.push(Piece { len: h, ..p });
                out.push(Piece { start: p.start + h, len: p.len - h, first: false, ..p });
                changed = true;
            } else {
                out.push(p);
            }
        }
        pieces = out;
        if !changed {
            return pieces;
        }
    }
}

/// Maximal dyadic intervals at most a quarter as long as every piece they
/// meet.
fn dyadic_cover(pieces: &[Piece]) -> Result<Vec<(u64, u32)>, BalanceError> {
    let mut out = Vec::new();
    let mut stack = vec![(0u64, 0u32)];
    while let Some((start, level)) = stack.pop() {
        let len = ONE >> level;
        let end = start + len;
        let mut k = pieces.partition_point(|p| p.end() <= start);
        let mut shortest = u64::MAX;
        let mut arc = 0;
        while k < pieces.len() && pieces[k].start < end {
            if pieces[k].len < shortest {
                shortest = pieces[k].len;
                arc = pieces[k].arc;
            }
            k += 1;
        }
        if len as u128 * 4 <= shortest as u128 {
            out.push((start, level));
        } else if level >= MAX_LEVEL {
            return Err(BalanceError::Resolution { arc });
        } else {
            let h = len / 2;
            stack.push((start + h, level + 1));
            stack.push((start, level + 1));
        }
    }
    Ok(out)
}

fn split_where(iv: Vec<CircleInterval>, split: impl Fn(usize) -> bool) -> (Vec<CircleInterval>, bool) {
    let mut out = Vec::with_capacity(iv.len());
    let mut changed = false;
    for (i, a) in iv.iter().enumerate() {
        if split(i) {
            out.extend(a.halves());
            changed = true;
        } else {
            out.push(*a);
        }
    }
    (out, changed)
}

fn level_error(iv: &[CircleInterval]) -> Option<BalanceError> {
    iv.iter().find(|a| a.level > MAX_LEVEL).map(|a| BalanceError::Resolution { arc: a.arc })
}

/// Refines `partition` into dyadic intervals in which adjacent lengths are
/// within a factor 2, every interval has an equal neighbour, and the two
/// intervals at every vertex mark are equal. The result is certified.
///
/// Marks move to the nearest dyadic boundary chosen by the cover: each one
/// moves by less than the length of the cover interval that straddled it.
pub fn subdivide(partition: &InitialPartition) -> Result<IntervalSet, BalanceError> {
    let arcs = &partition.arcs;
    if arcs.len() < 2 {
        return Err(BalanceError::Certification(format!("{} arcs; need at least 2", arcs.len())));
    }
    let total: f64 = arcs.iter().map(|a| a.length).sum();
    if !(total > 0.0) || arcs.iter().any(|a| !(a.length > 0.0)) {
        let arc = arcs.iter().position(|a| !(a.length > 0.0)).unwrap_or(0);
        return Err(BalanceError::ZeroMeasure { edge: arcs[arc].edge, side: arcs[arc].side });
    }
    let mut pieces = Vec::with_capacity(arcs.len());
    let mut cum = 0.0;
    let mut start = 0u64;
    for (i, a) in arcs.iter().enumerate() {
        cum += a.length;
        let end = if i + 1 == arcs.len() { ONE } else { ((cum / total) * ONE as f64).round().min(ONE as f64) as u64 };
        if end <= start {
            return Err(BalanceError::Resolution { arc: i });
        }
        pieces.push(Piece { start, len: end - start, arc: i, first: true });
        start = end;
    }

    let pieces = balance_pieces(pieces);
    let cover = dyadic_cover(&pieces)?;

    // Each dyadic joins the piece holding its right end; pieces are then
    // refined to exactly 16 dyadics by halving the largest.
    let mut iv: Vec<CircleInterval> = Vec::with_capacity(16 * pieces.len());
    let mut k = 0;
    let mut c = 0;
    while c < cover.len() {
        let p = pieces[k];
        let mut group = Vec::new();
        while c < cover.len() {
            let (s, level) = cover[c];
            if s + (ONE >> level) - 1 >= p.end() {
                break;
            }
            group.push((s, level));
            c += 1;
        }
        if group.is_empty() {
            return Err(BalanceError::Certification(format!("piece of arc {} received no dyadic", p.arc)));
        }
        while group.len() < 16 {
            let (i, &(s, level)) = group.iter().enumerate().min_by_key(|(_, g)| g.1).expect("nonempty");
            if level >= MAX_LEVEL {
                return Err(BalanceError::Resolution { arc: p.arc });
            }
            let h = ONE >> (level + 1);
            group[i] = (s, level + 1);
            group.insert(i + 1, (s + h, level + 1));
        }
        let arc = arcs[p.arc];
        for (g, &(s, level)) in group.iter().enumerate() {
            iv.push(CircleInterval { start: s, level, arc: p.arc, edge: arc.edge, side: arc.side, mark: p.first && g == 0 });
        }
        k += 1;
        if k == pieces.len() && c < cover.len() {
            return Err(BalanceError::Certification("dyadic cover extends past the last piece".into()));
        }
    }

    // Split the larger neighbour until adjacent ratios are at most 2.
    loop {
        let n = iv.len();
        let lv: Vec<u32> = iv.iter().map(|a| a.level).collect();
        let (next, changed) =
            split_where(iv, |i| lv[(i + n - 1) % n].max(lv[(i + 1) % n]) > lv[i] + 1);
        iv = next;
        if let Some(e) = level_error(&iv) {
            return Err(e);
        }
        if !changed {
            break;
        }
    }

    // Quadrisect, so every interval has an equal neighbour.
    iv = iv.iter().flat_map(|a| a.halves()).flat_map(|h| h.halves()).collect();
    if let Some(e) = level_error(&iv) {
        return Err(e);
    }

    // Equalize the flanks of every mark.
    let n = iv.len();
    let mut split = vec![false; n];
    for i in 0..n {
        if !iv[i].mark {
            continue;
        }
        let left = (i + n - 1) % n;
        match iv[left].level.cmp(&iv[i].level) {
            std::cmp::Ordering::Less => {
                split[left] = true;
                split[(left + n - 1) % n] = true;
            }
            std::cmp::Ordering::Greater => {
                split[i] = true;
                split[(i + 1) % n] = true;
            }
            std::cmp::Ordering::Equal => {}
        }
    }
    let (iv, _) = split_where(iv, |i| split[i]);
    if let Some(e) = level_error(&iv) {
        return Err(e);
    }
    let set = IntervalSet { intervals: iv };
    set.certify()?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn arcs_in_order(set: &IntervalSet) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for a in &set.intervals {
            if out.last() != Some(&a.arc) {
                out.push(a.arc);
            }
        }
        out
    }

    #[test]
    fn two_halves_give_equal_lengths() {
        let set = subdivide(&InitialPartition::from_lengths(&[0.5, 0.5])).unwrap();
        let l = set.intervals[0].level;
        assert!(set.intervals.iter().all(|a| a.level == l));
        assert_eq!(set.intervals.iter().filter(|a| a.mark).count(), 2);
        assert_eq!(arcs_in_order(&set), vec![0, 1]);
    }

    #[test]
    fn half_quarter_quarter_certifies() {
        let set = subdivide(&InitialPartition::from_lengths(&[0.5, 0.25, 0.25])).unwrap();
        set.certify().unwrap();
        assert_eq!(set.intervals.iter().filter(|a| a.mark).count(), 3);
        assert_eq!(arcs_in_order(&set), vec![0, 1, 2]);
    }

    #[test]
    fn adversarial_lengths_terminate() {
        for lengths in [[0.7, 0.2, 0.1], [0.98, 0.01, 0.01], [1e-6, 0.5, 0.5 - 1e-6]] {
            let set = subdivide(&InitialPartition::from_lengths(&lengths)).unwrap();
            set.certify().unwrap();
            assert_eq!(arcs_in_order(&set), vec![0, 1, 2]);
        }
    }

    #[test]
    fn marks_move_little() {
        let lengths = [0.7, 0.2, 0.1];
        let set = subdivide(&InitialPartition::from_lengths(&lengths)).unwrap();
        let mut cum = 0.0;
        for (arc, l) in lengths.iter().enumerate() {
            let first = set.intervals.iter().find(|a| a.arc == arc).unwrap();
            assert!(first.mark);
            let moved = (first.start as f64 / ONE as f64 - cum).abs();
            assert!(moved < l / 4.0, "arc {arc} moved {moved}");
            cum += l;
        }
    }

    #[test]
    fn too_fine_is_rejected() {
        let err = subdivide(&InitialPartition::from_lengths(&[1e-19, 0.5, 0.5])).unwrap_err();
        assert!(matches!(err, BalanceError::Resolution { .. }), "{err}");
    }

    #[test]
    fn segment_layout_has_two_halves() {
        let t = segment();
        let table = table(&[500, 500], 8);
        let part = circle_layout(&table, &t).unwrap();
        assert_eq!(part.arcs.len(), 2);
        for a in &part.arcs {
            assert!((a.length - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn layout_rejects_empty_side() {
        let t = segment();
        let table = table(&[500, 0], 8);
        assert_eq!(circle_layout(&table, &t).unwrap_err(), BalanceError::ZeroMeasure { edge: 0, side: Side::Right });
    }

    #[test]
    fn floor_fills_empty_side() {
        let t = segment();
        let part = circle_layout_floored(&table(&[500, 0], 8), &t, 0.5).unwrap();
        assert!((part.arcs.iter().map(|a| a.length).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(part.arcs.iter().all(|a| a.length > 0.0));
    }

    #[test]
    fn layout_follows_the_walk() {
        let t = plus();
        let counts: Vec<u64> = (1..=8).map(|k| 100 * k).collect();
        let part = circle_layout(&table(&counts, 8), &t).unwrap();
        assert_eq!(part.arcs.len(), 8);
        let walk = boundary_walk(&t).unwrap();
        let total: u64 = counts.iter().sum();
        for (a, s) in part.arcs.iter().zip(&walk) {
            assert_eq!((a.edge, a.side), (s.edge, s.side));
            let want = counts[2 * s.edge + s.side.index()] as f64 / total as f64;
            assert!((a.length - want).abs() < 1e-12);
        }
    }

    #[test]
    fn span_covers_arc() {
        let t = plus();
        let part = circle_layout(&table(&[100, 200, 300, 400, 100, 200, 300, 400], 8), &t).unwrap();
        let set = subdivide(&part).unwrap();
        let mut covered = 0u128;
        for e in 0..4 {
            for s in Side::BOTH {
                let (a, b) = set.span(e, s).unwrap();
                covered += (b - a) as u128;
            }
        }
        assert_eq!(covered, ONE as u128);
    }
}
