//! Balance statistics of a measure table, before and after decoration.

use serde::{Deserialize, Serialize};

use crate::harmonic::{MeasureTable, Side};

/// Hits needed on both sides before an edge's side ratio is counted.
pub const MIN_RESOLVED_HITS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceSummary {
    pub edges: usize,
    /// Edges with at least [`MIN_RESOLVED_HITS`] hits on both sides.
    pub resolved_edges: usize,
    /// Largest `max/min - 1` of the two side measures over resolved edges.
    pub max_side_deviation: f64,
    pub mean_side_deviation: f64,
    /// Standard deviation over mean of the edge measures.
    pub edge_measure_cv: f64,
    /// Sum of all side measures; 1 unless every walker was discarded.
    pub total_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub before: BalanceSummary,
    pub after: BalanceSummary,
    /// `after.max_side_deviation < before.max_side_deviation`.
    pub improved: bool,
}

pub fn balance_summary(table: &MeasureTable) -> BalanceSummary {
    let mut resolved = 0;
    let mut max_dev: f64 = 0.0;
    let mut sum_dev = 0.0;
    for e in 0..table.edge_count {
        let l = table.entry(e, Side::Left);
        let r = table.entry(e, Side::Right);
        if l.hits < MIN_RESOLVED_HITS || r.hits < MIN_RESOLVED_HITS {
            continue;
        }
        let dev = l.measure.max(r.measure) / l.measure.min(r.measure) - 1.0;
        resolved += 1;
        max_dev = max_dev.max(dev);
        sum_dev += dev;
    }
    let measures: Vec<f64> = (0..table.edge_count).map(|e| table.edge_measure(e)).collect();
    let k = measures.len().max(1) as f64;
    let mean = measures.iter().sum::<f64>() / k;
    let var = measures.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / k;
    BalanceSummary {
        edges: table.edge_count,
        resolved_edges: resolved,
        max_side_deviation: max_dev,
        mean_side_deviation: if resolved > 0 { sum_dev / resolved as f64 } else { 0.0 },
        edge_measure_cv: if mean > 0.0 { var.sqrt() / mean } else { 0.0 },
        total_measure: table.sides.iter().map(|s| s.measure).sum(),
    }
}

/// Compares a tree's table with its decorated tree's table.
pub fn balance_report(before: &MeasureTable, after: &MeasureTable) -> BalanceReport {
    let before = balance_summary(before);
    let after = balance_summary(after);
    let improved = after.max_side_deviation < before.max_side_deviation;
    BalanceReport { before, after, improved }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::table;
    use super::*;

    #[test]
    fn balanced_table_has_no_deviation() {
        let s = balance_summary(&table(&[500; 8], 4));
        assert_eq!(s.resolved_edges, 4);
        assert_eq!(s.max_side_deviation, 0.0);
        assert_eq!(s.edge_measure_cv, 0.0);
        assert!((s.total_measure - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thin_edges_are_unresolved() {
        let s = balance_summary(&table(&[500, 250, 10, 2000], 4));
        assert_eq!(s.resolved_edges, 1);
        assert!((s.max_side_deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_compares() {
        let r = balance_report(&table(&[500, 250], 4), &table(&[500, 400], 4));
        assert!(r.improved);
        assert!((r.before.total_measure - 1.0).abs() < 1e-12);
        assert!((r.after.total_measure - 1.0).abs() < 1e-12);
    }
}
