//! End-to-end experiment: continuum, grid tree, decorated tree, true tree.

use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::balancer::{
    assign_heights, balance_report, balance_summary, build_teeth, circle_layout_floored, subdivide, BalanceReport,
    BalanceSummary, DecoratedTree, ToothPlan,
};
use crate::geom_tree::{hausdorff_distance, similarity_align, GeomTree, Similarity};
use crate::grid_approx::{approximate, GridTree};
use crate::harmonic::{estimate_measures, MeasureTable, WalkConfig};
use crate::plane_tree::enumerate_plane_trees;
use crate::shabat::{normalize, solve_traced, ShabatPolynomial, SolveOptions};

/// Depths above this need [`PipelineConfig::allow_deep`].
pub const MAX_DEPTH: i32 = 5;
/// Largest edge count the catalog accepts.
pub const MAX_CATALOG_EDGES: usize = 8;
/// Hits given to a side the walk never reached.
pub const FLOOR_HITS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureKind {
    Input,
    Numerical,
    Guard,
}

impl FailureKind {
    /// Process exit code for this kind of failure.
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Input => 1,
            FailureKind::Numerical => 2,
            FailureKind::Guard => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: &'static str,
    pub kind: FailureKind,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: &'static str, kind: FailureKind, message: impl ToString) -> Self {
        PipelineError { stage, kind, message: message.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub depth: i32,
    /// `delta = 2^-delta_exp`; `None` means `depth + 4`.
    pub delta_exp: Option<i32>,
    pub walkers: u64,
    pub seed: u64,
    /// Walk the decorated tree too, for the balance comparison.
    pub measure_decorated: bool,
    /// Solve and trace a true tree.
    pub solve: bool,
    /// The decorated tree is solved only up to this many edges; larger
    /// ones fall back to the grid tree.
    pub max_solve_edges: usize,
    pub allow_deep: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            depth: 3,
            delta_exp: None,
            walkers: 1_000_000,
            seed: 1,
            measure_decorated: true,
            solve: true,
            max_solve_edges: 200,
            allow_deep: false,
        }
    }
}

impl PipelineConfig {
    pub fn delta_exp(&self) -> i32 {
        self.delta_exp.unwrap_or(self.depth + 4)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

/// Which tree was handed to the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolvedTree {
    Decorated,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub tree: SolvedTree,
    pub degree: usize,
    pub iterations: usize,
    pub residual: f64,
    /// Hausdorff distance from the traced true tree, after the best
    /// similarity, to the input points.
    pub aligned_distance: f64,
    pub alignment: Similarity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub input: String,
    pub points: usize,
    pub config: PipelineConfig,
    pub delta: f64,
    pub tree_edges: usize,
    pub decorated_edges: usize,
    pub teeth: usize,
    /// `d_H(K, T)` for the grid tree.
    pub grid_distance: f64,
    pub plan_n: u32,
    #[serde(rename = "plan_N")]
    pub plan_big_n: u32,
    pub k_len: f64,
    pub height_repairs: usize,
    pub floored_sides: usize,
    pub before: BalanceSummary,
    pub after: Option<BalanceSummary>,
    pub improved: Option<bool>,
    pub solve: Option<SolveSummary>,
    pub timings: Vec<StageTime>,
}

/// Everything the pipeline produced.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub grid: GridTree,
    pub tree: GeomTree,
    pub measures: MeasureTable,
    pub plan: ToothPlan,
    pub decorated: DecoratedTree,
    pub decorated_measures: Option<MeasureTable>,
    pub balance: Option<BalanceReport>,
    pub poly: Option<ShabatPolynomial>,
    pub true_tree: Option<GeomTree>,
    pub report: PipelineReport,
}

struct Clock {
    start: Instant,
    times: Vec<StageTime>,
}

impl Clock {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.times.push(StageTime { stage: stage.to_string(), seconds: (now - self.start).as_secs_f64() });
        self.start = now;
    }
}

/// Grid tree for `k` at the configured depth, with the depth guard.
pub fn grid_tree(k: &[C64], config: &PipelineConfig) -> Result<GridTree, PipelineError> {
    if config.depth > MAX_DEPTH && !config.allow_deep {
        return Err(PipelineError::new(
            "approximate",
            FailureKind::Guard,
            format!("depth {} exceeds {MAX_DEPTH}; pass the override to proceed", config.depth),
        ));
    }
    if config.depth > MAX_DEPTH {
        log::warn!("depth {} is above the guard {MAX_DEPTH}", config.depth);
    }
    approximate(k, config.depth).map_err(|e| PipelineError::new("approximate", FailureKind::Input, e))
}

/// Runs approximate, measure, balance, and optionally measure the
/// decorated tree and solve for a true tree aligned to `k`.
pub fn run_pipeline(input: &str, k: &[C64], config: &PipelineConfig) -> Result<PipelineRun, PipelineError> {
    let numerical = |stage| move |e: String| PipelineError::new(stage, FailureKind::Numerical, e);
    if config.walkers == 0 {
        return Err(PipelineError::new("measure", FailureKind::Input, "walker count must be positive"));
    }
    let mut clock = Clock { start: Instant::now(), times: Vec::new() };
    let grid = grid_tree(k, config)?;
    let tree = grid.to_geom();
    let spacing = grid.unit() / 4.0;
    let grid_distance = hausdorff_distance(k, &tree.sample_points(spacing))
        .map_err(|e| PipelineError::new("approximate", FailureKind::Input, e))?;
    clock.lap("approximate");

    let walk = WalkConfig { seed: config.seed, ..WalkConfig::default() };
    let measures = estimate_measures(&tree, &walk, config.walkers).map_err(|e| numerical("measure")(e.to_string()))?;
    clock.lap("measure");

    let delta = (-(config.delta_exp() as f64)).exp2();
    let floored_sides = measures.sides.iter().filter(|s| s.hits == 0).count();
    let layout = circle_layout_floored(&measures, &tree, FLOOR_HITS).map_err(|e| numerical("balance")(e.to_string()))?;
    let intervals = subdivide(&layout).map_err(|e| numerical("balance")(e.to_string()))?;
    let plan = assign_heights(&intervals, &tree, &measures, delta).map_err(|e| numerical("balance")(e.to_string()))?;
    let decorated = build_teeth(&plan, &tree).map_err(|e| numerical("balance")(e.to_string()))?;
    clock.lap("balance");

    let (decorated_measures, balance) = if config.measure_decorated {
        let after = estimate_measures(&decorated.tree, &walk, config.walkers)
            .map_err(|e| numerical("measure-decorated")(e.to_string()))?;
        let report = balance_report(&measures, &after);
        clock.lap("measure-decorated");
        (Some(after), Some(report))
    } else {
        (None, None)
    };

    let (poly, true_tree, solve) = if config.solve {
        let (which, geom) = if decorated.tree.edges.len() <= config.max_solve_edges {
            (SolvedTree::Decorated, &decorated.tree)
        } else {
            log::info!(
                "decorated tree has {} edges (limit {}); solving the grid tree",
                decorated.tree.edges.len(),
                config.max_solve_edges
            );
            (SolvedTree::Grid, &tree)
        };
        let plane = geom.derive_rotation_system().map_err(|e| numerical("solve")(e.to_string()))?;
        let opts = SolveOptions { seed: config.seed, ..SolveOptions::default() };
        let (p, traced) = solve_traced(&plane, Some(geom), &opts).map_err(|e| numerical("solve")(e.to_string()))?;
        clock.lap("solve");
        let aligned = similarity_align(&traced.geometry, k).map_err(|e| numerical("align")(e.to_string()))?;
        clock.lap("align");
        let summary = SolveSummary {
            tree: which,
            degree: p.degree,
            iterations: p.iterations,
            residual: p.residual,
            aligned_distance: aligned.distance,
            alignment: aligned.similarity,
        };
        let placed = traced.geometry.transform(&aligned.similarity);
        (Some(p), Some(placed), Some(summary))
    } else {
        (None, None, None)
    };

    let report = PipelineReport {
        input: input.to_string(),
        points: k.len(),
        config: config.clone(),
        delta,
        tree_edges: tree.edges.len(),
        decorated_edges: decorated.tree.edges.len(),
        teeth: decorated.tooth_count(),
        grid_distance,
        plan_n: plan.n,
        plan_big_n: plan.big_n,
        k_len: plan.k_len,
        height_repairs: plan.repairs,
        floored_sides,
        before: balance.as_ref().map_or_else(|| balance_summary(&measures), |b| b.before.clone()),
        after: balance.as_ref().map(|b| b.after.clone()),
        improved: balance.as_ref().map(|b| b.improved),
        solve,
        timings: clock.times,
    };
    Ok(PipelineRun { grid, tree, measures, plan, decorated, decorated_measures, balance, poly, true_tree, report })
}

/// One solved plane tree class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub edges: usize,
    pub code: String,
    /// Normalized Shabat polynomial, when the solve succeeded.
    pub poly: Option<ShabatPolynomial>,
    pub error: Option<String>,
    /// Traced true tree of the normalized polynomial.
    pub geometry: Option<GeomTree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub max_edges: usize,
    pub entries: Vec<CatalogEntry>,
    /// Some class failed to solve.
    pub partial: bool,
}

/// Solves every plane tree with at most `max_edges` edges.
pub fn catalog(max_edges: usize, opts: &SolveOptions) -> Result<Catalog, PipelineError> {
    if max_edges > MAX_CATALOG_EDGES {
        return Err(PipelineError::new(
            "catalog",
            FailureKind::Guard,
            format!("catalog is limited to {MAX_CATALOG_EDGES} edges (asked for {max_edges})"),
        ));
    }
    let mut entries = Vec::new();
    for n in 1..=max_edges {
        let trees = enumerate_plane_trees(n).map_err(|e| PipelineError::new("catalog", FailureKind::Input, e))?;
        for t in trees {
            let code = t.canonical_code().to_string();
            let entry = match solve_traced(&t, None, opts) {
                Ok((p, _)) => {
                    let (q, _) = normalize(&p);
                    let geometry = crate::tracer::trace_tree(&q).ok().map(|tr| tr.geometry);
                    CatalogEntry { edges: n, code, poly: Some(q), error: None, geometry }
                }
                Err(e) => CatalogEntry { edges: n, code, poly: None, error: Some(e.to_string()), geometry: None },
            };
            entries.push(entry);
        }
    }
    let partial = entries.iter().any(|e| e.poly.is_none());
    Ok(Catalog { max_edges, entries, partial })
}
