//! `truetree` command line: grid approximation, harmonic measure, tree
//! decoration, Shabat solving, tracing, and the end-to-end pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use truetree::balancer::{assign_heights, build_teeth, circle_layout_floored, subdivide, DecoratedTree};
use truetree::geom_tree::{points_from_json, GeomTree};
use truetree::grid_approx::approximate;
use truetree::harmonic::{estimate_measures, MeasureTable, WalkConfig};
use truetree::io::{read_json, write_json, write_text, IoError};
use truetree::pipeline::{catalog, run_pipeline, FailureKind, PipelineConfig, FLOOR_HITS, MAX_DEPTH};
use truetree::plane_tree::{enumerate_plane_trees, PlaneTree};
use truetree::shabat::{solve, ShabatPolynomial, SolveOptions};
use truetree::shapes;
use truetree::svg::{render_svg, Layer};
use truetree::tracer::trace_tree;

#[derive(Parser)]
#[command(name = "truetree", version, about = "True trees and conformally balanced tree approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grid tree approximating a point set.
    Approximate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        depth: i32,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        allow_deep: bool,
    },
    /// Harmonic measure of every edge side by walk on spheres.
    Balance {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        walkers: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Decorated tree with teeth from a tree and its measures.
    Decorate {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        measures: PathBuf,
        #[arg(long)]
        delta_exp: i32,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Shabat polynomial of a plane tree.
    Solve {
        /// Plane tree JSON, or a geometric tree whose rotation system is used.
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        hint: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// True tree of a Shabat polynomial.
    Trace {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Continuum to grid tree, decorated tree and aligned true tree.
    Pipeline {
        /// Points JSON.
        #[arg(long, conflicts_with = "shape")]
        input: Option<PathBuf>,
        /// Built-in continuum: segment, circle, l-polyline, plus.
        #[arg(long)]
        shape: Option<String>,
        #[arg(long, default_value_t = 3)]
        depth: i32,
        #[arg(long)]
        delta_exp: Option<i32>,
        #[arg(long, default_value_t = 1_000_000)]
        walkers: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        no_solve: bool,
        #[arg(long)]
        no_measure_decorated: bool,
        #[arg(long, default_value_t = 200)]
        max_solve_edges: usize,
        /// Allow depths above the guard.
        #[arg(long)]
        allow_deep: bool,
        #[arg(long)]
        svg: bool,
    },
    /// Solved catalog of all plane trees up to a size.
    Catalog {
        #[arg(long)]
        max_edges: usize,
        #[arg(long)]
        output: PathBuf,
        /// Directory for one SVG per class.
        #[arg(long)]
        svg_dir: Option<PathBuf>,
    },
    /// Plane trees with a given number of edges, one per class.
    Enumerate {
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    kind: FailureKind,
    message: String,
}

impl Failure {
    fn input(m: impl ToString) -> Self {
        Failure { kind: FailureKind::Input, message: m.to_string() }
    }

    fn numerical(m: impl ToString) -> Self {
        Failure { kind: FailureKind::Numerical, message: m.to_string() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::input(e)
    }
}

impl From<truetree::pipeline::PipelineError> for Failure {
    fn from(e: truetree::pipeline::PipelineError) -> Self {
        Failure { kind: e.kind, message: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

fn read_points(path: &Path) -> Result<Vec<Complex64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    points_from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_svg(path: &Path, layers: &[Layer]) -> Outcome {
    Ok(write_text(path, &render_svg(layers))?)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Approximate { input, depth, output, svg, allow_deep } => {
            if depth > MAX_DEPTH && !allow_deep {
                return Err(Failure { kind: FailureKind::Guard, message: format!("depth {depth} exceeds {MAX_DEPTH}") });
            }
            let k = read_points(&input)?;
            let grid = approximate(&k, depth).map_err(Failure::input)?;
            let geom = grid.to_geom();
            write_json(&output, &geom)?;
            if let Some(path) = svg {
                write_svg(&path, &[Layer::points("K", &k, "#999999"), Layer::tree("T", &geom, "#1f77b4")])?;
            }
            println!("grid tree: {} edges, {} vertices", geom.edges.len(), geom.vertices.len());
        }
        Command::Balance { tree, walkers, seed, report } => {
            let geom: GeomTree = read_json(&tree)?;
            geom.validate().map_err(Failure::input)?;
            let config = WalkConfig { seed, ..WalkConfig::default() };
            let table = estimate_measures(&geom, &config, walkers).map_err(Failure::numerical)?;
            write_json(&report, &table)?;
            println!(
                "max side ratio {:.4}, edge measure range [{:.3e}, {:.3e}]",
                table.summary.max_side_ratio, table.summary.min_edge_measure, table.summary.max_edge_measure
            );
        }
        Command::Decorate { tree, measures, delta_exp, output, svg } => {
            let geom: GeomTree = read_json(&tree)?;
            let table: MeasureTable = read_json(&measures)?;
            let delta = (-(delta_exp as f64)).exp2();
            let layout = circle_layout_floored(&table, &geom, FLOOR_HITS).map_err(Failure::input)?;
            let intervals = subdivide(&layout).map_err(Failure::numerical)?;
            let plan = assign_heights(&intervals, &geom, &table, delta).map_err(Failure::numerical)?;
            let decorated: DecoratedTree = build_teeth(&plan, &geom).map_err(Failure::numerical)?;
            write_json(&output, &decorated)?;
            write_json(&output.with_extension("plan.json"), &plan)?;
            if let Some(path) = svg {
                write_svg(&path, &[Layer::tree("T-prime", &decorated.tree, "#d62728"), Layer::tree("T", &geom, "#1f77b4")])?;
            }
            println!("decorated tree: {} edges, {} teeth, {} height repairs", decorated.tree.edges.len(), decorated.tooth_count(), plan.repairs);
        }
        Command::Solve { tree, hint, output, seed } => {
            let text = std::fs::read_to_string(&tree).map_err(|e| Failure::input(format!("{}: {e}", tree.display())))?;
            let (plane, geom_hint) = match serde_json::from_str::<PlaneTree>(&text) {
                Ok(p) => (p, None),
                Err(_) => {
                    let g: GeomTree = serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", tree.display())))?;
                    (g.derive_rotation_system().map_err(Failure::input)?, Some(g))
                }
            };
            let hint = match hint {
                Some(path) => Some(read_json::<GeomTree>(&path)?),
                None => geom_hint,
            };
            let opts = SolveOptions { seed, ..SolveOptions::default() };
            let p = solve(&plane, hint.as_ref(), &opts).map_err(Failure::numerical)?;
            write_json(&output, &p)?;
            println!("degree {}, residual {:.3e}", p.degree, p.residual);
        }
        Command::Trace { poly, output, svg } => {
            let p: ShabatPolynomial = read_json(&poly)?;
            let traced = trace_tree(&p).map_err(Failure::numerical)?;
            write_json(&output, &traced.geometry)?;
            if let Some(path) = svg {
                write_svg(&path, &[Layer::tree("true-tree", &traced.geometry, "#2ca02c").with_vertices()])?;
            }
            println!("traced {} edges", traced.geometry.edges.len());
        }
        Command::Pipeline {
            input,
            shape,
            depth,
            delta_exp,
            walkers,
            seed,
            out_dir,
            no_solve,
            no_measure_decorated,
            max_solve_edges,
            allow_deep,
            svg,
        } => {
            let (name, k) = match (input, shape) {
                (Some(path), _) => (path.display().to_string(), read_points(&path)?),
                (None, Some(s)) => {
                    let pts = shapes::by_name(&s).ok_or_else(|| {
                        Failure::input(format!("unknown shape {s:?}; known: {}", shapes::NAMES.join(", ")))
                    })?;
                    (s, pts)
                }
                (None, None) => return Err(Failure::input("give --input or --shape")),
            };
            let config = PipelineConfig {
                depth,
                delta_exp,
                walkers,
                seed,
                measure_decorated: !no_measure_decorated,
                solve: !no_solve,
                max_solve_edges,
                allow_deep,
            };
            std::fs::create_dir_all(&out_dir).map_err(|e| Failure::input(format!("{}: {e}", out_dir.display())))?;
            let run = run_pipeline(&name, &k, &config)?;
            write_json(&out_dir.join("tree.json"), &run.tree)?;
            write_json(&out_dir.join("measures.json"), &run.measures)?;
            write_json(&out_dir.join("decorated.json"), &run.decorated)?;
            write_json(&out_dir.join("plan.json"), &run.plan)?;
            if let Some(p) = &run.poly {
                write_json(&out_dir.join("poly.json"), p)?;
            }
            if let Some(g) = &run.true_tree {
                write_json(&out_dir.join("geom.json"), g)?;
            }
            write_json(&out_dir.join("report.json"), &run.report)?;
            if svg {
                let mut layers = vec![
                    Layer::points("K", &k, "#999999"),
                    Layer::tree("T", &run.tree, "#1f77b4"),
                    Layer::tree("T-prime", &run.decorated.tree, "#d62728").with_stroke_width(0.0005),
                ];
                if let Some(g) = &run.true_tree {
                    layers.push(Layer::tree("true-tree", g, "#2ca02c"));
                }
                write_svg(&out_dir.join("overlay.svg"), &layers)?;
            }
            let r = &run.report;
            println!("T: {} edges; T': {} edges; d_H(K, T) = {:.4}", r.tree_edges, r.decorated_edges, r.grid_distance);
            if let Some(after) = &r.after {
                println!(
                    "max side-ratio deviation: before {:.4}, after {:.4}",
                    r.before.max_side_deviation, after.max_side_deviation
                );
            }
            if let Some(s) = &r.solve {
                println!("true tree of degree {}: aligned distance {:.4}", s.degree, s.aligned_distance);
            }
        }
        Command::Catalog { max_edges, output, svg_dir } => {
            let c = catalog(max_edges, &SolveOptions::default())?;
            write_json(&output, &c)?;
            if let Some(dir) = svg_dir {
                std::fs::create_dir_all(&dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
                for (i, e) in c.entries.iter().enumerate() {
                    if let Some(g) = &e.geometry {
                        let name = format!("{:02}-{:04}-{}.svg", e.edges, i, e.code);
                        write_svg(&dir.join(name), &[Layer::tree("true-tree", g, "#2ca02c").with_vertices()])?;
                    }
                }
            }
            let failed = c.entries.iter().filter(|e| e.poly.is_none()).count();
            println!("{} classes, {} failed", c.entries.len(), failed);
            if c.partial {
                return Err(Failure::numerical(format!("{failed} classes failed to solve; catalog is partial")));
            }
        }
        Command::Enumerate { edges, output } => {
            let trees = enumerate_plane_trees(edges).map_err(|e| match e {
                truetree::plane_tree::EnumerationError::TooLarge { .. } => Failure { kind: FailureKind::Guard, message: e.to_string() },
                _ => Failure::input(e),
            })?;
            if let Some(path) = output {
                write_json(&path, &trees)?;
            }
            for t in &trees {
                println!("{}", t.canonical_code());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.kind.exit_code() as u8)
        }
    }
}
