//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/processing error. Every
//! report printed to stdout embeds a run manifest with the effective
//! configuration and seed. The seed defaults to the MRGC_SEED environment
//! variable when no --seed flag is given.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use mrgc::attack::{feature_attack, label_attack, structure_attack};
use mrgc::complexity::{complexity_report, ComplexityReport};
use mrgc::condense::{condense, CondenseConfig, EpsilonMode, GradMode, LossReport};
use mrgc::curvature::{fit_gaussian_curvature, node_ricci, ollivier_ricci_edge};
use mrgc::manifest::RunManifest;
use mrgc::manifold::{mle_id, IdEstimatorConfig};
use mrgc::{Error, Graph};

#[derive(Parser)]
#[command(name = "mrgc", version, about = "manifold-constrained robust graph condensation")]
struct Cli {
    /// cap the worker thread pool (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corrupt a graph with a seeded feature, label, or structure attack
    Attack(AttackArgs),
    /// Condense a graph into a small structure-free synthetic graph
    Condense(CondenseArgs),
    /// Complexity metrics (FDR, FHC, separation loss) of a labeled graph
    Metrics(MetricsArgs),
    /// Ollivier-Ricci edge/node curvature and local Gaussian curvature
    Curvature(CurvatureArgs),
    /// Maximum-likelihood intrinsic dimension of the node features
    Id(IdArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AttackKind {
    Feature,
    Label,
    Structure,
}

#[derive(Args)]
struct AttackArgs {
    /// input graph: a JSON file or a CSV-triplet directory
    #[arg(long)]
    input: PathBuf,
    /// where to write the attacked graph (JSON)
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum)]
    kind: AttackKind,
    /// attack budget as a percentage of nodes (feature, label) or edges
    /// (structure)
    #[arg(long)]
    percent: f64,
    /// RNG seed (default: MRGC_SEED env var, then 0)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum GradModeArg {
    Hybrid,
    FullNumeric,
}

#[derive(Args)]
struct CondenseArgs {
    #[arg(long)]
    input: PathBuf,
    /// where to write the condensed graph (JSON)
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    ratio: f64,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-2)]
    lr: f64,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    pca_dims: usize,
    /// dimension regularizer weight
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// curvature regularizer weight
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// separation regularizer weight
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// fixed Dirichlet bandwidth (default: per-class median heuristic)
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "hybrid")]
    grad_mode: GradModeArg,
    #[arg(long, default_value_t = 0.5)]
    ricci_alpha: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    input: PathBuf,
    /// neighbourhood size for the intrinsic-dimension estimator
    #[arg(long, default_value_t = 8)]
    k: usize,
}

#[derive(Args)]
struct CurvatureArgs {
    #[arg(long)]
    input: PathBuf,
    /// restrict to a single edge "u,v" (default: every edge)
    #[arg(long, value_parser = parse_edge)]
    edge: Option<(usize, usize)>,
    /// laziness of the Ollivier-Ricci random walk
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// also fit local Gaussian curvature at each node with this many
    /// feature-space neighbors
    #[arg(long)]
    gaussian_k: Option<usize>,
}

#[derive(Args)]
struct IdArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 8)]
    k: usize,
    /// estimate on the two-hop representation instead of raw features
    #[arg(long)]
    two_hop: bool,
}

fn parse_edge(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected \"u,v\"".into());
    }
    let u = parts[0].trim().parse().map_err(|_| "invalid node id")?;
    let v = parts[1].trim().parse().map_err(|_| "invalid node id")?;
    Ok((u, v))
}

/// --seed flag, then MRGC_SEED, then 0. A malformed env value is a usage
/// error (exit 1), reported before any data is touched.
fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("MRGC_SEED") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| format!("MRGC_SEED must be a non-negative integer, got {v:?}")),
        Err(_) => Ok(0),
    }
}

fn print_report<T: Serialize>(report: &T) {
    println!("{}", serde_json::to_string_pretty(report).expect("serialize report"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, real parse errors are not
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };

    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: failed to configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

enum RunError {
    Usage(String),
    Data(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Data(e)
    }
}

fn run(command: Command) -> Result<(), RunError> {
    match command {
        Command::Attack(args) => run_attack(args),
        Command::Condense(args) => run_condense(args),
        Command::Metrics(args) => run_metrics(args),
        Command::Curvature(args) => run_curvature(args),
        Command::Id(args) => run_id(args),
    }
}

#[derive(Serialize)]
struct AttackReport {
    manifest: RunManifest,
    kind: String,
    requested_percent: f64,
    affected_count: usize,
    affected_nodes: Option<Vec<usize>>,
    flipped_pairs: Option<Vec<(usize, usize)>>,
    output_path: String,
}

fn run_attack(args: AttackArgs) -> Result<(), RunError> {
    let seed = resolve_seed(args.seed).map_err(RunError::Usage)?;
    let graph = Graph::load(&args.input)?;
    let kind = match args.kind {
        AttackKind::Feature => "feature",
        AttackKind::Label => "label",
        AttackKind::Structure => "structure",
    };
    let (attacked, nodes, pairs) = match args.kind {
        AttackKind::Feature => {
            let (g, t) = feature_attack(&graph, args.percent, seed)?;
            (g, Some(t), None)
        }
        AttackKind::Label => {
            let (g, t) = label_attack(&graph, args.percent, seed)?;
            (g, Some(t), None)
        }
        AttackKind::Structure => {
            let (g, p) = structure_attack(&graph, args.percent, seed)?;
            (g, None, Some(p))
        }
    };
    attacked.save_json(&args.output)?;
    let report = AttackReport {
        manifest: RunManifest::new(
            "attack",
            vec![args.input.display().to_string()],
            json!({ "kind": kind, "percent": args.percent }),
            seed,
        ),
        kind: kind.to_string(),
        requested_percent: args.percent,
        affected_count: nodes.as_ref().map_or(0, Vec::len)
            + pairs.as_ref().map_or(0, Vec::len),
        affected_nodes: nodes,
        flipped_pairs: pairs,
        output_path: args.output.display().to_string(),
    };
    print_report(&report);
    Ok(())
}

#[derive(Serialize)]
struct CondenseReport {
    manifest: RunManifest,
    condensed_nodes: usize,
    diverged: bool,
    outlier_fallback: bool,
    history: Vec<LossReport>,
    output_path: String,
}

fn run_condense(args: CondenseArgs) -> Result<(), RunError> {
    let seed = resolve_seed(args.seed).map_err(RunError::Usage)?;
    let cfg = CondenseConfig {
        ratio: args.ratio,
        epochs: args.epochs,
        lr: args.lr,
        k: args.k,
        pca_dims: args.pca_dims,
        alpha: args.alpha,
        beta: args.beta,
        gamma: args.gamma,
        epsilon: match args.epsilon {
            Some(e) => EpsilonMode::Fixed(e),
            None => EpsilonMode::MedianHeuristic,
        },
        grad_mode: match args.grad_mode {
            GradModeArg::Hybrid => GradMode::Hybrid,
            GradModeArg::FullNumeric => GradMode::FullNumeric,
        },
        ricci_alpha: args.ricci_alpha,
        seed,
    };
    let graph = Graph::load(&args.input)?;
    let result = condense(&graph, &cfg)?;
    result.condensed.to_graph().save_json(&args.output)?;
    let report = CondenseReport {
        manifest: RunManifest::new(
            "condense",
            vec![args.input.display().to_string()],
            serde_json::to_value(&cfg).expect("serialize config"),
            seed,
        ),
        condensed_nodes: result.condensed.num_nodes(),
        diverged: result.diverged,
        outlier_fallback: result.outlier_fallback,
        history: result.history,
        output_path: args.output.display().to_string(),
    };
    print_report(&report);
    Ok(())
}

#[derive(Serialize)]
struct MetricsReport {
    manifest: RunManifest,
    num_nodes: usize,
    num_edges: usize,
    #[serde(flatten)]
    complexity: ComplexityReport,
}

fn run_metrics(args: MetricsArgs) -> Result<(), RunError> {
    let seed = resolve_seed(None).map_err(RunError::Usage)?;
    let graph = Graph::load(&args.input)?;
    let id_config = IdEstimatorConfig { k: args.k, ..Default::default() };
    let complexity = complexity_report(&graph.features, &graph.labels, &id_config)?;
    let report = MetricsReport {
        manifest: RunManifest::new(
            "metrics",
            vec![args.input.display().to_string()],
            json!({ "k": args.k }),
            seed,
        ),
        num_nodes: graph.num_nodes,
        num_edges: graph.num_edges(),
        complexity,
    };
    print_report(&report);
    Ok(())
}

#[derive(Serialize)]
struct CurvatureReport {
    manifest: RunManifest,
    edges: Vec<EdgeCurvature>,
    node_ricci: Vec<f64>,
    gaussian: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct EdgeCurvature {
    u: usize,
    v: usize,
    kappa: f64,
}

fn run_curvature(args: CurvatureArgs) -> Result<(), RunError> {
    let seed = resolve_seed(None).map_err(RunError::Usage)?;
    let graph = Graph::load(&args.input)?;
    let edge_list: Vec<(usize, usize)> = match args.edge {
        Some(e) => vec![e],
        None => graph.edges.clone(),
    };
    let mut edges = Vec::with_capacity(edge_list.len());
    for (u, v) in edge_list {
        let kappa = ollivier_ricci_edge(&graph, u, v, args.alpha)?;
        edges.push(EdgeCurvature { u, v, kappa });
    }
    let mut node_kappas = Vec::with_capacity(graph.num_nodes);
    for i in 0..graph.num_nodes {
        node_kappas.push(node_ricci(&graph, i, args.alpha)?);
    }
    let gaussian = match args.gaussian_k {
        Some(k) => {
            let mut out = Vec::with_capacity(graph.num_nodes);
            for i in 0..graph.num_nodes {
                out.push(fit_gaussian_curvature(&graph.features, i, k)?.gaussian);
            }
            Some(out)
        }
        None => None,
    };
    let report = CurvatureReport {
        manifest: RunManifest::new(
            "curvature",
            vec![args.input.display().to_string()],
            json!({ "alpha": args.alpha, "gaussian_k": args.gaussian_k }),
            seed,
        ),
        edges,
        node_ricci: node_kappas,
        gaussian,
    };
    print_report(&report);
    Ok(())
}

#[derive(Serialize)]
struct IdReport {
    manifest: RunManifest,
    intrinsic_dimension: f64,
    k: usize,
    two_hop: bool,
}

fn run_id(args: IdArgs) -> Result<(), RunError> {
    let seed = resolve_seed(None).map_err(RunError::Usage)?;
    let graph = Graph::load(&args.input)?;
    let cfg = IdEstimatorConfig {
        k: args.k,
        ..IdEstimatorConfig::default()
    };
    let points = if args.two_hop {
        graph.representation()
    } else {
        graph.features.clone()
    };
    let id = mle_id(&points, &cfg)?;
    let report = IdReport {
        manifest: RunManifest::new(
            "id",
            vec![args.input.display().to_string()],
            json!({ "k": args.k, "two_hop": args.two_hop }),
            seed,
        ),
        intrinsic_dimension: id,
        k: args.k,
        two_hop: args.two_hop,
    };
    print_report(&report);
    Ok(())
}
