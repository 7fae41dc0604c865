//! Command-line front end for the cobra-walk laboratory.
//!
//! Four subcommands: `simulate` (Monte Carlo trial batches), `exact`
//! (closed-form chain solves), `bounds` (pure calculators), and
//! `experiment` (named campaigns). All output is the versioned CSV
//! schema produced by [`rows_to_csv`]; results are deterministic for a
//! fixed configuration and seed, independent of `--workers`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use cobra_lab::biased;
use cobra_lab::experiments::{
    self, dominance_chain, drift_replication, expander_polylog, family_label, general_hitting,
    grid_linear, matthews_campaign, quantity_label, regular_hitting, small_graph_corpus,
    standard_corpus, tensor_stationary, walt_dominance, walt_dominance_families, CampaignReport,
    ResultRow, DEFAULT_EXPANDER_SIZES, DEFAULT_GRID_SIDES, DEFAULT_LOLLIPOP_SIZES,
    DEFAULT_REGULAR_SIZES,
};
use cobra_lab::graph::{self, Family};
use cobra_lab::harness::{run_trials, sub_seed, ProcessSpec, Quantity};
use cobra_lab::oracle;
use cobra_lab::walks::default_round_cap;
use cobra_lab::walt;
use cobra_lab::Graph;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, specs, or config files; exits 2.
    #[error("{0}")]
    Usage(String),
    /// Failures after the configuration was accepted; exits 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn rt(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "cobra-lab",
    version,
    about = "Simulation and verification laboratory for coalescing-branching random walks"
)]
pub struct Cli {
    /// Worker threads for trial parallelism (output is identical for
    /// any value).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded Monte Carlo trials of a process on a graph.
    Simulate(SimulateArgs),
    /// Solve for an exact expectation instead of simulating.
    Exact(ExactArgs),
    /// Evaluate a closed-form bound; no simulation.
    Bounds(BoundsArgs),
    /// Run a named measurement campaign.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args, Default)]
pub struct SimulateArgs {
    /// Graph spec, e.g. cycle:8, grid2d:16, tree:2,7, random-3-regular:64, file:G.edges.
    #[arg(long)]
    pub graph: Option<String>,
    /// Process spec: srw, cobra:k=K, walt:delta=F[,lazy], metropolis:targets=V[+V...].
    #[arg(long)]
    pub process: Option<String>,
    /// Quantity spec: cover, cover:S, or hit:U,V.
    #[arg(long)]
    pub quantity: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed (default: config file, then $COBRA_LAB_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Round cap per trial (default 64·n³).
    #[arg(long)]
    pub cap: Option<u64>,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub graph: Option<String>,
    /// srw or cobra:k=K.
    #[arg(long)]
    pub process: Option<String>,
    #[arg(long)]
    pub quantity: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Which calculator: azar, inverse, regular, path-sum, epoch, activation.
    #[arg(long)]
    pub which: String,
    #[arg(long)]
    pub graph: Option<String>,
    /// Target set for azar, '+'-separated, e.g. 0 or 0+5.
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub delta: Option<usize>,
    /// Target vertex for inverse.
    #[arg(long)]
    pub vertex: Option<usize>,
    /// Pair for path-sum, e.g. 0,7.
    #[arg(long)]
    pub pair: Option<String>,
    #[arg(long)]
    pub phi: Option<f64>,
    /// Degree for epoch.
    #[arg(long)]
    pub d: Option<u32>,
    /// Degree for activation.
    #[arg(long)]
    pub deg: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct ExperimentArgs {
    /// Campaign name: grid-linear, expander-polylog, regular-hitting,
    /// general-hitting, dominance, tensor-stationary, matthews, drift.
    pub name: Option<String>,
    /// Comma-separated grid sides (grid-linear).
    #[arg(long)]
    pub sides: Option<String>,
    /// Comma-separated vertex counts (size-sweep campaigns).
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Two-step samples (drift).
    #[arg(long)]
    pub samples: Option<u64>,
    /// Largest corpus graph used by dominance.
    #[arg(long = "max-n")]
    pub max_n: Option<usize>,
    /// Corpus selector: standard (default) or small.
    #[arg(long)]
    pub corpus: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// JSON config file schema. Every field is optional; flags override.
/// Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub graph: Option<String>,
    pub process: Option<String>,
    pub quantity: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub cap: Option<u64>,
    pub out: Option<PathBuf>,
    pub name: Option<String>,
    pub sides: Option<Vec<usize>>,
    pub sizes: Option<Vec<usize>>,
    pub samples: Option<u64>,
    pub max_n: Option<usize>,
    pub corpus: Option<String>,
}

pub fn load_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| usage(format!("bad config {}: {e}", path.display())))
}

/// Where a graph comes from: a named family or an edge-list file.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Family(Family),
    File(PathBuf),
}

pub fn source_label(src: &GraphSource) -> String {
    match src {
        GraphSource::Family(f) => family_label(f),
        GraphSource::File(p) => format!("file:{}", p.display()),
    }
}

fn one_size(params: Option<&str>, what: &str) -> Result<usize, CliError> {
    params
        .and_then(|p| p.parse().ok())
        .ok_or_else(|| usage(format!("{what} takes a single size, e.g. {what}:8")))
}

fn two_sizes(params: Option<&str>, what: &str, shape: &str) -> Result<(usize, usize), CliError> {
    let err = || usage(format!("{what} syntax: {shape}"));
    let (a, b) = params.and_then(|p| p.split_once(',')).ok_or_else(err)?;
    Ok((
        a.parse().map_err(|_| err())?,
        b.parse().map_err(|_| err())?,
    ))
}

/// Parses the graph spec grammar used everywhere in the CLI.
pub fn parse_graph_spec(s: &str) -> Result<GraphSource, CliError> {
    if let Some(p) = s.strip_prefix("file:") {
        if p.is_empty() {
            return Err(usage("file: needs a path"));
        }
        return Ok(GraphSource::File(PathBuf::from(p)));
    }
    let (name, params) = match s.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let fam = match name {
        "path" => Family::Path {
            n: one_size(params, "path")?,
        },
        "cycle" => Family::Cycle {
            n: one_size(params, "cycle")?,
        },
        "complete" => Family::Complete {
            n: one_size(params, "complete")?,
        },
        "star" => Family::Star {
            n: one_size(params, "star")?,
        },
        "hypercube" => Family::Hypercube {
            dim: one_size(params, "hypercube")?,
        },
        "grid2d" => Family::Grid {
            dim: 2,
            side: one_size(params, "grid2d")?,
        },
        "grid" => {
            let (dim, side) = two_sizes(params, "grid", "grid:DIM,SIDE")?;
            Family::Grid { dim, side }
        }
        "tree" => {
            let (arity, n) = two_sizes(params, "tree", "tree:ARITY,N")?;
            Family::KaryTree { arity, n }
        }
        "lollipop" => Family::Lollipop {
            n: one_size(params, "lollipop")?,
        },
        "petersen" => {
            if params.is_some() {
                return Err(usage("petersen takes no parameters"));
            }
            Family::Petersen
        }
        other => {
            let d = other
                .strip_prefix("random-")
                .and_then(|r| r.strip_suffix("-regular"))
                .and_then(|d| d.parse::<usize>().ok());
            match d {
                Some(d) => Family::RandomRegular {
                    n: one_size(params, "random-regular")?,
                    d,
                },
                None => {
                    return Err(usage(format!(
                        "unknown graph family {other:?}; known: path, cycle, complete, star, \
                         hypercube, grid2d, grid, tree, random-D-regular, lollipop, petersen, file"
                    )))
                }
            }
        }
    };
    Ok(GraphSource::Family(fam))
}

pub fn load_graph(src: &GraphSource, master_seed: u64) -> Result<Graph, CliError> {
    match src {
        GraphSource::Family(f) => {
            graph::generate(f, sub_seed(master_seed, "graph-instance")).map_err(rt)
        }
        GraphSource::File(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", p.display())))?;
            Graph::parse_edge_list(&text).map_err(rt)
        }
    }
}

fn parse_vertex_set(s: &str) -> Result<Vec<usize>, CliError> {
    s.split('+')
        .map(|t| {
            t.parse()
                .map_err(|_| usage(format!("bad vertex {t:?} in set {s:?}")))
        })
        .collect()
}

pub fn parse_process_spec(s: &str) -> Result<ProcessSpec, CliError> {
    if s == "srw" {
        return Ok(ProcessSpec::Srw);
    }
    if let Some(rest) = s.strip_prefix("cobra:") {
        let k = rest
            .strip_prefix("k=")
            .and_then(|k| k.parse().ok())
            .ok_or_else(|| usage("cobra process syntax: cobra:k=<K>"))?;
        return Ok(ProcessSpec::Cobra { k });
    }
    if let Some(rest) = s.strip_prefix("walt:") {
        let mut delta = None;
        let mut lazy = false;
        for tok in rest.split(',') {
            if tok == "lazy" {
                lazy = true;
            } else if let Some(v) = tok.strip_prefix("delta=") {
                delta = Some(
                    v.parse()
                        .map_err(|_| usage(format!("bad delta {v:?} in {s:?}")))?,
                );
            } else {
                return Err(usage(format!(
                    "unknown token {tok:?}; walt syntax: walt:delta=<F>[,lazy]"
                )));
            }
        }
        let delta = delta.ok_or_else(|| usage("walt syntax: walt:delta=<F>[,lazy]"))?;
        return Ok(ProcessSpec::Walt { delta, lazy });
    }
    if let Some(rest) = s.strip_prefix("metropolis:") {
        let v = rest
            .strip_prefix("targets=")
            .ok_or_else(|| usage("metropolis syntax: metropolis:targets=<V>[+V...]"))?;
        return Ok(ProcessSpec::Metropolis {
            targets: parse_vertex_set(v)?,
        });
    }
    Err(usage(format!(
        "unknown process {s:?}; known: srw, cobra:k=K, walt:delta=F[,lazy], metropolis:targets=V[+V...]"
    )))
}

/// Canonical text form of a process, round-tripping through
/// [`parse_process_spec`].
pub fn process_label(p: &ProcessSpec) -> String {
    match p {
        ProcessSpec::Srw => "srw".into(),
        ProcessSpec::Cobra { k } => format!("cobra:k={k}"),
        ProcessSpec::Walt { delta, lazy } => {
            if *lazy {
                format!("walt:delta={delta},lazy")
            } else {
                format!("walt:delta={delta}")
            }
        }
        ProcessSpec::Metropolis { targets } => {
            let set = targets
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join("+");
            format!("metropolis:targets={set}")
        }
    }
}

pub fn parse_quantity_spec(s: &str) -> Result<Quantity, CliError> {
    if s == "cover" {
        return Ok(Quantity::Cover { start: 0 });
    }
    if let Some(rest) = s.strip_prefix("cover:") {
        let start = rest
            .parse()
            .map_err(|_| usage(format!("bad start vertex in {s:?}")))?;
        return Ok(Quantity::Cover { start });
    }
    if let Some(rest) = s.strip_prefix("hit:") {
        let (u, v) = rest
            .split_once(',')
            .ok_or_else(|| usage("hit syntax: hit:U,V"))?;
        let from = u
            .parse()
            .map_err(|_| usage(format!("bad vertex {u:?} in {s:?}")))?;
        let to = v
            .parse()
            .map_err(|_| usage(format!("bad vertex {v:?} in {s:?}")))?;
        return Ok(Quantity::Hit { from, to });
    }
    Err(usage(format!(
        "unknown quantity {s:?}; known: cover, cover:S, hit:U,V"
    )))
}

fn parse_size_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| usage(format!("bad size {t:?} in list {s:?}")))
        })
        .collect()
}

/// Resolves the master seed: flag, then config file, then the
/// COBRA_LAB_SEED environment variable, then 0.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var("COBRA_LAB_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("COBRA_LAB_SEED must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "experiment,graph_family,n,d,k,seed,quantity,trials,mean,stderr,p50,p90,p99,max,timeouts,bound_value,extra";

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Serializes rows under the versioned header. Field order matches
/// [`CSV_HEADER`]; `extra` is `key=value` pairs joined by `;`.
pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = format!("# schema_version={SCHEMA_VERSION}\n{CSV_HEADER}\n");
    for r in rows {
        let extra = r
            .extra
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        let bound = r.bound_value.map(|b| b.to_string()).unwrap_or_default();
        let fields = [
            r.experiment.clone(),
            r.graph_family.clone(),
            r.n.to_string(),
            r.d.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
            r.quantity.clone(),
            r.trials.to_string(),
            r.mean.to_string(),
            r.stderr.to_string(),
            r.p50.to_string(),
            r.p90.to_string(),
            r.p99.to_string(),
            r.max.to_string(),
            r.timeouts.to_string(),
            bound,
            extra,
        ];
        let line = fields
            .iter()
            .map(|f| csv_field(f))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn write_rows(rows: &[ResultRow], out: Option<&Path>) -> Result<(), CliError> {
    let csv = rows_to_csv(rows);
    match out {
        Some(path) => fs::write(path, csv)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| usage(format!("missing required flag {flag}")))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let cfg = load_config(args.config.as_deref())?;
    let graph_spec = require(args.graph.or(cfg.graph), "--graph")?;
    let process_spec = require(args.process.or(cfg.process), "--process")?;
    let quantity_spec = require(args.quantity.or(cfg.quantity), "--quantity")?;
    let trials = require(args.trials.or(cfg.trials), "--trials")?;
    let seed = resolve_seed(args.seed, cfg.seed)?;
    let out = args.out.or(cfg.out);

    let source = parse_graph_spec(&graph_spec)?;
    let process = parse_process_spec(&process_spec)?;
    let quantity = parse_quantity_spec(&quantity_spec)?;
    let g = load_graph(&source, seed)?;
    let cap = args.cap.or(cfg.cap).unwrap_or(default_round_cap(g.n()));

    let stats = run_trials(&g, &process, quantity, trials, seed, cap).map_err(rt)?;
    let mut extra = vec![("process".into(), process_label(&process))];
    if let ProcessSpec::Walt { delta, lazy } = &process {
        let pebbles = ((delta * g.n() as f64).ceil() as usize).max(1);
        extra.push(("pebbles".into(), pebbles.to_string()));
        extra.push(("lazy".into(), lazy.to_string()));
    }
    extra.push(("cap".into(), cap.to_string()));
    let row = ResultRow::from_stats(
        "simulate",
        &source_label(&source),
        &g,
        process.k_label(),
        seed,
        &quantity_label(quantity),
        &stats,
        None,
        extra,
    );
    write_rows(&[row], out.as_deref())
}

fn cmd_exact(args: ExactArgs) -> Result<(), CliError> {
    let graph_spec = require(args.graph, "--graph")?;
    let process_spec = require(args.process, "--process")?;
    let quantity_spec = require(args.quantity, "--quantity")?;
    let source = parse_graph_spec(&graph_spec)?;
    let process = parse_process_spec(&process_spec)?;
    let quantity = parse_quantity_spec(&quantity_spec)?;
    let g = load_graph(&source, 0)?;

    let (value, method) = match (&process, quantity) {
        (ProcessSpec::Cobra { k }, Quantity::Hit { from, to }) => (
            oracle::exact_cobra_hitting(&g, from, to, *k).map_err(rt)?,
            "subset-chain",
        ),
        (ProcessSpec::Cobra { k }, Quantity::Cover { start }) => (
            oracle::exact_cobra_cover(&g, start, *k).map_err(rt)?,
            "subset-chain",
        ),
        (ProcessSpec::Srw, Quantity::Hit { from, to }) => {
            if to >= g.n() || from >= g.n() {
                return Err(rt(format!("pair ({from},{to}) out of range for n = {}", g.n())));
            }
            let chain = oracle::srw_chain(&g);
            let mut is_target = vec![false; g.n()];
            is_target[to] = true;
            let h = oracle::exact_hitting(&chain, &is_target).map_err(rt)?;
            (h[from], "linear-solve")
        }
        (ProcessSpec::Srw, Quantity::Cover { .. }) => {
            return Err(usage(
                "exact cover is only available for cobra:k=K (the single-walk cover has no dedicated solver)",
            ))
        }
        _ => {
            return Err(usage(
                "exact supports processes srw (hit) and cobra:k=K (hit, cover)",
            ))
        }
    };
    let row = ResultRow {
        experiment: "exact".into(),
        graph_family: source_label(&source),
        n: g.n(),
        d: experiments::max_degree(&g),
        k: process.k_label(),
        seed: 0,
        quantity: quantity_label(quantity),
        trials: 0,
        mean: value,
        stderr: 0.0,
        p50: 0.0,
        p90: 0.0,
        p99: 0.0,
        max: 0.0,
        timeouts: 0,
        bound_value: None,
        extra: vec![
            ("method".into(), method.into()),
            ("process".into(), process_label(&process)),
        ],
    };
    write_rows(&[row], args.out.as_deref())
}

/// Builds the shared row shape for a bound calculator result.
fn bound_row(
    graph_family: String,
    n: usize,
    d: usize,
    quantity: &str,
    value: f64,
    extra: Vec<(String, String)>,
) -> ResultRow {
    ResultRow {
        experiment: "bounds".into(),
        graph_family,
        n,
        d,
        k: 0,
        seed: 0,
        quantity: quantity.into(),
        trials: 0,
        mean: value,
        stderr: 0.0,
        p50: 0.0,
        p90: 0.0,
        p99: 0.0,
        max: 0.0,
        timeouts: 0,
        bound_value: Some(value),
        extra,
    }
}

fn report_extra(report: &biased::BoundReport) -> Vec<(String, String)> {
    report
        .inputs
        .iter()
        .cloned()
        .chain(report.extras.iter().map(|(k, v)| (k.clone(), v.to_string())))
        .collect()
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), CliError> {
    let need_graph = |spec: &Option<String>| -> Result<(GraphSource, Graph), CliError> {
        let spec = spec
            .as_deref()
            .ok_or_else(|| usage(format!("--which {} needs --graph", args.which)))?;
        let source = parse_graph_spec(spec)?;
        let g = load_graph(&source, 0)?;
        Ok((source, g))
    };
    let row = match args.which.as_str() {
        "azar" => {
            let (source, g) = need_graph(&args.graph)?;
            let set = parse_vertex_set(&require(args.set, "--set")?)?;
            let eps = require(args.eps, "--eps")?;
            let report = biased::azar_bound(&g, &set, eps).map_err(rt)?;
            bound_row(
                source_label(&source),
                g.n(),
                experiments::max_degree(&g),
                report.name,
                report.value,
                report_extra(&report),
            )
        }
        "inverse" => {
            let (source, g) = need_graph(&args.graph)?;
            let v = require(args.vertex, "--vertex")?;
            let report = biased::inverse_bound(&g, v).map_err(rt)?;
            bound_row(
                source_label(&source),
                g.n(),
                experiments::max_degree(&g),
                report.name,
                report.value,
                report_extra(&report),
            )
        }
        "regular" => {
            let n = require(args.n, "--n")?;
            let delta = require(args.delta, "--delta")?;
            let report = biased::regular_bound(n, delta).map_err(rt)?;
            bound_row("-".into(), n, delta, report.name, report.value, report_extra(&report))
        }
        "path-sum" => {
            let (source, g) = need_graph(&args.graph)?;
            let pair = require(args.pair, "--pair")?;
            let (u, v) = pair
                .split_once(',')
                .ok_or_else(|| usage("pair syntax: --pair U,V"))?;
            let u: usize = u.parse().map_err(|_| usage("pair syntax: --pair U,V"))?;
            let v: usize = v.parse().map_err(|_| usage("pair syntax: --pair U,V"))?;
            let report = biased::path_sum_bound(&g, u, v).map_err(rt)?;
            bound_row(
                source_label(&source),
                g.n(),
                experiments::max_degree(&g),
                report.name,
                report.value,
                report_extra(&report),
            )
        }
        "epoch" => {
            let phi = require(args.phi, "--phi")?;
            let d = require(args.d, "--d")?;
            let n = require(args.n, "--n")?;
            let s = walt::epoch_length(phi, d, n).map_err(rt)?;
            bound_row(
                "-".into(),
                n,
                d as usize,
                "epoch-length",
                s as f64,
                vec![
                    ("phi".into(), phi.to_string()),
                    ("d".into(), d.to_string()),
                    ("n".into(), n.to_string()),
                ],
            )
        }
        "activation" => {
            let deg = require(args.deg, "--deg")?;
            let (p_star, floor) = biased::activation_probability(deg).map_err(rt)?;
            bound_row(
                "-".into(),
                0,
                deg,
                "activation-probability",
                p_star,
                vec![("floor".into(), floor.to_string())],
            )
        }
        other => {
            return Err(usage(format!(
                "unknown bound {other:?}; known: azar, inverse, regular, path-sum, epoch, activation"
            )))
        }
    };
    write_rows(&[row], args.out.as_deref())
}

fn pick_corpus(selector: Option<&str>) -> Result<Vec<Family>, CliError> {
    match selector.unwrap_or("standard") {
        "standard" => Ok(standard_corpus()),
        "small" => Ok(small_graph_corpus()),
        other => Err(usage(format!(
            "unknown corpus {other:?}; known: standard, small"
        ))),
    }
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let cfg = load_config(args.config.as_deref())?;
    let name = require(args.name.or(cfg.name), "experiment name")?;
    let seed = resolve_seed(args.seed, cfg.seed)?;
    let trials = args.trials.or(cfg.trials);
    let sides = match args.sides {
        Some(s) => Some(parse_size_list(&s)?),
        None => cfg.sides,
    };
    let sizes = match args.sizes {
        Some(s) => Some(parse_size_list(&s)?),
        None => cfg.sizes,
    };
    let corpus = args.corpus.or(cfg.corpus);
    let out = args.out.or(cfg.out);

    let report: CampaignReport = match name.as_str() {
        "grid-linear" => grid_linear(
            &sides.unwrap_or_else(|| DEFAULT_GRID_SIDES.to_vec()),
            trials.unwrap_or(200),
            seed,
        )
        .map_err(rt)?,
        "expander-polylog" => expander_polylog(
            &sizes.unwrap_or_else(|| DEFAULT_EXPANDER_SIZES.to_vec()),
            trials.unwrap_or(200),
            seed,
        )
        .map_err(rt)?,
        "regular-hitting" => regular_hitting(
            &sizes.unwrap_or_else(|| DEFAULT_REGULAR_SIZES.to_vec()),
            trials.unwrap_or(400),
            seed,
        )
        .map_err(rt)?,
        "general-hitting" => general_hitting(
            &sizes.unwrap_or_else(|| DEFAULT_LOLLIPOP_SIZES.to_vec()),
            trials.unwrap_or(150),
            seed,
        )
        .map_err(rt)?,
        "dominance" => {
            let corpus = pick_corpus(corpus.as_deref())?;
            let max_n = args.max_n.or(cfg.max_n).unwrap_or(10);
            let mut report =
                dominance_chain(&corpus, max_n, trials.unwrap_or(4000), seed).map_err(rt)?;
            let pebble = walt_dominance(&walt_dominance_families(), trials.unwrap_or(10_000), seed)
                .map_err(rt)?;
            report.rows.extend(pebble.rows);
            report.checks.extend(pebble.checks);
            report
        }
        "tensor-stationary" => tensor_stationary(trials.unwrap_or(100_000), seed).map_err(rt)?,
        "matthews" => matthews_campaign(
            &pick_corpus(corpus.as_deref())?,
            trials.unwrap_or(2000),
            seed,
        )
        .map_err(rt)?,
        "drift" => {
            drift_replication(args.samples.or(cfg.samples).unwrap_or(1_000_000), seed).map_err(rt)?
        }
        other => {
            return Err(usage(format!(
                "unknown experiment {other:?}; known: grid-linear, expander-polylog, \
                 regular-hitting, general-hitting, dominance, tensor-stationary, matthews, drift"
            )))
        }
    };

    write_rows(&report.rows, out.as_deref())?;
    // Keep stdout clean for CSV: verdicts go to stderr when no --out.
    let mut emit: Box<dyn FnMut(String)> = if out.is_some() {
        Box::new(|line| println!("{line}"))
    } else {
        Box::new(|line| eprintln!("{line}"))
    };
    for c in &report.checks {
        emit(format!(
            "check {}: {} — {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.label,
            c.detail
        ));
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    emit(format!(
        "{name}: {} checks, {failed} failed",
        report.checks.len()
    ));
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(usage("--workers must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(rt)?;
    }
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Experiment(args) => cmd_experiment(args),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
