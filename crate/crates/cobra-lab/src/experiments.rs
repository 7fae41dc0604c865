//! Pre-registered measurement campaigns and the graph corpora they run on.
//!
//! Each campaign generates its graphs deterministically, fans seeded
//! trial batches out through the harness, and returns CSV-ready
//! [`ResultRow`]s together with any scaling fits and pass/fail checks
//! it evaluates. A campaign is a pure function of its parameters and
//! the master seed, so every published row can be regenerated from its
//! own `seed` column.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::biased::{self, BiasedError};
use crate::graph::{self, Family, Graph, GraphError};
use crate::harness::{
    self, fit_scaling, run_trials, sub_seed, FitTransform, HarnessError, ProcessSpec, Quantity,
    SampleStats, ScalingFit,
};
use crate::oracle::{self, OracleError};
use crate::walks::default_round_cap;
use crate::walks::grid::{
    two_step_drift_sample, GridError, GridSpec, SelectionPolicy, TrackedGridState,
};
use crate::walt::{self, TensorStart, WaltError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Walt(#[from] WaltError),
    #[error(transparent)]
    Biased(#[from] BiasedError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// One exported data point. Field order matches the CSV column order.
///
/// Check-style rows (dominance verdicts, drift frequencies, scaling
/// fits) reuse the numeric columns for their headline statistic and
/// leave the quantile columns at zero; the `quantity` column says how
/// to read them.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub graph_family: String,
    pub n: usize,
    /// Maximum degree of the instance (0 for rows without a graph).
    pub d: usize,
    /// Branching factor of the measured process (pebble counts and
    /// process variants are reported through `extra`).
    pub k: u32,
    /// The exact master seed this row's trial batch ran under.
    pub seed: u64,
    pub quantity: String,
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
    pub timeouts: u64,
    pub bound_value: Option<f64>,
    pub extra: Vec<(String, String)>,
}

impl ResultRow {
    /// Builds a row from a harness summary.
    #[allow(clippy::too_many_arguments)]
    pub fn from_stats(
        experiment: &str,
        graph_family: &str,
        g: &Graph,
        k: u32,
        seed: u64,
        quantity: &str,
        stats: &SampleStats,
        bound_value: Option<f64>,
        extra: Vec<(String, String)>,
    ) -> Self {
        ResultRow {
            experiment: experiment.into(),
            graph_family: graph_family.into(),
            n: g.n(),
            d: max_degree(g),
            k,
            seed,
            quantity: quantity.into(),
            trials: stats.trials,
            mean: stats.mean,
            stderr: stats.stderr,
            p50: stats.p50,
            p90: stats.p90,
            p99: stats.p99,
            max: stats.max,
            timeouts: stats.timeouts,
            bound_value,
            extra,
        }
    }
}

/// One named pass/fail verdict evaluated by a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything a campaign produces: data rows, labeled scaling fits,
/// and the checks it evaluated.
#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub rows: Vec<ResultRow>,
    pub fits: Vec<(String, ScalingFit)>,
    pub checks: Vec<CheckOutcome>,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn check(label: impl Into<String>, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        label: label.into(),
        passed,
        detail,
    }
}

/// Canonical text form of a family, stable across releases; the CLI
/// accepts the same syntax back.
pub fn family_label(f: &Family) -> String {
    match *f {
        Family::Path { n } => format!("path:{n}"),
        Family::Cycle { n } => format!("cycle:{n}"),
        Family::Complete { n } => format!("complete:{n}"),
        Family::Star { n } => format!("star:{n}"),
        Family::Hypercube { dim } => format!("hypercube:{dim}"),
        Family::Grid { dim: 2, side } => format!("grid2d:{side}"),
        Family::Grid { dim, side } => format!("grid:{dim},{side}"),
        Family::KaryTree { arity, n } => format!("tree:{arity},{n}"),
        Family::RandomRegular { n, d } => format!("random-{d}-regular:{n}"),
        Family::Lollipop { n } => format!("lollipop:{n}"),
        Family::Petersen => "petersen".into(),
    }
}

/// Maximum degree over all vertices.
pub fn max_degree(g: &Graph) -> usize {
    (0..g.n()).map(|v| g.degree(v)).max().unwrap_or(0)
}

/// Text form of a measured quantity, as used in the `quantity` column.
pub fn quantity_label(q: Quantity) -> String {
    match q {
        Quantity::Cover { start } => format!("cover:{start}"),
        Quantity::Hit { from, to } => format!("hit:{from},{to}"),
    }
}

/// Generation seed for corpus members, fixed so the random-regular
/// corpus instance is the same graph in every run and every campaign.
pub const PINNED_REGULAR_SEED: u64 = 1729;

/// Generates a corpus member with the pinned generation seed.
pub fn corpus_graph(f: &Family) -> Result<Graph, GraphError> {
    graph::generate(f, PINNED_REGULAR_SEED)
}

/// Pinned list of 32 small graphs (n ≤ 8) spanning every deterministic
/// family; used for exhaustive pair-by-pair oracle comparisons.
pub fn small_graph_corpus() -> Vec<Family> {
    let mut fams = Vec::new();
    for n in 2..=8 {
        fams.push(Family::Path { n });
    }
    for n in 3..=8 {
        fams.push(Family::Cycle { n });
    }
    for n in 2..=8 {
        fams.push(Family::Complete { n });
    }
    for n in 3..=8 {
        fams.push(Family::Star { n });
    }
    fams.push(Family::Hypercube { dim: 3 });
    for n in 4..=6 {
        fams.push(Family::Lollipop { n });
    }
    fams.push(Family::KaryTree { arity: 2, n: 7 });
    fams.push(Family::KaryTree { arity: 3, n: 8 });
    fams
}

/// The standard corpus for property campaigns: one member per family
/// at oracle-checkable or cheap-simulation scale.
pub fn standard_corpus() -> Vec<Family> {
    vec![
        Family::Path { n: 8 },
        Family::Cycle { n: 8 },
        Family::Complete { n: 5 },
        Family::Star { n: 16 },
        Family::Petersen,
        Family::Hypercube { dim: 4 },
        Family::Grid { dim: 2, side: 8 },
        Family::RandomRegular { n: 64, d: 3 },
    ]
}

/// Graphs the ordered-pebble dominance campaign runs on by default.
pub fn walt_dominance_families() -> Vec<Family> {
    vec![
        Family::Cycle { n: 8 },
        Family::Complete { n: 5 },
        Family::Petersen,
        Family::Hypercube { dim: 4 },
    ]
}

pub const DEFAULT_GRID_SIDES: [usize; 5] = [16, 32, 64, 128, 256];
pub const DEFAULT_EXPANDER_SIZES: [usize; 5] = [256, 512, 1024, 2048, 4096];
pub const DEFAULT_REGULAR_SIZES: [usize; 4] = [64, 128, 256, 512];
pub const DEFAULT_LOLLIPOP_SIZES: [usize; 4] = [32, 64, 128, 256];

/// Degree of the random-regular instances in the expander campaigns.
pub const EXPANDER_DEGREE: usize = 3;

fn transform_label(t: FitTransform) -> &'static str {
    match t {
        FitTransform::LogLog => "loglog",
        FitTransform::ValueVsLogSquared => "value-vs-log2",
        FitTransform::ValueVsNLogN => "value-vs-nlogn",
    }
}

/// Summary row for a scaling fit: `mean` carries the slope.
fn fit_row(experiment: &str, scope: &str, fit: &ScalingFit) -> ResultRow {
    let points = fit
        .points
        .iter()
        .map(|(x, y)| format!("{x}:{y}"))
        .collect::<Vec<_>>()
        .join("|");
    ResultRow {
        experiment: experiment.into(),
        graph_family: scope.into(),
        n: 0,
        d: 0,
        k: 0,
        seed: 0,
        quantity: "fit".into(),
        trials: fit.points.len() as u64,
        mean: fit.slope,
        stderr: 0.0,
        p50: 0.0,
        p90: 0.0,
        p99: 0.0,
        max: 0.0,
        timeouts: 0,
        bound_value: None,
        extra: vec![
            ("slope".into(), format!("{}", fit.slope)),
            ("intercept".into(), format!("{}", fit.intercept)),
            ("r_squared".into(), format!("{}", fit.r_squared)),
            ("transform".into(), transform_label(fit.transform).into()),
            ("points".into(), points),
        ],
    }
}

fn need_sizes(len: usize, what: &str) -> Result<(), ExperimentError> {
    if len < 4 {
        return Err(ExperimentError::InvalidParams(format!(
            "{what} needs at least 4 sizes for a scaling fit, got {len}"
        )));
    }
    Ok(())
}

/// 2-cobra cover on two-dimensional grids `[0, side]²` over a sweep of
/// sides: fits log(mean cover) against log(side) and checks that the
/// growth is linear in the side length.
pub fn grid_linear(sides: &[usize], trials: u64, seed: u64) -> Result<CampaignReport, ExperimentError> {
    need_sizes(sides.len(), "the grid cover sweep")?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut points = Vec::new();
    for &side in sides {
        let fam = Family::Grid { dim: 2, side };
        let label = family_label(&fam);
        let g = graph::generate(&fam, 0)?;
        let batch_seed = sub_seed(seed, &format!("grid-linear/{label}"));
        let q = Quantity::Cover { start: 0 };
        let stats = run_trials(
            &g,
            &ProcessSpec::Cobra { k: 2 },
            q,
            trials,
            batch_seed,
            default_round_cap(g.n()),
        )?;
        points.push((side as f64, stats.mean));
        rows.push(ResultRow::from_stats(
            "grid-linear",
            &label,
            &g,
            2,
            batch_seed,
            &quantity_label(q),
            &stats,
            None,
            vec![("side".into(), side.to_string())],
        ));
    }
    let fit = fit_scaling(&points, FitTransform::LogLog)?;
    rows.push(fit_row("grid-linear", "grid2d-sweep", &fit));
    checks.push(check(
        "cover grows linearly in the side (slope in [0.85, 1.15])",
        (0.85..=1.15).contains(&fit.slope),
        format!("slope = {:.4}", fit.slope),
    ));
    checks.push(check(
        "log-log fit is tight (r^2 >= 0.98)",
        fit.r_squared >= 0.98,
        format!("r^2 = {:.5}", fit.r_squared),
    ));
    Ok(CampaignReport {
        rows,
        fits: vec![("cover-vs-side".into(), fit)],
        checks,
    })
}

/// 2-cobra cover on random 3-regular graphs over a size sweep: fits
/// mean cover against ln² n and checks each mean against the spectral
/// envelope `32 d⁴ ν₂⁻¹ ln² n`, where ν₂ is the second eigenvalue of
/// the normalized Laplacian.
pub fn expander_polylog(
    sizes: &[usize],
    trials: u64,
    seed: u64,
) -> Result<CampaignReport, ExperimentError> {
    need_sizes(sizes.len(), "the expander cover sweep")?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut points = Vec::new();
    let d4 = (EXPANDER_DEGREE as f64).powi(4);
    for &n in sizes {
        let fam = Family::RandomRegular {
            n,
            d: EXPANDER_DEGREE,
        };
        let label = family_label(&fam);
        let g = graph::generate(&fam, sub_seed(seed, &format!("expander-polylog/instance/{n}")))?;
        let nu2 = graph::spectral_gap(&g, 1e-3)?.max(1e-12);
        let ln_n = (n as f64).ln();
        let envelope = 32.0 * d4 / nu2 * ln_n * ln_n;
        let batch_seed = sub_seed(seed, &format!("expander-polylog/cover/{n}"));
        let q = Quantity::Cover { start: 0 };
        let stats = run_trials(
            &g,
            &ProcessSpec::Cobra { k: 2 },
            q,
            trials,
            batch_seed,
            default_round_cap(n),
        )?;
        points.push((n as f64, stats.mean));
        checks.push(check(
            format!("cover mean within spectral envelope at n = {n}"),
            stats.mean <= envelope,
            format!("mean = {:.2}, envelope = {:.2}, nu2 = {:.5}", stats.mean, envelope, nu2),
        ));
        rows.push(ResultRow::from_stats(
            "expander-polylog",
            &label,
            &g,
            2,
            batch_seed,
            &quantity_label(q),
            &stats,
            Some(envelope),
            vec![("nu2".into(), format!("{nu2}"))],
        ));
    }
    let fit = fit_scaling(&points, FitTransform::ValueVsLogSquared)?;
    rows.push(fit_row("expander-polylog", "random-3-regular-sweep", &fit));
    checks.push(check(
        "cover is near-linear in ln^2 n (r^2 >= 0.9)",
        fit.r_squared >= 0.9,
        format!("r^2 = {:.5}", fit.r_squared),
    ));
    Ok(CampaignReport {
        rows,
        fits: vec![("cover-vs-ln2n".into(), fit)],
        checks,
    })
}

/// Worst-pair 2-cobra hitting on random 3-regular graphs against the
/// closed-form degree-3 hitting envelope, plus a log-log growth fit.
pub fn regular_hitting(
    sizes: &[usize],
    trials_per_pair: u64,
    seed: u64,
) -> Result<CampaignReport, ExperimentError> {
    need_sizes(sizes.len(), "the regular hitting sweep")?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut points = Vec::new();
    for &n in sizes {
        let fam = Family::RandomRegular {
            n,
            d: EXPANDER_DEGREE,
        };
        let label = family_label(&fam);
        let g = graph::generate(&fam, sub_seed(seed, &format!("regular-hitting/instance/{n}")))?;
        let batch_seed = sub_seed(seed, &format!("regular-hitting/hmax/{n}"));
        let hm = harness::estimate_hmax(&g, 2, trials_per_pair, batch_seed, default_round_cap(n))?;
        let bound = biased::regular_bound(n, EXPANDER_DEGREE)?;
        points.push((n as f64, hm.value));
        checks.push(check(
            format!("worst-pair hitting within the degree-3 envelope at n = {n}"),
            hm.value <= bound.value,
            format!("hmax = {:.2}, envelope = {:.2}", hm.value, bound.value),
        ));
        rows.push(ResultRow {
            experiment: "regular-hitting".into(),
            graph_family: label,
            n,
            d: EXPANDER_DEGREE,
            k: 2,
            seed: batch_seed,
            quantity: "hmax".into(),
            trials: trials_per_pair,
            mean: hm.value,
            stderr: 0.0,
            p50: 0.0,
            p90: 0.0,
            p99: 0.0,
            max: 0.0,
            timeouts: hm.timeouts,
            bound_value: Some(bound.value),
            extra: vec![
                ("pair".into(), format!("{},{}", hm.pair.0, hm.pair.1)),
                ("pairs_tested".into(), hm.pairs_tested.to_string()),
            ],
        });
    }
    let fit = fit_scaling(&points, FitTransform::LogLog)?;
    rows.push(fit_row("regular-hitting", "random-3-regular-sweep", &fit));
    checks.push(check(
        "worst-pair hitting grows no faster than n^(5/3)",
        fit.slope <= 5.0 / 3.0,
        format!("slope = {:.4}", fit.slope),
    ));
    Ok(CampaignReport {
        rows,
        fits: vec![("hmax-vs-n".into(), fit)],
        checks,
    })
}

/// Hitting-time growth on lollipop graphs, 2-cobra against the simple
/// random walk on the same instances.
///
/// Worst-pair proxy: the hop-diameter extremes measured in both
/// orientations (on lollipops the walk's maximum hitting time is
/// attained between the far side of the clique and the path tip), with
/// the larger orientation used as that size's data point.
pub fn general_hitting(
    sizes: &[usize],
    trials: u64,
    seed: u64,
) -> Result<CampaignReport, ExperimentError> {
    need_sizes(sizes.len(), "the lollipop hitting sweep")?;
    let mut rows = Vec::new();
    let mut cobra_points = Vec::new();
    let mut srw_points = Vec::new();
    for &n in sizes {
        let fam = Family::Lollipop { n };
        let label = family_label(&fam);
        let g = graph::generate(&fam, 0)?;
        let (a, b) = harness::hop_diameter_pair(&g);
        for (process, k) in [(ProcessSpec::Cobra { k: 2 }, 2u32), (ProcessSpec::Srw, 1u32)] {
            let mut worst = f64::NEG_INFINITY;
            for (from, to) in [(a, b), (b, a)] {
                let q = Quantity::Hit { from, to };
                let batch_seed =
                    sub_seed(seed, &format!("general-hitting/{label}/k{k}/{from}-{to}"));
                let stats = run_trials(&g, &process, q, trials, batch_seed, default_round_cap(n))?;
                worst = worst.max(stats.mean);
                rows.push(ResultRow::from_stats(
                    "general-hitting",
                    &label,
                    &g,
                    k,
                    batch_seed,
                    &quantity_label(q),
                    &stats,
                    None,
                    vec![("diameter_pair".into(), format!("{a},{b}"))],
                ));
            }
            if k == 2 {
                cobra_points.push((n as f64, worst));
            } else {
                srw_points.push((n as f64, worst));
            }
        }
    }
    let fit_cobra = fit_scaling(&cobra_points, FitTransform::LogLog)?;
    let fit_srw = fit_scaling(&srw_points, FitTransform::LogLog)?;
    rows.push(fit_row("general-hitting", "lollipop-sweep-cobra2", &fit_cobra));
    rows.push(fit_row("general-hitting", "lollipop-sweep-srw", &fit_srw));
    let checks = vec![
        check(
            "2-cobra worst-pair hitting exponent is sub-cubic (<= 2.9)",
            fit_cobra.slope <= 2.9,
            format!("cobra slope = {:.4}", fit_cobra.slope),
        ),
        check(
            "2-cobra exponent is strictly below the single-walk exponent",
            fit_cobra.slope < fit_srw.slope,
            format!(
                "cobra slope = {:.4}, srw slope = {:.4}",
                fit_cobra.slope, fit_srw.slope
            ),
        ),
    ];
    Ok(CampaignReport {
        rows,
        fits: vec![
            ("worst-pair-hit-cobra2".into(), fit_cobra),
            ("worst-pair-hit-srw".into(), fit_srw),
        ],
        checks,
    })
}

/// For every ordered pair on every corpus graph with `n ≤ max_n`,
/// verifies the hitting-time dominance chain: empirical 2-cobra mean ≤
/// exact hitting time of the Metropolis-derived biased chain ≤ the
/// closed-form path-sum bound.
pub fn dominance_chain(
    corpus: &[Family],
    max_n: usize,
    trials: u64,
    seed: u64,
) -> Result<CampaignReport, ExperimentError> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut any = false;
    for fam in corpus {
        let g = corpus_graph(fam)?;
        let n = g.n();
        if n > max_n || n < 2 {
            continue;
        }
        any = true;
        let label = family_label(fam);
        let mut violations: Vec<String> = Vec::new();
        let mut pairs = 0u64;
        let mut worst_z = f64::NEG_INFINITY;
        let mut worst_pair = (0usize, 0usize);
        let mut max_chain_minus_pathsum = f64::NEG_INFINITY;
        let mut batch_seed_first = 0;
        for v in 0..n {
            let controller = biased::build_metropolis_controller(&g, &[v])?;
            let chain = controller.p.to_finite_chain()?;
            let mut is_target = vec![false; n];
            is_target[v] = true;
            let chain_hit = oracle::exact_hitting(&chain, &is_target)?;
            for u in 0..n {
                if u == v {
                    continue;
                }
                let path_sum = biased::path_sum_bound(&g, u, v)?.value;
                let batch_seed = sub_seed(seed, &format!("dominance/{label}/{u}-{v}"));
                if pairs == 0 {
                    batch_seed_first = batch_seed;
                }
                let stats = run_trials(
                    &g,
                    &ProcessSpec::Cobra { k: 2 },
                    Quantity::Hit { from: u, to: v },
                    trials,
                    batch_seed,
                    default_round_cap(n),
                )?;
                pairs += 1;
                let z = (stats.mean - chain_hit[u]) / stats.stderr.max(1e-12);
                if z > worst_z {
                    worst_z = z;
                    worst_pair = (u, v);
                }
                max_chain_minus_pathsum = max_chain_minus_pathsum.max(chain_hit[u] - path_sum);
                if stats.mean > chain_hit[u] + 3.0 * stats.stderr {
                    violations.push(format!(
                        "pair ({u},{v}): cobra mean {:.4} exceeds chain value {:.4} + 3se",
                        stats.mean, chain_hit[u]
                    ));
                }
                if chain_hit[u] > path_sum + 1e-9 {
                    violations.push(format!(
                        "pair ({u},{v}): chain value {:.4} exceeds path-sum bound {:.4}",
                        chain_hit[u], path_sum
                    ));
                }
            }
        }
        let passed = violations.is_empty();
        checks.push(check(
            format!("cobra <= chain <= path-sum on {label} (all {pairs} pairs)"),
            passed,
            if passed {
                format!(
                    "worst z = {:.2} at pair {:?}; max chain - path-sum = {:.4}",
                    worst_z, worst_pair, max_chain_minus_pathsum
                )
            } else {
                violations.join("; ")
            },
        ));
        rows.push(ResultRow {
            experiment: "dominance".into(),
            graph_family: label,
            n,
            d: max_degree(&g),
            k: 2,
            seed: batch_seed_first,
            quantity: "dominance-worst-z".into(),
            trials,
            mean: worst_z,
            stderr: 0.0,
            p50: 0.0,
            p90: 0.0,
            p99: 0.0,
            max: 0.0,
            timeouts: 0,
            bound_value: None,
            extra: vec![
                ("pairs".into(), pairs.to_string()),
                ("worst_pair".into(), format!("{},{}", worst_pair.0, worst_pair.1)),
                (
                    "max_chain_minus_pathsum".into(),
                    format!("{max_chain_minus_pathsum}"),
                ),
                ("pass".into(), passed.to_string()),
            ],
        });
    }
    if !any {
        return Err(ExperimentError::InvalidParams(format!(
            "no corpus graph has 2 <= n <= {max_n}"
        )));
    }
    Ok(CampaignReport {
        rows,
        fits: Vec::new(),
        checks,
    })
}

/// Paired-stream comparison of 2-cobra cover against the ordered-pebble
/// process (⌈n/2⌉ lazy pebbles stacked on the start vertex): the
/// pebble process should take at least as long on average.
pub fn walt_dominance(
    corpus: &[Family],
    trials: u64,
    seed: u64,
) -> Result<CampaignReport, ExperimentError> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for fam in corpus {
        let g = corpus_graph(fam)?;
        let label = family_label(fam);
        let cap = default_round_cap(g.n());
        let batch_seed = sub_seed(seed, &format!("walt-dominance/{label}"));
        let (cobra_out, walt_out) = walt::dominance_trial(&g, 0, trials, batch_seed, cap)?;
        let cobra = SampleStats::from_outcomes(&cobra_out, cap)?;
        let pebble = SampleStats::from_outcomes(&walt_out, cap)?;
        let pooled = (cobra.stderr * cobra.stderr + pebble.stderr * pebble.stderr).sqrt();
        let pebbles = g.n().div_ceil(2);
        checks.push(check(
            format!("2-cobra cover <= ordered-pebble cover on {label}"),
            cobra.mean <= pebble.mean + 3.0 * pooled,
            format!(
                "cobra = {:.3}, pebbles = {:.3}, pooled se = {:.4}",
                cobra.mean, pebble.mean, pooled
            ),
        ));
        rows.push(ResultRow::from_stats(
            "walt-dominance",
            &label,
            &g,
            2,
            batch_seed,
            "cover:0",
            &cobra,
            None,
            vec![("process".into(), "cobra".into())],
        ));
        rows.push(ResultRow::from_stats(
            "walt-dominance",
            &label,
            &g,
            2,
            batch_seed,
            "cover:0",
            &pebble,
            None,
            vec![
                ("process".into(), "walt".into()),
                ("pebbles".into(), pebbles.to_string()),
                ("lazy".into(), "true".into()),
            ],
        ));
    }
    Ok(CampaignReport {
        rows,
        fits: Vec::new(),
        checks,
    })
}

/// Observes the ordered two-pebble pair walk on the 6-cycle after one
/// relaxation epoch (starting from the exact stationary law, which the
/// epoch should preserve) and compares the per-state occupancy with the
/// closed-form stationary distribution.
pub fn tensor_stationary(trials: u64, seed: u64) -> Result<CampaignReport, ExperimentError> {
    let fam = Family::Cycle { n: 6 };
    let g = corpus_graph(&fam)?;
    let label = family_label(&fam);
    let phi = graph::conductance_exact(&g)?.phi;
    let steps = walt::epoch_length(phi, 2, g.n())?;
    let batch_seed = sub_seed(seed, "tensor-stationary/occupancy");
    let occ = walt::tensor_pair_walk(&g, steps, trials, batch_seed, TensorStart::Stationary)?;
    let pi = walt::eulerian_pair_stationary(g.n());
    let tv = 0.5
        * occ
            .per_state
            .iter()
            .zip(&pi)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>();
    let chi = walt::chi_square_distance(&occ.per_state, &pi)?;
    let checks = vec![check(
        "pair occupancy after one epoch is stationary (TV <= 0.05)",
        tv <= 0.05,
        format!("tv = {tv:.4} over {} states after {steps} rounds", pi.len()),
    )];
    let rows = vec![ResultRow {
        experiment: "tensor-stationary".into(),
        graph_family: label,
        n: g.n(),
        d: max_degree(&g),
        k: 2,
        seed: batch_seed,
        quantity: "pair-occupancy-tv".into(),
        trials,
        mean: tv,
        stderr: 0.0,
        p50: 0.0,
        p90: 0.0,
        p99: 0.0,
        max: 0.0,
        timeouts: 0,
        bound_value: Some(0.05),
        extra: vec![
            ("steps".into(), steps.to_string()),
            ("phi".into(), format!("{phi}")),
            ("chi_square".into(), format!("{chi}")),
            ("diag_mass".into(), format!("{}", occ.diag_mass)),
        ],
    }];
    Ok(CampaignReport {
        rows,
        fits: Vec::new(),
        checks,
    })
}

/// Cover-versus-worst-pair ratio `cover / (h_max · ln n)` for the
/// 2-cobra walk across a corpus; the cover bound says the ratio is
/// bounded by a small constant.
pub fn matthews_campaign(
    corpus: &[Family],
    trials: u64,
    seed: u64,
) -> Result<CampaignReport, ExperimentError> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for fam in corpus {
        let g = corpus_graph(fam)?;
        let label = family_label(fam);
        let batch_seed = sub_seed(seed, &format!("matthews/{label}"));
        let rep = harness::matthews_check(&g, 2, trials, batch_seed, default_round_cap(g.n()))?;
        checks.push(check(
            format!("cover / (hmax ln n) <= 4 on {label}"),
            rep.ratio <= 4.0,
            format!(
                "ratio = {:.3} (cover = {:.2}, hmax = {:.2})",
                rep.ratio, rep.cover.mean, rep.hmax.value
            ),
        ));
        rows.push(ResultRow {
            experiment: "matthews".into(),
            graph_family: label,
            n: g.n(),
            d: max_degree(&g),
            k: 2,
            seed: batch_seed,
            quantity: "cover-over-hmax-lnn".into(),
            trials,
            mean: rep.ratio,
            stderr: 0.0,
            p50: 0.0,
            p90: 0.0,
            p99: 0.0,
            max: 0.0,
            timeouts: rep.cover.timeouts + rep.hmax.timeouts,
            bound_value: Some(4.0),
            extra: vec![
                ("cover_mean".into(), format!("{}", rep.cover.mean)),
                ("cover_stderr".into(), format!("{}", rep.cover.stderr)),
                ("hmax".into(), format!("{}", rep.hmax.value)),
                (
                    "hmax_pair".into(),
                    format!("{},{}", rep.hmax.pair.0, rep.hmax.pair.1),
                ),
                ("pairs_tested".into(), rep.hmax.pairs_tested.to_string()),
            ],
        });
    }
    Ok(CampaignReport {
        rows,
        fits: Vec::new(),
        checks,
    })
}

/// Expected two-step outcome frequencies of the grid drift analysis.
const DRIFT_PLUS2_CLOSEST: f64 = 41.0 / 256.0;
const DRIFT_MINUS2_CLOSEST: f64 = 49.0 / 256.0;
const DRIFT_PLUS2_PRIORITY: f64 = 61.0 / 256.0;

/// Replicates the two-step drift frequencies of the tracked pebble on
/// a 501×501 grid, started 10 rows from its target with the other
/// coordinate matched, far from every boundary.
///
/// Both selection policies run; the closest/unstick policy carries the
/// ±2 frequency checks and the dimension-priority policy pins its own
/// +2 frequency.
pub fn drift_replication(samples: u64, seed: u64) -> Result<CampaignReport, ExperimentError> {
    if samples == 0 {
        return Err(ExperimentError::InvalidParams(
            "need at least one two-step sample".into(),
        ));
    }
    let spec = GridSpec::new(2, 500)?;
    let start = TrackedGridState::new(&spec, vec![250, 240], vec![250, 250])?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (policy_label, policy) in [
        ("closest-unstick", SelectionPolicy::ClosestUnstick),
        ("dimension-priority", SelectionPolicy::DimensionPriority),
    ] {
        let batch_seed = sub_seed(seed, &format!("drift/{policy_label}"));
        let mut rng = ChaCha8Rng::seed_from_u64(batch_seed);
        let mut counts = [0u64; 5]; // net change −2..=+2, offset by 2
        for _ in 0..samples {
            let delta = two_step_drift_sample(&spec, &start, policy, &mut rng);
            counts[(delta + 2) as usize] += 1;
        }
        let freq = |i: usize| counts[i] as f64 / samples as f64;
        let (plus2, minus2, zero) = (freq(4), freq(0), freq(2));
        match policy {
            SelectionPolicy::ClosestUnstick => {
                checks.push(check(
                    "+2 frequency matches 41/256 within 0.01 (closest-unstick)",
                    (plus2 - DRIFT_PLUS2_CLOSEST).abs() <= 0.01,
                    format!("+2 = {plus2:.5}, expected {DRIFT_PLUS2_CLOSEST:.5}"),
                ));
                checks.push(check(
                    "-2 frequency matches 49/256 within 0.01 (closest-unstick)",
                    (minus2 - DRIFT_MINUS2_CLOSEST).abs() <= 0.01,
                    format!("-2 = {minus2:.5}, expected {DRIFT_MINUS2_CLOSEST:.5}"),
                ));
            }
            SelectionPolicy::DimensionPriority => {
                checks.push(check(
                    "+2 frequency matches 61/256 within 0.01 (dimension-priority)",
                    (plus2 - DRIFT_PLUS2_PRIORITY).abs() <= 0.01,
                    format!("+2 = {plus2:.5}, expected {DRIFT_PLUS2_PRIORITY:.5}"),
                ));
            }
        }
        let expected_plus2 = match policy {
            SelectionPolicy::ClosestUnstick => DRIFT_PLUS2_CLOSEST,
            SelectionPolicy::DimensionPriority => DRIFT_PLUS2_PRIORITY,
        };
        rows.push(ResultRow {
            experiment: "drift".into(),
            graph_family: "grid2d:500".into(),
            n: 501 * 501,
            d: 4,
            k: 2,
            seed: batch_seed,
            quantity: "two-step-drift".into(),
            trials: samples,
            mean: plus2,
            stderr: (plus2 * (1.0 - plus2) / samples as f64).sqrt(),
            p50: 0.0,
            p90: 0.0,
            p99: 0.0,
            max: 0.0,
            timeouts: 0,
            bound_value: None,
            extra: vec![
                ("policy".into(), policy_label.into()),
                ("minus2".into(), format!("{minus2}")),
                ("zero".into(), format!("{zero}")),
                ("expected_plus2".into(), format!("{expected_plus2}")),
            ],
        });
    }
    Ok(CampaignReport {
        rows,
        fits: Vec::new(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn small_corpus_is_pinned_and_small() {
        let corpus = small_graph_corpus();
        assert!(corpus.len() >= 30, "corpus has {}", corpus.len());
        let labels: HashSet<String> = corpus.iter().map(family_label).collect();
        assert_eq!(labels.len(), corpus.len(), "labels must be unique");
        for fam in &corpus {
            let g = corpus_graph(fam).unwrap();
            assert!(g.n() <= 8, "{} has n = {}", family_label(fam), g.n());
        }
    }

    #[test]
    fn standard_corpus_generates_and_is_reproducible() {
        let corpus = standard_corpus();
        assert_eq!(corpus.len(), 8);
        for fam in &corpus {
            let g1 = corpus_graph(fam).unwrap();
            let g2 = corpus_graph(fam).unwrap();
            assert_eq!(g1, g2, "{} must be pinned", family_label(fam));
        }
        let rr = corpus_graph(&Family::RandomRegular { n: 64, d: 3 }).unwrap();
        assert_eq!(rr.n(), 64);
        assert!((0..64).all(|v| rr.degree(v) == 3));
    }

    #[test]
    fn family_labels_round_to_canonical_forms() {
        assert_eq!(family_label(&Family::Grid { dim: 2, side: 8 }), "grid2d:8");
        assert_eq!(family_label(&Family::Grid { dim: 3, side: 4 }), "grid:3,4");
        assert_eq!(family_label(&Family::KaryTree { arity: 2, n: 7 }), "tree:2,7");
        assert_eq!(
            family_label(&Family::RandomRegular { n: 64, d: 3 }),
            "random-3-regular:64"
        );
        assert_eq!(quantity_label(Quantity::Hit { from: 3, to: 17 }), "hit:3,17");
        assert_eq!(quantity_label(Quantity::Cover { start: 0 }), "cover:0");
    }

    #[test]
    fn grid_linear_emits_fit_and_is_deterministic() {
        let sides = [4, 6, 8, 10];
        let a = grid_linear(&sides, 50, 3).unwrap();
        let b = grid_linear(&sides, 50, 3).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.checks, b.checks);
        assert_eq!(a.rows.len(), 5);
        let fit = &a.fits[0].1;
        assert_eq!(fit.points.len(), 4);
        assert!(fit.slope.is_finite());
        let fit_row = a.rows.last().unwrap();
        assert_eq!(fit_row.quantity, "fit");
        assert!(fit_row.extra.iter().any(|(k, _)| k == "slope"));
        assert!(grid_linear(&[4, 6, 8], 50, 3).is_err(), "needs 4 sizes");
    }

    #[test]
    fn dominance_chain_holds_on_k5() {
        let report = dominance_chain(&[Family::Complete { n: 5 }], 10, 600, 7).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures());
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert_eq!(row.extra.iter().find(|(k, _)| k == "pairs").unwrap().1, "20");
        assert!(dominance_chain(&[Family::Complete { n: 5 }], 4, 600, 7).is_err());
    }

    #[test]
    fn pebble_process_dominates_on_small_graphs() {
        let fams = [Family::Cycle { n: 8 }, Family::Complete { n: 5 }];
        let report = walt_dominance(&fams, 400, 9).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures());
        assert_eq!(report.rows.len(), 4);
    }

    #[test]
    fn lollipop_exponents_separate_even_at_small_sizes() {
        let report = general_hitting(&[12, 16, 20, 24], 80, 11).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures());
        let cobra = &report.fits[0].1;
        let srw = &report.fits[1].1;
        assert!(cobra.slope < srw.slope);
        // 4 sizes × 2 processes × 2 orientations + 2 fit rows.
        assert_eq!(report.rows.len(), 18);
    }

    #[test]
    fn regular_hitting_stays_within_envelope() {
        let report = regular_hitting(&[16, 24, 32, 48], 60, 13).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures());
        for row in report.rows.iter().filter(|r| r.quantity == "hmax") {
            assert!(row.mean <= row.bound_value.unwrap());
        }
    }

    #[test]
    fn drift_frequencies_match_both_policies() {
        let report = drift_replication(30_000, 17).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures());
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            let f: f64 = row
                .extra
                .iter()
                .find(|(k, _)| k == "minus2")
                .unwrap()
                .1
                .parse()
                .unwrap();
            assert!(row.mean + f <= 1.0);
        }
        assert!(drift_replication(0, 17).is_err());
    }

    #[test]
    fn expander_envelope_holds_at_small_sizes() {
        let report = expander_polylog(&[32, 48, 64, 96], 200, 19).unwrap();
        assert_eq!(report.rows.len(), 5);
        for c in report
            .checks
            .iter()
            .filter(|c| c.label.contains("envelope"))
        {
            assert!(c.passed, "{}: {}", c.label, c.detail);
        }
        for row in report.rows.iter().filter(|r| r.quantity == "cover:0") {
            assert!(row.mean <= row.bound_value.unwrap());
            assert_eq!(row.d, 3);
        }
    }

    #[test]
    fn cover_to_hmax_ratio_is_small_on_easy_graphs() {
        let fams = [Family::Path { n: 5 }, Family::Complete { n: 4 }];
        let report = matthews_campaign(&fams, 500, 23).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures());
        for row in &report.rows {
            assert!(row.mean > 0.0 && row.mean <= 4.0);
        }
    }

    #[test]
    fn pair_walk_occupancy_is_stationary_after_one_epoch() {
        let report = tensor_stationary(6_000, 29).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures());
        let row = &report.rows[0];
        let phi: f64 = row
            .extra
            .iter()
            .find(|(k, _)| k == "phi")
            .unwrap()
            .1
            .parse()
            .unwrap();
        assert!((phi - 1.0 / 3.0).abs() < 1e-12);
        let diag: f64 = row
            .extra
            .iter()
            .find(|(k, _)| k == "diag_mass")
            .unwrap()
            .1
            .parse()
            .unwrap();
        assert!((diag - 2.0 / 7.0).abs() < 0.03);
    }
}
