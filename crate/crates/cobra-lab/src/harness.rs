//! Monte Carlo orchestration: seeded trial fan-out, summary statistics,
//! worst-pair hitting estimation, the cover/h_max ratio check, and
//! scaling-law fits.
//!
//! Determinism contract: every trial draws from its own ChaCha8 stream
//! seeded with [`mix_seed`]`(master_seed, trial_index)`, so results are
//! bit-identical for a fixed configuration regardless of worker count
//! or execution order.

use crate::biased::{self, BiasedChain};
use crate::graph::Graph;
use crate::walks::{self, RunOutcome};
use crate::walt;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("all {0} trials timed out at cap {1}")]
    AllTimedOut(u64, u64),
    #[error("scaling fits need at least 4 points, got {0}")]
    InsufficientPoints(usize),
    #[error("chain construction failed: {0}")]
    Chain(#[from] biased::BiasedError),
}

/// SplitMix64-style avalanche combining a master seed with a stream
/// index. The constants are the published SplitMix64 increment
/// 0x9E3779B97F4A7C15 and finalizer multipliers 0xBF58476D1CE4E5B9,
/// 0x94D049BB133111EB; distinct stream indices give distinct inputs
/// because the increment is odd.
pub fn mix_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a named sub-seed (FNV-1a over the tag, then [`mix_seed`]) so
/// different stages of one experiment never share streams.
pub fn sub_seed(master: u64, tag: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in tag.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix_seed(master, h)
}

/// Which stochastic process a trial runs.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessSpec {
    /// Single-pebble simple random walk.
    Srw,
    /// k-cobra walk.
    Cobra { k: u32 },
    /// Ordered-pebble process with `ceil(delta · n)` stacked pebbles.
    Walt { delta: f64, lazy: bool },
    /// The inverse-degree-biased chain derived from the Metropolis
    /// controller for the given target set.
    Metropolis { targets: Vec<usize> },
}

impl ProcessSpec {
    /// The `k` column value reported for this process (branching
    /// factor; pebble count is reported separately via `extra`).
    pub fn k_label(&self) -> u32 {
        match self {
            ProcessSpec::Srw | ProcessSpec::Metropolis { .. } => 1,
            ProcessSpec::Cobra { k } => *k,
            ProcessSpec::Walt { .. } => 2,
        }
    }
}

/// What a trial measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Cover { start: usize },
    Hit { from: usize, to: usize },
}

/// Summary of one batch of trials. Timed-out trials are excluded from
/// the moments and quantiles but counted in `timeouts`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub trials: u64,
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
    pub timeouts: u64,
    pub cap: u64,
}

impl SampleStats {
    /// Aggregates raw outcomes; errors if nothing finished.
    pub fn from_outcomes(outcomes: &[RunOutcome], cap: u64) -> Result<Self, HarnessError> {
        let trials = outcomes.len() as u64;
        let mut finished: Vec<u64> = outcomes.iter().filter_map(|o| o.finished()).collect();
        if finished.is_empty() {
            return Err(HarnessError::AllTimedOut(trials, cap));
        }
        finished.sort_unstable();
        let timeouts = trials - finished.len() as u64;
        let count = finished.len() as f64;
        let mean = finished.iter().map(|&r| r as f64).sum::<f64>() / count;
        let var = if finished.len() > 1 {
            finished
                .iter()
                .map(|&r| (r as f64 - mean) * (r as f64 - mean))
                .sum::<f64>()
                / (count - 1.0)
        } else {
            0.0
        };
        let stddev = var.sqrt();
        let quantile = |q: f64| {
            let rank = ((q * count).ceil() as usize).clamp(1, finished.len());
            finished[rank - 1] as f64
        };
        Ok(SampleStats {
            trials,
            mean,
            stddev,
            stderr: stddev / count.sqrt(),
            p50: quantile(0.50),
            p90: quantile(0.90),
            p99: quantile(0.99),
            max: *finished.last().unwrap() as f64,
            timeouts,
            cap,
        })
    }
}

fn run_one_trial(
    g: &Graph,
    process: &ProcessSpec,
    chain: Option<&BiasedChain>,
    quantity: Quantity,
    seed: u64,
    cap: u64,
) -> RunOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match (process, quantity) {
        (ProcessSpec::Srw, Quantity::Hit { from, to }) => {
            walks::run_srw_hitting_rng(g, from, to, cap, &mut rng)
        }
        (ProcessSpec::Srw, Quantity::Cover { start }) => {
            walks::run_srw_cover_rng(g, start, cap, &mut rng)
        }
        (ProcessSpec::Cobra { k }, Quantity::Hit { from, to }) => {
            walks::run_cobra_hitting_rng(g, *k, from, to, cap, &mut rng)
        }
        (ProcessSpec::Cobra { k }, Quantity::Cover { start }) => {
            walks::run_cobra_cover_rng(g, *k, start, cap, &mut rng)
        }
        (ProcessSpec::Walt { delta, lazy }, quantity) => {
            let start = match quantity {
                Quantity::Cover { start } => start,
                Quantity::Hit { from, .. } => from,
            };
            let count = ((delta * g.n() as f64).ceil() as usize).max(1);
            let positions = vec![start as u32; count];
            match quantity {
                Quantity::Cover { .. } => {
                    walt::run_walt_cover_rng(g, positions, *lazy, cap, &mut rng)
                }
                Quantity::Hit { to, .. } => {
                    walt::run_walt_hitting_rng(g, positions, *lazy, to, cap, &mut rng)
                }
            }
        }
        (ProcessSpec::Metropolis { .. }, Quantity::Hit { from, to }) => {
            biased::run_biased_walk(chain.unwrap(), from, to, cap, &mut rng)
        }
        (ProcessSpec::Metropolis { .. }, Quantity::Cover { start }) => {
            biased::run_chain_cover_rng(chain.unwrap(), start, cap, &mut rng)
        }
    }
}

/// Runs `trials` independent seeded trials (in parallel, aggregated in
/// trial order) and summarizes them.
pub fn run_trials(
    g: &Graph,
    process: &ProcessSpec,
    quantity: Quantity,
    trials: u64,
    master_seed: u64,
    cap: u64,
) -> Result<SampleStats, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::InvalidParams("trials must be >= 1".into()));
    }
    let check = |v: usize, what: &str| {
        if v >= g.n() {
            Err(HarnessError::InvalidParams(format!(
                "{what} vertex {v} out of range for n = {}",
                g.n()
            )))
        } else {
            Ok(())
        }
    };
    match quantity {
        Quantity::Cover { start } => check(start, "start")?,
        Quantity::Hit { from, to } => {
            check(from, "start")?;
            check(to, "target")?;
        }
    }
    match process {
        ProcessSpec::Cobra { k } if *k == 0 => {
            return Err(HarnessError::InvalidParams("branching factor k must be >= 1".into()))
        }
        ProcessSpec::Walt { delta, .. } if !(*delta > 0.0 && *delta <= 0.5) => {
            return Err(HarnessError::InvalidParams(format!(
                "pebble density delta must lie in (0, 1/2], got {delta}"
            )))
        }
        _ => {}
    }
    // The Metropolis chain is deterministic in (g, targets): build once.
    let chain = match process {
        ProcessSpec::Metropolis { targets } => {
            Some(biased::build_metropolis_controller(g, targets)?.p)
        }
        _ => None,
    };
    let outcomes: Vec<RunOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| run_one_trial(g, process, chain.as_ref(), quantity, mix_seed(master_seed, t), cap))
        .collect();
    SampleStats::from_outcomes(&outcomes, cap)
}

/// How many ordered pairs get dedicated streams when `estimate_hmax`
/// falls back to sampling on graphs with more than 64 vertices.
pub const HMAX_SAMPLED_PAIRS: usize = 128;

/// A worst-pair hitting estimate.
#[derive(Debug, Clone)]
pub struct HmaxEstimate {
    pub value: f64,
    pub pair: (usize, usize),
    pub pairs_tested: usize,
    pub timeouts: u64,
}

/// Estimates `h_max = max_{u≠v} H(u,v)` for the k-cobra walk by taking
/// the max of per-pair empirical means: over all ordered pairs when
/// n ≤ 64, otherwise over [`HMAX_SAMPLED_PAIRS`] sampled pairs plus the
/// hop-diameter extremes (both orientations), which dominate on the
/// stretched families where sampling alone could miss the worst pair.
pub fn estimate_hmax(
    g: &Graph,
    k: u32,
    trials_per_pair: u64,
    seed: u64,
    cap: u64,
) -> Result<HmaxEstimate, HarnessError> {
    let n = g.n();
    if n < 2 {
        return Err(HarnessError::InvalidParams(
            "h_max needs at least two vertices".into(),
        ));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if n <= 64 {
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    pairs.push((u, v));
                }
            }
        }
    } else {
        let (a, b) = hop_diameter_pair(g);
        pairs.push((a, b));
        pairs.push((b, a));
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, "hmax-pair-sample"));
        use rand::Rng;
        while pairs.len() < HMAX_SAMPLED_PAIRS + 2 {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v && !pairs.contains(&(u, v)) {
                pairs.push((u, v));
            }
        }
    }
    let mut best: Option<(f64, (usize, usize))> = None;
    let mut timeouts = 0;
    for (i, &(u, v)) in pairs.iter().enumerate() {
        let stats = run_trials(
            g,
            &ProcessSpec::Cobra { k },
            Quantity::Hit { from: u, to: v },
            trials_per_pair,
            mix_seed(seed, i as u64),
            cap,
        )
        .map_err(|e| match e {
            HarnessError::AllTimedOut(t, c) => {
                HarnessError::InvalidParams(format!("pair ({u},{v}): all {t} trials timed out at cap {c}"))
            }
            other => other,
        })?;
        timeouts += stats.timeouts;
        if best.is_none_or(|(m, _)| stats.mean > m) {
            best = Some((stats.mean, (u, v)));
        }
    }
    let (value, pair) = best.unwrap();
    Ok(HmaxEstimate {
        value,
        pair,
        pairs_tested: pairs.len(),
        timeouts,
    })
}

/// The pair of vertices realizing the hop diameter (BFS from every
/// vertex; ties broken by vertex order).
pub fn hop_diameter_pair(g: &Graph) -> (usize, usize) {
    let mut best = (0, 0, 0u32);
    for u in 0..g.n() {
        let dist = g.bfs_distances(u);
        for (v, &d) in dist.iter().enumerate() {
            if d != u32::MAX && d > best.2 {
                best = (u, v, d);
            }
        }
    }
    (best.0, best.1)
}

/// Cover-versus-h_max report: the cover bound says mean cover time is
/// O(h_max · log n).
#[derive(Debug, Clone)]
pub struct MatthewsReport {
    pub cover: SampleStats,
    pub hmax: HmaxEstimate,
    pub ratio: f64,
}

/// Trials used per pair inside `matthews_check`'s h_max estimate (kept
/// at 10³ so the max-of-means bias stays small).
pub const HMAX_PAIR_TRIALS: u64 = 1000;

/// Measures mean k-cobra cover time (from vertex 0) and the h_max
/// estimate, and reports `cover / (h_max · ln n)`.
pub fn matthews_check(
    g: &Graph,
    k: u32,
    trials: u64,
    seed: u64,
    cap: u64,
) -> Result<MatthewsReport, HarnessError> {
    if g.n() < 2 {
        return Err(HarnessError::InvalidParams(
            "the cover/h_max ratio needs at least two vertices".into(),
        ));
    }
    let cover = run_trials(
        g,
        &ProcessSpec::Cobra { k },
        Quantity::Cover { start: 0 },
        trials,
        sub_seed(seed, "matthews-cover"),
        cap,
    )?;
    let hmax = estimate_hmax(g, k, HMAX_PAIR_TRIALS, sub_seed(seed, "matthews-hmax"), cap)?;
    let ratio = cover.mean / (hmax.value * (g.n() as f64).ln());
    Ok(MatthewsReport { cover, hmax, ratio })
}

/// Axis transform applied before the least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitTransform {
    /// ln(value) against ln(size): slope is the growth exponent.
    LogLog,
    /// value against ln²(size).
    ValueVsLogSquared,
    /// value against size·ln(size).
    ValueVsNLogN,
}

/// A least-squares line through transformed (size, value) points.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub transform: FitTransform,
}

/// Fits a line to ≥ 4 transformed points and reports slope, intercept,
/// and r².
pub fn fit_scaling(points: &[(f64, f64)], transform: FitTransform) -> Result<ScalingFit, HarnessError> {
    if points.len() < 4 {
        return Err(HarnessError::InsufficientPoints(points.len()));
    }
    let transformed: Vec<(f64, f64)> = points
        .iter()
        .map(|&(size, value)| {
            if size <= 0.0 {
                return Err(HarnessError::InvalidParams(format!(
                    "sizes must be positive, got {size}"
                )));
            }
            Ok(match transform {
                FitTransform::LogLog => {
                    if value <= 0.0 {
                        return Err(HarnessError::InvalidParams(format!(
                            "log-log fits need positive values, got {value}"
                        )));
                    }
                    (size.ln(), value.ln())
                }
                FitTransform::ValueVsLogSquared => (size.ln() * size.ln(), value),
                FitTransform::ValueVsNLogN => (size * size.ln(), value),
            })
        })
        .collect::<Result<_, _>>()?;
    let n = transformed.len() as f64;
    let mean_x = transformed.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = transformed.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = transformed.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = transformed.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = transformed.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::InvalidParams(
            "all sizes coincide after the transform".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = transformed
        .iter()
        .map(|p| {
            let e = p.1 - (intercept + slope * p.0);
            e * e
        })
        .sum();
    // A perfectly flat relation leaves nothing to explain.
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(ScalingFit {
        points: points.to_vec(),
        slope,
        intercept,
        r_squared,
        transform,
    })
}
