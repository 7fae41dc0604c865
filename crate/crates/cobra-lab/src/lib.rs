//! A laboratory for coalescing-branching ("cobra") random walks.
//!
//! The crate has three layers:
//!
//! * exact machinery — finite-chain linear solves and small-state-space
//!   cobra chains that produce ground-truth hitting/cover times
//!   ([`oracle`]), plus graph metrics computed by enumeration
//!   ([`graph`]);
//! * stochastic processes — the cobra walk itself, an ordered-pebble
//!   coalescing process, a two-pebble tensor walk, tracked-pebble grid
//!   observers, and bias-controlled single walks ([`walks`], [`walt`],
//!   [`biased`]);
//! * measurement — a deterministic Monte Carlo harness with seeded
//!   per-trial streams, summary statistics, and scaling fits
//!   ([`harness`], [`experiments`]).
//!
//! Everything that consumes randomness takes an explicit RNG, and the
//! harness derives one independent stream per trial from a master seed,
//! so results are bit-identical for a given seed regardless of how many
//! worker threads run the trials.

pub mod biased;
pub mod experiments;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod walks;
pub mod walt;

pub use graph::Graph;
