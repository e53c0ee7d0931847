//! QoE-aware proactive caching of scalable video in small-cell clusters.
//!
//! A cluster of `N` small-cell base stations (SBSs) caches SVC videos ahead
//! of demand. Each video gets a caching state `(n, r)`: it is stored in `n`
//! SBSs at operation point `r`. A user fetches a cached video from the best
//! of its `n` Rayleigh-faded links and watches the highest operation point
//! the link supports; uncached videos stream from the macro cell. The crate
//! computes the placement that maximizes the popularity-weighted expected
//! MOS exactly, via a multiple-choice knapsack over the efficient states,
//! and checks the analytic predictions with a Monte Carlo simulator.
//!
//! Modules, bottom up:
//!
//! * [`channel`]: fading statistics and Shannon rates.
//! * [`qoe`]: rate-quality MOS model and expected QoE.
//! * [`catalog`]: video library, cluster layout and cache units.
//! * [`placement`]: efficient states, DP solver, oracle, packing.
//! * [`strategies`]: DMP and MHR baselines.
//! * [`simulate`]: request-level Monte Carlo estimator.
//! * [`cli`]: configuration files and the `solve`/`simulate`/`sweep` commands.

pub mod catalog;
pub mod channel;
pub mod cli;
pub mod error;
pub mod placement;
pub mod qoe;
pub mod simulate;
pub mod strategies;

pub use error::{Error, Result};
