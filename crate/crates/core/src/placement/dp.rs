//! Exact dynamic program for the multiple-choice knapsack.
//!
//! `F(m, v)` is the best popularity-weighted QoE of the first `m` videos
//! using at most `v` cache units:
//!
//! ```text
//! F(m, v) = max( F(m-1, v) + p_m·q_mbs,
//!                max_{o : cost_o ≤ v} F(m-1, v - cost_o) + p_m·q_o )
//! ```
//!
//! Only two rows are live during the forward pass. Rows at every
//! `checkpoint_interval`-th video are kept, and the assignment is recovered
//! block by block from the last checkpoint backwards by recomputing that
//! block's choice table. The recomputed rows are bit-identical to the
//! forward pass, so the recovered assignment is the one a full choice table
//! would yield.

use rayon::prelude::*;

use super::{CacheOption, EfficientStateSet, PlacementSolution};
use crate::catalog::Library;
use crate::error::{Error, Result};

/// Largest capacity axis the solver will allocate.
pub const MAX_CAPACITY_UNITS: u64 = 1 << 28;

const CHUNK: usize = 8192;

/// Index into the choice set; 0 is macro-cell service.
type Choice = u16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverOptions {
    /// Stop at the first video that the macro cell serves at every capacity
    /// and leave all later videos to the macro cell. With nonincreasing
    /// popularity every later row would also pick the macro cell everywhere.
    pub early_stop: bool,
    /// Videos between stored DP rows; defaults to `ceil(sqrt(M))`.
    pub checkpoint_interval: Option<usize>,
}

pub fn solve_mckp(library: &Library, cs: &EfficientStateSet, capacity: u64) -> Result<PlacementSolution> {
    solve_mckp_with(library, cs, capacity, &SolverOptions::default())
}

pub fn solve_mckp_with(
    library: &Library,
    cs: &EfficientStateSet,
    capacity: u64,
    opts: &SolverOptions,
) -> Result<PlacementSolution> {
    if capacity > MAX_CAPACITY_UNITS {
        return Err(Error::CapacityOverflow { units: capacity });
    }
    if cs.len() >= Choice::MAX as usize {
        return Err(Error::invalid("cs", format!("{} options exceed the choice index", cs.len())));
    }
    let pops: Vec<f64> = library.popularities().collect();
    let width = capacity as usize + 1;
    let options = cs.options();
    let mbs_qoe = cs.mbs_qoe();
    let interval = opts
        .checkpoint_interval
        .unwrap_or_else(|| (pops.len() as f64).sqrt().ceil() as usize)
        .max(1);

    let mut checkpoints: Vec<Vec<f64>> = vec![vec![0.0; width]];
    let mut prev = vec![0.0; width];
    let mut next = vec![0.0; width];
    let mut solved = pops.len();
    for (m, &p) in pops.iter().enumerate() {
        let any_cached = advance(&prev, &mut next, None, p, mbs_qoe, options);
        if opts.early_stop && !any_cached {
            solved = m;
            break;
        }
        std::mem::swap(&mut prev, &mut next);
        if (m + 1) % interval == 0 && m + 1 < pops.len() {
            checkpoints.push(prev.clone());
        }
    }
    drop(prev);
    drop(next);

    let mut assignments: Vec<Option<CacheOption>> = vec![None; pops.len()];
    let mut v = capacity as usize;
    let mut choices: Vec<Choice> = Vec::new();
    let blocks = solved.div_ceil(interval);
    for block in (0..blocks).rev() {
        let start = block * interval;
        let end = (start + interval).min(solved);
        let rows = end - start;
        choices.clear();
        choices.resize(rows * width, 0);
        let mut prev = checkpoints[block].clone();
        let mut next = vec![0.0; width];
        for (k, row) in choices.chunks_mut(width).enumerate() {
            advance(&prev, &mut next, Some(row), pops[start + k], mbs_qoe, options);
            std::mem::swap(&mut prev, &mut next);
        }
        for k in (0..rows).rev() {
            let c = choices[k * width + v] as usize;
            if c > 0 {
                let opt = options[c - 1];
                assignments[start + k] = Some(opt);
                v -= opt.cost as usize;
            }
        }
    }
    Ok(PlacementSolution::from_assignments(assignments, library, mbs_qoe, capacity))
}

/// Computes one DP row and reports whether any cell picked a cached state.
/// Cells are independent given `prev`, so chunks run in parallel without
/// changing results.
fn advance(
    prev: &[f64],
    next: &mut [f64],
    choice: Option<&mut [Choice]>,
    p: f64,
    mbs_qoe: f64,
    options: &[CacheOption],
) -> bool {
    let base = p * mbs_qoe;
    let gains: Vec<(usize, f64)> = options.iter().map(|o| (o.cost as usize, p * o.qoe)).collect();
    let fill = |offset: usize, out: &mut [f64], mut picks: Option<&mut [Choice]>| {
        let mut any = false;
        for (k, cell) in out.iter_mut().enumerate() {
            let v = offset + k;
            let mut best = prev[v] + base;
            let mut pick: Choice = 0;
            for (j, &(cost, gain)) in gains.iter().enumerate() {
                if cost > v {
                    break;
                }
                let val = prev[v - cost] + gain;
                if val > best {
                    best = val;
                    pick = j as Choice + 1;
                }
            }
            *cell = best;
            any |= pick != 0;
            if let Some(p) = picks.as_deref_mut() {
                p[k] = pick;
            }
        }
        any
    };
    match choice {
        Some(picks) => next
            .par_chunks_mut(CHUNK)
            .zip(picks.par_chunks_mut(CHUNK))
            .enumerate()
            .map(|(i, (out, pk))| fill(i * CHUNK, out, Some(pk)))
            .reduce(|| false, |a, b| a || b),
        None => next
            .par_chunks_mut(CHUNK)
            .enumerate()
            .map(|(i, out)| fill(i * CHUNK, out, None))
            .reduce(|| false, |a, b| a || b),
    }
}
