//! Cache placement: efficient caching states, the multiple-choice knapsack
//! solver and its exhaustive oracle, staircase verification and per-SBS
//! materialization.
//!
//! Every choice set is kept in *preference order*: ascending cost, then
//! ascending diversity, then ascending rate. Serving a video from the macro
//! cell is preferred over any cached option of equal value. Both solvers
//! resolve ties with this order so that they return identical assignments.

mod bruteforce;
mod document;
mod dp;
mod pack;

use serde::{Deserialize, Serialize};

use crate::catalog::{ClusterConfig, CostModel, Library, OpLadder};
use crate::error::Result;
use crate::qoe::{QoeModel, QoeTable};

pub use bruteforce::{solve_bruteforce, BRUTEFORCE_LIMIT};
pub use document::{AssignmentRecord, CopyRecord, DemotionRecord, SolutionDocument};
pub use dp::{solve_mckp, solve_mckp_with, SolverOptions, MAX_CAPACITY_UNITS};
pub use pack::pack_to_sbs;

/// Diversity `n` (number of SBSs holding the video) and cached bit-rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CachingState {
    pub n: u32,
    pub rate_bps: u64,
}

/// A caching state together with its expected QoE and cache cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheOption {
    pub state: CachingState,
    pub qoe: f64,
    pub cost: u64,
}

impl CacheOption {
    fn preference_key(&self) -> (u64, u32, u64) {
        (self.cost, self.state.n, self.state.rate_bps)
    }
}

/// Choice set of the knapsack: per-video options besides macro-cell service.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficientStateSet {
    options: Vec<CacheOption>,
    mbs_qoe: f64,
}

impl EfficientStateSet {
    /// Keeps the candidates that beat macro-cell service and are not
    /// dominated by a cheaper-or-equal option with at least the same QoE.
    pub fn from_candidates(mut candidates: Vec<CacheOption>, mbs_qoe: f64) -> Self {
        candidates.retain(|c| c.qoe > mbs_qoe);
        // cheapest first; at equal cost the best QoE (then preference) leads
        candidates.sort_by(|a, b| {
            a.cost
                .cmp(&b.cost)
                .then(b.qoe.total_cmp(&a.qoe))
                .then(a.preference_key().cmp(&b.preference_key()))
        });
        let mut options: Vec<CacheOption> = Vec::with_capacity(candidates.len());
        for c in candidates {
            if options.last().is_none_or(|best| c.qoe > best.qoe) {
                options.push(c);
            }
        }
        Self { options, mbs_qoe }
    }

    /// Uses `options` as given, without filtering. Only the preference order
    /// is imposed.
    pub fn from_options_unfiltered(mut options: Vec<CacheOption>, mbs_qoe: f64) -> Self {
        options.sort_by_key(CacheOption::preference_key);
        Self { options, mbs_qoe }
    }

    pub fn from_table(table: &QoeTable, cost: &CostModel) -> Result<Self> {
        let mut candidates = Vec::with_capacity(table.n_max() as usize * table.ladder().len());
        for n in 1..=table.n_max() {
            for &rate_bps in table.ladder().rates_bps() {
                let state = CachingState { n, rate_bps };
                candidates.push(CacheOption {
                    state,
                    qoe: table.get(state)?,
                    cost: cost.normalized_cost(state)?,
                });
            }
        }
        Ok(Self::from_candidates(candidates, table.mbs_qoe()))
    }

    pub fn options(&self) -> &[CacheOption] {
        &self.options
    }

    pub fn mbs_qoe(&self) -> f64 {
        self.mbs_qoe
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    pub fn find(&self, state: CachingState) -> Option<&CacheOption> {
        self.options.iter().find(|o| o.state == state)
    }

    /// True when QoE and cost both ascend along the set and every entry
    /// beats macro-cell service.
    pub fn is_jointly_ordered(&self) -> bool {
        self.options.iter().all(|o| o.qoe > self.mbs_qoe)
            && self
                .options
                .windows(2)
                .all(|w| w[0].qoe <= w[1].qoe && w[0].cost <= w[1].cost)
    }
}

/// Evaluates all `N·L` states of the cluster and keeps the efficient ones.
pub fn enumerate_efficient_states(
    cfg: &ClusterConfig,
    ladder: &OpLadder,
    model: &QoeModel,
    cost: &CostModel,
) -> Result<EfficientStateSet> {
    let table = QoeTable::build(cfg.n_sbs, ladder, &cfg.sbs_channel, &cfg.mbs_channel, model)?;
    EfficientStateSet::from_table(&table, cost)
}

/// One stored copy of a video in a specific SBS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CachedCopy {
    pub video: usize,
    pub rate_bps: u64,
}

/// A video whose state had to change while materializing per-SBS caches.
/// `to == None` means the video fell back to macro-cell service.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Demotion {
    pub video: usize,
    pub from: CachingState,
    pub to: Option<CachingState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementSolution {
    /// Indexed by popularity rank minus one; `None` is macro-cell service.
    pub assignments: Vec<Option<CacheOption>>,
    pub mbs_qoe: f64,
    pub objective: f64,
    pub capacity_units: u64,
    pub used_units: u64,
    /// Contents of each SBS, once materialized.
    pub per_sbs: Option<Vec<Vec<CachedCopy>>>,
    pub demotions: Vec<Demotion>,
}

impl PlacementSolution {
    /// Solution that serves everything from the macro cell.
    pub fn all_mbs(library: &Library, mbs_qoe: f64, capacity_units: u64) -> Self {
        let assignments = vec![None; library.len()];
        Self {
            objective: objective(&assignments, library, mbs_qoe),
            assignments,
            mbs_qoe,
            capacity_units,
            used_units: 0,
            per_sbs: None,
            demotions: Vec::new(),
        }
    }

    pub(crate) fn from_assignments(
        assignments: Vec<Option<CacheOption>>,
        library: &Library,
        mbs_qoe: f64,
        capacity_units: u64,
    ) -> Self {
        let used_units = assignments.iter().flatten().map(|o| o.cost).sum();
        Self {
            objective: objective(&assignments, library, mbs_qoe),
            assignments,
            mbs_qoe,
            capacity_units,
            used_units,
            per_sbs: None,
            demotions: Vec::new(),
        }
    }

    /// Rank of the last cached video, zero when nothing is cached.
    pub fn m_hat(&self) -> usize {
        self.assignments
            .iter()
            .rposition(Option::is_some)
            .map_or(0, |i| i + 1)
    }

    pub fn cached_count(&self) -> usize {
        self.assignments.iter().flatten().count()
    }

    pub fn is_cached(&self, rank: usize) -> bool {
        self.assignments[rank - 1].is_some()
    }
}

/// Popularity-weighted expected QoE over cached and macro-served videos.
///
/// Terms are accumulated in rank order; the DP accumulates in the same
/// order, so the two agree bit for bit.
pub fn objective(assignments: &[Option<CacheOption>], library: &Library, mbs_qoe: f64) -> f64 {
    library
        .popularities()
        .zip(assignments)
        .fold(0.0, |acc, (p, a)| acc + p * a.map_or(mbs_qoe, |o| o.qoe))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaircaseMetric {
    Cost,
    Qoe,
}

/// First video that receives more cache space (or QoE) than a strictly
/// more popular one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaircaseViolation {
    pub video: usize,
    pub metric: StaircaseMetric,
    pub value: f64,
    pub bound: f64,
}

/// Checks that cost and QoE are nonincreasing in popularity rank. Videos of
/// equal popularity form one group and may appear in any order.
pub fn verify_staircase(solution: &PlacementSolution, library: &Library) -> Result<(), StaircaseViolation> {
    let videos = library.videos();
    let value = |i: usize| {
        solution.assignments[i].map_or((0.0, solution.mbs_qoe), |o| (o.cost as f64, o.qoe))
    };
    let mut start = 0;
    // minima of the previous popularity group
    let mut floor: Option<(f64, f64)> = None;
    while start < videos.len() {
        let mut end = start + 1;
        while end < videos.len() && videos[end].popularity == videos[start].popularity {
            end += 1;
        }
        if let Some((min_cost, min_qoe)) = floor {
            for (i, video) in videos.iter().enumerate().take(end).skip(start) {
                let (cost, qoe) = value(i);
                if cost > min_cost {
                    return Err(StaircaseViolation {
                        video: video.id,
                        metric: StaircaseMetric::Cost,
                        value: cost,
                        bound: min_cost,
                    });
                }
                if qoe > min_qoe {
                    return Err(StaircaseViolation {
                        video: video.id,
                        metric: StaircaseMetric::Qoe,
                        value: qoe,
                        bound: min_qoe,
                    });
                }
            }
        }
        let group_min = (start..end).map(value).fold((f64::INFINITY, f64::INFINITY), |(c, q), (ci, qi)| {
            (c.min(ci), q.min(qi))
        });
        floor = Some(group_min);
        start = end;
    }
    Ok(())
}
