//! Fixed-rate baseline placements.
//!
//! * DMP duplicates the most popular videos into every SBS, so all caches
//!   hold identical content.
//! * MHR stores a single copy of as many videos as the cluster can hold,
//!   spread round-robin by popularity rank.
//!
//! Capacity is counted with the same [`CostModel`] as the proposed solver,
//! so a baseline is always a feasible point of the same knapsack.

use std::fmt;
use std::str::FromStr;

use crate::catalog::{bps_to_mbps, mbps_to_bps, ClusterConfig, CostModel, Library};
use crate::error::{Error, Result};
use crate::placement::{CacheOption, CachedCopy, CachingState, PlacementSolution};
use crate::qoe::QoeTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Dmp,
    Mhr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BaselineSpec {
    pub kind: BaselineKind,
    pub rate_bps: u64,
}

impl BaselineSpec {
    pub fn place(
        &self,
        library: &Library,
        cfg: &ClusterConfig,
        cost: &CostModel,
        table: &QoeTable,
    ) -> Result<PlacementSolution> {
        match self.kind {
            BaselineKind::Dmp => place_dmp(library, cfg, cost, table, self.rate_bps),
            BaselineKind::Mhr => place_mhr(library, cfg, cost, table, self.rate_bps),
        }
    }
}

impl fmt::Display for BaselineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            BaselineKind::Dmp => "dmp",
            BaselineKind::Mhr => "mhr",
        };
        write!(f, "{kind}@{}", bps_to_mbps(self.rate_bps))
    }
}

impl FromStr for BaselineSpec {
    type Err = Error;

    /// Parses `dmp@4.8` or `mhr@10.4` (rate in Mbps).
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rate) = s
            .split_once('@')
            .ok_or_else(|| Error::invalid("strategy", format!("`{s}` is not of the form kind@rate")))?;
        let kind = match kind.trim().to_ascii_lowercase().as_str() {
            "dmp" => BaselineKind::Dmp,
            "mhr" => BaselineKind::Mhr,
            other => return Err(Error::invalid("strategy", format!("unknown baseline `{other}`"))),
        };
        let mbps: f64 = rate
            .trim()
            .parse()
            .map_err(|_| Error::invalid("strategy", format!("bad rate in `{s}`")))?;
        if !(mbps.is_finite() && mbps > 0.0) {
            return Err(Error::invalid("strategy", format!("bad rate in `{s}`")));
        }
        Ok(Self {
            kind,
            rate_bps: mbps_to_bps(mbps),
        })
    }
}

fn fixed_option(n: u32, rate_bps: u64, cost: &CostModel, table: &QoeTable) -> Result<CacheOption> {
    let state = CachingState { n, rate_bps };
    Ok(CacheOption {
        state,
        qoe: table.get(state)?,
        cost: cost.normalized_cost(state)?,
    })
}

/// How many copies at `rate_bps` fit into one SBS.
fn copies_per_sbs(cfg: &ClusterConfig, cost: &CostModel, rate_bps: u64) -> Result<usize> {
    Ok((cost.sbs_capacity_units(cfg) / cost.copy_units(rate_bps)?) as usize)
}

pub fn place_dmp(
    library: &Library,
    cfg: &ClusterConfig,
    cost: &CostModel,
    table: &QoeTable,
    rate_bps: u64,
) -> Result<PlacementSolution> {
    table.ladder().index_of(rate_bps)?;
    let opt = fixed_option(cfg.n_sbs, rate_bps, cost, table)?;
    let k = copies_per_sbs(cfg, cost, rate_bps)?.min(library.len());
    let assignments = (0..library.len()).map(|i| (i < k).then_some(opt)).collect();
    let contents: Vec<CachedCopy> = (1..=k).map(|video| CachedCopy { video, rate_bps }).collect();
    let mut solution = PlacementSolution::from_assignments(
        assignments,
        library,
        table.mbs_qoe(),
        cost.cluster_capacity_units(cfg),
    );
    solution.per_sbs = Some(vec![contents; cfg.n_sbs as usize]);
    Ok(solution)
}

pub fn place_mhr(
    library: &Library,
    cfg: &ClusterConfig,
    cost: &CostModel,
    table: &QoeTable,
    rate_bps: u64,
) -> Result<PlacementSolution> {
    table.ladder().index_of(rate_bps)?;
    let opt = fixed_option(1, rate_bps, cost, table)?;
    let sbs_count = cfg.n_sbs as usize;
    let k = (sbs_count * copies_per_sbs(cfg, cost, rate_bps)?).min(library.len());
    let assignments = (0..library.len()).map(|i| (i < k).then_some(opt)).collect();
    let mut per_sbs = vec![Vec::new(); sbs_count];
    for i in 0..k {
        per_sbs[i % sbs_count].push(CachedCopy {
            video: i + 1,
            rate_bps,
        });
    }
    let mut solution = PlacementSolution::from_assignments(
        assignments,
        library,
        table.mbs_qoe(),
        cost.cluster_capacity_units(cfg),
    );
    solution.per_sbs = Some(per_sbs);
    Ok(solution)
}
