//! Materializes a cluster-level placement into per-SBS caches.

use super::{CacheOption, CachedCopy, CachingState, Demotion, PlacementSolution};
use crate::catalog::{ClusterConfig, CostModel, Library};
use crate::error::Result;
use crate::qoe::QoeTable;

/// Places each cached video's `n` copies on `n` distinct SBSs.
///
/// Videos are handled in decreasing total cost; each goes to the `n` least
/// loaded SBSs. A video that does not fit keeps as many copies as possible
/// at the highest ladder rate that still fits, provided that state still
/// beats the macro cell; otherwise it is left to the macro cell. The
/// returned solution carries the realized assignments, per-SBS contents and
/// the list of changed videos.
pub fn pack_to_sbs(
    solution: &PlacementSolution,
    library: &Library,
    cfg: &ClusterConfig,
    cost: &CostModel,
    table: &QoeTable,
) -> Result<PlacementSolution> {
    let sbs_count = cfg.n_sbs as usize;
    let capacity = cost.sbs_capacity_units(cfg);
    let mut loads = vec![0u64; sbs_count];
    let mut per_sbs: Vec<Vec<CachedCopy>> = vec![Vec::new(); sbs_count];
    let mut assignments = solution.assignments.clone();
    let mut demotions = Vec::new();

    let mut order: Vec<usize> = (0..assignments.len()).filter(|&i| assignments[i].is_some()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(assignments[i].map_or(0, |o| o.cost)), i));

    let mut by_load: Vec<usize> = (0..sbs_count).collect();
    for i in order {
        let wanted = assignments[i].expect("only cached videos are ordered").state;
        by_load.sort_by_key(|&s| (loads[s], s));
        let placed = fit(wanted, &by_load, &loads, capacity, cost, table, solution.mbs_qoe)?;
        match placed {
            Some(opt) => {
                let copy = cost.copy_units(opt.state.rate_bps)?;
                for &s in &by_load[..opt.state.n as usize] {
                    loads[s] += copy;
                    per_sbs[s].push(CachedCopy {
                        video: i + 1,
                        rate_bps: opt.state.rate_bps,
                    });
                }
                if opt.state != wanted {
                    demotions.push(Demotion {
                        video: i + 1,
                        from: wanted,
                        to: Some(opt.state),
                    });
                }
                assignments[i] = Some(opt);
            }
            None => {
                demotions.push(Demotion {
                    video: i + 1,
                    from: wanted,
                    to: None,
                });
                assignments[i] = None;
            }
        }
    }
    for contents in &mut per_sbs {
        contents.sort_by_key(|c| c.video);
    }
    demotions.sort_by_key(|d| d.video);
    debug_assert!(loads.iter().all(|&l| l <= capacity));

    let mut realized = PlacementSolution::from_assignments(assignments, library, solution.mbs_qoe, solution.capacity_units);
    realized.per_sbs = Some(per_sbs);
    realized.demotions = demotions;
    Ok(realized)
}

/// Best state not above `wanted` that fits the least-loaded SBSs.
fn fit(
    wanted: CachingState,
    by_load: &[usize],
    loads: &[u64],
    capacity: u64,
    cost: &CostModel,
    table: &QoeTable,
    mbs_qoe: f64,
) -> Result<Option<CacheOption>> {
    let ladder = table.ladder();
    let top = ladder.index_of(wanted.rate_bps)?;
    for n in (1..=wanted.n.min(by_load.len() as u32)).rev() {
        // the n-th least loaded SBS has the least room among those chosen
        let room = capacity.saturating_sub(loads[by_load[n as usize - 1]]);
        for &rate_bps in ladder.rates_bps()[..=top].iter().rev() {
            if cost.copy_units(rate_bps)? > room {
                continue;
            }
            let state = CachingState { n, rate_bps };
            let qoe = table.get(state)?;
            if state != wanted && qoe <= mbs_qoe {
                break;
            }
            return Ok(Some(CacheOption {
                state,
                qoe,
                cost: cost.normalized_cost(state)?,
            }));
        }
    }
    Ok(None)
}
