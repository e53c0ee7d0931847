//! JSON form of a placement solution.

use serde::{Deserialize, Serialize};

use super::{CacheOption, CachedCopy, CachingState, Demotion, PlacementSolution};
use crate::catalog::{bps_to_mbps, mbps_to_bps, Library};
use crate::error::{Error, Result};
use crate::qoe::QoeTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentRecord {
    pub id: usize,
    pub n: u32,
    pub r_mbps: f64,
    pub cost_units: u64,
    pub qoe: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopyRecord {
    pub id: usize,
    pub r_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemotionRecord {
    pub id: usize,
    pub from_n: u32,
    pub from_r_mbps: f64,
    /// Zero when the video fell back to the macro cell.
    pub to_n: u32,
    pub to_r_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub m_hat: usize,
    pub objective: f64,
    pub mbs_qoe: f64,
    pub capacity_units: u64,
    pub used_units: u64,
    pub assignments: Vec<AssignmentRecord>,
    pub per_sbs: Vec<Vec<CopyRecord>>,
    pub demotions: Vec<DemotionRecord>,
}

impl SolutionDocument {
    pub fn from_solution(solution: &PlacementSolution) -> Self {
        let assignments = solution
            .assignments
            .iter()
            .enumerate()
            .filter_map(|(i, a)| {
                a.map(|o| AssignmentRecord {
                    id: i + 1,
                    n: o.state.n,
                    r_mbps: bps_to_mbps(o.state.rate_bps),
                    cost_units: o.cost,
                    qoe: o.qoe,
                })
            })
            .collect();
        let per_sbs = solution
            .per_sbs
            .iter()
            .flatten()
            .map(|contents| {
                contents
                    .iter()
                    .map(|c| CopyRecord {
                        id: c.video,
                        r_mbps: bps_to_mbps(c.rate_bps),
                    })
                    .collect()
            })
            .collect();
        let demotions = solution
            .demotions
            .iter()
            .map(|d| DemotionRecord {
                id: d.video,
                from_n: d.from.n,
                from_r_mbps: bps_to_mbps(d.from.rate_bps),
                to_n: d.to.map_or(0, |s| s.n),
                to_r_mbps: d.to.map_or(0.0, |s| bps_to_mbps(s.rate_bps)),
            })
            .collect();
        Self {
            m_hat: solution.m_hat(),
            objective: solution.objective,
            mbs_qoe: solution.mbs_qoe,
            capacity_units: solution.capacity_units,
            used_units: solution.used_units,
            assignments,
            per_sbs,
            demotions,
        }
    }

    /// Rebuilds a solution for `library`, re-evaluating every state against
    /// `table` so that the document cannot smuggle in inconsistent values.
    pub fn to_solution(&self, library: &Library, table: &QoeTable, cost: &crate::catalog::CostModel) -> Result<PlacementSolution> {
        let mut assignments: Vec<Option<CacheOption>> = vec![None; library.len()];
        for rec in &self.assignments {
            if rec.id == 0 || rec.id > library.len() {
                return Err(Error::Schema(format!("video id {} outside 1..={}", rec.id, library.len())));
            }
            if assignments[rec.id - 1].is_some() {
                return Err(Error::Schema(format!("video {} assigned twice", rec.id)));
            }
            let state = CachingState {
                n: rec.n,
                rate_bps: mbps_to_bps(rec.r_mbps),
            };
            let qoe = table
                .get(state)
                .map_err(|e| Error::Schema(format!("video {}: {e}", rec.id)))?;
            assignments[rec.id - 1] = Some(CacheOption {
                state,
                qoe,
                cost: cost.normalized_cost(state)?,
            });
        }
        let mut solution = PlacementSolution::from_assignments(assignments, library, table.mbs_qoe(), self.capacity_units);
        if !self.per_sbs.is_empty() {
            solution.per_sbs = Some(
                self.per_sbs
                    .iter()
                    .map(|contents| {
                        contents
                            .iter()
                            .map(|c| CachedCopy {
                                video: c.id,
                                rate_bps: mbps_to_bps(c.r_mbps),
                            })
                            .collect()
                    })
                    .collect(),
            );
        }
        solution.demotions = self
            .demotions
            .iter()
            .map(|d| Demotion {
                video: d.id,
                from: CachingState {
                    n: d.from_n,
                    rate_bps: mbps_to_bps(d.from_r_mbps),
                },
                to: (d.to_n > 0).then(|| CachingState {
                    n: d.to_n,
                    rate_bps: mbps_to_bps(d.to_r_mbps),
                }),
            })
            .collect();
        Ok(solution)
    }
}
