//! Video library and cache-cost accounting.
//!
//! Cache space is counted in integer *units*. One unit stores `k·R¹` bits per
//! second for the common duration `T`, where `R¹` is the lowest operation
//! point and `k` is the quantum multiplier (1 by default). A copy at rate `r`
//! occupies `ceil(r / (k·R¹))` units.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::placement::CachingState;

/// Suggested SVC operation points in Mbps, lowest first.
pub const DEFAULT_LADDER_MBPS: [f64; 10] = [0.1, 0.3, 0.6, 1.0, 1.2, 2.0, 2.8, 4.8, 7.2, 10.4];

const POPULARITY_SUM_TOLERANCE: f64 = 1e-9;

/// Ordered operation-point bit-rates shared by every video.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpLadder {
    rates_bps: Vec<u64>,
}

impl OpLadder {
    pub fn new(rates_bps: Vec<u64>) -> Result<Self> {
        if rates_bps.is_empty() {
            return Err(Error::invalid("ladder", "needs at least one operation point"));
        }
        if rates_bps[0] == 0 {
            return Err(Error::invalid("ladder", "rates must be positive"));
        }
        if rates_bps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("ladder", "rates must be strictly increasing"));
        }
        let base = rates_bps[0];
        if let Some(&bad) = rates_bps.iter().find(|&&r| r % base != 0) {
            return Err(Error::NotAMultiple {
                rate_bps: bad,
                base_bps: base,
            });
        }
        Ok(Self { rates_bps })
    }

    /// Builds a ladder from Mbps values, rounding each to a whole bit per second.
    pub fn from_mbps(rates_mbps: &[f64]) -> Result<Self> {
        if let Some(bad) = rates_mbps.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::invalid("ladder_mbps", format!("bad rate {bad}")));
        }
        Self::new(rates_mbps.iter().map(|r| mbps_to_bps(*r)).collect())
    }

    pub fn table_default() -> Self {
        Self::from_mbps(&DEFAULT_LADDER_MBPS).expect("default ladder is valid")
    }

    pub fn rates_bps(&self) -> &[u64] {
        &self.rates_bps
    }

    pub fn len(&self) -> usize {
        self.rates_bps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates_bps.is_empty()
    }

    pub fn base_rate_bps(&self) -> u64 {
        self.rates_bps[0]
    }

    pub fn top_rate_bps(&self) -> u64 {
        *self.rates_bps.last().expect("ladder is nonempty")
    }

    pub fn index_of(&self, rate_bps: u64) -> Result<usize> {
        self.rates_bps
            .binary_search(&rate_bps)
            .map_err(|_| Error::NotOnLadder { rate_bps })
    }

    pub fn contains(&self, rate_bps: u64) -> bool {
        self.rates_bps.binary_search(&rate_bps).is_ok()
    }
}

pub fn mbps_to_bps(mbps: f64) -> u64 {
    (mbps * 1.0e6).round() as u64
}

pub fn bps_to_mbps(bps: u64) -> f64 {
    bps as f64 / 1.0e6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Video {
    /// 1-based rank in decreasing popularity.
    pub id: usize,
    pub popularity: f64,
    pub duration_s: f64,
}

/// Videos sorted by nonincreasing popularity.
#[derive(Debug, Clone, PartialEq)]
pub struct Library {
    videos: Vec<Video>,
}

impl Library {
    /// Validates an explicit video list. Ids must be `1..=M` in order.
    pub fn new(videos: Vec<Video>) -> Result<Self> {
        if videos.is_empty() {
            return Err(Error::invalid("library", "must contain at least one video"));
        }
        for (rank, v) in videos.iter().enumerate() {
            if v.id != rank + 1 {
                return Err(Error::invalid(
                    "library",
                    format!("video at position {} has id {}", rank + 1, v.id),
                ));
            }
            if !(v.popularity.is_finite() && v.popularity >= 0.0) {
                return Err(Error::invalid("popularity", format!("video {} has {}", v.id, v.popularity)));
            }
            if !(v.duration_s.is_finite() && v.duration_s > 0.0) {
                return Err(Error::invalid("duration_s", format!("video {} has {}", v.id, v.duration_s)));
            }
        }
        if videos.windows(2).any(|w| w[0].popularity < w[1].popularity) {
            return Err(Error::invalid("popularity", "must be sorted nonincreasing by id"));
        }
        let total: f64 = videos.iter().map(|v| v.popularity).sum();
        if (total - 1.0).abs() > POPULARITY_SUM_TOLERANCE {
            return Err(Error::invalid("popularity", format!("sums to {total}, expected 1")));
        }
        Ok(Self { videos })
    }

    pub fn zipf(m: usize, s: f64, duration_s: f64) -> Result<Self> {
        let videos = zipf_popularity(m, s)?
            .into_iter()
            .enumerate()
            .map(|(i, popularity)| Video {
                id: i + 1,
                popularity,
                duration_s,
            })
            .collect();
        Self::new(videos)
    }

    /// Builds a library of equal-duration parts from videos of arbitrary
    /// length. A video of duration `t` becomes `ceil(t / T)` parts that share
    /// its popularity equally; parts are re-ranked by popularity (stable).
    pub fn split_by_duration(entries: &[(f64, f64)], part_duration_s: f64) -> Result<Self> {
        if !(part_duration_s.is_finite() && part_duration_s > 0.0) {
            return Err(Error::invalid("duration_s", "part duration must be positive"));
        }
        let mut parts = Vec::new();
        for &(popularity, duration_s) in entries {
            if !(duration_s.is_finite() && duration_s > 0.0) {
                return Err(Error::invalid("duration_s", format!("got {duration_s}")));
            }
            let count = (duration_s / part_duration_s).ceil().max(1.0) as usize;
            let share = popularity / count as f64;
            parts.extend(std::iter::repeat_n(share, count));
        }
        parts.sort_by(|a, b| b.total_cmp(a));
        let videos = parts
            .into_iter()
            .enumerate()
            .map(|(i, popularity)| Video {
                id: i + 1,
                popularity,
                duration_s: part_duration_s,
            })
            .collect();
        Self::new(videos)
    }

    pub fn videos(&self) -> &[Video] {
        &self.videos
    }

    pub fn len(&self) -> usize {
        self.videos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.videos.is_empty()
    }

    pub fn popularities(&self) -> impl Iterator<Item = f64> + '_ {
        self.videos.iter().map(|v| v.popularity)
    }

    /// Same library with every popularity multiplied by `factor`. The result
    /// no longer sums to one and bypasses validation; it exists for
    /// scale-invariance checks of the solver.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            videos: self
                .videos
                .iter()
                .map(|v| Video {
                    popularity: v.popularity * factor,
                    ..*v
                })
                .collect(),
        }
    }
}

/// Zipf weights `i^-s` normalised to one.
pub fn zipf_popularity(m: usize, s: f64) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::invalid("m", "library size must be at least 1"));
    }
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::invalid("zipf_s", format!("shape must be nonnegative, got {s}")));
    }
    let weights: Vec<f64> = (1..=m).map(|i| (i as f64).powf(-s)).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterConfig {
    pub n_sbs: u32,
    pub cache_bytes_per_sbs: u64,
    pub sbs_channel: ChannelParams,
    pub mbs_channel: ChannelParams,
}

impl ClusterConfig {
    pub fn new(
        n_sbs: u32,
        cache_bytes_per_sbs: u64,
        sbs_channel: ChannelParams,
        mbs_channel: ChannelParams,
    ) -> Result<Self> {
        if n_sbs == 0 {
            return Err(Error::invalid("n_sbs", "cluster needs at least one SBS"));
        }
        Ok(Self {
            n_sbs,
            cache_bytes_per_sbs,
            sbs_channel,
            mbs_channel,
        })
    }
}

/// Converts bit-rates and byte budgets into integer cache units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    base_rate_bps: u64,
    quantum_mult: u32,
    duration_s: f64,
}

impl CostModel {
    pub fn new(ladder: &OpLadder, duration_s: f64, quantum_mult: u32) -> Result<Self> {
        if quantum_mult == 0 {
            return Err(Error::invalid("quantum_mult", "must be at least 1"));
        }
        if !(duration_s.is_finite() && duration_s > 0.0) {
            return Err(Error::invalid("duration_s", format!("must be positive, got {duration_s}")));
        }
        Ok(Self {
            base_rate_bps: ladder.base_rate_bps(),
            quantum_mult,
            duration_s,
        })
    }

    pub fn quantum_mult(&self) -> u32 {
        self.quantum_mult
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }

    pub fn unit_rate_bps(&self) -> u64 {
        self.base_rate_bps * self.quantum_mult as u64
    }

    /// Bytes held by one cache unit.
    pub fn unit_bytes(&self) -> f64 {
        self.unit_rate_bps() as f64 * self.duration_s / 8.0
    }

    /// Units taken by a single copy at `rate_bps`, rounded up.
    pub fn copy_units(&self, rate_bps: u64) -> Result<u64> {
        if !rate_bps.is_multiple_of(self.base_rate_bps) {
            return Err(Error::NotAMultiple {
                rate_bps,
                base_bps: self.base_rate_bps,
            });
        }
        Ok(rate_bps.div_ceil(self.unit_rate_bps()))
    }

    /// Units taken by all copies of a cached video.
    pub fn normalized_cost(&self, state: CachingState) -> Result<u64> {
        Ok(state.n as u64 * self.copy_units(state.rate_bps)?)
    }

    /// Whole units that fit into `cache_bytes`.
    pub fn units_in(&self, cache_bytes: u64) -> u64 {
        // integer operands keep the division exact for exact fits
        let bits = cache_bytes as f64 * 8.0;
        let unit_bits = self.unit_rate_bps() as f64 * self.duration_s;
        (bits / unit_bits).floor() as u64
    }

    pub fn sbs_capacity_units(&self, cfg: &ClusterConfig) -> u64 {
        self.units_in(cfg.cache_bytes_per_sbs)
    }

    pub fn cluster_capacity_units(&self, cfg: &ClusterConfig) -> u64 {
        cfg.n_sbs as u64 * self.sbs_capacity_units(cfg)
    }
}
