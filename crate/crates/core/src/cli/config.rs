//! Experiment configuration file. Every field is optional; absent fields
//! take the reference scenario values (10 000 videos, Zipf 0.8, one-hour
//! videos, three SBSs with 2 TB each, SBS 10 dB over 5 MHz, macro cell
//! 3 dB over 2 MHz, α = 0.16, β = 0.66).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{ClusterConfig, CostModel, Library, OpLadder, Video, DEFAULT_LADDER_MBPS};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::placement::SolverOptions;
use crate::qoe::{QoeModel, QoeTable, DEFAULT_ALPHA, DEFAULT_BETA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub library: LibrarySpec,
    pub cluster: ClusterSpec,
    pub qoe: QoeSpec,
    pub solver: SolverSpec,
    pub sim: SimSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LibrarySpec {
    pub m: usize,
    pub zipf_s: f64,
    pub duration_s: f64,
    pub ladder_mbps: Vec<f64>,
    /// Explicit catalogue; overrides `m` and `zipf_s` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub videos: Option<Vec<Video>>,
}

impl Default for LibrarySpec {
    fn default() -> Self {
        Self {
            m: 10_000,
            zipf_s: 0.8,
            duration_s: 3600.0,
            ladder_mbps: DEFAULT_LADDER_MBPS.to_vec(),
            videos: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSpec {
    pub n_sbs: u32,
    pub cache_bytes: f64,
    pub sbs_snr_db: f64,
    pub sbs_bandwidth_hz: f64,
    pub mbs_snr_db: f64,
    pub mbs_bandwidth_hz: f64,
}

impl Default for ClusterSpec {
    fn default() -> Self {
        Self {
            n_sbs: 3,
            cache_bytes: 2.0e12,
            sbs_snr_db: 10.0,
            sbs_bandwidth_hz: 5.0e6,
            mbs_snr_db: 3.0,
            mbs_bandwidth_hz: 2.0e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QoeSpec {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for QoeSpec {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub quantum_mult: u32,
    pub early_stop: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            quantum_mult: 1,
            early_stop: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    pub trials: u64,
    pub seed: u64,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Validated domain objects built from a configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub library: Library,
    pub ladder: OpLadder,
    pub cluster: ClusterConfig,
    pub model: QoeModel,
    pub cost: CostModel,
    pub table: QoeTable,
    pub solver: SolverOptions,
    pub sim: SimSpec,
}

impl Experiment {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let lib = &cfg.library;
        let ladder = OpLadder::from_mbps(&lib.ladder_mbps)?;
        let library = match &lib.videos {
            Some(videos) => {
                let checked = Library::new(videos.clone())?;
                let entries: Vec<(f64, f64)> = checked
                    .videos()
                    .iter()
                    .map(|v| (v.popularity, v.duration_s))
                    .collect();
                Library::split_by_duration(&entries, lib.duration_s)?
            }
            None => Library::zipf(lib.m, lib.zipf_s, lib.duration_s)?,
        };
        let c = &cfg.cluster;
        if !(c.cache_bytes.is_finite() && c.cache_bytes >= 0.0) {
            return Err(Error::invalid("cache_bytes", format!("must be nonnegative, got {}", c.cache_bytes)));
        }
        if c.cache_bytes > u64::MAX as f64 {
            return Err(Error::invalid("cache_bytes", "too large"));
        }
        let cluster = ClusterConfig::new(
            c.n_sbs,
            c.cache_bytes.round() as u64,
            ChannelParams::new(c.sbs_snr_db, c.sbs_bandwidth_hz)?,
            ChannelParams::new(c.mbs_snr_db, c.mbs_bandwidth_hz)?,
        )?;
        let model = QoeModel::new(cfg.qoe.alpha, cfg.qoe.beta)?;
        let cost = CostModel::new(&ladder, lib.duration_s, cfg.solver.quantum_mult)?;
        let table = QoeTable::build(cluster.n_sbs, &ladder, &cluster.sbs_channel, &cluster.mbs_channel, &model)?;
        Ok(Self {
            library,
            ladder,
            cluster,
            model,
            cost,
            table,
            solver: SolverOptions {
                early_stop: cfg.solver.early_stop,
                checkpoint_interval: None,
            },
            sim: cfg.sim.clone(),
        })
    }

    pub fn capacity_units(&self) -> u64 {
        self.cost.cluster_capacity_units(&self.cluster)
    }
}
