//! Request-level Monte Carlo simulator.
//!
//! Each request draws a video by popularity and one quasi-static channel
//! realization. Cached videos are streamed from the best of their `n` SBSs
//! up to the cached rate; all others come from the macro cell up to the top
//! of the ladder. The delivered operation point is the highest one whose
//! rate the channel supports; below the lowest one playback stalls and
//! scores zero.
//!
//! Trials are grouped in fixed batches. Batch `b` draws from the ChaCha8
//! stream `b` of the run seed, so reports depend only on `(seed, trials)`
//! and not on how batches are scheduled across threads.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{ClusterConfig, Library, OpLadder};
use crate::channel::{outage_probability, sample_max_snr_unchecked, shannon_rate, ChannelParams};
use crate::error::{Error, Result};
use crate::placement::PlacementSolution;
use crate::qoe::{ladder_mos, QoeModel};

const BATCH: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestOutcome {
    pub video: usize,
    pub mos: f64,
    pub hit: bool,
    pub stalled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub trials: u64,
    pub seed: u64,
    /// Also record the mean MOS of each video.
    pub per_rank: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub trials: u64,
    pub seed: u64,
    pub avg_qoe: f64,
    pub avg_qoe_se: f64,
    pub hit_ratio: f64,
    pub hit_ratio_se: f64,
    pub stall_prob: f64,
    pub stall_prob_se: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_rank_qoe: Option<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, Copy)]
struct Route {
    n: u32,
    cap: usize,
    cached: bool,
}

/// Precomputed view of one placement, ready to draw requests.
#[derive(Debug, Clone)]
pub struct Simulator {
    chooser: WeightedIndex<f64>,
    routes: Vec<Route>,
    rates: Vec<f64>,
    scores: Vec<f64>,
    sbs: ChannelParams,
    mbs: ChannelParams,
}

impl Simulator {
    pub fn new(
        solution: &PlacementSolution,
        library: &Library,
        ladder: &OpLadder,
        cfg: &ClusterConfig,
        model: &QoeModel,
    ) -> Result<Self> {
        if solution.assignments.len() != library.len() {
            return Err(Error::invalid(
                "solution",
                format!("{} assignments for {} videos", solution.assignments.len(), library.len()),
            ));
        }
        let chooser = WeightedIndex::new(library.popularities())
            .map_err(|e| Error::invalid("popularity", e.to_string()))?;
        let top = ladder.len() - 1;
        let routes = solution
            .assignments
            .iter()
            .map(|a| match a {
                Some(o) => {
                    if o.state.n == 0 {
                        return Err(Error::invalid("n", "cached video with zero copies"));
                    }
                    Ok(Route {
                        n: o.state.n,
                        cap: ladder.index_of(o.state.rate_bps)?,
                        cached: true,
                    })
                }
                None => Ok(Route {
                    n: 1,
                    cap: top,
                    cached: false,
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            chooser,
            routes,
            rates: ladder.rates_bps().iter().map(|&r| r as f64).collect(),
            scores: ladder_mos(ladder, model),
            sbs: cfg.sbs_channel,
            mbs: cfg.mbs_channel,
        })
    }

    pub fn simulate_request<R: Rng + ?Sized>(&self, rng: &mut R) -> RequestOutcome {
        let video = self.chooser.sample(rng);
        let route = self.routes[video];
        let channel = if route.cached { &self.sbs } else { &self.mbs };
        let snr = sample_max_snr_unchecked(route.n, channel.mean_snr(), rng);
        let rate = shannon_rate(snr, channel);
        let delivered = (0..=route.cap).rev().find(|&l| rate >= self.rates[l]);
        RequestOutcome {
            video: video + 1,
            mos: delivered.map_or(0.0, |l| self.scores[l]),
            hit: route.cached,
            stalled: delivered.is_none(),
        }
    }

    pub fn estimate(&self, opts: &SimOptions) -> Result<SimReport> {
        if opts.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        let videos = self.routes.len();
        let batches = opts.trials.div_ceil(BATCH);
        let stats: Vec<BatchStats> = (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(b);
                let count = BATCH.min(opts.trials - b * BATCH);
                let mut s = BatchStats::new(opts.per_rank.then_some(videos));
                for _ in 0..count {
                    s.record(&self.simulate_request(&mut rng));
                }
                s
            })
            .collect();
        let total = reduce(stats);
        let n = total.count as f64;
        let bernoulli_se = |k: u64| {
            let p = k as f64 / n;
            if total.count > 1 {
                (p * (1.0 - p) / (n - 1.0)).sqrt()
            } else {
                0.0
            }
        };
        let mos_se = if total.count > 1 {
            (total.m2 / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Ok(SimReport {
            trials: total.count,
            seed: opts.seed,
            avg_qoe: total.mean,
            avg_qoe_se: mos_se,
            hit_ratio: total.hits as f64 / n,
            hit_ratio_se: bernoulli_se(total.hits),
            stall_prob: total.stalls as f64 / n,
            stall_prob_se: bernoulli_se(total.stalls),
            per_rank_qoe: total.per_rank.map(|sums| {
                sums.into_iter()
                    .map(|(sum, k)| (k > 0).then(|| sum / k as f64))
                    .collect()
            }),
        })
    }
}

#[derive(Debug, Clone)]
struct BatchStats {
    count: u64,
    mean: f64,
    m2: f64,
    hits: u64,
    stalls: u64,
    per_rank: Option<Vec<(f64, u64)>>,
}

impl BatchStats {
    fn new(videos: Option<usize>) -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            hits: 0,
            stalls: 0,
            per_rank: videos.map(|m| vec![(0.0, 0); m]),
        }
    }

    fn record(&mut self, o: &RequestOutcome) {
        self.count += 1;
        let delta = o.mos - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (o.mos - self.mean);
        self.hits += o.hit as u64;
        self.stalls += o.stalled as u64;
        if let Some(per_rank) = &mut self.per_rank {
            let slot = &mut per_rank[o.video - 1];
            slot.0 += o.mos;
            slot.1 += 1;
        }
    }

    fn merge(a: Self, b: Self) -> Self {
        let count = a.count + b.count;
        if count == 0 {
            return a;
        }
        let (na, nb, n) = (a.count as f64, b.count as f64, count as f64);
        let delta = b.mean - a.mean;
        let per_rank = match (a.per_rank, b.per_rank) {
            (Some(x), Some(y)) => Some(x.into_iter().zip(y).map(|(p, q)| (p.0 + q.0, p.1 + q.1)).collect()),
            (x, y) => x.or(y),
        };
        Self {
            count,
            mean: a.mean + delta * nb / n,
            m2: a.m2 + b.m2 + delta * delta * na * nb / n,
            hits: a.hits + b.hits,
            stalls: a.stalls + b.stalls,
            per_rank,
        }
    }
}

/// Pairwise reduction in index order.
fn reduce(mut stats: Vec<BatchStats>) -> BatchStats {
    while stats.len() > 1 {
        let mut next = Vec::with_capacity(stats.len().div_ceil(2));
        let mut it = stats.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => BatchStats::merge(a, b),
                None => a,
            });
        }
        stats = next;
    }
    stats.pop().expect("at least one batch")
}

/// Simulates one request against `solution`.
pub fn simulate_request<R: Rng + ?Sized>(
    solution: &PlacementSolution,
    library: &Library,
    ladder: &OpLadder,
    cfg: &ClusterConfig,
    model: &QoeModel,
    rng: &mut R,
) -> Result<RequestOutcome> {
    Ok(Simulator::new(solution, library, ladder, cfg, model)?.simulate_request(rng))
}

pub fn estimate(
    solution: &PlacementSolution,
    library: &Library,
    ladder: &OpLadder,
    cfg: &ClusterConfig,
    model: &QoeModel,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    Simulator::new(solution, library, ladder, cfg, model)?.estimate(&SimOptions {
        trials,
        seed,
        per_rank: false,
    })
}

/// Popularity mass of the cached videos.
pub fn hit_ratio_analytic(solution: &PlacementSolution, library: &Library) -> f64 {
    library
        .popularities()
        .zip(&solution.assignments)
        .filter(|(_, a)| a.is_some())
        .map(|(p, _)| p)
        .sum()
}

/// Probability that a request cannot decode even the lowest operation point.
pub fn stall_probability_analytic(
    solution: &PlacementSolution,
    library: &Library,
    ladder: &OpLadder,
    cfg: &ClusterConfig,
) -> Result<f64> {
    let base = ladder.base_rate_bps() as f64;
    let mbs_stall = outage_probability(1, base, &cfg.mbs_channel)?;
    let mut total = 0.0;
    for (p, a) in library.popularities().zip(&solution.assignments) {
        total += p * match a {
            Some(o) => outage_probability(o.state.n, base, &cfg.sbs_channel)?,
            None => mbs_stall,
        };
    }
    Ok(total)
}
