//! SVC rate-quality model and expected QoE under fading.

use serde::{Deserialize, Serialize};

use crate::catalog::OpLadder;
use crate::channel::{outage_probability, ChannelParams};
use crate::error::{Error, Result};
use crate::placement::CachingState;

pub const DEFAULT_ALPHA: f64 = 0.16;
pub const DEFAULT_BETA: f64 = 0.66;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoeModel {
    alpha: f64,
    beta: f64,
}

impl Default for QoeModel {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
        }
    }
}

impl QoeModel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Normalised quality `exp(α - α·(r/r_max)^-β)`, equal to 1 at full rate.
pub fn normalized_quality(r: f64, r_max: f64, model: &QoeModel) -> Result<f64> {
    if !(r > 0.0 && r <= r_max) {
        return Err(Error::invalid(
            "r",
            format!("rate {r} outside (0, {r_max}]"),
        ));
    }
    let ratio = r / r_max;
    Ok((model.alpha - model.alpha * ratio.powf(-model.beta)).exp())
}

/// Mean opinion score on the 1..5 scale.
pub fn mos(r: f64, r_max: f64, model: &QoeModel) -> Result<f64> {
    Ok(1.0 + 4.0 * normalized_quality(r, r_max, model)?)
}

/// MOS of every operation point, normalised to the ladder's top rate.
pub fn ladder_mos(ladder: &OpLadder, model: &QoeModel) -> Vec<f64> {
    let top = ladder.top_rate_bps() as f64;
    ladder
        .rates_bps()
        .iter()
        .map(|&r| mos(r as f64, top, model).expect("ladder rates are within (0, top]"))
        .collect()
}

/// How the playback of one request is distributed over operation points.
#[derive(Debug, Clone, PartialEq)]
pub struct DeliveryDistribution {
    /// `per_op[l]` is the probability that OP `l` is the highest decodable one.
    pub per_op: Vec<f64>,
    /// Probability that not even the lowest OP is decodable.
    pub stall: f64,
}

impl DeliveryDistribution {
    pub fn total_mass(&self) -> f64 {
        self.per_op.iter().sum::<f64>() + self.stall
    }
}

/// Outcome probabilities for a video cached (or served) up to `cap_rate_bps`
/// from the best of `n` links.
pub fn delivery_distribution(
    n: u32,
    cap_rate_bps: u64,
    ladder: &OpLadder,
    channel: &ChannelParams,
) -> Result<DeliveryDistribution> {
    let top = ladder.index_of(cap_rate_bps)?;
    let outage = ladder.rates_bps()[..=top]
        .iter()
        .map(|&r| outage_probability(n, r as f64, channel))
        .collect::<Result<Vec<f64>>>()?;
    // rates in [R^l, R^(l+1)) play OP l, anything at or above the cap plays the cap
    let mut per_op: Vec<f64> = outage.windows(2).map(|w| w[1] - w[0]).collect();
    per_op.push(1.0 - outage[top]);
    Ok(DeliveryDistribution {
        per_op,
        stall: outage[0],
    })
}

/// Expected MOS of a video in caching state `state`, delivered over SBS links.
/// Stalls score zero.
pub fn expected_qoe(
    state: CachingState,
    ladder: &OpLadder,
    sbs: &ChannelParams,
    model: &QoeModel,
) -> Result<f64> {
    let dist = delivery_distribution(state.n, state.rate_bps, ladder, sbs)?;
    let scores = ladder_mos(ladder, model);
    Ok(expectation(&dist, &scores))
}

fn expectation(dist: &DeliveryDistribution, scores: &[f64]) -> f64 {
    // highest OP first, matching the order of terms in the closed form
    let top = dist.per_op.len() - 1;
    let mut total = dist.per_op[top] * scores[top];
    for (p, s) in dist.per_op[..top].iter().zip(scores) {
        total += p * s;
    }
    total
}

/// Expected MOS of a video streamed at full ladder from the macro cell.
pub fn mbs_qoe(ladder: &OpLadder, mbs: &ChannelParams, model: &QoeModel) -> f64 {
    let state = CachingState {
        n: 1,
        rate_bps: ladder.top_rate_bps(),
    };
    expected_qoe(state, ladder, mbs, model).expect("top rate is on the ladder")
}

/// Expected QoE for every `(n, r)` with `n ≤ n_max`, evaluated once.
#[derive(Debug, Clone)]
pub struct QoeTable {
    n_max: u32,
    ladder: OpLadder,
    values: Vec<f64>,
    mbs: f64,
}

impl QoeTable {
    pub fn build(
        n_max: u32,
        ladder: &OpLadder,
        sbs: &ChannelParams,
        mbs: &ChannelParams,
        model: &QoeModel,
    ) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::invalid("n_max", "must be at least 1"));
        }
        let mut values = Vec::with_capacity(n_max as usize * ladder.len());
        for n in 1..=n_max {
            for &rate_bps in ladder.rates_bps() {
                values.push(expected_qoe(CachingState { n, rate_bps }, ladder, sbs, model)?);
            }
        }
        Ok(Self {
            n_max,
            ladder: ladder.clone(),
            values,
            mbs: mbs_qoe(ladder, mbs, model),
        })
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn ladder(&self) -> &OpLadder {
        &self.ladder
    }

    pub fn mbs_qoe(&self) -> f64 {
        self.mbs
    }

    pub fn get(&self, state: CachingState) -> Result<f64> {
        if state.n == 0 || state.n > self.n_max {
            return Err(Error::invalid("n", format!("diversity {} outside 1..={}", state.n, self.n_max)));
        }
        let idx = self.ladder.index_of(state.rate_bps)?;
        Ok(self.values[(state.n as usize - 1) * self.ladder.len() + idx])
    }
}
