//! Rayleigh-fading channel statistics.
//!
//! The received SNR on each link is exponentially distributed with mean
//! `ρ̄`. A user served from `n` candidate base stations picks the best of
//! them, so the effective SNR is the maximum of `n` i.i.d. exponentials with
//! CDF `(1 - exp(-x/ρ̄))^n`. A rate `R` is decodable when `W·log2(1 + x) ≥ R`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Average SNR and per-user bandwidth of one transmitter class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    avg_snr_db: f64,
    bandwidth_hz: f64,
}

impl ChannelParams {
    pub fn new(avg_snr_db: f64, bandwidth_hz: f64) -> Result<Self> {
        if !avg_snr_db.is_finite() {
            return Err(Error::invalid("avg_snr_db", "must be finite"));
        }
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(Error::invalid(
                "bandwidth_hz",
                format!("must be positive, got {bandwidth_hz}"),
            ));
        }
        Ok(Self {
            avg_snr_db,
            bandwidth_hz,
        })
    }

    pub fn avg_snr_db(&self) -> f64 {
        self.avg_snr_db
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    /// Mean SNR as a linear power ratio.
    pub fn mean_snr(&self) -> f64 {
        db_to_linear(self.avg_snr_db)
    }
}

pub fn db_to_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

fn check_diversity(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n", "diversity must be at least 1"));
    }
    Ok(())
}

/// `1 - exp(-y)` without cancellation for small `y`.
fn one_minus_exp_neg(y: f64) -> f64 {
    -(-y).exp_m1()
}

/// CDF of the best SNR among `n` i.i.d. Rayleigh links.
pub fn snr_cdf_max(x: f64, n: u32, params: &ChannelParams) -> Result<f64> {
    check_diversity(n)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::invalid("x", format!("SNR must be nonnegative, got {x}")));
    }
    let single = one_minus_exp_neg(x / params.mean_snr());
    Ok(single.powi(n as i32))
}

/// Linear SNR needed to carry `rate_bps` over the channel bandwidth.
pub fn snr_threshold(rate_bps: f64, params: &ChannelParams) -> f64 {
    (rate_bps / params.bandwidth_hz * std::f64::consts::LN_2).exp_m1()
}

/// Probability that the best of `n` links cannot carry `rate_bps`.
pub fn outage_probability(n: u32, rate_bps: f64, params: &ChannelParams) -> Result<f64> {
    check_diversity(n)?;
    if rate_bps.is_nan() || rate_bps < 0.0 {
        return Err(Error::invalid(
            "rate_bps",
            format!("rate must be nonnegative, got {rate_bps}"),
        ));
    }
    let single = one_minus_exp_neg(snr_threshold(rate_bps, params) / params.mean_snr());
    Ok(single.powi(n as i32))
}

/// Draws the best SNR among `n` independent Rayleigh links.
pub fn sample_max_snr<R: Rng + ?Sized>(n: u32, params: &ChannelParams, rng: &mut R) -> Result<f64> {
    check_diversity(n)?;
    Ok(sample_max_snr_unchecked(n, params.mean_snr(), rng))
}

pub(crate) fn sample_max_snr_unchecked<R: Rng + ?Sized>(n: u32, mean_snr: f64, rng: &mut R) -> f64 {
    let mut best = 0.0f64;
    for _ in 0..n {
        let draw: f64 = Exp1.sample(rng);
        best = best.max(draw);
    }
    best * mean_snr
}

/// Shannon capacity `W·log2(1 + x)` in bits per second.
pub fn shannon_rate(x: f64, params: &ChannelParams) -> f64 {
    params.bandwidth_hz * x.ln_1p() / std::f64::consts::LN_2
}
