//! SINR, Shannon throughput and the elastic reward.

use rand::Rng;

use crate::alloc::{AllocationMatrix, Gains, PowerMatrix};
use crate::config::ValidatedConfig;
use crate::primary_user::AvailabilityVector;
use crate::rng::{Module, RngStream};

/// Per-user rate thresholds, fixed for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct UserRequirements {
    pub rate_threshold_bps: Vec<f64>,
}

impl UserRequirements {
    /// Uniform draw over the configured threshold range.
    pub fn draw(config: &ValidatedConfig, rng: &RngStream) -> Self {
        let (lo, hi) = config.rate_threshold_range_bps;
        let mut r = rng.rng_for(Module::Thresholds, 0, 0);
        UserRequirements {
            rate_threshold_bps: (0..config.n_users)
                .map(|_| lo + (hi - lo) * r.random::<f64>())
                .collect(),
        }
    }
}

/// Interference seen by `user`'s receiver on `band` from every other active
/// transmitter.
pub fn interference(
    user: usize,
    band: usize,
    alloc: &AllocationMatrix,
    power: &PowerMatrix,
    gains: &Gains,
) -> f64 {
    (0..alloc.n_users())
        .filter(|&k| k != user && alloc.get(k, band))
        .map(|k| power.get(k, band) * gains.get(user, k, band))
        .sum()
}

/// Received SINR of `user` on `band`.
pub fn sinr(
    user: usize,
    band: usize,
    alloc: &AllocationMatrix,
    power: &PowerMatrix,
    gains: &Gains,
    noise_band_w: f64,
) -> f64 {
    let signal = power.get(user, band) * gains.get(user, user, band);
    signal / (interference(user, band, alloc, power, gains) + noise_band_w)
}

/// `B log2(1 + sinr)`.
#[inline]
pub fn shannon_rate(bandwidth_hz: f64, sinr: f64) -> f64 {
    bandwidth_hz * sinr.ln_1p() / std::f64::consts::LN_2
}

/// Sum over the bands `user` selected that are currently available.
pub fn throughput(
    user: usize,
    alloc: &AllocationMatrix,
    power: &PowerMatrix,
    gains: &Gains,
    availability: &AvailabilityVector,
    bandwidth_hz: f64,
    noise_band_w: f64,
) -> f64 {
    (0..alloc.n_bands())
        .filter(|&j| alloc.get(user, j) && availability.is_available(j))
        .map(|j| shannon_rate(bandwidth_hz, sinr(user, j, alloc, power, gains, noise_band_w)))
        .sum()
}

/// Rate mapped through an exponential penalty below the threshold. Zero rate
/// maps to zero reward.
pub fn elastic_reward(rate: f64, threshold: f64, beta: f64) -> f64 {
    if rate > threshold {
        rate
    } else if rate <= 0.0 {
        0.0
    } else {
        rate * (-beta * (threshold - rate) / rate).exp()
    }
}

/// Rates of every user at once. Only available, selected bands count and
/// busy bands carry no interference.
pub fn all_rates(
    alloc: &AllocationMatrix,
    power: &PowerMatrix,
    gains: &Gains,
    availability: &AvailabilityVector,
    bandwidth_hz: f64,
    noise_band_w: f64,
) -> Vec<f64> {
    let n = alloc.n_users();
    let m = alloc.n_bands();
    let mut on_band: Vec<Vec<usize>> = vec![Vec::new(); m];
    for i in 0..n {
        for (j, users) in on_band.iter_mut().enumerate() {
            if alloc.get(i, j) && availability.is_available(j) {
                users.push(i);
            }
        }
    }
    let mut rates = vec![0.0; n];
    for (j, users) in on_band.iter().enumerate() {
        for &i in users {
            let interf: f64 = users
                .iter()
                .filter(|&&k| k != i)
                .map(|&k| power.get(k, j) * gains.get(i, k, j))
                .sum();
            let s = power.get(i, j) * gains.get(i, i, j) / (interf + noise_band_w);
            rates[i] += shannon_rate(bandwidth_hz, s);
        }
    }
    rates
}
