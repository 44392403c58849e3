//! Per-agent particle filter over candidate band selections.
//!
//! Each particle is one candidate row of the allocation matrix for the owning
//! agent; the other agents' rows come from their last broadcast (see
//! [`NeighborView`]). A slot runs [`predict`] (mutation kernel), [`decide`]
//! (pick the best-scoring particle), then, once the realized reward is known,
//! [`update_weights`] and, if the effective sample size has collapsed,
//! [`systematic_resample`].

mod decide;

use rand::seq::index::sample;
use rand::Rng;

pub use decide::{decide, Decision, DecisionContext, NeighborView};

/// Smoothing factor of the running mean reward that scales the likelihood.
pub const REWARD_EMA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    /// Selected bands, ascending. Empty when nothing is available.
    pub selection: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
    /// Exponentially smoothed observed reward; `None` before the first observation.
    pub running_reward_mean: Option<f64>,
}

impl ParticleSet {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    /// True when no particle selects any band.
    pub fn is_idle(&self) -> bool {
        self.particles.iter().all(|p| p.selection.is_empty())
    }

    /// Folds a new observation into the running mean and returns the
    /// likelihood width `sigma_frac * mean`.
    pub fn observe_reward(&mut self, reward: f64, sigma_frac: f64) -> f64 {
        let mean = match self.running_reward_mean {
            None => reward,
            Some(m) => (1.0 - REWARD_EMA) * m + REWARD_EMA * reward,
        };
        self.running_reward_mean = Some(mean);
        sigma_frac * mean
    }
}

fn random_subset(available: &[usize], k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut s: Vec<usize> = sample(rng, available.len(), k)
        .into_iter()
        .map(|idx| available[idx])
        .collect();
    s.sort_unstable();
    s
}

/// `n_particles` uniform `min(ell, |available|)`-subsets of the available
/// bands with equal weights.
pub fn init_particles(n_particles: usize, ell: usize, available: &[usize], rng: &mut impl Rng) -> ParticleSet {
    let k = ell.min(available.len());
    let w = 1.0 / n_particles as f64;
    ParticleSet {
        particles: (0..n_particles)
            .map(|_| Particle {
                selection: random_subset(available, k, rng),
                weight: w,
            })
            .collect(),
        running_reward_mean: None,
    }
}

/// Transition kernel: every band is kept with probability `1 - mutation_prob`
/// if still available; the free slots are refilled uniformly from the
/// available bands not already kept. Weights carry over unchanged.
pub fn predict(set: &mut ParticleSet, ell: usize, available: &[usize], mutation_prob: f64, rng: &mut impl Rng) {
    let target = ell.min(available.len());
    let mut is_avail = vec![false; available.iter().copied().max().map_or(0, |b| b + 1)];
    for &b in available {
        is_avail[b] = true;
    }
    for particle in &mut set.particles {
        let mut kept: Vec<usize> = Vec::with_capacity(target);
        for &b in &particle.selection {
            let alive = b < is_avail.len() && is_avail[b];
            // draw for every band so the stream layout doesn't depend on availability
            let mutate = rng.random::<f64>() < mutation_prob;
            if alive && !mutate && kept.len() < target {
                kept.push(b);
            }
        }
        if kept.len() < target {
            let pool: Vec<usize> = available.iter().copied().filter(|b| !kept.contains(b)).collect();
            kept.extend(random_subset(&pool, target - kept.len(), rng));
        }
        kept.sort_unstable();
        particle.selection = kept;
    }
}

/// Gaussian kernel on the reward residual.
#[inline]
pub fn likelihood(observed: f64, predicted: f64, sigma: f64) -> f64 {
    let r = (observed - predicted) / sigma;
    (-0.5 * r * r).exp()
}

/// `w_k <- w_k * f(observed | particle k)`, then normalize. If every weight
/// underflows the set falls back to uniform weights.
pub fn update_weights(set: &mut ParticleSet, observed: f64, predicted: &[f64], sigma: f64) {
    assert_eq!(predicted.len(), set.len(), "one prediction per particle");
    assert!(sigma > 0.0, "likelihood width must be positive");
    for (p, &pred) in set.particles.iter_mut().zip(predicted) {
        p.weight *= likelihood(observed, pred, sigma);
    }
    normalize(set);
}

/// Rescales weights to sum to one; resets to uniform when the sum is zero.
pub fn normalize(set: &mut ParticleSet) {
    let total: f64 = set.particles.iter().map(|p| p.weight).sum();
    if total > 0.0 && total.is_finite() {
        for p in &mut set.particles {
            p.weight /= total;
        }
    } else {
        let w = 1.0 / set.len() as f64;
        for p in &mut set.particles {
            p.weight = w;
        }
    }
}

/// `1 / sum w^2`.
pub fn effective_sample_size(set: &ParticleSet) -> f64 {
    ess_of(&set.weights())
}

pub fn ess_of(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// Offspring counts of systematic resampling: one uniform offset, stride `1/n`.
pub fn systematic_counts(weights: &[f64], u: f64) -> Vec<usize> {
    let n = weights.len();
    let step = 1.0 / n as f64;
    let mut counts = vec![0usize; n];
    let mut cumulative = weights[0];
    let mut k = 0;
    for draw in 0..n {
        let pointer = (u + draw as f64) * step;
        while pointer >= cumulative && k < n - 1 {
            k += 1;
            cumulative += weights[k];
        }
        counts[k] += 1;
    }
    counts
}

/// Replaces the set with `N_s` systematic offspring at weight `1/N_s`.
pub fn systematic_resample(set: &mut ParticleSet, rng: &mut impl Rng) {
    let n = set.len();
    if n == 0 {
        return;
    }
    let counts = systematic_counts(&set.weights(), rng.random::<f64>());
    let w = 1.0 / n as f64;
    let mut next = Vec::with_capacity(n);
    for (parent, &c) in set.particles.iter().zip(&counts) {
        for _ in 0..c {
            next.push(Particle {
                selection: parent.selection.clone(),
                weight: w,
            });
        }
    }
    set.particles = next;
}

/// Resamples when ESS has dropped below `threshold_frac * N_s`. Returns
/// whether it did.
pub fn maybe_resample(set: &mut ParticleSet, threshold_frac: f64, rng: &mut impl Rng) -> bool {
    if effective_sample_size(set) < threshold_frac * set.len() as f64 {
        systematic_resample(set, rng);
        true
    } else {
        false
    }
}
