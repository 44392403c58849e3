//! Slot-synchronous simulation loop and run-level metrics.

use rayon::prelude::*;

use crate::alloc::{AllocationMatrix, Gains, PowerMatrix};
use crate::channel::{init_channels, predict_channels, step_channels, ChannelTensor};
use crate::config::{SystemConfig, ValidatedConfig};
use crate::phy::{all_rates, elastic_reward, UserRequirements};
use crate::pfilter::{
    decide, init_particles, maybe_resample, predict, update_weights, Decision, DecisionContext, NeighborView,
    ParticleSet,
};
use crate::primary_user::{occupancy, sample_availability, AvailabilityVector};
use crate::rng::{Module, RngStream};

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: usize,
    pub realized_rates: Vec<f64>,
    pub realized_rewards: Vec<f64>,
    pub jain: f64,
    /// Fraction of bands held by primary users.
    pub occupancy: f64,
    /// Broadcast messages sent this slot.
    pub messages: u64,
    pub selections: Vec<Vec<usize>>,
    /// Watts per selected band, aligned with `selections`.
    pub powers: Vec<Vec<f64>>,
}

impl SlotRecord {
    pub fn mean_rate(&self) -> f64 {
        mean(&self.realized_rates)
    }

    pub fn min_rate(&self) -> f64 {
        self.realized_rates.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_rate(&self) -> f64 {
        self.realized_rates.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub config: SystemConfig,
    /// Rate averaged over slots, then over users.
    pub per_user_avg_throughput: f64,
    pub avg_jain: f64,
    pub total_messages: u64,
    pub n_slots: usize,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// `(sum r)^2 / (N sum r^2)`; an all-zero (or empty) vector counts as perfectly fair.
pub fn jain_index(rewards: &[f64]) -> f64 {
    let sum: f64 = rewards.iter().sum();
    let sq: f64 = rewards.iter().map(|r| r * r).sum();
    if sq == 0.0 {
        1.0
    } else {
        sum * sum / (rewards.len() as f64 * sq)
    }
}

/// One agent's planning phase: advance its particles and pick a selection.
/// It sees only its own particle set and the shared snapshot.
pub fn agent_plan(
    agent: usize,
    set: &mut Option<ParticleSet>,
    view: &NeighborView,
    ctx: &DecisionContext,
    config: &ValidatedConfig,
    stream: &RngStream,
    slot: usize,
) -> Decision {
    let available = view.availability.available_bands();
    let ell = config.max_bands_per_user;
    match set {
        None => {
            let mut rng = stream.rng_for(Module::ParticleInit, agent, slot);
            *set = Some(init_particles(config.n_particles, ell, &available, &mut rng));
        }
        Some(s) => {
            let mut rng = stream.rng_for(Module::ParticlePredict, agent, slot);
            predict(s, ell, &available, config.mutation_prob, &mut rng);
        }
    }
    decide(set.as_ref().expect("initialized above"), view, agent, ctx)
}

/// Weight update with the realized reward, then resampling if degenerate.
pub fn agent_learn(
    agent: usize,
    set: &mut ParticleSet,
    decision: &Decision,
    reward: f64,
    config: &ValidatedConfig,
    stream: &RngStream,
    slot: usize,
) {
    if decision.chosen.is_none() {
        return;
    }
    let sigma = set.observe_reward(reward, config.likelihood_sigma_frac);
    if sigma > 0.0 {
        update_weights(set, reward, &decision.self_rewards, sigma);
    }
    let mut rng = stream.rng_for(Module::Resample, agent, slot);
    maybe_resample(set, config.ess_threshold_frac, &mut rng);
}

/// Simulator state between slots.
#[derive(Debug, Clone)]
pub struct Engine {
    config: ValidatedConfig,
    stream: RngStream,
    channels: ChannelTensor,
    ctx: DecisionContext,
    particles: Vec<Option<ParticleSet>>,
    alloc: AllocationMatrix,
    power: PowerMatrix,
    rewards: Vec<f64>,
    availability: AvailabilityVector,
    slot: usize,
    messages: u64,
}

impl Engine {
    pub fn new(config: ValidatedConfig) -> Self {
        let stream = RngStream::from_seed(config.seed);
        let channels = init_channels(&config, &stream);
        let thresholds = UserRequirements::draw(&config, &stream).rate_threshold_bps;
        let ctx = DecisionContext::from_config(&config, thresholds);
        let n = config.n_users;
        let m = config.n_bands;
        Engine {
            stream,
            channels,
            ctx,
            particles: vec![None; n],
            alloc: AllocationMatrix::empty(n, m),
            power: PowerMatrix::zeros(n, m),
            rewards: vec![0.0; n],
            availability: AvailabilityVector::all_available(m),
            slot: 0,
            messages: 0,
            config,
        }
    }

    /// Replaces the channel, e.g. with a hand-built frozen snapshot.
    pub fn with_channels(mut self, channels: ChannelTensor) -> Self {
        assert_eq!(channels.n_users(), self.config.n_users);
        assert_eq!(channels.n_bands(), self.config.n_bands);
        self.channels = channels;
        self
    }

    pub fn config(&self) -> &ValidatedConfig {
        &self.config
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.ctx.thresholds
    }

    /// Power gains of the true channel in the last simulated slot.
    pub fn true_gains(&self) -> Gains {
        self.channels.power_gains()
    }

    pub fn availability(&self) -> &AvailabilityVector {
        &self.availability
    }

    pub fn allocation(&self) -> &AllocationMatrix {
        &self.alloc
    }

    pub fn power(&self) -> &PowerMatrix {
        &self.power
    }

    pub fn particles(&self, agent: usize) -> Option<&ParticleSet> {
        self.particles[agent].as_ref()
    }

    pub fn particles_mut(&mut self, agent: usize) -> Option<&mut ParticleSet> {
        self.particles[agent].as_mut()
    }

    pub fn decision_context(&self) -> &DecisionContext {
        &self.ctx
    }

    pub fn stream(&self) -> &RngStream {
        &self.stream
    }

    /// Snapshot of the last broadcast plus the predicted gains for the next slot.
    pub fn neighbor_view(&self, availability: AvailabilityVector) -> NeighborView {
        NeighborView::new(
            self.alloc.clone(),
            self.power.clone(),
            self.rewards.clone(),
            predict_channels(&self.channels, &self.config.ar),
            availability,
            &self.ctx,
        )
    }

    /// Simulates one slot.
    pub fn step(&mut self) -> SlotRecord {
        let t = self.slot;
        let n = self.config.n_users;
        let m = self.config.n_bands;

        let availability = sample_availability(
            self.config.pu_busy_prob,
            m,
            &mut self.stream.rng_for(Module::PrimaryUser, 0, t),
        );
        let view = self.neighbor_view(availability.clone());

        let (config, ctx, stream) = (&self.config, &self.ctx, &self.stream);
        let decisions: Vec<Decision> = self
            .particles
            .par_iter_mut()
            .enumerate()
            .map(|(i, set)| agent_plan(i, set, &view, ctx, config, stream, t))
            .collect();
        drop(view);

        let mut alloc = AllocationMatrix::empty(n, m);
        let mut power = PowerMatrix::zeros(n, m);
        for (i, d) in decisions.iter().enumerate() {
            alloc.set_row(i, &d.selection);
            power.set_row(i, &d.selection, &d.powers);
        }

        step_channels(
            &mut self.channels,
            &self.config.ar,
            &mut self.stream.rng_for(Module::ChannelStep, 0, t),
        );
        let gains = self.channels.power_gains();
        let rates = all_rates(
            &alloc,
            &power,
            &gains,
            &availability,
            self.config.bandwidth_hz,
            self.config.noise_band_w,
        );
        let rewards: Vec<f64> = rates
            .iter()
            .zip(&self.ctx.thresholds)
            .map(|(&r, &th)| elastic_reward(r, th, self.config.beta))
            .collect();

        self.particles
            .par_iter_mut()
            .zip(decisions.par_iter())
            .enumerate()
            .for_each(|(i, (set, d))| {
                if let Some(set) = set {
                    agent_learn(i, set, d, rewards[i], config, stream, t);
                }
            });

        let messages = (n as u64) * (n as u64 - 1);
        self.messages += messages;
        let record = SlotRecord {
            slot: t,
            jain: jain_index(&rewards),
            occupancy: occupancy(&availability),
            messages,
            selections: decisions.iter().map(|d| d.selection.clone()).collect(),
            powers: decisions.into_iter().map(|d| d.powers).collect(),
            realized_rates: rates,
            realized_rewards: rewards.clone(),
        };
        self.alloc = alloc;
        self.power = power;
        self.rewards = rewards;
        self.availability = availability;
        self.slot += 1;
        record
    }

    pub fn total_messages(&self) -> u64 {
        self.messages
    }
}

/// Averages a finished run's records.
pub fn summarize(config: &ValidatedConfig, records: &[SlotRecord]) -> RunSummary {
    let throughput = mean(&records.iter().map(SlotRecord::mean_rate).collect::<Vec<_>>());
    let avg_jain = mean(&records.iter().map(|r| r.jain).collect::<Vec<_>>());
    RunSummary {
        seed: config.seed,
        config: config.config().clone(),
        per_user_avg_throughput: throughput,
        avg_jain,
        total_messages: records.iter().map(|r| r.messages).sum(),
        n_slots: records.len(),
    }
}

/// Runs `n_slots` slots from a fresh engine.
pub fn run(config: ValidatedConfig) -> (RunSummary, Vec<SlotRecord>) {
    let n_slots = config.n_slots;
    let mut engine = Engine::new(config);
    let records: Vec<SlotRecord> = (0..n_slots).map(|_| engine.step()).collect();
    (summarize(engine.config(), &records), records)
}

/// Mean and sample standard deviation across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub summaries: Vec<RunSummary>,
    pub throughput_mean: f64,
    pub throughput_std: f64,
    pub jain_mean: f64,
    pub jain_std: f64,
}

/// Mean and sample standard deviation (zero for fewer than two values),
/// accumulated with Welford's update so identical inputs give exactly zero.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let mut mu = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let d = x - mu;
        mu += d / (k + 1) as f64;
        m2 += d * (x - mu);
    }
    if xs.len() < 2 {
        return (mu, 0.0);
    }
    (mu, (m2 / (xs.len() - 1) as f64).sqrt())
}

/// Independent runs of `config` under each seed, in parallel.
pub fn replicate(config: &ValidatedConfig, seeds: &[u64]) -> Aggregate {
    let summaries: Vec<RunSummary> = seeds
        .par_iter()
        .map(|&seed| {
            let mut c = config.clone();
            c.set_seed(seed);
            run(c).0
        })
        .collect();
    let thr: Vec<f64> = summaries.iter().map(|s| s.per_user_avg_throughput).collect();
    let jain: Vec<f64> = summaries.iter().map(|s| s.avg_jain).collect();
    let (throughput_mean, throughput_std) = mean_std(&thr);
    let (jain_mean, jain_std) = mean_std(&jain);
    Aggregate {
        summaries,
        throughput_mean,
        throughput_std,
        jain_mean,
        jain_std,
    }
}
