use crate::alloc::{AllocationMatrix, Gains, PowerMatrix};
use crate::config::{ObjectiveKind, ValidatedConfig};
use crate::objectives::evaluate;
use crate::phy::{elastic_reward, shannon_rate};
use crate::powerfill::PowerRule;
use crate::primary_user::AvailabilityVector;

use super::ParticleSet;

/// Constants every agent needs to score a candidate selection.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionContext {
    pub objective: ObjectiveKind,
    pub power_rule: PowerRule,
    pub bandwidth_hz: f64,
    pub noise_band_w: f64,
    pub p_total_w: f64,
    pub p_band_max_w: f64,
    pub beta: f64,
    pub thresholds: Vec<f64>,
}

impl DecisionContext {
    pub fn from_config(config: &ValidatedConfig, thresholds: Vec<f64>) -> Self {
        DecisionContext {
            objective: config.objective,
            power_rule: PowerRule::WaterFill,
            bandwidth_hz: config.bandwidth_hz,
            noise_band_w: config.noise_band_w,
            p_total_w: config.p_total_w,
            p_band_max_w: config.p_band_max_w,
            beta: config.beta,
            thresholds,
        }
    }
}

/// Read-only snapshot an agent decides from: everyone's slot t-1 broadcast,
/// the predicted gains for slot t and this slot's availability. Built once
/// per slot and shared by all agents.
#[derive(Debug, Clone)]
pub struct NeighborView {
    pub alloc: AllocationMatrix,
    pub power: PowerMatrix,
    pub rewards: Vec<f64>,
    pub gains: Gains,
    pub availability: AvailabilityVector,
    /// Users transmitting on each available band under `alloc`.
    on_band: Vec<Vec<usize>>,
    /// `[rx * m + band]`: interference from all other transmitters.
    interference: Vec<f64>,
    base_rates: Vec<f64>,
    base_rewards: Vec<f64>,
}

impl NeighborView {
    pub fn new(
        alloc: AllocationMatrix,
        power: PowerMatrix,
        rewards: Vec<f64>,
        gains: Gains,
        availability: AvailabilityVector,
        ctx: &DecisionContext,
    ) -> Self {
        let n = alloc.n_users();
        let m = alloc.n_bands();
        let mut on_band = vec![Vec::new(); m];
        for k in 0..n {
            for (j, users) in on_band.iter_mut().enumerate() {
                if alloc.get(k, j) && availability.is_available(j) && power.get(k, j) > 0.0 {
                    users.push(k);
                }
            }
        }
        let mut interference = vec![0.0; n * m];
        for (j, users) in on_band.iter().enumerate() {
            for &k in users {
                let p = power.get(k, j);
                for rx in (0..n).filter(|&rx| rx != k) {
                    interference[rx * m + j] += p * gains.get(rx, k, j);
                }
            }
        }
        let mut base_rates = vec![0.0; n];
        for (j, users) in on_band.iter().enumerate() {
            for &r in users {
                let s = power.get(r, j) * gains.get(r, r, j) / (interference[r * m + j] + ctx.noise_band_w);
                base_rates[r] += shannon_rate(ctx.bandwidth_hz, s);
            }
        }
        let base_rewards = base_rates
            .iter()
            .zip(&ctx.thresholds)
            .map(|(&r, &th)| elastic_reward(r, th, ctx.beta))
            .collect();
        NeighborView {
            alloc,
            power,
            rewards,
            gains,
            availability,
            on_band,
            interference,
            base_rates,
            base_rewards,
        }
    }

    pub fn n_users(&self) -> usize {
        self.alloc.n_users()
    }

    /// Predicted interference at `rx` on `band` from the broadcast allocation.
    pub fn interference(&self, rx: usize, band: usize) -> f64 {
        self.interference[rx * self.alloc.n_bands() + band]
    }

    /// Rewards every user would get if nobody changed their broadcast choice.
    pub fn base_rewards(&self) -> &[f64] {
        &self.base_rewards
    }
}

/// Outcome of one agent's decision step.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub selection: Vec<usize>,
    /// Watts on each band of `selection`.
    pub powers: Vec<f64>,
    /// Objective score of every particle.
    pub scores: Vec<f64>,
    /// Predicted own reward under every particle.
    pub self_rewards: Vec<f64>,
    /// Index of the winning particle, `None` when idle.
    pub chosen: Option<usize>,
}

impl Decision {
    fn idle(n_particles: usize) -> Self {
        Decision {
            selection: Vec::new(),
            powers: Vec::new(),
            scores: vec![0.0; n_particles],
            self_rewards: vec![0.0; n_particles],
            chosen: None,
        }
    }
}

struct Scratch {
    rates: Vec<f64>,
    rewards: Vec<f64>,
    touched: Vec<usize>,
}

struct Candidate {
    score: f64,
    self_reward: f64,
    powers: Vec<f64>,
}

fn evaluate_candidate(
    view: &NeighborView,
    ctx: &DecisionContext,
    agent: usize,
    selection: &[usize],
    scratch: &mut Scratch,
) -> Candidate {
    let m = view.alloc.n_bands();
    let noise = ctx.noise_band_w;
    let eff: Vec<f64> = selection
        .iter()
        .map(|&j| view.gains.get(agent, agent, j) / (view.interference[agent * m + j] + noise))
        .collect();
    let powers = ctx.power_rule.allocate(&eff, ctx.p_total_w, ctx.p_band_max_w);
    let self_rate: f64 = eff
        .iter()
        .zip(&powers)
        .map(|(g, p)| shannon_rate(ctx.bandwidth_hz, g * p))
        .sum();
    let self_reward = elastic_reward(self_rate, ctx.thresholds[agent], ctx.beta);
    if ctx.objective == ObjectiveKind::Intrinsic {
        return Candidate {
            score: self_reward,
            self_reward,
            powers,
        };
    }

    scratch.rates.copy_from_slice(&view.base_rates);
    scratch.rewards.copy_from_slice(&view.base_rewards);
    scratch.touched.clear();
    let new_power = |j: usize| {
        selection
            .iter()
            .position(|&b| b == j)
            .map_or(0.0, |idx| powers[idx])
    };
    let old_bands = (0..m).filter(|&j| view.on_band[j].contains(&agent));
    let mut affected: Vec<usize> = old_bands.chain(selection.iter().copied()).collect();
    affected.sort_unstable();
    affected.dedup();
    for j in affected {
        let old_p = if view.on_band[j].contains(&agent) {
            view.power.get(agent, j)
        } else {
            0.0
        };
        let new_p = new_power(j);
        if old_p == new_p {
            continue;
        }
        for &r in view.on_band[j].iter().filter(|&&r| r != agent) {
            let cross = view.gains.get(r, agent, j);
            let i_old = view.interference[r * m + j];
            let i_new = (i_old + (new_p - old_p) * cross).max(0.0);
            let signal = view.power.get(r, j) * view.gains.get(r, r, j);
            scratch.rates[r] += shannon_rate(ctx.bandwidth_hz, signal / (i_new + noise))
                - shannon_rate(ctx.bandwidth_hz, signal / (i_old + noise));
            scratch.touched.push(r);
        }
    }
    for &r in &scratch.touched {
        scratch.rewards[r] = elastic_reward(scratch.rates[r].max(0.0), ctx.thresholds[r], ctx.beta);
    }
    scratch.rewards[agent] = self_reward;
    Candidate {
        score: evaluate(ctx.objective, &scratch.rewards, agent),
        self_reward,
        powers,
    }
}

/// Scores every particle as if only `agent` changed its row (others keep
/// their broadcast choices) and picks the best one; ties go to the lowest
/// particle index.
pub fn decide(set: &ParticleSet, view: &NeighborView, agent: usize, ctx: &DecisionContext) -> Decision {
    let n_particles = set.len();
    if set.is_empty() || set.is_idle() {
        return Decision::idle(n_particles);
    }
    let n = view.n_users();
    let mut scratch = Scratch {
        rates: vec![0.0; n],
        rewards: vec![0.0; n],
        touched: Vec::new(),
    };
    let mut scores = Vec::with_capacity(n_particles);
    let mut self_rewards = Vec::with_capacity(n_particles);
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    for (k, particle) in set.particles.iter().enumerate() {
        let c = evaluate_candidate(view, ctx, agent, &particle.selection, &mut scratch);
        scores.push(c.score);
        self_rewards.push(c.self_reward);
        if best.as_ref().is_none_or(|(_, s, _)| c.score > *s) {
            best = Some((k, c.score, c.powers));
        }
    }
    let (idx, _, powers) = best.expect("nonempty particle set");
    Decision {
        selection: set.particles[idx].selection.clone(),
        powers,
        scores,
        self_rewards,
        chosen: Some(idx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives;
    use crate::phy;
    use crate::pfilter::Particle;

    fn ctx(objective: ObjectiveKind, n: usize) -> DecisionContext {
        DecisionContext {
            objective,
            power_rule: PowerRule::WaterFill,
            bandwidth_hz: 1e6,
            noise_band_w: 1e-9,
            p_total_w: 1e-3,
            p_band_max_w: 1e-3,
            beta: 0.5,
            thresholds: vec![0.0; n],
        }
    }

    fn set_of(selections: &[&[usize]]) -> ParticleSet {
        let w = 1.0 / selections.len() as f64;
        ParticleSet {
            particles: selections
                .iter()
                .map(|s| Particle {
                    selection: s.to_vec(),
                    weight: w,
                })
                .collect(),
            running_reward_mean: None,
        }
    }

    #[test]
    fn lone_user_picks_stronger_band() {
        let gains = Gains::from_vec(1, 2, vec![2e-5, 1e-5]);
        let c = ctx(ObjectiveKind::Intrinsic, 1);
        let view = NeighborView::new(
            AllocationMatrix::empty(1, 2),
            PowerMatrix::zeros(1, 2),
            vec![0.0],
            gains,
            AvailabilityVector::all_available(2),
            &c,
        );
        let d = decide(&set_of(&[&[1], &[0]]), &view, 0, &c);
        assert_eq!(d.selection, vec![0]);
        assert_eq!(d.chosen, Some(1));
        assert!((d.powers[0] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn ties_go_to_first_particle() {
        // bands 1 and 2 identical, band 0 weaker: scores [low, high, high]
        let gains = Gains::from_vec(1, 3, vec![1e-6, 7e-6, 7e-6]);
        let c = ctx(ObjectiveKind::Intrinsic, 1);
        let view = NeighborView::new(
            AllocationMatrix::empty(1, 3),
            PowerMatrix::zeros(1, 3),
            vec![0.0],
            gains,
            AvailabilityVector::all_available(3),
            &c,
        );
        let d = decide(&set_of(&[&[0], &[1], &[2]]), &view, 0, &c);
        assert_eq!(d.scores[1], d.scores[2]);
        assert_eq!(d.chosen, Some(1));
    }

    /// Two users, strong cross gains, user 1 sits on band 0. Scoring both
    /// options for user 0 by full recomputation must prefer the orthogonal band
    /// and agree with the incremental scores.
    #[test]
    fn sum_objective_avoids_collision() {
        let n = 2;
        let m = 2;
        let mut gains = Gains::zeros(n, m);
        for j in 0..m {
            gains.set(0, 0, j, 1e-5);
            gains.set(1, 1, j, 1e-5);
            gains.set(0, 1, j, 8e-6);
            gains.set(1, 0, j, 8e-6);
        }
        let c = ctx(ObjectiveKind::Sum, n);
        let mut prev = AllocationMatrix::empty(n, m);
        prev.set_row(1, &[0]);
        let mut prev_p = PowerMatrix::zeros(n, m);
        prev_p.set_row(1, &[0], &[1e-3]);
        let avail = AvailabilityVector::all_available(m);
        let view = NeighborView::new(prev.clone(), prev_p.clone(), vec![0.0; n], gains.clone(), avail.clone(), &c);
        let d = decide(&set_of(&[&[0], &[1]]), &view, 0, &c);

        // oracle: full evaluation with phy for both candidate allocations
        let mut oracle_scores = Vec::new();
        for band in 0..m {
            let mut a = prev.clone();
            a.set_row(0, &[band]);
            let mut p = prev_p.clone();
            p.set_row(0, &[band], &[1e-3]);
            let rates = phy::all_rates(&a, &p, &gains, &avail, 1e6, 1e-9);
            oracle_scores.push(objectives::evaluate(ObjectiveKind::Sum, &rates, 0));
        }
        assert!(oracle_scores[1] > oracle_scores[0]);
        for k in 0..2 {
            assert!((d.scores[k] - oracle_scores[k]).abs() < 1e-6 * oracle_scores[k]);
        }
        assert_eq!(d.selection, vec![1]);
    }

    #[test]
    fn incremental_scores_match_full_recompute() {
        // 5 users, 3 bands, 2 bands each, every objective
        let n = 5;
        let m = 3;
        let mut gains = Gains::zeros(n, m);
        let mut x = 0.37f64;
        for rx in 0..n {
            for tx in 0..n {
                for j in 0..m {
                    x = (x * 9301.0 + 49297.0) % 233280.0 / 233280.0;
                    let g = if rx == tx { 2e-5 * (0.5 + x) } else { 3e-6 * x };
                    gains.set(rx, tx, j, g);
                }
            }
        }
        let selections = [vec![0, 1], vec![1, 2], vec![0, 2], vec![0, 1], vec![2]];
        let prev = AllocationMatrix::from_selections(m, &selections);
        let mut prev_p = PowerMatrix::zeros(n, m);
        for (i, s) in selections.iter().enumerate() {
            let share = vec![1e-3 / s.len() as f64; s.len()];
            prev_p.set_row(i, s, &share);
        }
        let avail = AvailabilityVector::all_available(m);
        for objective in ObjectiveKind::ALL {
            let mut c = ctx(objective, n);
            c.power_rule = PowerRule::UniformSplit;
            c.thresholds = vec![1e6, 2e6, 0.0, 5e5, 3e6];
            let view = NeighborView::new(prev.clone(), prev_p.clone(), vec![0.0; n], gains.clone(), avail.clone(), &c);
            let cands: [&[usize]; 4] = [&[0, 1], &[1, 2], &[0, 2], &[1]];
            let agent = 3;
            let d = decide(&set_of(&cands), &view, agent, &c);
            for (k, cand) in cands.iter().enumerate() {
                let mut a = prev.clone();
                a.set_row(agent, cand);
                let mut p = prev_p.clone();
                p.set_row(agent, cand, &vec![1e-3 / cand.len() as f64; cand.len()]);
                let rates = phy::all_rates(&a, &p, &gains, &avail, 1e6, 1e-9);
                let rewards: Vec<f64> = rates
                    .iter()
                    .zip(&c.thresholds)
                    .map(|(&r, &th)| phy::elastic_reward(r, th, c.beta))
                    .collect();
                let want = objectives::evaluate(objective, &rewards, agent);
                assert!(
                    (d.scores[k] - want).abs() <= 1e-9 * want.abs().max(1.0),
                    "{objective}: particle {k} got {} want {want}",
                    d.scores[k]
                );
                assert!((d.self_rewards[k] - rewards[agent]).abs() <= 1e-9 * rewards[agent].max(1.0));
            }
        }
    }

    #[test]
    fn idle_set_decides_nothing() {
        let c = ctx(ObjectiveKind::Sum, 1);
        let view = NeighborView::new(
            AllocationMatrix::empty(1, 2),
            PowerMatrix::zeros(1, 2),
            vec![0.0],
            Gains::zeros(1, 2),
            AvailabilityVector::new(vec![false, false]),
            &c,
        );
        let d = decide(&set_of(&[&[], &[]]), &view, 0, &c);
        assert!(d.selection.is_empty());
        assert_eq!(d.chosen, None);
    }
}
