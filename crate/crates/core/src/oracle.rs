//! Exhaustive search over joint band assignments on tiny instances.

use rayon::prelude::*;

use crate::alloc::{AllocationMatrix, Gains, PowerMatrix};
use crate::config::{ObjectiveKind, ValidatedConfig};
use crate::engine::Engine;
use crate::error::OracleError;
use crate::objectives::evaluate;
use crate::phy::{all_rates, elastic_reward};
use crate::powerfill::PowerRule;
use crate::primary_user::AvailabilityVector;

pub const MAX_USERS: usize = 6;
pub const MAX_BANDS: usize = 4;
pub const MAX_ELL: usize = 2;
pub const MAX_STATES: u128 = 1_000_000;

/// A frozen snapshot small enough to enumerate.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyInstance {
    pub gains: Gains,
    pub availability: AvailabilityVector,
    pub ell: usize,
    pub power_rule: PowerRule,
    pub bandwidth_hz: f64,
    pub noise_band_w: f64,
    pub p_total_w: f64,
    pub p_band_max_w: f64,
    pub thresholds: Vec<f64>,
    pub beta: f64,
}

impl TinyInstance {
    pub fn from_config(
        config: &ValidatedConfig,
        gains: Gains,
        availability: AvailabilityVector,
        thresholds: Vec<f64>,
    ) -> Self {
        TinyInstance {
            gains,
            availability,
            ell: config.max_bands_per_user,
            power_rule: PowerRule::WaterFill,
            bandwidth_hz: config.bandwidth_hz,
            noise_band_w: config.noise_band_w,
            p_total_w: config.p_total_w,
            p_band_max_w: config.p_band_max_w,
            thresholds,
            beta: config.beta,
        }
    }

    pub fn n_users(&self) -> usize {
        self.gains.n_users()
    }

    pub fn n_bands(&self) -> usize {
        self.gains.n_bands()
    }

    /// Powers `user` puts on `bands`: the power rule applied to its
    /// noise-limited gains.
    pub fn powers_for(&self, user: usize, bands: &[usize]) -> Vec<f64> {
        let eff: Vec<f64> = bands
            .iter()
            .map(|&j| self.gains.get(user, user, j) / self.noise_band_w)
            .collect();
        self.power_rule.allocate(&eff, self.p_total_w, self.p_band_max_w)
    }

    /// Per-user rewards when user `i` transmits on `selections[i]`.
    pub fn rewards(&self, selections: &[Vec<usize>]) -> Vec<f64> {
        let n = self.n_users();
        let m = self.n_bands();
        let alloc = AllocationMatrix::from_selections(m, selections);
        let mut power = PowerMatrix::zeros(n, m);
        for (i, s) in selections.iter().enumerate() {
            power.set_row(i, s, &self.powers_for(i, s));
        }
        all_rates(&alloc, &power, &self.gains, &self.availability, self.bandwidth_hz, self.noise_band_w)
            .iter()
            .zip(&self.thresholds)
            .map(|(&r, &th)| elastic_reward(r, th, self.beta))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub selections: Vec<Vec<usize>>,
    pub score: f64,
}

/// Global objectives only; the intrinsic objective is scored as the sum.
pub fn global_objective(kind: ObjectiveKind) -> ObjectiveKind {
    match kind {
        ObjectiveKind::Intrinsic => ObjectiveKind::Sum,
        k => k,
    }
}

fn subsets(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (idx, &b) in pool.iter().enumerate() {
        for mut rest in subsets(&pool[idx + 1..], k - 1) {
            rest.insert(0, b);
            out.push(rest);
        }
    }
    out
}

/// Idle first, then every `min(ell, #available)`-subset of the available
/// bands in lexicographic order.
pub fn alphabet(availability: &AvailabilityVector, ell: usize) -> Vec<Vec<usize>> {
    let avail = availability.available_bands();
    let k = ell.min(avail.len());
    let mut out = vec![Vec::new()];
    if k > 0 {
        out.extend(subsets(&avail, k));
    }
    out
}

fn check_size(inst: &TinyInstance, alphabet_len: usize) -> Result<(), OracleError> {
    let n = inst.n_users();
    let states = (alphabet_len as u128).saturating_pow(n as u32);
    if n > MAX_USERS || inst.n_bands() > MAX_BANDS || inst.ell > MAX_ELL || states > MAX_STATES {
        return Err(OracleError::TooLarge {
            n_users: n,
            n_bands: inst.n_bands(),
            ell: inst.ell,
            states,
        });
    }
    if inst.thresholds.len() != n || inst.availability.len() != inst.n_bands() {
        return Err(OracleError::Shape(format!(
            "{n} users, {} thresholds, {} bands, {} availability flags",
            inst.thresholds.len(),
            inst.n_bands(),
            inst.availability.len()
        )));
    }
    Ok(())
}

fn decode(mut state: usize, n: usize, base: usize, out: &mut [usize]) {
    for digit in out.iter_mut().take(n).rev() {
        *digit = state % base;
        state /= base;
    }
}

/// Best joint assignment under `objective`. Ties go to the first assignment
/// in lexicographic order, user 0 most significant.
pub fn solve_exhaustive(inst: &TinyInstance, objective: ObjectiveKind) -> Result<OracleSolution, OracleError> {
    let letters = alphabet(&inst.availability, inst.ell);
    check_size(inst, letters.len())?;
    let n = inst.n_users();
    let base = letters.len();
    let total = base.pow(n as u32);
    let kind = global_objective(objective);

    let (best_state, score) = (0..total)
        .into_par_iter()
        .map_init(
            || vec![0usize; n],
            |digits, state| {
                decode(state, n, base, digits);
                let sel: Vec<Vec<usize>> = digits.iter().map(|&d| letters[d].clone()).collect();
                (state, evaluate(kind, &inst.rewards(&sel), 0))
            },
        )
        .reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    let mut digits = vec![0usize; n];
    decode(best_state, n, base, &mut digits);
    Ok(OracleSolution {
        selections: digits.iter().map(|&d| letters[d].clone()).collect(),
        score,
    })
}

/// Per-slot realized score of the simulation next to the oracle optimum on
/// the same slot's true gains and availability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPoint {
    pub slot: usize,
    pub realized: f64,
    pub optimum: f64,
}

impl GapPoint {
    /// `realized / optimum`, or 1 when the optimum is zero.
    pub fn ratio(&self) -> f64 {
        if self.optimum == 0.0 {
            1.0
        } else {
            self.realized / self.optimum
        }
    }
}

/// Runs `slots` slots of `engine`, scoring each against the oracle.
pub fn track_gap(engine: &mut Engine, slots: usize) -> Result<Vec<GapPoint>, OracleError> {
    let kind = global_objective(engine.config().objective);
    let mut out = Vec::with_capacity(slots);
    let mut cached: Option<(Gains, AvailabilityVector, f64)> = None;
    for _ in 0..slots {
        let record = engine.step();
        let gains = engine.true_gains();
        let avail = engine.availability().clone();
        let optimum = match &cached {
            Some((g, a, opt)) if *g == gains && *a == avail => *opt,
            _ => {
                let inst = TinyInstance::from_config(engine.config(), gains.clone(), avail.clone(), engine.thresholds().to_vec());
                let opt = solve_exhaustive(&inst, kind)?.score;
                cached = Some((gains, avail, opt));
                opt
            }
        };
        out.push(GapPoint {
            slot: record.slot,
            realized: evaluate(kind, &record.realized_rewards, 0),
            optimum,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(n: usize, m: usize, gains: Gains) -> TinyInstance {
        TinyInstance {
            gains,
            availability: AvailabilityVector::all_available(m),
            ell: 1,
            power_rule: PowerRule::WaterFill,
            bandwidth_hz: 1e6,
            noise_band_w: 1e-9,
            p_total_w: 1e-3,
            p_band_max_w: 1e-3,
            thresholds: vec![0.0; n],
            beta: 0.5,
        }
    }

    #[test]
    fn alphabet_layout() {
        let a = alphabet(&AvailabilityVector::new(vec![true, false, true, true]), 2);
        assert_eq!(a, vec![vec![], vec![0, 2], vec![0, 3], vec![2, 3]]);
        let one = alphabet(&AvailabilityVector::new(vec![false, true]), 2);
        assert_eq!(one, vec![vec![], vec![1]]);
    }

    #[test]
    fn symmetric_pair_goes_orthogonal() {
        let mut g = Gains::zeros(2, 2);
        for j in 0..2 {
            g.set(0, 0, j, 1e-5);
            g.set(1, 1, j, 1e-5);
            g.set(0, 1, j, 8e-6);
            g.set(1, 0, j, 8e-6);
        }
        let inst = instance(2, 2, g);
        let sol = solve_exhaustive(&inst, ObjectiveKind::Sum).unwrap();
        assert_eq!(sol.selections, vec![vec![0], vec![1]]);

        // independent enumeration of all 9 joint assignments
        let letters = [vec![], vec![0], vec![1]];
        let mut best = f64::NEG_INFINITY;
        for a in &letters {
            for b in &letters {
                best = best.max(inst.rewards(&[a.clone(), b.clone()]).iter().sum());
            }
        }
        assert_eq!(sol.score, best);
    }

    #[test]
    fn lone_user_takes_best_band() {
        let inst = instance(1, 3, Gains::from_vec(1, 3, vec![1e-6, 4e-6, 2e-6]));
        let sol = solve_exhaustive(&inst, ObjectiveKind::Sum).unwrap();
        assert_eq!(sol.selections, vec![vec![1]]);
        let want = 1e6 * (1.0 + 1e-3 * 4e-6 / 1e-9f64).log2();
        assert!((sol.score - want).abs() < 1e-6);
    }

    #[test]
    fn maxmin_pinned_by_dead_user() {
        let mut g = Gains::zeros(3, 2);
        for j in 0..2 {
            g.set(1, 1, j, 1e-5);
            g.set(2, 2, j, 3e-5);
        }
        let sol = solve_exhaustive(&instance(3, 2, g), ObjectiveKind::MaxMin).unwrap();
        assert_eq!(sol.score, 0.0);
        // every assignment ties at zero, so the first one (all idle) wins
        assert!(sol.selections.iter().all(Vec::is_empty));
    }

    #[test]
    fn seven_users_refused() {
        let inst = instance(7, 2, Gains::zeros(7, 2));
        match solve_exhaustive(&inst, ObjectiveKind::Sum) {
            Err(OracleError::TooLarge { n_users: 7, states, .. }) => assert_eq!(states, 3u128.pow(7)),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn too_many_bands_refused() {
        let inst = instance(2, 5, Gains::zeros(2, 5));
        assert!(matches!(
            solve_exhaustive(&inst, ObjectiveKind::Sum),
            Err(OracleError::TooLarge { .. })
        ));
    }
}
