//! Intrinsic and global objective functions over a reward vector.

use crate::config::ObjectiveKind;

/// Floor added inside the log of the proportional-fair objective.
pub const LOG_FLOOR: f64 = 1e-9;

/// Score of `rewards` under `kind`, from the point of view of user `me`.
pub fn evaluate(kind: ObjectiveKind, rewards: &[f64], me: usize) -> f64 {
    match kind {
        ObjectiveKind::Intrinsic => rewards[me],
        ObjectiveKind::Sum => rewards.iter().sum(),
        ObjectiveKind::MaxMin => rewards.iter().copied().fold(f64::INFINITY, f64::min),
        ObjectiveKind::ProportionalFair => rewards.iter().map(|r| (r + LOG_FLOOR).ln()).sum(),
    }
}
