//! Primary-user ON/OFF activity and the resulting band availability.

use rand::Rng;

/// `v[k] == true` iff band k is free for secondary use this slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvailabilityVector {
    v: Vec<bool>,
}

impl AvailabilityVector {
    pub fn new(v: Vec<bool>) -> Self {
        AvailabilityVector { v }
    }

    pub fn all_available(m: usize) -> Self {
        AvailabilityVector { v: vec![true; m] }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    #[inline]
    pub fn is_available(&self, band: usize) -> bool {
        self.v[band]
    }

    /// Indices of the free bands, ascending.
    pub fn available_bands(&self) -> Vec<usize> {
        (0..self.v.len()).filter(|&k| self.v[k]).collect()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.v
    }
}

/// Each band independently busy with probability `busy_prob`.
pub fn sample_availability(busy_prob: f64, m: usize, rng: &mut impl Rng) -> AvailabilityVector {
    AvailabilityVector {
        v: (0..m).map(|_| rng.random::<f64>() >= busy_prob).collect(),
    }
}

/// Fraction of busy bands.
pub fn occupancy(v: &AvailabilityVector) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.v.iter().filter(|&&free| !free).count() as f64 / v.len() as f64
}
