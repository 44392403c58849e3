//! Rayleigh fading channels evolving as a first-order autoregression.
//!
//! Mean link gains come from a random drop of transmitter/receiver pairs in a
//! square area with power-law path loss. The direct link of each user is set
//! `direct_gain_advantage` times stronger than the mean of the interference
//! links reaching its receiver.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::alloc::Gains;
use crate::config::ValidatedConfig;
use crate::error::ChannelError;
use crate::rng::{Module, RngStream};

/// AR burn-in steps applied after the initial draw.
pub const BURN_IN_STEPS: usize = 50;

/// Zeroth-order Bessel function of the first kind,
/// `J0(x) = (1/pi) * integral_0^pi cos(x sin t) dt`.
///
/// The integrand is smooth and periodic so the trapezoid rule converges
/// geometrically; 64 nodes are exact to machine precision for |x| < 20.
pub fn bessel_j0(x: f64) -> f64 {
    const NODES: usize = 64;
    let h = PI / NODES as f64;
    let mut acc = 0.5 * (1.0 + (x * PI.sin()).cos());
    for k in 1..NODES {
        acc += (x * (k as f64 * h).sin()).cos();
    }
    acc / NODES as f64
}

/// AR(p) coefficients. `xi` is the innovation scale for a unit-variance link;
/// each link's innovation is further scaled by the square root of its mean gain.
#[derive(Debug, Clone, PartialEq)]
pub struct ArCoefficients {
    pub alpha: Vec<f64>,
    pub xi: f64,
}

impl ArCoefficients {
    /// alpha = 1, xi = 0: the channel never changes.
    pub fn frozen() -> Self {
        ArCoefficients {
            alpha: vec![1.0],
            xi: 0.0,
        }
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }
}

/// Jakes-model coefficients `alpha_l = J0(2 pi l fd Tb)`. Only order 1 is
/// supported; for it `xi^2 = 1 - alpha_1^2` keeps the variance stationary.
pub fn ar_coefficients(doppler_coherence_product: f64, order: usize) -> Result<ArCoefficients, ChannelError> {
    if order != 1 {
        return Err(ChannelError::UnsupportedOrder(order));
    }
    let alpha1 = bessel_j0(2.0 * PI * doppler_coherence_product);
    let xi = (1.0 - alpha1 * alpha1).max(0.0).sqrt();
    Ok(ArCoefficients {
        alpha: vec![alpha1],
        xi,
    })
}

/// Mean power gain of every (rx, tx) pair from a uniform drop of nodes.
pub fn mean_gain_matrix(config: &ValidatedConfig, rng: &mut impl Rng) -> Vec<f64> {
    let n = config.n_users;
    let side = config.area_side_m;
    let tx: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random::<f64>() * side, rng.random::<f64>() * side))
        .collect();
    let rx: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random::<f64>() * side, rng.random::<f64>() * side))
        .collect();
    let d0 = config.reference_distance_m;
    let eta = config.path_loss_exponent;
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            if i == k {
                continue;
            }
            let d = ((rx[i].0 - tx[k].0).powi(2) + (rx[i].1 - tx[k].1).powi(2)).sqrt();
            g[i * n + k] = path_gain(d, d0, eta);
        }
    }
    let interference_mean = if n > 1 {
        g.iter().sum::<f64>() / (n * (n - 1)) as f64
    } else {
        // a lone link sits at the reference distance
        1.0
    };
    for i in 0..n {
        g[i * n + i] = config.direct_gain_advantage * interference_mean;
    }
    g
}

/// `(d0 / d)^eta`, with distances below `d0` clamped to `d0`.
pub fn path_gain(distance: f64, d0: f64, eta: f64) -> f64 {
    (d0 / distance.max(d0)).powf(eta)
}

fn complex_normal(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Complex amplitude gains `h[rx][tx][band]` with the most recent `p` frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    n_users: usize,
    n_bands: usize,
    /// N x N, row = receiver.
    mean_gain: Vec<f64>,
    /// `history[0]` is h(t-1), `history[l-1]` is h(t-l).
    history: Vec<Vec<Complex64>>,
}

impl ChannelTensor {
    /// Draws every gain from CN(0, mean_gain) and fills a `depth`-deep history
    /// with `burn_in` AR steps.
    pub fn from_mean_gain(
        n_users: usize,
        n_bands: usize,
        mean_gain: Vec<f64>,
        coeffs: &ArCoefficients,
        burn_in: usize,
        rng: &mut impl Rng,
    ) -> Self {
        assert_eq!(mean_gain.len(), n_users * n_users);
        let mut frame = Vec::with_capacity(n_users * n_users * n_bands);
        for pair in 0..n_users * n_users {
            for _ in 0..n_bands {
                frame.push(complex_normal(rng, mean_gain[pair]));
            }
        }
        let mut tensor = ChannelTensor {
            n_users,
            n_bands,
            mean_gain,
            history: vec![frame; coeffs.order()],
        };
        for _ in 0..burn_in {
            tensor.step(coeffs, rng);
        }
        tensor
    }

    /// A channel fixed at the given complex gains (`[rx][tx][band]` layout).
    pub fn from_gains(n_users: usize, n_bands: usize, gains: Vec<Complex64>) -> Self {
        assert_eq!(gains.len(), n_users * n_users * n_bands);
        let mut mean_gain = vec![0.0; n_users * n_users];
        for (pair, mg) in mean_gain.iter_mut().enumerate() {
            *mg = gains[pair * n_bands..(pair + 1) * n_bands]
                .iter()
                .map(|h| h.norm_sqr())
                .sum::<f64>()
                / n_bands as f64;
        }
        ChannelTensor {
            n_users,
            n_bands,
            mean_gain,
            history: vec![gains],
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    pub fn mean_gain(&self, rx: usize, tx: usize) -> f64 {
        self.mean_gain[rx * self.n_users + tx]
    }

    pub fn depth(&self) -> usize {
        self.history.len()
    }

    /// Most recent complex gains.
    pub fn current(&self) -> &[Complex64] {
        &self.history[0]
    }

    pub fn at(&self, rx: usize, tx: usize, band: usize) -> Complex64 {
        self.history[0][(rx * self.n_users + tx) * self.n_bands + band]
    }

    /// |h|^2 of the most recent frame.
    pub fn power_gains(&self) -> Gains {
        Gains::from_vec(
            self.n_users,
            self.n_bands,
            self.history[0].iter().map(|h| h.norm_sqr()).collect(),
        )
    }

    /// One AR step: `h(t) = sum_l alpha_l h(t-l) + xi sqrt(mean) w`, w ~ CN(0, 1).
    pub fn step(&mut self, coeffs: &ArCoefficients, rng: &mut impl Rng) {
        debug_assert_eq!(coeffs.order(), self.history.len());
        let mut next = self.predict_complex(coeffs);
        if coeffs.xi > 0.0 {
            let m = self.n_bands;
            for (pair, &mg) in self.mean_gain.iter().enumerate() {
                let scale = coeffs.xi * mg.sqrt();
                for h in &mut next[pair * m..(pair + 1) * m] {
                    *h += complex_normal(rng, 1.0) * scale;
                }
            }
        }
        self.history.rotate_right(1);
        self.history[0] = next;
    }

    /// Conditional mean of the next frame, `sum_l alpha_l h(t-l)`.
    pub fn predict_complex(&self, coeffs: &ArCoefficients) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.history[0].iter().map(|h| h * coeffs.alpha[0]).collect();
        for (lag, alpha) in coeffs.alpha.iter().enumerate().skip(1) {
            for (o, h) in out.iter_mut().zip(&self.history[lag]) {
                *o += h * *alpha;
            }
        }
        out
    }
}

/// Builds the run's channel tensor from the config: node drop, initial
/// Rayleigh draw and burn-in.
pub fn init_channels(config: &ValidatedConfig, rng: &RngStream) -> ChannelTensor {
    let mean_gain = mean_gain_matrix(config, &mut rng.rng_for(Module::Geometry, 0, 0));
    ChannelTensor::from_mean_gain(
        config.n_users,
        config.n_bands,
        mean_gain,
        &config.ar,
        BURN_IN_STEPS,
        &mut rng.rng_for(Module::ChannelInit, 0, 0),
    )
}

/// Advances the true channel by one slot.
pub fn step_channels(tensor: &mut ChannelTensor, coeffs: &ArCoefficients, rng: &mut impl Rng) {
    tensor.step(coeffs, rng);
}

/// One-step-ahead power gains `|h~(t)|^2` that agents plan with.
pub fn predict_channels(tensor: &ChannelTensor, coeffs: &ArCoefficients) -> Gains {
    Gains::from_vec(
        tensor.n_users,
        tensor.n_bands,
        tensor
            .predict_complex(coeffs)
            .iter()
            .map(|h| h.norm_sqr())
            .collect(),
    )
}
