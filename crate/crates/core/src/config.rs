//! Scenario configuration and validation.
//!
//! Powers and noise densities are configured in dBm / dBm-per-Hz and converted
//! once, in [`validate`], to linear watts. Every field can be addressed by its
//! name through [`SystemConfig::set_field`] and [`SystemConfig::fields`], which
//! is what the scenario file parser and the parameter sweeps build on.

use std::fmt;
use std::str::FromStr;

use crate::channel::{ar_coefficients, ArCoefficients};
use crate::error::ConfigError;

/// Which objective each agent maximizes when ranking its particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    /// The agent's own reward only.
    Intrinsic,
    /// Sum of all users' rewards.
    Sum,
    /// Minimum reward over all users (bottleneck optimality).
    MaxMin,
    /// Sum of log rewards.
    ProportionalFair,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 4] = [
        ObjectiveKind::Intrinsic,
        ObjectiveKind::Sum,
        ObjectiveKind::MaxMin,
        ObjectiveKind::ProportionalFair,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::Intrinsic => "intrinsic",
            ObjectiveKind::Sum => "sum",
            ObjectiveKind::MaxMin => "maxmin",
            ObjectiveKind::ProportionalFair => "proportional_fair",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObjectiveKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| {
                format!("unknown objective {s:?} (expected intrinsic, sum, maxmin or proportional_fair)")
            })
    }
}

/// Every scenario parameter. Field names double as scenario-file keys.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_users: usize,
    pub n_bands: usize,
    pub max_bands_per_user: usize,
    pub n_particles: usize,
    pub bandwidth_hz: f64,
    pub p_total_max_dbm: f64,
    pub p_band_max_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub beta: f64,
    pub rate_threshold_range_bps: (f64, f64),
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    /// Side of the square deployment area the transmitters and receivers are
    /// dropped in.
    pub area_side_m: f64,
    pub direct_gain_advantage_db: f64,
    pub ar_order: usize,
    pub doppler_coherence_product: f64,
    pub pu_busy_prob: f64,
    pub objective: ObjectiveKind,
    pub likelihood_sigma_frac: f64,
    pub mutation_prob: f64,
    pub ess_threshold_frac: f64,
    pub n_slots: usize,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_users: 200,
            n_bands: 15,
            max_bands_per_user: 1,
            n_particles: 10,
            bandwidth_hz: 1.0e6,
            p_total_max_dbm: 3.0,
            p_band_max_dbm: 3.0,
            noise_psd_dbm_hz: -100.0,
            beta: 0.5,
            rate_threshold_range_bps: (0.0, 1.0e4),
            path_loss_exponent: 3.0,
            reference_distance_m: 1.0,
            area_side_m: 100.0,
            direct_gain_advantage_db: 3.0,
            ar_order: 1,
            doppler_coherence_product: 0.05,
            pu_busy_prob: 0.0,
            objective: ObjectiveKind::Sum,
            likelihood_sigma_frac: 0.25,
            mutation_prob: 0.2,
            ess_threshold_frac: 0.5,
            n_slots: 100,
            seed: 1,
        }
    }
}

/// Names of every addressable field, in declaration order.
pub const FIELD_NAMES: [&str; 23] = [
    "n_users",
    "n_bands",
    "max_bands_per_user",
    "n_particles",
    "bandwidth_hz",
    "p_total_max_dbm",
    "p_band_max_dbm",
    "noise_psd_dbm_hz",
    "beta",
    "rate_threshold_range_bps",
    "path_loss_exponent",
    "reference_distance_m",
    "area_side_m",
    "direct_gain_advantage_db",
    "ar_order",
    "doppler_coherence_product",
    "pu_busy_prob",
    "objective",
    "likelihood_sigma_frac",
    "mutation_prob",
    "ess_threshold_frac",
    "n_slots",
    "seed",
];

fn parse_num<T: FromStr>(field: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Parse {
        field: field.to_string(),
        value: value.to_string(),
    })
}

fn parse_range(field: &str, value: &str) -> Result<(f64, f64), ConfigError> {
    let inner = value.trim().trim_start_matches('[').trim_end_matches(']');
    let mut parts = inner.split(',');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(lo), Some(hi), None) => Ok((parse_num(field, lo)?, parse_num(field, hi)?)),
        _ => Err(ConfigError::Parse {
            field: field.to_string(),
            value: value.to_string(),
        }),
    }
}

impl SystemConfig {
    /// Sets one field from its textual form.
    pub fn set_field(&mut self, name: &str, value: &str) -> Result<(), ConfigError> {
        match name {
            "n_users" => self.n_users = parse_num(name, value)?,
            "n_bands" => self.n_bands = parse_num(name, value)?,
            "max_bands_per_user" => self.max_bands_per_user = parse_num(name, value)?,
            "n_particles" => self.n_particles = parse_num(name, value)?,
            "bandwidth_hz" => self.bandwidth_hz = parse_num(name, value)?,
            "p_total_max_dbm" => self.p_total_max_dbm = parse_num(name, value)?,
            "p_band_max_dbm" => self.p_band_max_dbm = parse_num(name, value)?,
            "noise_psd_dbm_hz" => self.noise_psd_dbm_hz = parse_num(name, value)?,
            "beta" => self.beta = parse_num(name, value)?,
            "rate_threshold_range_bps" => self.rate_threshold_range_bps = parse_range(name, value)?,
            "path_loss_exponent" => self.path_loss_exponent = parse_num(name, value)?,
            "reference_distance_m" => self.reference_distance_m = parse_num(name, value)?,
            "area_side_m" => self.area_side_m = parse_num(name, value)?,
            "direct_gain_advantage_db" => self.direct_gain_advantage_db = parse_num(name, value)?,
            "ar_order" => self.ar_order = parse_num(name, value)?,
            "doppler_coherence_product" => {
                self.doppler_coherence_product = parse_num(name, value)?
            }
            "pu_busy_prob" => self.pu_busy_prob = parse_num(name, value)?,
            "objective" => {
                self.objective = value.parse().map_err(|_| ConfigError::Parse {
                    field: name.to_string(),
                    value: value.to_string(),
                })?
            }
            "likelihood_sigma_frac" => self.likelihood_sigma_frac = parse_num(name, value)?,
            "mutation_prob" => self.mutation_prob = parse_num(name, value)?,
            "ess_threshold_frac" => self.ess_threshold_frac = parse_num(name, value)?,
            "n_slots" => self.n_slots = parse_num(name, value)?,
            "seed" => self.seed = parse_num(name, value)?,
            _ => return Err(ConfigError::UnknownField(name.to_string())),
        }
        Ok(())
    }

    /// All fields as `(name, value)` pairs; values re-parse through `set_field`.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let (lo, hi) = self.rate_threshold_range_bps;
        vec![
            ("n_users", self.n_users.to_string()),
            ("n_bands", self.n_bands.to_string()),
            ("max_bands_per_user", self.max_bands_per_user.to_string()),
            ("n_particles", self.n_particles.to_string()),
            ("bandwidth_hz", self.bandwidth_hz.to_string()),
            ("p_total_max_dbm", self.p_total_max_dbm.to_string()),
            ("p_band_max_dbm", self.p_band_max_dbm.to_string()),
            ("noise_psd_dbm_hz", self.noise_psd_dbm_hz.to_string()),
            ("beta", self.beta.to_string()),
            ("rate_threshold_range_bps", format!("{lo},{hi}")),
            ("path_loss_exponent", self.path_loss_exponent.to_string()),
            ("reference_distance_m", self.reference_distance_m.to_string()),
            ("area_side_m", self.area_side_m.to_string()),
            ("direct_gain_advantage_db", self.direct_gain_advantage_db.to_string()),
            ("ar_order", self.ar_order.to_string()),
            ("doppler_coherence_product", self.doppler_coherence_product.to_string()),
            ("pu_busy_prob", self.pu_busy_prob.to_string()),
            ("objective", self.objective.to_string()),
            ("likelihood_sigma_frac", self.likelihood_sigma_frac.to_string()),
            ("mutation_prob", self.mutation_prob.to_string()),
            ("ess_threshold_frac", self.ess_threshold_frac.to_string()),
            ("n_slots", self.n_slots.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Value of a single field, as produced by [`SystemConfig::fields`].
    pub fn field(&self, name: &str) -> Option<String> {
        self.fields()
            .into_iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| v)
    }
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Converts a dB ratio to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A configuration that passed [`validate`], with linear-scale quantities cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    config: SystemConfig,
    pub p_total_w: f64,
    pub p_band_max_w: f64,
    /// Noise power over one band, N0 * B, in watts.
    pub noise_band_w: f64,
    pub direct_gain_advantage: f64,
    pub ar: ArCoefficients,
}

impl ValidatedConfig {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn into_inner(self) -> SystemConfig {
        self.config
    }

    /// The seed is the one field that no derived quantity depends on.
    pub fn set_seed(&mut self, seed: u64) {
        self.config.seed = seed;
    }
}

impl std::ops::Deref for ValidatedConfig {
    type Target = SystemConfig;

    fn deref(&self) -> &SystemConfig {
        &self.config
    }
}

fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, "must be finite and > 0"))
    }
}

fn finite(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, "must be finite"))
    }
}

fn unit_interval(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, "must lie in [0, 1]"))
    }
}

/// Checks every invariant, reporting the first violation by field name.
pub fn validate(config: SystemConfig) -> Result<ValidatedConfig, ConfigError> {
    let c = &config;
    if c.n_users < 1 {
        return Err(ConfigError::invalid("n_users", "must be >= 1"));
    }
    if c.n_bands < 1 {
        return Err(ConfigError::invalid("n_bands", "must be >= 1"));
    }
    if c.max_bands_per_user < 1 {
        return Err(ConfigError::invalid("max_bands_per_user", "must be >= 1"));
    }
    if c.max_bands_per_user > c.n_bands {
        return Err(ConfigError::invalid(
            "max_bands_per_user",
            "max_bands_per_user exceeds n_bands",
        ));
    }
    if c.n_particles < 1 {
        return Err(ConfigError::invalid("n_particles", "must be >= 1"));
    }
    positive("bandwidth_hz", c.bandwidth_hz)?;
    finite("p_total_max_dbm", c.p_total_max_dbm)?;
    finite("p_band_max_dbm", c.p_band_max_dbm)?;
    finite("noise_psd_dbm_hz", c.noise_psd_dbm_hz)?;
    if !(c.beta.is_finite() && c.beta >= 0.0) {
        return Err(ConfigError::invalid("beta", "must be finite and >= 0"));
    }
    let (lo, hi) = c.rate_threshold_range_bps;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
        return Err(ConfigError::invalid(
            "rate_threshold_range_bps",
            "must satisfy 0 <= lo <= hi",
        ));
    }
    positive("path_loss_exponent", c.path_loss_exponent)?;
    positive("reference_distance_m", c.reference_distance_m)?;
    positive("area_side_m", c.area_side_m)?;
    finite("direct_gain_advantage_db", c.direct_gain_advantage_db)?;
    if !(c.doppler_coherence_product.is_finite() && c.doppler_coherence_product >= 0.0) {
        return Err(ConfigError::invalid(
            "doppler_coherence_product",
            "must be finite and >= 0",
        ));
    }
    unit_interval("pu_busy_prob", c.pu_busy_prob)?;
    positive("likelihood_sigma_frac", c.likelihood_sigma_frac)?;
    unit_interval("mutation_prob", c.mutation_prob)?;
    if !(c.ess_threshold_frac > 0.0 && c.ess_threshold_frac <= 1.0) {
        return Err(ConfigError::invalid("ess_threshold_frac", "must lie in (0, 1]"));
    }
    let ar = ar_coefficients(c.doppler_coherence_product, c.ar_order)
        .map_err(|e| ConfigError::invalid("ar_order", e.to_string()))?;

    Ok(ValidatedConfig {
        p_total_w: dbm_to_watts(c.p_total_max_dbm),
        p_band_max_w: dbm_to_watts(c.p_band_max_dbm),
        noise_band_w: dbm_to_watts(c.noise_psd_dbm_hz) * c.bandwidth_hz,
        direct_gain_advantage: db_to_linear(c.direct_gain_advantage_db),
        ar,
        config,
    })
}
