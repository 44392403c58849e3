//! Deterministic simulator of distributed multiband spectrum and power
//! allocation. Every user runs a particle filter over candidate band
//! selections, splits its power by capped water-filling and shares its
//! choice with everyone else once per slot.

pub mod alloc;
pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod metrics_io;
pub mod objectives;
pub mod oracle;
pub mod pfilter;
pub mod phy;
pub mod powerfill;
pub mod primary_user;
pub mod rng;

pub use alloc::{AllocationMatrix, Gains, PowerMatrix};
pub use channel::{ArCoefficients, ChannelTensor};
pub use config::{validate, ObjectiveKind, SystemConfig, ValidatedConfig};
pub use engine::{jain_index, replicate, run, Aggregate, Engine, RunSummary, SlotRecord};
pub use error::{ChannelError, ConfigError, IoError, OracleError};
pub use oracle::{solve_exhaustive, TinyInstance};
pub use pfilter::{Particle, ParticleSet};
pub use powerfill::{water_fill, PowerRule, WaterFillProblem};
pub use primary_user::AvailabilityVector;
pub use rng::{Module, RngStream, StreamTag};
