//! Log-linear learning in finite potential games.
//!
//! The crate is organized bottom-up:
//!
//! - [`game`]: potential games, profile encoding, game constants, occupancy states.
//! - [`dynamics`]: single-step samplers and trajectory runners for the learning rules
//!   and the multiplicative-weights baselines.
//! - [`markov`]: exact transition matrices, stationary distributions, time
//!   reversal, total-variation evolution, spectral gaps and a log-Sobolev estimator.
//! - [`bounds`]: closed-form thresholds and time bounds, assembled into a [`BoundsReport`].
//! - [`experiments`]: plateau-game sweeps, baseline comparisons and CSV output.

pub mod bounds;
pub mod dist;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod game;
pub mod markov;
mod numeric;

pub use bounds::BoundsReport;
pub use dist::DistributionVector;
pub use error::{Error, Result};
pub use game::{ActionProfile, GameConstants, OccupancyState, PotentialGame, SuboptimalityGap};
