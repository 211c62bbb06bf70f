//! Learning rules as single-step samplers, plus trajectory runners.
//!
//! Every sampler takes an explicit RNG handle and is otherwise pure, so
//! trajectories can run on independent workers. Reproducibility comes from
//! seeding: trajectory `k` of an experiment uses `base_seed + k`.

mod baseline;
mod rules;
mod symmetric;
mod trajectory;

pub use baseline::{
    annealed_step_size, baseline_step, exp3_step_size, hedge_step_size, product_expected_potential,
    BaselineRule, BaselineState,
};
pub use rules::{
    binary_log_linear_step, binary_move_probability, fixed_share_step, fixed_share_strategy,
    log_linear_step, log_linear_strategy, noisy_log_linear_step, noisy_strategy, step_index,
};
pub use symmetric::{clock_rates, modified_symmetric_step};
pub use trajectory::{run_trajectory, Initial, Trajectory};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::PotentialGame;

/// `beta` used as "effectively infinite" rationality in best-response checks.
pub const EFFECTIVELY_INFINITE_BETA: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    LogLinear,
    BinaryLogLinear,
    FixedShare,
    NoisyLogLinear,
    ModifiedSymmetric,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::LogLinear => "log_linear",
            Rule::BinaryLogLinear => "binary_log_linear",
            Rule::FixedShare => "fixed_share",
            Rule::NoisyLogLinear => "noisy_log_linear",
            Rule::ModifiedSymmetric => "modified_symmetric",
        }
    }
}

/// How utility noise is realized for [`Rule::NoisyLogLinear`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// One table drawn per experiment and then held fixed; the induced chain is
    /// time-homogeneous.
    #[default]
    Frozen,
    /// Fresh noise every round. Trajectories only; there is no fixed matrix.
    PerRound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub rule: Rule,
    pub beta: f64,
    /// Exploration share (fixed-share) or noise bound (noisy rule).
    #[serde(default)]
    pub xi: f64,
    /// Clock rate scale of the modified symmetric rule.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    /// Seed of the frozen noise table; shared by every trajectory of one game.
    #[serde(default)]
    pub noise_seed: u64,
    #[serde(default)]
    pub noise_mode: NoiseMode,
}

fn default_alpha() -> f64 {
    1.0
}

impl DynamicsConfig {
    pub fn new(rule: Rule, beta: f64) -> Self {
        Self {
            rule,
            beta,
            xi: 0.0,
            alpha: 1.0,
            seed: 0,
            noise_seed: 0,
            noise_mode: NoiseMode::Frozen,
        }
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_noise_seed(mut self, seed: u64) -> Self {
        self.noise_seed = seed;
        self
    }

    /// Checks parameter ranges. Returns warnings for settings that are legal
    /// but fall outside the hypotheses of the robustness results.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and >= 0, got {}",
                self.beta
            )));
        }
        match self.rule {
            Rule::FixedShare => {
                if !(self.xi > 0.0 && self.xi < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "fixed-share exploration xi must lie in (0,1), got {}",
                        self.xi
                    )));
                }
            }
            Rule::NoisyLogLinear => {
                if !(self.xi >= 0.0) || !self.xi.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "noise bound xi must be finite and >= 0, got {}",
                        self.xi
                    )));
                }
                if 2.0 * self.beta * self.xi > 1.0 {
                    let w = format!(
                        "2*beta*xi = {} > 1: outside the noisy-utility robustness hypothesis",
                        2.0 * self.beta * self.xi
                    );
                    log::warn!("{w}");
                    warnings.push(w);
                }
            }
            Rule::ModifiedSymmetric => {
                if !(self.alpha > 0.0) || !self.alpha.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "clock rate alpha must be positive, got {}",
                        self.alpha
                    )));
                }
            }
            Rule::LogLinear | Rule::BinaryLogLinear => {}
        }
        Ok(warnings)
    }

    /// The frozen noise table for this configuration (all zeros unless the
    /// rule is noisy).
    pub fn noise_table(&self, game: &PotentialGame) -> NoiseTable {
        match self.rule {
            Rule::NoisyLogLinear => NoiseTable::sample(game, self.xi, self.noise_seed),
            _ => NoiseTable::zeros(game),
        }
    }
}

/// Additive utility noise `xi_i(a)`, one entry per (player, profile), each
/// bounded by `xi` in absolute value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseTable {
    bound: f64,
    values: Vec<Vec<f64>>,
}

impl NoiseTable {
    pub fn zeros(game: &PotentialGame) -> Self {
        Self {
            bound: 0.0,
            values: vec![vec![0.0; game.num_profiles()]; game.num_players()],
        }
    }

    /// Uniform on `[-xi, xi]`, independently per entry.
    pub fn sample(game: &PotentialGame, xi: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..game.num_players())
            .map(|_| {
                (0..game.num_profiles())
                    .map(|_| {
                        if xi > 0.0 {
                            rng.gen_range(-xi..=xi)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Self { bound: xi, values }
    }

    pub fn from_values(bound: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.iter().flatten().any(|v| !(v.abs() <= bound)) {
            return Err(Error::InvalidParameter(format!(
                "noise entry exceeds the bound {bound}"
            )));
        }
        Ok(Self { bound, values })
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn value(&self, player: usize, index: usize) -> f64 {
        self.values[player][index]
    }

    pub fn values(&self, player: usize) -> &[f64] {
        &self.values[player]
    }

    pub(crate) fn check_shape(&self, game: &PotentialGame) -> Result<()> {
        if self.values.len() != game.num_players()
            || self.values.iter().any(|v| v.len() != game.num_profiles())
        {
            return Err(Error::Shape("noise table does not match the game".into()));
        }
        Ok(())
    }
}
