use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::PotentialGame;
use crate::numeric::{sample_index, softmax};

/// Multiplicative-weights baselines. Every player plays simultaneously each
/// round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineRule {
    /// Full-information exponential weights.
    Hedge,
    /// Bandit feedback with importance-weighted loss estimates.
    Exp3,
    /// Exponential weights on importance-weighted estimates with the
    /// decreasing step size `ln(A) / sqrt(t)`.
    AnnealedEw,
}

impl BaselineRule {
    pub fn name(self) -> &'static str {
        match self {
            BaselineRule::Hedge => "hedge",
            BaselineRule::Exp3 => "exp3",
            BaselineRule::AnnealedEw => "annealed_ew",
        }
    }
}

/// `sqrt(8 ln(A) / T)`, the usual fixed-horizon tuning.
pub fn hedge_step_size(num_actions: usize, horizon: u64) -> f64 {
    (8.0 * (num_actions as f64).ln() / horizon.max(1) as f64).sqrt()
}

/// `sqrt(2 ln(A) / (A T))`, the fixed-horizon bandit tuning.
pub fn exp3_step_size(num_actions: usize, horizon: u64) -> f64 {
    let a = num_actions as f64;
    (2.0 * a.ln() / (a * horizon.max(1) as f64)).sqrt()
}

/// `ln(A) / sqrt(t)` for round `t >= 1`.
pub fn annealed_step_size(num_actions: usize, round: u64) -> f64 {
    (num_actions as f64).ln() / (round.max(1) as f64).sqrt()
}

/// Per-player cumulative scores. Mixed strategies are `softmax(eta * scores)`;
/// scores accumulate utilities (Hedge) or negated loss estimates (bandit rules).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineState {
    pub scores: Vec<Vec<f64>>,
    pub round: u64,
}

impl BaselineState {
    pub fn new(num_players: usize, num_actions: usize) -> Self {
        Self {
            scores: vec![vec![0.0; num_actions]; num_players],
            round: 0,
        }
    }

    /// Step size that the next round will use.
    pub fn step_size(&self, rule: BaselineRule, fixed: f64, num_actions: usize) -> f64 {
        match rule {
            BaselineRule::AnnealedEw => annealed_step_size(num_actions, self.round + 1),
            BaselineRule::Hedge | BaselineRule::Exp3 => fixed,
        }
    }

    pub fn mixed_strategies(&self, step_size: f64) -> Vec<Vec<f64>> {
        self.scores.iter().map(|s| softmax(s, step_size)).collect()
    }
}

/// Plays one simultaneous round and updates `state`. Returns the realized
/// profile index. `step_size` is used by Hedge and EXP3; the annealed rule
/// derives its own from the round counter. Utilities are taken to lie in
/// `[0, 1]` for the bandit loss estimates.
pub fn baseline_step<R: Rng + ?Sized>(
    game: &PotentialGame,
    state: &mut BaselineState,
    rule: BaselineRule,
    step_size: f64,
    rng: &mut R,
) -> Result<usize> {
    let (n, a) = (game.num_players(), game.num_actions());
    if state.scores.len() != n || state.scores.iter().any(|s| s.len() != a) {
        return Err(Error::Shape(
            "baseline state does not match the game".into(),
        ));
    }
    let eta = state.step_size(rule, step_size, a);
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive, got {eta}"
        )));
    }
    let strategies = state.mixed_strategies(eta);
    let mut idx = 0;
    for (i, p) in strategies.iter().enumerate() {
        idx += sample_index(p, rng) * game.stride(i);
    }
    for (i, p) in strategies.iter().enumerate() {
        let played = game.action_at(idx, i);
        match rule {
            BaselineRule::Hedge => {
                for (s, u) in state.scores[i].iter_mut().zip(game.utility_row(i, idx)) {
                    *s += u;
                }
            }
            BaselineRule::Exp3 | BaselineRule::AnnealedEw => {
                let loss = 1.0 - game.utility(i, idx);
                state.scores[i][played] -= loss / p[played];
            }
        }
    }
    state.round += 1;
    Ok(idx)
}

/// `E[Phi]` under the product of the players' mixed strategies.
pub fn product_expected_potential(game: &PotentialGame, strategies: &[Vec<f64>]) -> Result<f64> {
    if strategies.len() != game.num_players()
        || strategies.iter().any(|p| p.len() != game.num_actions())
    {
        return Err(Error::Shape(
            "one mixed strategy per player is required".into(),
        ));
    }
    let mut total = 0.0;
    for idx in 0..game.num_profiles() {
        let w: f64 = strategies
            .iter()
            .enumerate()
            .map(|(i, p)| p[game.action_at(idx, i)])
            .product();
        total += w * game.potential_at(idx);
    }
    Ok(total)
}
