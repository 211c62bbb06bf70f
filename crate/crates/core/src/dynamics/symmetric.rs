use rand::Rng;

use super::rules::log_linear_strategy;
use crate::error::{Error, Result};
use crate::game::{ActionProfile, PotentialGame};
use crate::numeric::sample_index;

/// Per-player clock rates `alpha / z_i`, where `z_i` is the fraction of
/// players currently sharing player `i`'s action.
pub fn clock_rates(game: &PotentialGame, index: usize, alpha: f64) -> Vec<f64> {
    let n = game.num_players();
    let mut counts = vec![0usize; game.num_actions()];
    for i in 0..n {
        counts[game.action_at(index, i)] += 1;
    }
    (0..n)
        .map(|i| alpha * n as f64 / counts[game.action_at(index, i)] as f64)
        .collect()
}

pub(crate) fn modified_index<R: Rng + ?Sized>(
    game: &PotentialGame,
    idx: usize,
    beta: f64,
    alpha: f64,
    rng: &mut R,
) -> (usize, f64) {
    let rates = clock_rates(game, idx, alpha);
    let total: f64 = rates.iter().sum();
    // 1 - U lies in (0, 1], so the logarithm is finite.
    let elapsed = -(1.0 - rng.gen::<f64>()).ln() / total;
    let i = sample_index(&rates, rng);
    let a = sample_index(&log_linear_strategy(game, idx, i, beta), rng);
    (game.with_action(idx, i, a), elapsed)
}

/// One event of the continuous-time modified log-linear rule.
///
/// Returns the new profile and the exponential holding time that preceded it.
/// Players ring at rate `alpha / z_i` and revise with the ordinary log-linear
/// response.
pub fn modified_symmetric_step<R: Rng + ?Sized>(
    game: &PotentialGame,
    state: &ActionProfile,
    beta: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<(ActionProfile, f64)> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let idx = game.index_of(state)?;
    let (next, dt) = modified_index(game, idx, beta, alpha, rng);
    Ok((game.profile_of(next), dt))
}
