use rand::Rng;

use super::{DynamicsConfig, NoiseMode, NoiseTable, Rule};
use crate::error::{Error, Result};
use crate::game::{ActionProfile, PotentialGame};
use crate::numeric::{sample_index, softmax};

/// Player `i`'s log-linear response at profile `index`: the softmax of
/// `beta * U_i(., a_-i)`.
pub fn log_linear_strategy(
    game: &PotentialGame,
    index: usize,
    player: usize,
    beta: f64,
) -> Vec<f64> {
    softmax(&game.utility_row(player, index), beta)
}

/// Fixed-share mixture `xi / A + (1 - xi) * softmax`.
pub fn fixed_share_strategy(
    game: &PotentialGame,
    index: usize,
    player: usize,
    beta: f64,
    xi: f64,
) -> Vec<f64> {
    let uniform = xi / game.num_actions() as f64;
    log_linear_strategy(game, index, player, beta)
        .into_iter()
        .map(|p| uniform + (1.0 - xi) * p)
        .collect()
}

/// Softmax of `beta * (U_i + noise_i)` over player `i`'s actions.
pub fn noisy_strategy(
    game: &PotentialGame,
    noise: &NoiseTable,
    index: usize,
    player: usize,
    beta: f64,
) -> Vec<f64> {
    let stride = game.stride(player);
    let base = index - game.action_at(index, player) * stride;
    let row: Vec<f64> = (0..game.num_actions())
        .map(|k| {
            let j = base + k * stride;
            game.utility(player, j) + noise.value(player, j)
        })
        .collect();
    softmax(&row, beta)
}

/// Probability that a player holding the profile at `index` switches to the
/// trial action `trial`, i.e. `e^{beta U(trial)} / (e^{beta U(a)} + e^{beta U(trial)})`.
/// Equals 1/2 when `trial` is the current action.
pub fn binary_move_probability(
    game: &PotentialGame,
    index: usize,
    player: usize,
    trial: usize,
    beta: f64,
) -> f64 {
    let current = game.utility(player, index);
    let proposed = game.utility(player, game.with_action(index, player, trial));
    // Logistic form; exact and overflow-free for any beta.
    let z = beta * (proposed - current);
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn pick_player<R: Rng + ?Sized>(game: &PotentialGame, rng: &mut R) -> usize {
    rng.gen_range(0..game.num_players())
}

fn profile_step<R, F>(
    game: &PotentialGame,
    state: &ActionProfile,
    rng: &mut R,
    f: F,
) -> Result<ActionProfile>
where
    R: Rng + ?Sized,
    F: FnOnce(usize, &mut R) -> usize,
{
    let idx = game.index_of(state)?;
    Ok(game.profile_of(f(idx, rng)))
}

pub(crate) fn log_linear_index<R: Rng + ?Sized>(
    game: &PotentialGame,
    idx: usize,
    beta: f64,
    rng: &mut R,
) -> usize {
    let i = pick_player(game, rng);
    let a = sample_index(&log_linear_strategy(game, idx, i, beta), rng);
    game.with_action(idx, i, a)
}

pub(crate) fn binary_index<R: Rng + ?Sized>(
    game: &PotentialGame,
    idx: usize,
    beta: f64,
    rng: &mut R,
) -> usize {
    let i = pick_player(game, rng);
    let trial = rng.gen_range(0..game.num_actions());
    let p = binary_move_probability(game, idx, i, trial, beta);
    if rng.gen::<f64>() < p {
        game.with_action(idx, i, trial)
    } else {
        idx
    }
}

pub(crate) fn fixed_share_index<R: Rng + ?Sized>(
    game: &PotentialGame,
    idx: usize,
    beta: f64,
    xi: f64,
    rng: &mut R,
) -> usize {
    let i = pick_player(game, rng);
    let a = sample_index(&fixed_share_strategy(game, idx, i, beta, xi), rng);
    game.with_action(idx, i, a)
}

pub(crate) fn noisy_index<R: Rng + ?Sized>(
    game: &PotentialGame,
    noise: &NoiseTable,
    idx: usize,
    beta: f64,
    rng: &mut R,
) -> usize {
    let i = pick_player(game, rng);
    let a = sample_index(&noisy_strategy(game, noise, idx, i, beta), rng);
    game.with_action(idx, i, a)
}

/// One round of standard log-linear learning.
pub fn log_linear_step<R: Rng + ?Sized>(
    game: &PotentialGame,
    state: &ActionProfile,
    beta: f64,
    rng: &mut R,
) -> Result<ActionProfile> {
    profile_step(game, state, rng, |idx, rng| {
        log_linear_index(game, idx, beta, rng)
    })
}

/// One round of binary log-linear learning: a uniformly random player
/// proposes a uniformly random trial action and accepts it with the
/// two-point logit probability.
pub fn binary_log_linear_step<R: Rng + ?Sized>(
    game: &PotentialGame,
    state: &ActionProfile,
    beta: f64,
    rng: &mut R,
) -> Result<ActionProfile> {
    profile_step(game, state, rng, |idx, rng| {
        binary_index(game, idx, beta, rng)
    })
}

/// One round of fixed-share log-linear learning. `xi` must lie in `[0, 1]`.
pub fn fixed_share_step<R: Rng + ?Sized>(
    game: &PotentialGame,
    state: &ActionProfile,
    beta: f64,
    xi: f64,
    rng: &mut R,
) -> Result<ActionProfile> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::InvalidParameter(format!(
            "xi must lie in [0,1], got {xi}"
        )));
    }
    profile_step(game, state, rng, |idx, rng| {
        fixed_share_index(game, idx, beta, xi, rng)
    })
}

/// One round of log-linear learning on noise-perturbed utilities.
pub fn noisy_log_linear_step<R: Rng + ?Sized>(
    game: &PotentialGame,
    state: &ActionProfile,
    beta: f64,
    noise: &NoiseTable,
    rng: &mut R,
) -> Result<ActionProfile> {
    noise.check_shape(game)?;
    profile_step(game, state, rng, |idx, rng| {
        noisy_index(game, noise, idx, beta, rng)
    })
}

/// Index-level step for every discrete-time rule. Per-round noise is drawn
/// from `rng` when the config asks for it; otherwise `noise` is used.
pub fn step_index<R: Rng + ?Sized>(
    game: &PotentialGame,
    config: &DynamicsConfig,
    noise: &NoiseTable,
    idx: usize,
    rng: &mut R,
) -> Result<usize> {
    Ok(match config.rule {
        Rule::LogLinear => log_linear_index(game, idx, config.beta, rng),
        Rule::BinaryLogLinear => binary_index(game, idx, config.beta, rng),
        Rule::FixedShare => fixed_share_index(game, idx, config.beta, config.xi, rng),
        Rule::NoisyLogLinear => match config.noise_mode {
            NoiseMode::Frozen => noisy_index(game, noise, idx, config.beta, rng),
            NoiseMode::PerRound => {
                let i = pick_player(game, rng);
                let stride = game.stride(i);
                let base = idx - game.action_at(idx, i) * stride;
                let row: Vec<f64> = (0..game.num_actions())
                    .map(|k| {
                        let eps = if config.xi > 0.0 {
                            rng.gen_range(-config.xi..=config.xi)
                        } else {
                            0.0
                        };
                        game.utility(i, base + k * stride) + eps
                    })
                    .collect();
                let a = sample_index(&softmax(&row, config.beta), rng);
                game.with_action(idx, i, a)
            }
        },
        Rule::ModifiedSymmetric => {
            return Err(Error::InvalidParameter(
                "the modified symmetric rule is continuous-time; use modified_symmetric_step"
                    .into(),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::intro_game;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn intro_strategy_values() {
        let g = intro_game();
        // Player 0 facing opponent action A (index 0): U = [5, -5].
        let p = log_linear_strategy(&g, 0, 0, 1.0);
        let expected = 1.0 / (1.0 + (-10.0f64).exp());
        assert!((p[0] - expected).abs() < 1e-15);
        let p0 = log_linear_strategy(&g, 0, 0, 0.0);
        assert_eq!(p0, vec![0.5, 0.5]);
    }

    #[test]
    fn intro_state_bb_responses() {
        let g = intro_game();
        let e = std::f64::consts::E;
        // (B,B) is index 3. Player 0 compares U1(A,B) = -1 with U1(B,B) = 1.
        let p = log_linear_strategy(&g, 3, 0, 1.0);
        assert!((p[0] - e.powi(-1) / (e.powi(-1) + e)).abs() < 1e-15);
        // Player 1 with trial A compares U2(B,A) = -4 with U2(B,B) = 4.
        let q = binary_move_probability(&g, 3, 1, 0, 1.0);
        assert!((q - e.powi(-4) / (e.powi(4) + e.powi(-4))).abs() < 1e-15);
        assert!((q - 3.35e-4).abs() < 1e-6);
    }

    #[test]
    fn fixed_share_boundaries() {
        let g = intro_game();
        for idx in 0..4 {
            for i in 0..2 {
                assert_eq!(
                    fixed_share_strategy(&g, idx, i, 0.7, 0.0),
                    log_linear_strategy(&g, idx, i, 0.7)
                );
                assert_eq!(fixed_share_strategy(&g, idx, i, 0.7, 1.0), vec![0.5, 0.5]);
            }
        }
        // softmax (0.9, 0.1) at xi = 0.5 mixes to (0.7, 0.3).
        let u = vec![(9.0f64).ln(), 0.0];
        let g2 = PotentialGame::identical_interest(1, 2, u).unwrap();
        let p = fixed_share_strategy(&g2, 0, 0, 1.0, 0.5);
        assert!((p[0] - 0.7).abs() < 1e-15 && (p[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn noise_shift_and_single_entry() {
        let g = intro_game();
        let zero = NoiseTable::zeros(&g);
        let shifted = NoiseTable::from_values(0.3, vec![vec![0.3; 4], vec![-0.3; 4]]).unwrap();
        for idx in 0..4 {
            for i in 0..2 {
                let base = log_linear_strategy(&g, idx, i, 0.9);
                assert_eq!(noisy_strategy(&g, &zero, idx, i, 0.9), base);
                let s = noisy_strategy(&g, &shifted, idx, i, 0.9);
                assert!(s.iter().zip(&base).all(|(a, b)| (a - b).abs() < 1e-15));
            }
        }
        let mut v = vec![vec![0.0; 4]; 2];
        v[0][1] = 0.2;
        let bumped = NoiseTable::from_values(0.2, v).unwrap();
        let base = log_linear_strategy(&g, 0, 0, 2.0);
        let s = noisy_strategy(&g, &bumped, 0, 0, 2.0);
        assert!(s[1] / base[1] <= (2.0f64 * 0.2).exp() + 1e-12);
        assert!(s[1] > base[1]);
    }

    #[test]
    fn fixed_share_floor() {
        let g = intro_game();
        let p = fixed_share_strategy(&g, 0, 0, 50.0, 0.2);
        assert!(p.iter().all(|&x| x >= 0.1 - 1e-15));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binary_probability_symmetry() {
        let g = intro_game();
        for idx in 0..4 {
            for i in 0..2 {
                let a = g.action_at(idx, i);
                assert_eq!(binary_move_probability(&g, idx, i, a, 3.0), 0.5);
                let other = 1 - a;
                let j = g.with_action(idx, i, other);
                let fwd = binary_move_probability(&g, idx, i, other, 0.7);
                let back = binary_move_probability(&g, j, i, a, 0.7);
                assert!((fwd + back - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn huge_beta_is_best_response() {
        let g = intro_game();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // From (B,A) = index 1: player 0 moves to A, player 1 to B.
        for _ in 0..200 {
            let next = log_linear_step(&g, &g.profile_of(1), 1e6, &mut rng).unwrap();
            let i = g.index_of(&next).unwrap();
            assert!(i == 0 || i == 3, "moved to {i}");
        }
    }

    #[test]
    fn steps_change_at_most_one_player() {
        let g = intro_game();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let noise = NoiseTable::sample(&g, 0.1, 1);
        let mut s = ActionProfile(vec![0, 1]);
        for k in 0..500 {
            let next = match k % 4 {
                0 => log_linear_step(&g, &s, 0.5, &mut rng),
                1 => binary_log_linear_step(&g, &s, 0.5, &mut rng),
                2 => fixed_share_step(&g, &s, 0.5, 0.3, &mut rng),
                _ => noisy_log_linear_step(&g, &s, 0.5, &noise, &mut rng),
            }
            .unwrap();
            let diff = s
                .actions()
                .iter()
                .zip(next.actions())
                .filter(|(a, b)| a != b)
                .count();
            assert!(diff <= 1);
            s = next;
        }
        assert!(fixed_share_step(&g, &s, 1.0, 1.5, &mut rng).is_err());
    }
}
