use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{
    ExperimentConfig, ExperimentKind, GameFamily, Mode, DEFAULT_NUM_GAMES, DEFAULT_TRAJECTORIES,
};
use super::plateau::generate_plateau_game;
use super::{hitting_time_at, Curve, GameId, HittingRecord, SweepResult};
use crate::bounds::{beta_threshold_general, ThresholdVariant};
use crate::dynamics::{
    baseline_step, exp3_step_size, hedge_step_size, product_expected_potential, step_index,
    BaselineRule, BaselineState, DynamicsConfig, NoiseMode, Rule,
};
use crate::error::{Error, Result};
use crate::game::{game_constants, PotentialGame};
use crate::markov::{build_transition, PowerLadder};
use crate::numeric::mean_and_std;

/// One game's curve on the shared recording grid.
struct GameCurve {
    mean: Vec<f64>,
    std: Vec<f64>,
    max_potential: f64,
}

/// Accumulates per-time sums over trajectories in a fixed order.
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    count: usize,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            sum: vec![0.0; len],
            sum_sq: vec![0.0; len],
            count: 0,
        }
    }

    fn finish(self, max_potential: f64) -> GameCurve {
        let n = self.count as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let std = self
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| (q / n - m * m).max(0.0).sqrt())
            .collect();
        GameCurve {
            mean,
            std,
            max_potential,
        }
    }
}

fn trajectory_rng(base_seed: u64, game_id: usize, trajectory: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(((game_id as u64) << 32) | trajectory as u64);
    rng
}

fn max_potential(game: &PotentialGame) -> f64 {
    game.potential_range().1
}

/// Threshold `beta` of the convergence theorem matching `rule`.
pub(crate) fn theorem_beta(game: &PotentialGame, rule: Rule, eps: f64) -> Result<f64> {
    let c = game_constants(game);
    let variant = match rule {
        Rule::LogLinear | Rule::BinaryLogLinear => ThresholdVariant::Theorem1,
        Rule::FixedShare | Rule::NoisyLogLinear => ThresholdVariant::Theorem3,
        Rule::ModifiedSymmetric => {
            return Err(Error::InvalidParameter(
                "no step-indexed threshold for the modified rule".into(),
            ))
        }
    };
    beta_threshold_general(
        c.delta.value()?,
        game.num_actions(),
        game.num_players(),
        c.optimal_count,
        eps,
        variant,
    )
}

fn resolve_mode(config: &ExperimentConfig, rule: Rule, game: &PotentialGame) -> Mode {
    let chain_exists =
        !(rule == Rule::NoisyLogLinear && config.rule.noise_mode == NoiseMode::PerRound);
    match config.mode {
        Mode::Auto if chain_exists && game.num_profiles() <= config.exact_state_limit => {
            Mode::Exact
        }
        Mode::Auto => Mode::MonteCarlo,
        m => m,
    }
}

fn exact_curve(
    game: &PotentialGame,
    dynamics: &DynamicsConfig,
    times: &[u64],
) -> Result<GameCurve> {
    let p = build_transition(game, dynamics)?;
    let mut ladder = PowerLadder::new(&p);
    let n = game.num_profiles();
    let phi = game.potential();
    let mut mu = vec![1.0 / n as f64; n];
    let mut prev = 0;
    let (mut mean, mut std) = (
        Vec::with_capacity(times.len()),
        Vec::with_capacity(times.len()),
    );
    for &t in times {
        mu = ladder.advance(&mu, t - prev);
        prev = t;
        let m: f64 = mu.iter().zip(phi).map(|(w, f)| w * f).sum();
        let q: f64 = mu.iter().zip(phi).map(|(w, f)| w * f * f).sum();
        mean.push(m);
        std.push((q - m * m).max(0.0).sqrt());
    }
    Ok(GameCurve {
        mean,
        std,
        max_potential: max_potential(game),
    })
}

fn monte_carlo_curve(
    game: &PotentialGame,
    dynamics: &DynamicsConfig,
    times: &[u64],
    trajectories: usize,
    base_seed: u64,
    game_id: usize,
) -> Result<GameCurve> {
    let noise = dynamics.noise_table(game);
    let mut acc = Moments::new(times.len());
    for k in 0..trajectories {
        let mut rng = trajectory_rng(base_seed, game_id, k);
        let mut idx = rng.gen_range(0..game.num_profiles());
        let mut t = 0u64;
        for (slot, &target) in times.iter().enumerate() {
            while t < target {
                idx = step_index(game, dynamics, &noise, idx, &mut rng)?;
                t += 1;
            }
            let v = game.potential_at(idx);
            acc.sum[slot] += v;
            acc.sum_sq[slot] += v * v;
        }
        acc.count += 1;
    }
    Ok(acc.finish(max_potential(game)))
}

fn baseline_curve(
    game: &PotentialGame,
    rule: BaselineRule,
    times: &[u64],
    horizon: u64,
    trajectories: usize,
    base_seed: u64,
    game_id: usize,
) -> Result<GameCurve> {
    let a = game.num_actions();
    let fixed = match rule {
        BaselineRule::Hedge => hedge_step_size(a, horizon),
        BaselineRule::Exp3 => exp3_step_size(a, horizon),
        BaselineRule::AnnealedEw => 1.0,
    };
    let mut acc = Moments::new(times.len());
    for k in 0..trajectories {
        let mut rng = trajectory_rng(base_seed, game_id, k);
        let mut state = BaselineState::new(game.num_players(), a);
        let mut t = 0u64;
        for (slot, &target) in times.iter().enumerate() {
            while t < target {
                baseline_step(game, &mut state, rule, fixed, &mut rng)?;
                t += 1;
            }
            let eta = state.step_size(rule, fixed, a);
            let v = product_expected_potential(game, &state.mixed_strategies(eta))?;
            acc.sum[slot] += v;
            acc.sum_sq[slot] += v * v;
        }
        acc.count += 1;
    }
    Ok(acc.finish(max_potential(game)))
}

/// Appends per-game and aggregate curves and hitting times.
fn push_sweep(
    result: &mut SweepResult,
    sweep_id: &str,
    times: &[u64],
    curves: Vec<GameCurve>,
    eps: f64,
) {
    let g = curves.len();
    let mut agg_mean = Vec::with_capacity(times.len());
    let mut agg_std = Vec::with_capacity(times.len());
    let mut column = vec![0.0; g];
    for slot in 0..times.len() {
        for (c, v) in curves.iter().zip(column.iter_mut()) {
            *v = c.mean[slot];
        }
        let (m, s) = mean_and_std(&column);
        agg_mean.push(m);
        agg_std.push(s);
    }
    let agg_threshold = curves.iter().map(|c| c.max_potential).sum::<f64>() / g as f64 - eps;
    for (game_id, c) in curves.into_iter().enumerate() {
        result.hitting.push(HittingRecord {
            sweep_id: sweep_id.to_string(),
            game_id: GameId::Game(game_id),
            hitting_t: hitting_time_at(times, &c.mean, c.max_potential - eps),
        });
        result.curves.push(Curve {
            sweep_id: sweep_id.to_string(),
            game_id: GameId::Game(game_id),
            times: times.to_vec(),
            mean: c.mean,
            std: c.std,
        });
    }
    result.hitting.push(HittingRecord {
        sweep_id: sweep_id.to_string(),
        game_id: GameId::All,
        hitting_t: hitting_time_at(times, &agg_mean, agg_threshold),
    });
    result.curves.push(Curve {
        sweep_id: sweep_id.to_string(),
        game_id: GameId::All,
        times: times.to_vec(),
        mean: agg_mean,
        std: agg_std,
    });
    result.horizons.insert(
        sweep_id.to_string(),
        *times.last().expect("grid is non-empty"),
    );
}

fn load_games(config: &ExperimentConfig, delta: f64) -> Result<Vec<PotentialGame>> {
    match config.game_family {
        GameFamily::PlateauIdenticalInterest => (0..config.num_games)
            .map(|g| generate_plateau_game(delta, config.base_seed.wrapping_add(g as u64)))
            .collect(),
        GameFamily::Custom => {
            let path = config.game_path.as_ref().ok_or_else(|| {
                Error::InvalidParameter("custom game family needs game_path".into())
            })?;
            Ok(vec![PotentialGame::load_json(path)?])
        }
    }
}

fn fmt_value(x: f64) -> String {
    format!("{x}")
}

/// `delta=<d>;eps=<e>`, or `eps=<e>` for a custom game.
pub(crate) fn sweep_id(delta: Option<f64>, eps: f64) -> String {
    match delta {
        Some(d) => format!("delta={};eps={}", fmt_value(d), fmt_value(eps)),
        None => format!("eps={}", fmt_value(eps)),
    }
}

fn labeled<T: PartialEq + std::fmt::Display>(value: T, default: T) -> String {
    if value == default {
        format!("{value} (default)")
    } else {
        value.to_string()
    }
}

fn base_metadata(config: &ExperimentConfig, result: &mut SweepResult) {
    let m = &mut result.metadata;
    let kind = match config.kind {
        ExperimentKind::Sweep => "sweep",
        ExperimentKind::Comparison => "comparison",
    };
    m.insert("kind".into(), kind.into());
    m.insert("base_seed".into(), config.base_seed.to_string());
    m.insert(
        "num_games".into(),
        match config.game_family {
            GameFamily::Custom => "1 (custom game)".into(),
            GameFamily::PlateauIdenticalInterest => labeled(config.num_games, DEFAULT_NUM_GAMES),
        },
    );
    m.insert(
        "trajectories_per_game".into(),
        labeled(config.trajectories, DEFAULT_TRAJECTORIES),
    );
    m.insert(
        "initial_distribution".into(),
        "uniform over profiles (default)".into(),
    );
    m.insert(
        "horizon".into(),
        labeled(config.horizon, super::config::DEFAULT_HORIZON),
    );
    m.insert("exact_horizon".into(), config.exact_horizon().to_string());
    m.insert(
        "curve_statistic".into(),
        "per-game rows: mean/std of Phi(a_t) over trajectories; all rows: mean/std across games"
            .into(),
    );
}

fn dynamics_curves(
    config: &ExperimentConfig,
    games: &[PotentialGame],
    rule: Rule,
    eps: f64,
) -> Result<(Vec<GameCurve>, Vec<u64>, Mode, f64)> {
    let mode = resolve_mode(config, rule, &games[0]);
    let horizon = match mode {
        Mode::Exact => config.exact_horizon(),
        _ => config.horizon,
    };
    let times = config.record.times(horizon);
    let betas = games
        .iter()
        .map(|g| match config.rule.beta {
            Some(b) => Ok(b),
            None => theorem_beta(g, rule, eps),
        })
        .collect::<Result<Vec<f64>>>()?;
    let curves = games
        .par_iter()
        .enumerate()
        .map(|(game_id, game)| {
            let seed = config.base_seed.wrapping_add(game_id as u64);
            let dynamics = config.rule.instantiate(rule, betas[game_id], seed);
            match mode {
                Mode::Exact => exact_curve(game, &dynamics, &times),
                _ => monte_carlo_curve(
                    game,
                    &dynamics,
                    &times,
                    config.trajectories,
                    config.base_seed,
                    game_id,
                ),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((curves, times, mode, betas[0]))
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => "exact",
        Mode::MonteCarlo => "monte_carlo",
        Mode::Auto => "auto",
    }
}

/// Runs every `(delta, eps)` pair of the configuration for its rule.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut result = SweepResult::default();
    base_metadata(config, &mut result);
    result
        .metadata
        .insert("rule".into(), config.rule.rule.name().into());
    let deltas: Vec<Option<f64>> = match config.game_family {
        GameFamily::PlateauIdenticalInterest => {
            config.delta_values.iter().map(|&d| Some(d)).collect()
        }
        GameFamily::Custom => vec![None],
    };
    for delta in deltas {
        let games = load_games(config, delta.unwrap_or(0.5))?;
        for &eps in &config.eps_values {
            let sweep_id = sweep_id(delta, eps);
            let (curves, times, mode, beta) =
                dynamics_curves(config, &games, config.rule.rule, eps)?;
            result
                .metadata
                .insert(format!("mode.{sweep_id}"), mode_name(mode).into());
            result
                .metadata
                .insert(format!("beta.{sweep_id}"), beta.to_string());
            log::info!("sweep {sweep_id}: mode {}, beta {beta}", mode_name(mode));
            push_sweep(&mut result, &sweep_id, &times, curves, eps);
        }
    }
    Ok(result)
}

/// Runs each configured algorithm on the same games; sweep ids are the
/// algorithm names.
pub fn run_comparison(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut result = SweepResult::default();
    base_metadata(config, &mut result);
    let delta = config.delta_values.first().copied().unwrap_or(0.5);
    let eps = config.eps_values[0];
    let games = load_games(config, delta)?;
    if config.game_family == GameFamily::PlateauIdenticalInterest {
        result.metadata.insert("delta".into(), fmt_value(delta));
    }
    result.metadata.insert("eps".into(), fmt_value(eps));
    for &alg in &config.algorithms {
        let name = alg.name();
        result
            .metadata
            .insert(format!("feedback.{name}"), alg.feedback().into());
        if let Some(rule) = alg.learning_rule() {
            let (curves, times, mode, beta) = dynamics_curves(config, &games, rule, eps)?;
            result
                .metadata
                .insert(format!("mode.{name}"), mode_name(mode).into());
            result
                .metadata
                .insert(format!("beta.{name}"), beta.to_string());
            push_sweep(&mut result, name, &times, curves, eps);
        } else {
            let rule = alg
                .baseline()
                .expect("every algorithm is a rule or a baseline");
            let times = config.record.times(config.horizon);
            let curves = games
                .par_iter()
                .enumerate()
                .map(|(game_id, game)| {
                    baseline_curve(
                        game,
                        rule,
                        &times,
                        config.horizon,
                        config.trajectories,
                        config.base_seed,
                        game_id,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            result
                .metadata
                .insert(format!("mode.{name}"), "monte_carlo".into());
            let step = match rule {
                BaselineRule::Hedge => {
                    hedge_step_size(games[0].num_actions(), config.horizon).to_string()
                }
                BaselineRule::Exp3 => {
                    exp3_step_size(games[0].num_actions(), config.horizon).to_string()
                }
                BaselineRule::AnnealedEw => "ln(A)/sqrt(t)".into(),
            };
            result.metadata.insert(format!("step_size.{name}"), step);
            push_sweep(&mut result, name, &times, curves, eps);
        }
    }
    Ok(result)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<SweepResult> {
    match config.kind {
        ExperimentKind::Sweep => run_sweep(config),
        ExperimentKind::Comparison => run_comparison(config),
    }
}
