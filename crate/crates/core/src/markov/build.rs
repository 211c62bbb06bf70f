use nalgebra::DMatrix;

use super::{ChainShape, Envelope, TransitionMatrix, DEFAULT_STATE_CAP};
use crate::dist::DistributionVector;
use crate::dynamics::{DynamicsConfig, NoiseMode, NoiseTable, Rule};
use crate::error::{Error, Result};
use crate::game::PotentialGame;
use crate::numeric::{log_add_exp, log_sum_exp};

/// `ln(1 / (1 + e^{-z}))` without overflow.
fn ln_logistic(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Exact transition matrix of the configured rule, with the frozen noise table
/// implied by the config and the default state cap.
pub fn build_transition(game: &PotentialGame, config: &DynamicsConfig) -> Result<TransitionMatrix> {
    let noise = config.noise_table(game);
    build_transition_with(game, config, &noise, DEFAULT_STATE_CAP)
}

/// Exact transition matrix with an explicit noise table and state cap.
///
/// Entries are `P(a, a') = p_i(a'_i | a) / N` for profiles differing only in
/// player `i`'s action. The diagonal aggregates every player's probability of
/// keeping its action.
pub fn build_transition_with(
    game: &PotentialGame,
    config: &DynamicsConfig,
    noise: &NoiseTable,
    cap: usize,
) -> Result<TransitionMatrix> {
    config.validate()?;
    let size = game.num_profiles();
    if size > cap {
        return Err(Error::StateSpaceTooLarge {
            states: size as u128,
            cap,
        });
    }
    match config.rule {
        Rule::ModifiedSymmetric => {
            return Err(Error::InvalidParameter(
                "the modified symmetric rule is a continuous-time chain on occupancies; use OccupancyChain".into(),
            ))
        }
        Rule::NoisyLogLinear if config.noise_mode == NoiseMode::PerRound => {
            return Err(Error::InvalidParameter(
                "per-round noise does not define a time-homogeneous matrix".into(),
            ))
        }
        Rule::NoisyLogLinear => noise.check_shape(game)?,
        _ => {}
    }

    let n = game.num_players();
    let a = game.num_actions();
    let ln_n = (n as f64).ln();
    let beta = config.beta;
    let mut matrix = DMatrix::<f64>::zeros(size, size);
    let mut ln_min = f64::INFINITY;
    let mut ln_max = f64::NEG_INFINITY;
    let mut ln_row = vec![0.0; a];

    for idx in 0..size {
        let mut stay = 0.0;
        for i in 0..n {
            let stride = game.stride(i);
            let own = game.action_at(idx, i);
            let base = idx - own * stride;
            let u = |k: usize| game.utility(i, base + k * stride);
            match config.rule {
                Rule::LogLinear | Rule::FixedShare | Rule::NoisyLogLinear => {
                    let logits: Vec<f64> = (0..a)
                        .map(|k| {
                            let shift = if config.rule == Rule::NoisyLogLinear {
                                noise.value(i, base + k * stride)
                            } else {
                                0.0
                            };
                            beta * (u(k) + shift)
                        })
                        .collect();
                    let lse = log_sum_exp(&logits);
                    for k in 0..a {
                        let ln_soft = logits[k] - lse;
                        ln_row[k] = if config.rule == Rule::FixedShare {
                            let xi = config.xi;
                            let explore = if xi > 0.0 {
                                (xi / a as f64).ln()
                            } else {
                                f64::NEG_INFINITY
                            };
                            let exploit = if xi < 1.0 {
                                (1.0 - xi).ln() + ln_soft
                            } else {
                                f64::NEG_INFINITY
                            };
                            log_add_exp(explore, exploit)
                        } else {
                            ln_soft
                        };
                    }
                }
                Rule::BinaryLogLinear => {
                    let ln_a = (a as f64).ln();
                    let mut keep = 1.0 / a as f64;
                    for k in 0..a {
                        if k == own {
                            continue;
                        }
                        ln_row[k] = ln_logistic(beta * (u(k) - u(own))) - ln_a;
                        keep += ln_logistic(beta * (u(own) - u(k))).exp() / a as f64;
                    }
                    ln_row[own] = keep.ln();
                }
                Rule::ModifiedSymmetric => unreachable!(),
            }
            for k in 0..a {
                if k == own {
                    stay += ln_row[k].exp();
                    continue;
                }
                ln_min = ln_min.min(ln_row[k]);
                ln_max = ln_max.max(ln_row[k]);
                matrix[(idx, base + k * stride)] = (ln_row[k] - ln_n).exp();
            }
        }
        matrix[(idx, idx)] = stay / n as f64;
    }

    let envelope = (a > 1).then(|| Envelope {
        p_min: ln_min.exp(),
        p_max: ln_max.exp(),
        ln_p_min: ln_min,
        ln_p_max: ln_max,
    });
    Ok(TransitionMatrix::from_parts(
        matrix,
        Some(ChainShape {
            num_players: n,
            num_actions: a,
        }),
        envelope,
        Some(config.rule),
    ))
}

/// `ln mu(a) = beta Phi(a) - ln sum exp(beta Phi)`.
pub fn gibbs_log_stationary(game: &PotentialGame, beta: f64) -> Vec<f64> {
    log_gibbs(game.potential(), beta)
}

fn log_gibbs(values: &[f64], beta: f64) -> Vec<f64> {
    let logits: Vec<f64> = values.iter().map(|v| beta * v).collect();
    let lse = log_sum_exp(&logits);
    logits.iter().map(|l| l - lse).collect()
}

/// The Gibbs distribution `mu(a) ∝ e^{beta Phi(a)}`.
pub fn gibbs_stationary(game: &PotentialGame, beta: f64) -> DistributionVector {
    gibbs_from_values(game.potential(), beta)
}

/// `mu ∝ e^{beta v}` for an arbitrary value vector.
pub fn gibbs_from_values(values: &[f64], beta: f64) -> DistributionVector {
    let probs: Vec<f64> = log_gibbs(values, beta).into_iter().map(f64::exp).collect();
    let s: f64 = probs.iter().sum();
    DistributionVector::from_raw(probs.into_iter().map(|p| p / s).collect())
}
