#![allow(dead_code)]

use std::io::Write;

use loglinear_core::dynamics::{DynamicsConfig, Rule};
use loglinear_core::game::{planted_gap_game, random_potential_game, verify_potential};
use loglinear_core::markov::build_transition;
use loglinear_core::markov::TransitionMatrix;
use loglinear_core::PotentialGame;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SUITE_BETAS: [f64; 4] = [0.0, 1.0, 5.0, 20.0];

/// Twenty random verified potential games with `N = 2` and `A` cycling
/// through 3, 4, 5.
pub fn random_suite() -> Vec<PotentialGame> {
    (0..20)
        .map(|g| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + g as u64);
            let game = random_potential_game(2, [3, 4, 5][g % 3], &mut rng).unwrap();
            assert!(verify_potential(&game, 1e-12).holds);
            game
        })
        .collect()
}

/// Twenty planted-gap games with `N = 2`, `A = 4` and gap in `[0.3, 0.5]`.
pub fn gap_suite() -> Vec<PotentialGame> {
    (0..20)
        .map(|g| {
            let mut rng = ChaCha8Rng::seed_from_u64(5000 + g as u64);
            let gap = rng.gen_range(0.3..=0.5);
            planted_gap_game(2, 4, gap, &mut rng).unwrap()
        })
        .collect()
}

pub struct SuiteChain<'a> {
    pub game_index: usize,
    pub game: &'a PotentialGame,
    pub rule: Rule,
    pub beta: f64,
    pub chain: TransitionMatrix,
}

/// Log-linear and binary chains of every suite game at every suite `beta`.
pub fn suite_chains(games: &[PotentialGame]) -> Vec<SuiteChain<'_>> {
    let mut out = Vec::new();
    for (game_index, game) in games.iter().enumerate() {
        for &beta in &SUITE_BETAS {
            for rule in [Rule::LogLinear, Rule::BinaryLogLinear] {
                let chain = build_transition(game, &DynamicsConfig::new(rule, beta)).unwrap();
                out.push(SuiteChain {
                    game_index,
                    game,
                    rule,
                    beta,
                    chain,
                });
            }
        }
    }
    out
}

pub fn expected_potential(game: &PotentialGame, mu: &[f64]) -> f64 {
    mu.iter().zip(game.potential()).map(|(m, f)| m * f).sum()
}

/// Prints one acceptance line past the test harness's output capture.
pub fn report(name: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[acceptance] {tag} {name}: {detail}");
    let _ = out.flush();
}
