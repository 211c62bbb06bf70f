use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::PotentialGame;

pub const PLATEAU_ACTIONS: usize = 10;
/// 0-based action of the global plateau, `(2,2)` in 1-based labels.
pub const PLATEAU_HIGH: usize = 1;
/// 0-based action of the second plateau, `(9,9)` in 1-based labels.
pub const PLATEAU_LOW: usize = 8;

/// Two-player identical-interest game on 10 actions with `U(2,2) = 1`,
/// `U(9,9) = 1 - delta` and every other entry uniform on `[0, 1 - delta)`.
///
/// The same seed draws the same uniforms for every `delta`; only their scale
/// changes.
pub fn generate_plateau_game(delta: f64, seed: u64) -> Result<PotentialGame> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    let a = PLATEAU_ACTIONS;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = 1.0 - delta;
    let mut phi: Vec<f64> = (0..a * a).map(|_| top * rng.gen::<f64>()).collect();
    phi[PLATEAU_HIGH + a * PLATEAU_HIGH] = 1.0;
    phi[PLATEAU_LOW + a * PLATEAU_LOW] = top;
    PotentialGame::identical_interest(2, a, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{game_constants, ActionProfile};

    #[test]
    fn plateaus_fix_the_gap() {
        for seed in 0..20 {
            let g = generate_plateau_game(0.1, seed).unwrap();
            let c = game_constants(&g);
            assert!((c.delta.value().unwrap() - 0.1).abs() < 1e-12);
            assert_eq!(c.optimal_set, vec![ActionProfile::new(vec![1, 1])]);
            assert!(g.is_theorem_compatible());
        }
    }

    #[test]
    fn second_best_is_the_low_plateau() {
        let g = generate_plateau_game(0.15, 7).unwrap();
        let low = g.index_of(&ActionProfile::new(vec![8, 8])).unwrap();
        let high = g.index_of(&ActionProfile::new(vec![1, 1])).unwrap();
        assert_eq!(g.potential_at(low), 0.85);
        for idx in (0..100).filter(|&i| i != low && i != high) {
            assert!(g.potential_at(idx) < 0.85 && g.potential_at(idx) >= 0.0);
        }
    }

    #[test]
    fn equal_seeds_give_identical_games() {
        assert_eq!(
            generate_plateau_game(0.075, 3).unwrap(),
            generate_plateau_game(0.075, 3).unwrap()
        );
        assert_ne!(
            generate_plateau_game(0.075, 3).unwrap(),
            generate_plateau_game(0.075, 4).unwrap()
        );
        assert!(generate_plateau_game(1.0, 0).is_err());
    }
}
