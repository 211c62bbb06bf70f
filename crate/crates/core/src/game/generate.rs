use rand::Rng;

use super::{
    enumerate_occupancy_space, occupancy_of, profile_count, OccupancyState, PotentialGame,
};
use crate::error::{Error, Result};

/// A theorem-compatible game with an i.i.d. uniform potential and
/// player-specific offsets `U_i = Phi + h_i(a_-i)`, each `h_i` drawn so that
/// `U_i` stays inside `[0, 1]`.
pub fn random_potential_game<R: Rng + ?Sized>(
    num_players: usize,
    num_actions: usize,
    rng: &mut R,
) -> Result<PotentialGame> {
    let size = profile_count(num_players, num_actions)
        .ok_or_else(|| Error::Shape("A^N overflows usize".into()))?;
    let potential: Vec<f64> = (0..size).map(|_| rng.gen::<f64>()).collect();
    with_offsets(num_players, num_actions, potential, rng)
}

/// Like [`random_potential_game`], but the potential has a single maximizer
/// with value 1, a runner-up at exactly `1 - gap`, and every other entry
/// uniform on `[0, 1 - gap)`.
pub fn planted_gap_game<R: Rng + ?Sized>(
    num_players: usize,
    num_actions: usize,
    gap: f64,
    rng: &mut R,
) -> Result<PotentialGame> {
    if !(gap > 0.0 && gap < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gap must lie in (0,1), got {gap}"
        )));
    }
    let size = profile_count(num_players, num_actions)
        .ok_or_else(|| Error::Shape("A^N overflows usize".into()))?;
    if size < 2 {
        return Err(Error::InvalidParameter("need at least two profiles".into()));
    }
    let top = 1.0 - gap;
    let mut potential: Vec<f64> = (0..size).map(|_| rng.gen::<f64>() * top).collect();
    let best = rng.gen_range(0..size);
    let mut second = rng.gen_range(0..size - 1);
    if second >= best {
        second += 1;
    }
    potential[best] = 1.0;
    potential[second] = top;
    with_offsets(num_players, num_actions, potential, rng)
}

fn with_offsets<R: Rng + ?Sized>(
    num_players: usize,
    num_actions: usize,
    potential: Vec<f64>,
    rng: &mut R,
) -> Result<PotentialGame> {
    let size = potential.len();
    let mut utilities = vec![vec![0.0; size]; num_players];
    for (player, u) in utilities.iter_mut().enumerate() {
        let stride = num_actions.pow(player as u32);
        for base in 0..size {
            if !(base / stride).is_multiple_of(num_actions) {
                continue;
            }
            let row: Vec<f64> = (0..num_actions)
                .map(|k| potential[base + k * stride])
                .collect();
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let offset = -lo + rng.gen::<f64>() * ((1.0 - hi) + lo);
            for k in 0..num_actions {
                u[base + k * stride] = (potential[base + k * stride] + offset).clamp(0.0, 1.0);
            }
        }
    }
    PotentialGame::new(num_players, num_actions, utilities, potential)
}

/// Identical-interest game whose potential depends only on the occupancy.
pub fn symmetric_identical_interest<F>(
    num_players: usize,
    num_actions: usize,
    potential_of: F,
) -> Result<PotentialGame>
where
    F: Fn(&OccupancyState) -> f64,
{
    let size = profile_count(num_players, num_actions)
        .ok_or_else(|| Error::Shape("A^N overflows usize".into()))?;
    // Touch the occupancy enumeration so oversized requests fail early.
    enumerate_occupancy_space(num_players, num_actions)?;
    let scratch = PotentialGame::new_unchecked(
        num_players,
        num_actions,
        vec![vec![0.0; size]; num_players],
        vec![0.0; size],
    )?;
    let potential = (0..size)
        .map(|idx| {
            let x = occupancy_of(&scratch.profile_of(idx), num_players, num_actions)?;
            Ok(potential_of(&x))
        })
        .collect::<Result<Vec<f64>>>()?;
    PotentialGame::identical_interest(num_players, num_actions, potential)
}

/// Congestion-style game: a player's utility depends only on its own action and
/// the fraction of players sharing it, `U_i(a) = cost(x_{a_i}(a), a_i)`.
/// The potential is derived from the utilities (Rosenthal's construction up
/// to a constant).
pub fn congestion_game<F>(
    num_players: usize,
    num_actions: usize,
    utility: F,
) -> Result<PotentialGame>
where
    F: Fn(f64, usize) -> f64,
{
    let size = profile_count(num_players, num_actions)
        .ok_or_else(|| Error::Shape("A^N overflows usize".into()))?;
    let scratch = PotentialGame::new_unchecked(
        num_players,
        num_actions,
        vec![vec![0.0; size]; num_players],
        vec![0.0; size],
    )?;
    let mut utilities = vec![vec![0.0; size]; num_players];
    for idx in 0..size {
        let profile = scratch.profile_of(idx);
        let x = occupancy_of(&profile, num_players, num_actions)?.fractions();
        for (i, &a) in profile.actions().iter().enumerate() {
            utilities[i][idx] = utility(x[a], a);
        }
    }
    PotentialGame::from_utilities(num_players, num_actions, utilities)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{game_constants, verify_potential, SuboptimalityGap};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_games_are_verified_and_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for a in 2..6 {
            let g = random_potential_game(2, a, &mut rng).unwrap();
            assert!(g.is_theorem_compatible());
            assert!(verify_potential(&g, 1e-12).holds);
            let g3 = random_potential_game(3, a, &mut rng).unwrap();
            assert!(verify_potential(&g3, 1e-12).holds);
        }
    }

    #[test]
    fn planted_gap_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = planted_gap_game(2, 4, 0.35, &mut rng).unwrap();
        let c = game_constants(&g);
        match c.delta {
            SuboptimalityGap::Positive(d) => assert!((d - 0.35).abs() < 1e-12),
            SuboptimalityGap::Degenerate => panic!("degenerate"),
        }
        assert_eq!(c.optimal_count, 1);
        assert!(g.is_theorem_compatible());
    }

    #[test]
    fn congestion_game_is_potential() {
        let g = congestion_game(3, 3, |load, a| 1.0 - load * (1.0 + a as f64) / 4.0).unwrap();
        assert!(verify_potential(&g, 1e-12).holds);
    }
}
