use serde::{Deserialize, Serialize};

use super::ActionProfile;
use crate::error::{Error, Result};

/// Upper limit on the number of occupancy states we are willing to enumerate.
pub const OCCUPANCY_ENUMERATION_CAP: u128 = 10_000_000;

/// Action-usage counts `v_j` (summing to `N`); fractions are `v_j / N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OccupancyState {
    counts: Vec<usize>,
    num_players: usize,
}

impl OccupancyState {
    pub fn from_counts(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Shape("occupancy over zero actions".into()));
        }
        let num_players = counts.iter().sum();
        if num_players == 0 {
            return Err(Error::InvalidParameter("occupancy of zero players".into()));
        }
        Ok(Self {
            counts,
            num_players,
        })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn fractions(&self) -> Vec<f64> {
        let n = self.num_players as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Some profile with this occupancy (players sorted by action).
    pub fn representative(&self) -> ActionProfile {
        let mut actions = Vec::with_capacity(self.num_players);
        for (j, &c) in self.counts.iter().enumerate() {
            actions.extend(std::iter::repeat_n(j, c));
        }
        ActionProfile(actions)
    }
}

pub fn occupancy_of(
    profile: &ActionProfile,
    num_players: usize,
    num_actions: usize,
) -> Result<OccupancyState> {
    if profile.len() != num_players {
        return Err(Error::Shape(format!(
            "profile has {} entries, expected {num_players}",
            profile.len()
        )));
    }
    let mut counts = vec![0usize; num_actions];
    for &a in profile.actions() {
        if a >= num_actions {
            return Err(Error::InvalidParameter(format!("action {a} out of range")));
        }
        counts[a] += 1;
    }
    OccupancyState::from_counts(counts)
}

/// `binomial(N + A - 1, A - 1)`, computed exactly in `u128` (saturating).
pub fn occupancy_count(num_players: usize, num_actions: usize) -> u128 {
    if num_actions == 0 {
        return 0;
    }
    let n = (num_players + num_actions - 1) as u128;
    let k = (num_actions - 1).min(num_players) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All compositions of `N` into `A` nonnegative parts, in lexicographically
/// decreasing order of counts (`(N,0,..)` first).
pub fn enumerate_occupancy_space(
    num_players: usize,
    num_actions: usize,
) -> Result<Vec<OccupancyState>> {
    if num_players == 0 || num_actions == 0 {
        return Err(Error::InvalidParameter("need N >= 1 and A >= 1".into()));
    }
    let count = occupancy_count(num_players, num_actions);
    if count > OCCUPANCY_ENUMERATION_CAP {
        return Err(Error::StateSpaceTooLarge {
            states: count,
            cap: OCCUPANCY_ENUMERATION_CAP as usize,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut counts = vec![0usize; num_actions];
    fill(&mut counts, 0, num_players, &mut out);
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}

fn fill(counts: &mut Vec<usize>, pos: usize, remaining: usize, out: &mut Vec<OccupancyState>) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        out.push(OccupancyState {
            counts: counts.clone(),
            num_players: counts.iter().sum(),
        });
        return;
    }
    for c in (0..=remaining).rev() {
        counts[pos] = c;
        fill(counts, pos + 1, remaining - c, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn occupancy_examples() {
        let x = occupancy_of(&ActionProfile(vec![0, 0, 1]), 3, 2).unwrap();
        assert_eq!(x.counts(), &[2, 1]);
        assert_eq!(x.fractions(), vec![2.0 / 3.0, 1.0 / 3.0]);
        let y = occupancy_of(&ActionProfile(vec![0, 0, 0, 0]), 4, 3).unwrap();
        assert_eq!(y.fractions(), vec![1.0, 0.0, 0.0]);
        let z = occupancy_of(&ActionProfile(vec![0, 1, 1, 2]), 4, 3).unwrap();
        assert_eq!(z.fractions(), vec![0.25, 0.5, 0.25]);
        assert!(occupancy_of(&ActionProfile(vec![0, 3]), 2, 3).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let s = enumerate_occupancy_space(3, 2).unwrap();
        let counts: Vec<_> = s.iter().map(|x| x.counts().to_vec()).collect();
        assert_eq!(counts, vec![vec![3, 0], vec![2, 1], vec![1, 2], vec![0, 3]]);
        assert_eq!(enumerate_occupancy_space(1, 5).unwrap().len(), 5);
        assert_eq!(enumerate_occupancy_space(2, 3).unwrap().len(), 6);
        assert_eq!(occupancy_count(10, 3), 66);
        assert!(occupancy_count(10, 3) <= 11u128.pow(2));
        assert!(matches!(
            enumerate_occupancy_space(200, 12),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    proptest! {
        #[test]
        fn occupancy_is_permutation_invariant(
            actions in proptest::collection::vec(0usize..4, 1..7),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let n = actions.len();
            let mut shuffled = actions.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = occupancy_of(&ActionProfile(actions), n, 4).unwrap();
            let b = occupancy_of(&ActionProfile(shuffled), n, 4).unwrap();
            prop_assert_eq!(a.counts(), b.counts());
            prop_assert!((a.fractions().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn enumeration_matches_binomial(n in 1usize..7, a in 1usize..5) {
            let s = enumerate_occupancy_space(n, a).unwrap();
            prop_assert_eq!(s.len() as u128, occupancy_count(n, a));
            prop_assert!(s.iter().all(|x| x.counts().iter().sum::<usize>() == n));
        }
    }
}
