//! Finite potential games with a common action set.
//!
//! Profiles are encoded in mixed radix with player 0 as the least significant
//! digit: `index = sum_i a_i * A^i`. Every module (chains, dynamics, CSV dumps)
//! uses this encoding.

mod generate;
mod io;
mod occupancy;

pub use generate::{
    congestion_game, planted_gap_game, random_potential_game, symmetric_identical_interest,
};
pub use io::GameFile;
pub use occupancy::{enumerate_occupancy_space, occupancy_count, occupancy_of, OccupancyState};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{DistributionVector, NORMALIZATION_TOL};
use crate::error::{Error, Result};

/// Tolerance for exact identities (potential identity, normalization).
pub const DEFAULT_TOL: f64 = 1e-12;

/// Players beyond this count are checked for symmetry on sampled permutations.
pub const EXHAUSTIVE_SYMMETRY_MAX_PLAYERS: usize = 6;

/// A joint action, one entry per player, each in `[0, A)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionProfile(pub Vec<usize>);

impl ActionProfile {
    pub fn new(actions: Vec<usize>) -> Self {
        Self(actions)
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn with_action(&self, player: usize, action: usize) -> Self {
        let mut v = self.0.clone();
        v[player] = action;
        Self(v)
    }
}

impl From<Vec<usize>> for ActionProfile {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialGame {
    num_players: usize,
    num_actions: usize,
    /// `utilities[i][index]`
    utilities: Vec<Vec<f64>>,
    potential: Vec<f64>,
    theorem_compatible: bool,
}

/// `A^N`, or `None` on overflow.
pub fn profile_count(num_players: usize, num_actions: usize) -> Option<usize> {
    let n = u32::try_from(num_players).ok()?;
    num_actions.checked_pow(n)
}

impl PotentialGame {
    /// Builds a game and checks the potential identity at [`DEFAULT_TOL`].
    pub fn new(
        num_players: usize,
        num_actions: usize,
        utilities: Vec<Vec<f64>>,
        potential: Vec<f64>,
    ) -> Result<Self> {
        let game = Self::new_unchecked(num_players, num_actions, utilities, potential)?;
        let check = verify_potential(&game, DEFAULT_TOL);
        if let Some(w) = check.witness {
            return Err(Error::InvalidParameter(format!(
                "potential identity fails for player {} switching {} -> {} against {:?} (violation {:e})",
                w.player, w.action, w.alternative, w.others, check.max_violation
            )));
        }
        Ok(game)
    }

    /// Builds a game after checking shapes only; the potential identity may fail.
    pub fn new_unchecked(
        num_players: usize,
        num_actions: usize,
        utilities: Vec<Vec<f64>>,
        potential: Vec<f64>,
    ) -> Result<Self> {
        if num_players == 0 || num_actions == 0 {
            return Err(Error::Shape(
                "need at least one player and one action".into(),
            ));
        }
        let size = profile_count(num_players, num_actions)
            .ok_or_else(|| Error::Shape("A^N overflows usize".into()))?;
        if utilities.len() != num_players {
            return Err(Error::Shape(format!(
                "expected {num_players} utility tensors, got {}",
                utilities.len()
            )));
        }
        for (i, u) in utilities.iter().enumerate() {
            if u.len() != size {
                return Err(Error::Shape(format!(
                    "utility tensor of player {i} has {} entries, expected {size}",
                    u.len()
                )));
            }
        }
        if potential.len() != size {
            return Err(Error::Shape(format!(
                "potential has {} entries, expected {size}",
                potential.len()
            )));
        }
        if utilities
            .iter()
            .flatten()
            .chain(&potential)
            .any(|x| !x.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite payoff".into()));
        }
        let in_unit = |x: &f64| (0.0..=1.0).contains(x);
        let theorem_compatible =
            potential.iter().all(in_unit) && utilities.iter().flatten().all(in_unit);
        Ok(Self {
            num_players,
            num_actions,
            utilities,
            potential,
            theorem_compatible,
        })
    }

    /// Every player's utility equals the potential.
    pub fn identical_interest(
        num_players: usize,
        num_actions: usize,
        potential: Vec<f64>,
    ) -> Result<Self> {
        let utilities = vec![potential.clone(); num_players];
        Self::new(num_players, num_actions, utilities, potential)
    }

    /// Derives a potential from the utilities by summing unilateral
    /// differences along the path from the all-zeros profile, then verifies it.
    ///
    /// The additive constant is chosen so that the potential agrees with player
    /// 0's utility at the all-zeros profile.
    pub fn from_utilities(
        num_players: usize,
        num_actions: usize,
        utilities: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let size = profile_count(num_players, num_actions)
            .ok_or_else(|| Error::Shape("A^N overflows usize".into()))?;
        if utilities.len() != num_players || utilities.iter().any(|u| u.len() != size) {
            return Err(Error::Shape(
                "utility tensors have inconsistent shape".into(),
            ));
        }
        let base = utilities[0][0];
        let mut potential = vec![0.0; size];
        let mut strides = vec![1usize; num_players];
        for i in 1..num_players {
            strides[i] = strides[i - 1] * num_actions;
        }
        for (idx, phi) in potential.iter_mut().enumerate() {
            // Walk a_1, ..., a_N into place one coordinate at a time.
            let mut current = 0usize;
            let mut acc = base;
            let mut rest = idx;
            for (i, stride) in strides.iter().enumerate() {
                let ai = rest % num_actions;
                rest /= num_actions;
                let next = current + ai * stride;
                acc += utilities[i][next] - utilities[i][current];
                current = next;
            }
            *phi = acc;
        }
        Self::new(num_players, num_actions, utilities, potential)
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// `A^N`.
    pub fn num_profiles(&self) -> usize {
        self.potential.len()
    }

    /// Utilities and potential all lie in `[0, 1]`.
    pub fn is_theorem_compatible(&self) -> bool {
        self.theorem_compatible
    }

    /// Errors unless the game satisfies the range hypotheses of the bounds.
    pub fn require_theorem_compatible(&self) -> Result<()> {
        if self.theorem_compatible {
            Ok(())
        } else {
            let (lo, hi) = self.potential_range();
            Err(Error::TheoremIncompatible(format!(
                "potential/utilities must lie in [0,1]; potential spans [{lo}, {hi}]"
            )))
        }
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn potential_at(&self, index: usize) -> f64 {
        self.potential[index]
    }

    pub fn utilities(&self, player: usize) -> &[f64] {
        &self.utilities[player]
    }

    pub fn utility(&self, player: usize, index: usize) -> f64 {
        self.utilities[player][index]
    }

    pub fn potential_range(&self) -> (f64, f64) {
        let lo = self.potential.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self
            .potential
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// `A^player`, the index step of one unit of that player's action.
    pub fn stride(&self, player: usize) -> usize {
        self.num_actions.pow(player as u32)
    }

    pub fn action_at(&self, index: usize, player: usize) -> usize {
        (index / self.stride(player)) % self.num_actions
    }

    /// Index of the profile obtained by setting `player`'s action in `index`.
    pub fn with_action(&self, index: usize, player: usize, action: usize) -> usize {
        let stride = self.stride(player);
        let current = (index / stride) % self.num_actions;
        index - current * stride + action * stride
    }

    pub fn index_of(&self, profile: &ActionProfile) -> Result<usize> {
        if profile.len() != self.num_players {
            return Err(Error::Shape(format!(
                "profile has {} entries, expected {}",
                profile.len(),
                self.num_players
            )));
        }
        let mut idx = 0;
        for (i, &a) in profile.actions().iter().enumerate().rev() {
            if a >= self.num_actions {
                return Err(Error::InvalidParameter(format!(
                    "action {a} of player {i} is out of range"
                )));
            }
            idx = idx * self.num_actions + a;
        }
        Ok(idx)
    }

    pub fn profile_of(&self, index: usize) -> ActionProfile {
        let mut rest = index;
        let actions = (0..self.num_players)
            .map(|_| {
                let a = rest % self.num_actions;
                rest /= self.num_actions;
                a
            })
            .collect();
        ActionProfile(actions)
    }

    /// Utilities of `player` for each of their actions, others fixed as in `index`.
    pub fn utility_row(&self, player: usize, index: usize) -> Vec<f64> {
        let stride = self.stride(player);
        let base = index - self.action_at(index, player) * stride;
        (0..self.num_actions)
            .map(|k| self.utilities[player][base + k * stride])
            .collect()
    }

    /// Potential values along `player`'s actions, others fixed as in `index`.
    pub fn potential_row(&self, player: usize, index: usize) -> Vec<f64> {
        let stride = self.stride(player);
        let base = index - self.action_at(index, player) * stride;
        (0..self.num_actions)
            .map(|k| self.potential[base + k * stride])
            .collect()
    }

    /// Affinely maps payoffs into `[0, 1]`, preserving the potential identity.
    ///
    /// All tensors are divided by the largest range among them; each is shifted
    /// so that its minimum becomes zero.
    pub fn rescaled_to_unit(&self) -> Result<Self> {
        let range = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi - lo)
        };
        let mut scale = range(&self.potential).1;
        for u in &self.utilities {
            scale = scale.max(range(u).1);
        }
        if scale == 0.0 {
            scale = 1.0;
        }
        let map = |v: &[f64]| {
            let (lo, _) = range(v);
            v.iter()
                .map(|x| ((x - lo) / scale).clamp(0.0, 1.0))
                .collect::<Vec<_>>()
        };
        let utilities = self.utilities.iter().map(|u| map(u)).collect();
        let potential = map(&self.potential);
        let game = Self::new_unchecked(self.num_players, self.num_actions, utilities, potential)?;
        let check = verify_potential(&game, 1e-9);
        if !check.holds {
            return Err(Error::InvalidParameter(
                "rescaling broke the potential identity".into(),
            ));
        }
        Ok(game)
    }
}

/// A unilateral deviation at which utility and potential differences disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialWitness {
    pub player: usize,
    pub action: usize,
    pub alternative: usize,
    /// The full profile with `player` playing `action`.
    pub others: ActionProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialCheck {
    pub holds: bool,
    pub max_violation: f64,
    /// First violation in (player, profile index, alternative) order.
    pub witness: Option<PotentialWitness>,
}

/// Checks `U_i(a_i, a_-i) - U_i(a_i', a_-i) = Phi(a_i, a_-i) - Phi(a_i', a_-i)`
/// for every player, every opponent profile and every pair of actions.
pub fn verify_potential(game: &PotentialGame, tol: f64) -> PotentialCheck {
    let mut witness = None;
    let mut max_violation: f64 = 0.0;
    for player in 0..game.num_players {
        for idx in 0..game.num_profiles() {
            let ai = game.action_at(idx, player);
            for alt in ai + 1..game.num_actions {
                let other = game.with_action(idx, player, alt);
                let du = game.utilities[player][idx] - game.utilities[player][other];
                let dphi = game.potential[idx] - game.potential[other];
                let v = (du - dphi).abs();
                max_violation = max_violation.max(v);
                if v > tol && witness.is_none() {
                    witness = Some(PotentialWitness {
                        player,
                        action: ai,
                        alternative: alt,
                        others: game.profile_of(idx),
                    });
                }
            }
        }
    }
    PotentialCheck {
        holds: witness.is_none(),
        max_violation,
        witness,
    }
}

/// Smallest potential deficit of a strictly suboptimal profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SuboptimalityGap {
    Positive(f64),
    /// Every profile attains the maximum.
    Degenerate,
}

impl SuboptimalityGap {
    pub fn value(self) -> Result<f64> {
        match self {
            Self::Positive(d) => Ok(d),
            Self::Degenerate => Err(Error::DegenerateGame),
        }
    }

    pub fn is_degenerate(self) -> bool {
        matches!(self, Self::Degenerate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameConstants {
    pub delta: SuboptimalityGap,
    pub max_potential: f64,
    pub optimal_set: Vec<ActionProfile>,
    pub optimal_indices: Vec<usize>,
    pub optimal_count: usize,
}

/// Enumerates every profile. Maximizers are the profiles attaining the
/// maximum exactly.
pub fn game_constants(game: &PotentialGame) -> GameConstants {
    let (_, max_potential) = game.potential_range();
    let optimal_indices: Vec<usize> = (0..game.num_profiles())
        .filter(|&i| game.potential[i] == max_potential)
        .collect();
    let delta = game
        .potential
        .iter()
        .filter(|&&p| p < max_potential)
        .map(|p| max_potential - p)
        .fold(None, |acc: Option<f64>, d| {
            Some(acc.map_or(d, |a| a.min(d)))
        });
    GameConstants {
        delta: delta.map_or(SuboptimalityGap::Degenerate, SuboptimalityGap::Positive),
        max_potential,
        optimal_set: optimal_indices
            .iter()
            .map(|&i| game.profile_of(i))
            .collect(),
        optimal_count: optimal_indices.len(),
        optimal_indices,
    }
}

/// No player has a unilateral deviation that strictly improves their utility
/// (by more than [`DEFAULT_TOL`]).
pub fn is_nash(game: &PotentialGame, profile: &ActionProfile) -> Result<bool> {
    let idx = game.index_of(profile)?;
    Ok(is_nash_index(game, idx))
}

pub fn is_nash_index(game: &PotentialGame, idx: usize) -> bool {
    (0..game.num_players).all(|player| {
        let current = game.utilities[player][idx];
        game.utility_row(player, idx)
            .iter()
            .all(|&u| u <= current + DEFAULT_TOL)
    })
}

pub fn is_eps_efficient(game: &PotentialGame, profile: &ActionProfile, eps: f64) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let idx = game.index_of(profile)?;
    let (_, max) = game.potential_range();
    Ok(game.potential[idx] >= max - eps)
}

/// `sum_a dist(a) * Phi(a)`.
pub fn expected_potential(game: &PotentialGame, dist: &DistributionVector) -> Result<f64> {
    if dist.len() != game.num_profiles() {
        return Err(Error::Shape(format!(
            "distribution has {} entries, game has {} profiles",
            dist.len(),
            game.num_profiles()
        )));
    }
    let sum: f64 = dist.probs().iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(sum));
    }
    Ok(dot(dist.probs(), &game.potential))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    /// False when only sampled permutations were checked.
    pub exhaustive: bool,
}

/// Player-permutation invariance: relabelling players by `pi` (player `i`'s
/// action moves to seat `pi(i)`) maps `U_i` onto `U_{pi(i)}`.
///
/// All `N!` permutations are checked for `N <=` [`EXHAUSTIVE_SYMMETRY_MAX_PLAYERS`];
/// beyond that, adjacent transpositions and a 3-cycle (which generate the
/// symmetric group) plus 256 seeded random permutations are checked.
pub fn is_symmetric(game: &PotentialGame) -> SymmetryCheck {
    let n = game.num_players;
    let exhaustive = n <= EXHAUSTIVE_SYMMETRY_MAX_PLAYERS;
    let perms: Vec<Vec<usize>> = if exhaustive {
        all_permutations(n)
    } else {
        let mut perms = Vec::new();
        for k in 0..n - 1 {
            let mut p: Vec<usize> = (0..n).collect();
            p.swap(k, k + 1);
            perms.push(p);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_5717);
        for _ in 0..256 {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            perms.push(p);
        }
        perms
    };
    let symmetric = perms.iter().all(|pi| permutation_preserves(game, pi));
    SymmetryCheck {
        symmetric,
        exhaustive,
    }
}

fn permutation_preserves(game: &PotentialGame, pi: &[usize]) -> bool {
    let mut permuted = vec![0usize; game.num_players];
    for idx in 0..game.num_profiles() {
        let profile = game.profile_of(idx);
        for (j, &a) in profile.actions().iter().enumerate() {
            permuted[pi[j]] = a;
        }
        let pidx = game
            .index_of(&ActionProfile(permuted.clone()))
            .expect("permuted profile is valid");
        for i in 0..game.num_players {
            if (game.utilities[i][idx] - game.utilities[pi[i]][pidx]).abs() > DEFAULT_TOL {
                return false;
            }
        }
    }
    true
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    // Heap's algorithm.
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}
