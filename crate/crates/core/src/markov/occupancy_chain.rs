use std::collections::HashMap;

use nalgebra::DMatrix;

use super::{stationary_of, TransitionMatrix};
use crate::dist::DistributionVector;
use crate::error::{Error, Result};
use crate::game::{enumerate_occupancy_space, is_symmetric, OccupancyState, PotentialGame};
use crate::numeric::softmax;

/// The continuous-time chain that the modified rule induces on occupancy
/// states of a symmetric game.
///
/// Every occupied action group rings at total rate `N * alpha`; the ringing
/// player moves from action `j` to `k` with its log-linear probability.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyChain {
    states: Vec<OccupancyState>,
    lookup: HashMap<Vec<usize>, usize>,
    generator: DMatrix<f64>,
}

impl OccupancyChain {
    pub fn new(game: &PotentialGame, beta: f64, alpha: f64) -> Result<Self> {
        if !is_symmetric(game).symmetric {
            return Err(Error::InvalidParameter(
                "occupancy chain requires a symmetric game".into(),
            ));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        let n = game.num_players();
        let a = game.num_actions();
        let states = enumerate_occupancy_space(n, a)?;
        let lookup: HashMap<Vec<usize>, usize> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.counts().to_vec(), i))
            .collect();
        let m = states.len();
        let mut q = DMatrix::<f64>::zeros(m, m);
        for (from, x) in states.iter().enumerate() {
            let rep = x.representative();
            let idx = game.index_of(&rep)?;
            for j in 0..a {
                if x.counts()[j] == 0 {
                    continue;
                }
                let player = rep
                    .actions()
                    .iter()
                    .position(|&b| b == j)
                    .expect("occupied action");
                let probs = softmax(&game.utility_row(player, idx), beta);
                for (k, pk) in probs.iter().enumerate() {
                    if k == j {
                        continue;
                    }
                    let mut counts = x.counts().to_vec();
                    counts[j] -= 1;
                    counts[k] += 1;
                    let to = lookup[&counts];
                    q[(from, to)] += n as f64 * alpha * pk;
                }
            }
            let exit: f64 = (0..m).filter(|&t| t != from).map(|t| q[(from, t)]).sum();
            q[(from, from)] = -exit;
        }
        Ok(Self {
            states,
            lookup,
            generator: q,
        })
    }

    pub fn states(&self) -> &[OccupancyState] {
        &self.states
    }

    pub fn index_of(&self, state: &OccupancyState) -> Option<usize> {
        self.lookup.get(state.counts()).copied()
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    /// Uniformized jump chain `I + Q / rate` with `rate` the largest exit rate.
    pub fn uniformized(&self) -> TransitionMatrix {
        let m = self.states.len();
        let rate = (0..m)
            .map(|i| -self.generator[(i, i)])
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut p = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                0.0
            } else {
                self.generator[(i, j)] / rate
            }
        });
        for i in 0..m {
            let off: f64 = (0..m).filter(|&j| j != i).map(|j| p[(i, j)]).sum();
            p[(i, i)] = 1.0 - off;
        }
        TransitionMatrix::from_parts(p, None, None, None)
    }

    /// Stationary distribution of the generator, solved numerically.
    pub fn stationary(&self) -> Result<DistributionVector> {
        stationary_of(&self.uniformized())
    }
}

/// `mu(x) ∝ e^{beta Phi(x)}` over the given occupancy states.
pub fn occupancy_gibbs(
    game: &PotentialGame,
    beta: f64,
    states: &[OccupancyState],
) -> Result<DistributionVector> {
    let values = states
        .iter()
        .map(|s| Ok(game.potential_at(game.index_of(&s.representative())?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(super::gibbs_from_values(&values, beta))
}
