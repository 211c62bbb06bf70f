//! Exact Markov-chain machinery over profile space.
//!
//! The transition matrix is dense. Lemma-style quantities that can underflow
//! at large `beta` (the envelope `p_min`, `min mu`) are also carried in log
//! space.
//!
//! The log-Sobolev constant is an infimum that can only be bounded from above
//! numerically, so every check of the form "estimate >= analytic lower bound"
//! or "spectral gap >= twice the bound" is a necessary condition on the bound,
//! never a proof of it.

mod build;
mod evolve;
mod io;
mod occupancy_chain;
mod sobolev;
mod spectral;
mod stationary;

pub use build::{
    build_transition, build_transition_with, gibbs_from_values, gibbs_log_stationary,
    gibbs_stationary,
};
pub use evolve::{
    distribution_at_time, empirical_mixing_time, empirical_mixing_time_to, Evolution, PowerLadder,
    SparseChain, StepCount,
};
pub use io::{
    read_matrix_csv, read_ppmc1, write_distribution_csv, write_matrix_csv, write_ppmc1, PPMC1_MAGIC,
};
pub use occupancy_chain::{occupancy_gibbs, OccupancyChain};
pub use sobolev::{
    dirichlet_form, entropy_functional, estimate_log_sobolev, SobolevEstimate, SobolevOptions,
};
pub use spectral::{
    multiplicative_reversibilization, spectral_gap, spectral_gap_reversibilized,
    spectral_norm_of_difference,
};
pub use stationary::{
    check_detailed_balance, stationary_of, time_reversal, tv_distance, BalanceCheck,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::Rule;
use crate::error::{Error, Result};

/// Default upper limit on `A^N` for dense chain construction.
pub const DEFAULT_STATE_CAP: usize = 20_000;

/// Row-sum tolerance for a valid transition matrix.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Bounds `p_min <= N * P(a, b) <= p_max` over off-diagonal neighbor pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub p_min: f64,
    pub p_max: f64,
    /// `ln p_min`, finite even when `p_min` underflows.
    pub ln_p_min: f64,
    pub ln_p_max: f64,
}

/// Game structure of a chain built from a potential game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainShape {
    pub num_players: usize,
    pub num_actions: usize,
}

/// A dense row-stochastic matrix, optionally tagged with the game it was
/// built from and its neighbor envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    matrix: DMatrix<f64>,
    shape: Option<ChainShape>,
    envelope: Option<Envelope>,
    rule: Option<Rule>,
}

impl TransitionMatrix {
    /// Wraps a square row-stochastic matrix. Rows must sum to one within `tol`
    /// and all entries must be nonnegative.
    pub fn from_matrix(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Shape(format!(
                "transition matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if let Some(v) = matrix.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "invalid transition entry {v}"
            )));
        }
        for (i, row) in matrix.row_iter().enumerate() {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > tol {
                return Err(Error::InvalidParameter(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self {
            matrix,
            shape: None,
            envelope: None,
            rule: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(
                "rows must all have the matrix dimension".into(),
            ));
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]), ROW_SUM_TOL)
    }

    pub(crate) fn from_parts(
        matrix: DMatrix<f64>,
        shape: Option<ChainShape>,
        envelope: Option<Envelope>,
        rule: Option<Rule>,
    ) -> Self {
        Self {
            matrix,
            shape,
            envelope,
            rule,
        }
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.matrix[(from, to)]
    }

    pub fn row(&self, from: usize) -> Vec<f64> {
        self.matrix.row(from).iter().copied().collect()
    }

    pub fn shape(&self) -> Option<ChainShape> {
        self.shape
    }

    pub fn envelope(&self) -> Option<Envelope> {
        self.envelope
    }

    pub fn rule(&self) -> Option<Rule> {
        self.rule
    }

    /// Largest `|row sum - 1|`.
    pub fn max_row_defect(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `mu P` for a row vector `mu`.
    pub fn apply(&self, mu: &[f64]) -> Result<Vec<f64>> {
        if mu.len() != self.size() {
            return Err(Error::Shape(format!(
                "distribution of length {} for a {}-state chain",
                mu.len(),
                self.size()
            )));
        }
        let v = nalgebra::DVector::from_column_slice(mu);
        Ok(self.matrix.tr_mul(&v).as_slice().to_vec())
    }

    /// Whether `to` differs from `from` in at most one player's action.
    pub fn is_neighbor(&self, from: usize, to: usize) -> Option<bool> {
        let shape = self.shape?;
        let mut diff = 0;
        let (mut x, mut y) = (from, to);
        for _ in 0..shape.num_players {
            if x % shape.num_actions != y % shape.num_actions {
                diff += 1;
            }
            x /= shape.num_actions;
            y /= shape.num_actions;
        }
        Some(diff <= 1)
    }
}
