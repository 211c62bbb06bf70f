//! Plateau-game sweeps, baseline comparisons and their CSV artifacts.
//!
//! A run produces one [`Curve`] per `(sweep_id, game_id)` pair plus an
//! aggregate curve with `game_id = all`. Per-game curves hold the mean and
//! standard deviation of `Phi(a_t)` over trajectories; in exact mode those
//! are the moments under the distribution `mu^0 P^t`. Aggregate curves hold
//! the mean and standard deviation of the per-game means across games.

mod check;
mod config;
mod csv_io;
mod plateau;
mod run;

pub use check::{check_invariants, CheckOutcome};
pub use config::{
    Algorithm, ExperimentConfig, ExperimentKind, GameFamily, Mode, RecordGrid, RuleTemplate,
};
pub use csv_io::{
    export_csv, hitting_path, metadata_path, read_curves_csv, read_hitting_csv, read_sweep_result,
    CurveRow, CURVE_HEADER, HITTING_HEADER,
};
pub use plateau::{generate_plateau_game, PLATEAU_ACTIONS, PLATEAU_HIGH, PLATEAU_LOW};
pub use run::{run_comparison, run_experiment, run_sweep};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// First index whose value reaches `threshold`.
pub fn hitting_time(curve: &[f64], threshold: f64) -> Option<usize> {
    curve.iter().position(|&v| v >= threshold)
}

/// First recorded time whose value reaches `threshold`.
pub fn hitting_time_at(times: &[u64], values: &[f64], threshold: f64) -> Option<u64> {
    hitting_time(values, threshold).map(|i| times[i])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GameId {
    Game(usize),
    All,
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameId::Game(g) => write!(f, "{g}"),
            GameId::All => f.write_str("all"),
        }
    }
}

impl FromStr for GameId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "all" {
            return Ok(GameId::All);
        }
        s.parse()
            .map(GameId::Game)
            .map_err(|_| Error::Format(format!("bad game_id {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub sweep_id: String,
    pub game_id: GameId,
    pub times: Vec<u64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingRecord {
    pub sweep_id: String,
    pub game_id: GameId,
    pub hitting_t: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub curves: Vec<Curve>,
    pub hitting: Vec<HittingRecord>,
    /// Last simulated step per sweep; unreached hitting times are censored here.
    pub horizons: BTreeMap<String, u64>,
    pub metadata: BTreeMap<String, String>,
}

impl SweepResult {
    /// Sweep ids in order of first appearance.
    pub fn sweep_ids(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in &self.curves {
            if !out.contains(&c.sweep_id.as_str()) {
                out.push(&c.sweep_id);
            }
        }
        for h in &self.hitting {
            if !out.contains(&h.sweep_id.as_str()) {
                out.push(&h.sweep_id);
            }
        }
        out
    }

    pub fn curve(&self, sweep_id: &str, game_id: GameId) -> Option<&Curve> {
        self.curves
            .iter()
            .find(|c| c.sweep_id == sweep_id && c.game_id == game_id)
    }

    pub fn aggregate(&self, sweep_id: &str) -> Option<&Curve> {
        self.curve(sweep_id, GameId::All)
    }

    /// Hitting time of the across-game mean curve.
    pub fn aggregate_hitting_time(&self, sweep_id: &str) -> Option<u64> {
        self.hitting
            .iter()
            .find(|h| h.sweep_id == sweep_id && h.game_id == GameId::All)
            .and_then(|h| h.hitting_t)
    }

    pub fn game_hitting_times(&self, sweep_id: &str) -> Vec<Option<u64>> {
        self.hitting
            .iter()
            .filter(|h| h.sweep_id == sweep_id && h.game_id != GameId::All)
            .map(|h| h.hitting_t)
            .collect()
    }

    /// Fraction of games whose own curve reached the threshold.
    pub fn success_fraction(&self, sweep_id: &str) -> f64 {
        let times = self.game_hitting_times(sweep_id);
        if times.is_empty() {
            return 0.0;
        }
        times.iter().filter(|t| t.is_some()).count() as f64 / times.len() as f64
    }

    /// Mean over games of the per-game hitting times, with games that never
    /// reach the threshold counted at the sweep's horizon.
    pub fn mean_game_hitting_time(&self, sweep_id: &str) -> Option<f64> {
        let times = self.game_hitting_times(sweep_id);
        if times.is_empty() {
            return None;
        }
        let censor = *self.horizons.get(sweep_id)? as f64;
        Some(
            times
                .iter()
                .map(|t| t.map_or(censor, |t| t as f64))
                .sum::<f64>()
                / times.len() as f64,
        )
    }
}
