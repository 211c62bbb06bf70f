use serde::Serialize;

use super::config::{Algorithm, ExperimentConfig, ExperimentKind, GameFamily};
use super::run::sweep_id;
use super::SweepResult;
use crate::error::Result;
use crate::game::PotentialGame;

/// Fraction of games that log-linear and binary log-linear runs must bring
/// to the threshold in a comparison.
pub const REQUIRED_SUCCESS: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

fn potential_range(config: &ExperimentConfig) -> Result<(f64, f64)> {
    match (config.game_family, &config.game_path) {
        (GameFamily::Custom, Some(path)) => Ok(PotentialGame::load_json(path)?.potential_range()),
        _ => Ok((0.0, 1.0)),
    }
}

/// Strictly increasing mean per-game hitting times along `ids`.
fn monotone(result: &SweepResult, name: &str, ids: &[String]) -> CheckOutcome {
    let means: Vec<Option<f64>> = ids
        .iter()
        .map(|id| result.mean_game_hitting_time(id))
        .collect();
    let aggregate: Vec<Option<u64>> = ids
        .iter()
        .map(|id| result.aggregate_hitting_time(id))
        .collect();
    let passed = means.iter().all(Option::is_some)
        && means
            .windows(2)
            .all(|w| w[0].unwrap_or(f64::NAN) < w[1].unwrap_or(f64::NAN));
    let detail = ids
        .iter()
        .zip(&means)
        .zip(&aggregate)
        .map(|((id, m), a)| {
            let a = a.map_or_else(|| "none".to_string(), |t| t.to_string());
            format!(
                "{id}: mean game hitting {:.4e}, aggregate hitting {a}",
                m.unwrap_or(f64::NAN)
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    CheckOutcome::new(name, passed, detail)
}

/// The invariants `--check` enforces: curves inside the potential range,
/// non-negative standard deviations, hitting-time orderings along every
/// sweep axis with two or more values, and the comparison outcome.
pub fn check_invariants(
    config: &ExperimentConfig,
    result: &SweepResult,
) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let (lo, hi) = potential_range(config)?;
    let tol = 1e-12;
    let outside = result
        .curves
        .iter()
        .flat_map(|c| c.mean.iter())
        .filter(|m| !(**m >= lo - tol && **m <= hi + tol))
        .count();
    out.push(CheckOutcome::new(
        "curves within potential range",
        outside == 0,
        format!("{outside} points outside [{lo}, {hi}]"),
    ));
    let bad_std = result
        .curves
        .iter()
        .flat_map(|c| c.std.iter())
        .filter(|s| !(**s >= 0.0) || !s.is_finite())
        .count();
    out.push(CheckOutcome::new(
        "standard deviations non-negative",
        bad_std == 0,
        format!("{bad_std} invalid"),
    ));

    match config.kind {
        ExperimentKind::Sweep => {
            let deltas: Vec<Option<f64>> = match config.game_family {
                GameFamily::PlateauIdenticalInterest => {
                    config.delta_values.iter().map(|&d| Some(d)).collect()
                }
                GameFamily::Custom => vec![None],
            };
            if deltas.len() >= 2 {
                for &eps in &config.eps_values {
                    let mut ds: Vec<f64> = deltas.iter().flatten().copied().collect();
                    ds.sort_by(|a, b| b.total_cmp(a));
                    let ids: Vec<String> = ds.iter().map(|&d| sweep_id(Some(d), eps)).collect();
                    out.push(monotone(
                        result,
                        &format!("hitting time grows as delta shrinks (eps={eps})"),
                        &ids,
                    ));
                }
            }
            if config.eps_values.len() >= 2 {
                for &delta in &deltas {
                    let mut es = config.eps_values.clone();
                    es.sort_by(|a, b| b.total_cmp(a));
                    let ids: Vec<String> = es.iter().map(|&e| sweep_id(delta, e)).collect();
                    let label = delta.map_or_else(String::new, |d| format!(" (delta={d})"));
                    out.push(monotone(
                        result,
                        &format!("hitting time grows as eps shrinks{label}"),
                        &ids,
                    ));
                }
            }
        }
        ExperimentKind::Comparison => {
            for alg in [Algorithm::LogLinear, Algorithm::BinaryLogLinear] {
                if config.algorithms.contains(&alg) {
                    let f = result.success_fraction(alg.name());
                    out.push(CheckOutcome::new(
                        format!("{} reaches the threshold on most games", alg.name()),
                        f >= REQUIRED_SUCCESS,
                        format!("success fraction {f:.3} (required {REQUIRED_SUCCESS})"),
                    ));
                }
            }
            if config.algorithms.contains(&Algorithm::AnnealedEw) {
                let hit = result.aggregate_hitting_time(Algorithm::AnnealedEw.name());
                let last = result
                    .aggregate(Algorithm::AnnealedEw.name())
                    .and_then(|c| c.mean.last().copied())
                    .unwrap_or(f64::NAN);
                out.push(CheckOutcome::new(
                    "annealed_ew mean curve stays below the threshold",
                    hit.is_none(),
                    format!("aggregate hitting {hit:?}, final mean {last:.4}"),
                ));
            }
        }
    }
    Ok(out)
}
