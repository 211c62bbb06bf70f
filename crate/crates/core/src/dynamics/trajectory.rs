use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::symmetric::modified_index;
use super::{step_index, DynamicsConfig, NoiseMode, Rule};
use crate::error::Result;
use crate::game::{is_symmetric, ActionProfile, PotentialGame};

/// Where a trajectory starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    /// A profile drawn uniformly from the trajectory's own RNG.
    Uniform,
    Profile(ActionProfile),
    Index(usize),
}

/// A recorded run. `indices[0]` is the initial profile; `indices[k]` is the
/// profile after `k` rounds (or `k` clock events for the continuous-time rule,
/// in which case `event_times[k]` is the time of the `k`-th event).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub rule: Rule,
    pub indices: Vec<usize>,
    pub potentials: Vec<f64>,
    pub event_times: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn profiles(&self, game: &PotentialGame) -> Vec<ActionProfile> {
        self.indices.iter().map(|&i| game.profile_of(i)).collect()
    }

    /// Visit frequencies over profiles, optionally skipping a burn-in prefix.
    /// For continuous-time runs the frequencies are weighted by holding time.
    pub fn occupation_frequencies(&self, num_profiles: usize, burn_in: usize) -> Vec<f64> {
        let mut freq = vec![0.0; num_profiles];
        match &self.event_times {
            None => {
                for &i in &self.indices[burn_in.min(self.indices.len())..] {
                    freq[i] += 1.0;
                }
            }
            Some(times) => {
                for k in burn_in..self.indices.len().saturating_sub(1) {
                    freq[self.indices[k]] += times[k + 1] - times[k];
                }
            }
        }
        let total: f64 = freq.iter().sum();
        if total > 0.0 {
            freq.iter_mut().for_each(|f| *f /= total);
        }
        freq
    }

    /// Writes `t,profile_index,potential` (or `event_time,...` for
    /// continuous-time runs).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let first = if self.event_times.is_some() {
            "event_time"
        } else {
            "t"
        };
        w.write_record([first, "profile_index", "potential"])?;
        for (k, (&idx, &phi)) in self.indices.iter().zip(&self.potentials).enumerate() {
            let t = match &self.event_times {
                Some(times) => format!("{:.16e}", times[k]),
                None => k.to_string(),
            };
            w.write_record([t, idx.to_string(), format!("{phi:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Runs `steps` rounds of the configured rule from `initial`, with an RNG
/// seeded from `config.seed`.
pub fn run_trajectory(
    game: &PotentialGame,
    config: &DynamicsConfig,
    steps: usize,
    initial: &Initial,
) -> Result<Trajectory> {
    let mut warnings = config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut idx = match initial {
        Initial::Uniform => rng.gen_range(0..game.num_profiles()),
        Initial::Profile(p) => game.index_of(p)?,
        Initial::Index(i) => {
            if *i >= game.num_profiles() {
                return Err(crate::Error::InvalidParameter(format!(
                    "profile index {i} out of range"
                )));
            }
            *i
        }
    };
    let mut indices = Vec::with_capacity(steps + 1);
    indices.push(idx);

    let event_times = if config.rule == Rule::ModifiedSymmetric {
        let check = is_symmetric(game);
        if !check.symmetric {
            let w =
                "game is not symmetric; the occupancy-level guarantees do not apply".to_string();
            log::warn!("{w}");
            warnings.push(w);
        }
        let mut times = Vec::with_capacity(steps + 1);
        let mut now = 0.0;
        times.push(now);
        for _ in 0..steps {
            let (next, dt) = modified_index(game, idx, config.beta, config.alpha, &mut rng);
            now += dt;
            idx = next;
            indices.push(idx);
            times.push(now);
        }
        Some(times)
    } else {
        let noise = match config.noise_mode {
            NoiseMode::Frozen => config.noise_table(game),
            NoiseMode::PerRound => crate::dynamics::NoiseTable::zeros(game),
        };
        for _ in 0..steps {
            idx = step_index(game, config, &noise, idx, &mut rng)?;
            indices.push(idx);
        }
        None
    };

    let potentials = indices.iter().map(|&i| game.potential_at(i)).collect();
    Ok(Trajectory {
        rule: config.rule,
        indices,
        potentials,
        event_times,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::intro_game;

    #[test]
    fn seeded_runs_are_reproducible() {
        let g = intro_game().rescaled_to_unit().unwrap();
        let c = DynamicsConfig::new(Rule::LogLinear, 2.0).with_seed(17);
        let a = run_trajectory(&g, &c, 300, &Initial::Uniform).unwrap();
        let b = run_trajectory(&g, &c, 300, &Initial::Uniform).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 301);
        let other = run_trajectory(&g, &c.clone().with_seed(18), 300, &Initial::Uniform).unwrap();
        assert_ne!(a.indices, other.indices);
    }

    #[test]
    fn csv_has_expected_header() {
        let g = intro_game();
        let c = DynamicsConfig::new(Rule::BinaryLogLinear, 0.1).with_seed(1);
        let t = run_trajectory(&g, &c, 5, &Initial::Index(3)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,profile_index,potential\n0,3,"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn continuous_time_run_records_event_times() {
        let g = crate::game::symmetric_identical_interest(3, 2, |x| x.counts()[0] as f64 / 3.0)
            .unwrap();
        let c = DynamicsConfig::new(Rule::ModifiedSymmetric, 1.0).with_seed(5);
        let t = run_trajectory(&g, &c, 50, &Initial::Uniform).unwrap();
        let times = t.event_times.as_ref().unwrap();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert!(t.warnings.is_empty());
        let f = t.occupation_frequencies(8, 0);
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_game_warns_under_modified_rule() {
        let g = intro_game();
        let c = DynamicsConfig::new(Rule::ModifiedSymmetric, 1.0);
        let t = run_trajectory(&g, &c, 3, &Initial::Index(0)).unwrap();
        assert_eq!(t.warnings.len(), 1);
    }
}
