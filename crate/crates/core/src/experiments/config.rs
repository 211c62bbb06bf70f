use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{BaselineRule, DynamicsConfig, NoiseMode, Rule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameFamily {
    #[default]
    PlateauIdenticalInterest,
    /// A single game read from `game_path`.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    Sweep,
    Comparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Evolve `mu^0 P^t` exactly.
    Exact,
    MonteCarlo,
    /// Exact when the rule has a time-homogeneous chain of at most
    /// `exact_state_limit` states.
    #[default]
    Auto,
}

/// Algorithms of a comparison run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    LogLinear,
    Hedge,
    BinaryLogLinear,
    Exp3,
    AnnealedEw,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::LogLinear,
        Algorithm::Hedge,
        Algorithm::BinaryLogLinear,
        Algorithm::Exp3,
        Algorithm::AnnealedEw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LogLinear => "log_linear",
            Algorithm::Hedge => "hedge",
            Algorithm::BinaryLogLinear => "binary_log_linear",
            Algorithm::Exp3 => "exp3",
            Algorithm::AnnealedEw => "annealed_ew",
        }
    }

    /// `full` or `reduced`.
    pub fn feedback(self) -> &'static str {
        match self {
            Algorithm::LogLinear | Algorithm::Hedge => "full",
            _ => "reduced",
        }
    }

    pub fn learning_rule(self) -> Option<Rule> {
        match self {
            Algorithm::LogLinear => Some(Rule::LogLinear),
            Algorithm::BinaryLogLinear => Some(Rule::BinaryLogLinear),
            _ => None,
        }
    }

    pub fn baseline(self) -> Option<BaselineRule> {
        match self {
            Algorithm::Hedge => Some(BaselineRule::Hedge),
            Algorithm::Exp3 => Some(BaselineRule::Exp3),
            Algorithm::AnnealedEw => Some(BaselineRule::AnnealedEw),
            _ => None,
        }
    }
}

/// Recording times: every `every` steps when set, otherwise all steps up to
/// `dense_until` followed by `points_per_doubling` geometrically spaced
/// times per doubling. Time 0 and the horizon are always included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecordGrid {
    pub every: Option<u64>,
    pub dense_until: u64,
    pub points_per_doubling: u32,
}

impl Default for RecordGrid {
    fn default() -> Self {
        Self {
            every: None,
            dense_until: 128,
            points_per_doubling: 16,
        }
    }
}

impl RecordGrid {
    pub fn times(&self, horizon: u64) -> Vec<u64> {
        let mut out = Vec::new();
        if let Some(every) = self.every {
            let every = every.max(1);
            let mut t = 0;
            while t < horizon {
                out.push(t);
                t = t.saturating_add(every);
            }
            out.push(horizon);
            return out;
        }
        let dense = self.dense_until.min(horizon);
        out.extend(0..=dense);
        let ppd = self.points_per_doubling.max(1) as f64;
        let mut k = ((dense.max(1) as f64).log2() * ppd).floor() as u64;
        loop {
            let t = (k as f64 / ppd).exp2().round();
            if t >= horizon as f64 {
                break;
            }
            let t = t as u64;
            if t > *out.last().expect("non-empty") {
                out.push(t);
            }
            k += 1;
        }
        if *out.last().expect("non-empty") != horizon {
            out.push(horizon);
        }
        out
    }
}

/// Learning-rule template; `beta = None` selects the threshold of the rule's
/// convergence theorem for every game, `delta` and `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleTemplate {
    pub rule: Rule,
    pub beta: Option<f64>,
    pub xi: f64,
    pub alpha: f64,
    pub noise_mode: NoiseMode,
}

impl Default for RuleTemplate {
    fn default() -> Self {
        Self {
            rule: Rule::LogLinear,
            beta: None,
            xi: 0.0,
            alpha: 1.0,
            noise_mode: NoiseMode::Frozen,
        }
    }
}

impl RuleTemplate {
    pub fn instantiate(&self, rule: Rule, beta: f64, seed: u64) -> DynamicsConfig {
        DynamicsConfig {
            rule,
            beta,
            xi: self.xi,
            alpha: self.alpha,
            seed,
            noise_seed: seed,
            noise_mode: self.noise_mode,
        }
    }
}

pub(crate) const DEFAULT_NUM_GAMES: usize = 30;
pub(crate) const DEFAULT_HORIZON: u64 = 100_000;
pub(crate) const DEFAULT_TRAJECTORIES: usize = 100;

fn default_num_games() -> usize {
    DEFAULT_NUM_GAMES
}
fn default_horizon() -> u64 {
    DEFAULT_HORIZON
}
fn default_trajectories() -> usize {
    DEFAULT_TRAJECTORIES
}
fn default_deltas() -> Vec<f64> {
    vec![0.1]
}
fn default_eps() -> Vec<f64> {
    vec![0.05]
}
fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}
fn default_state_limit() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: ExperimentKind,
    #[serde(default)]
    pub game_family: GameFamily,
    #[serde(default)]
    pub game_path: Option<PathBuf>,
    #[serde(default = "default_num_games")]
    pub num_games: usize,
    #[serde(default = "default_deltas")]
    pub delta_values: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps_values: Vec<f64>,
    #[serde(default)]
    pub rule: RuleTemplate,
    /// Steps simulated by Monte-Carlo runs.
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    /// Steps evolved by exact runs; defaults to `horizon`.
    #[serde(default)]
    pub exact_horizon: Option<u64>,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub record: RecordGrid,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Comparison runs only.
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_state_limit")]
    pub exact_state_limit: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Sweep,
            game_family: GameFamily::PlateauIdenticalInterest,
            game_path: None,
            num_games: DEFAULT_NUM_GAMES,
            delta_values: default_deltas(),
            eps_values: default_eps(),
            rule: RuleTemplate::default(),
            horizon: DEFAULT_HORIZON,
            exact_horizon: None,
            trajectories: DEFAULT_TRAJECTORIES,
            record: RecordGrid::default(),
            mode: Mode::Auto,
            base_seed: 0,
            output_path: None,
            algorithms: default_algorithms(),
            exact_state_limit: default_state_limit(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let config: Self = toml::from_str(s)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a TOML file; a relative `game_path` or `output_path` is resolved
    /// against the file's directory.
    pub fn load_toml(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut config = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.game_path, &mut config.output_path]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn exact_horizon(&self) -> u64 {
        self.exact_horizon.unwrap_or(self.horizon)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.num_games == 0 {
            return bad("num_games must be at least 1".into());
        }
        if self.horizon == 0 || self.exact_horizon() == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.trajectories == 0 {
            return bad("trajectories must be at least 1".into());
        }
        if self.eps_values.is_empty() || self.eps_values.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return bad(format!(
                "eps values must lie in (0,1), got {:?}",
                self.eps_values
            ));
        }
        match self.game_family {
            GameFamily::PlateauIdenticalInterest => {
                if self.delta_values.is_empty()
                    || self.delta_values.iter().any(|&d| !(d > 0.0 && d < 1.0))
                {
                    return bad(format!(
                        "delta values must lie in (0,1), got {:?}",
                        self.delta_values
                    ));
                }
            }
            GameFamily::Custom => {
                if self.game_path.is_none() {
                    return bad("a custom game family needs game_path".into());
                }
            }
        }
        if let Some(beta) = self.rule.beta {
            if !(beta >= 0.0) || !beta.is_finite() {
                return bad(format!("beta must be finite and non-negative, got {beta}"));
            }
        }
        if self.rule.rule == Rule::ModifiedSymmetric {
            return bad("the continuous-time modified rule has no step-indexed experiment".into());
        }
        if self.kind == ExperimentKind::Comparison {
            if self.algorithms.is_empty() {
                return bad("a comparison needs at least one algorithm".into());
            }
            let deltas = if self.game_family == GameFamily::Custom {
                1
            } else {
                self.delta_values.len()
            };
            if deltas != 1 || self.eps_values.len() != 1 {
                return bad("a comparison uses exactly one delta and one eps".into());
            }
        }
        Ok(())
    }
}
