use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    beta_threshold_general, beta_threshold_symmetric, ln_convergence_time, ln_corollary1_time,
    ln_lipschitz_constant, ln_log_sobolev_lower_bound, ln_mixing_time_upper_bound,
    ln_perturbation_slack, ln_stationary_floor, ln_theorem3_time, PerturbationKind,
    ThresholdVariant, TimeVariant,
};
use crate::dynamics::{DynamicsConfig, Rule};
use crate::error::{Error, Result};
use crate::game::{game_constants, occupancy_of, PotentialGame};
use crate::markov::{
    build_transition_with, gibbs_log_stationary, stationary_of, DEFAULT_STATE_CAP,
};

/// Largest `ln` exponentiated into a plain value.
const LN_VALUE_MAX: f64 = 690.0;

/// A positive quantity with its logarithm. `value` is `None` when the plain
/// number is not representable in double precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Magnitude {
    pub value: Option<f64>,
    /// `-inf` for an exact zero; written to JSON as the string `"-inf"`.
    #[serde(with = "extended_f64")]
    pub ln: f64,
}

/// JSON has no infinities, so non-finite values travel as strings.
mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

impl Magnitude {
    pub fn from_ln(ln: f64) -> Self {
        let value = if ln == f64::NEG_INFINITY {
            Some(0.0)
        } else if ln <= LN_VALUE_MAX && ln > -740.0 {
            Some(ln.exp())
        } else {
            None
        };
        Self { value, ln }
    }

    pub fn zero() -> Self {
        Self {
            value: Some(0.0),
            ln: f64::NEG_INFINITY,
        }
    }

    /// The plain value, or `+inf` / `0` when out of range.
    pub fn to_f64(&self) -> f64 {
        self.value
            .unwrap_or(if self.ln > 0.0 { f64::INFINITY } else { 0.0 })
    }

    pub fn is_log_only(&self) -> bool {
        self.value.is_none()
    }
}

/// Which result the report instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    Theorem1,
    Theorem2,
    Theorem3Noisy,
    Theorem3FixedShare,
    Corollary1,
}

impl BoundVariant {
    pub fn for_rule(rule: Rule) -> Self {
        match rule {
            Rule::LogLinear => BoundVariant::Theorem1,
            Rule::BinaryLogLinear => BoundVariant::Theorem2,
            Rule::NoisyLogLinear => BoundVariant::Theorem3Noisy,
            Rule::FixedShare => BoundVariant::Theorem3FixedShare,
            Rule::ModifiedSymmetric => BoundVariant::Corollary1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsInputs {
    pub num_players: usize,
    pub num_actions: usize,
    pub delta: f64,
    /// Number of potential maximizers (occupancy maximizers for the
    /// symmetric variant).
    pub opt_count: usize,
    pub eps: f64,
    pub xi: f64,
    pub alpha: f64,
    pub c: Option<f64>,
    pub beta: f64,
    pub p_min: Magnitude,
    pub mu_min: Magnitude,
    pub variant: BoundVariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub beta_threshold: f64,
    pub rho_lower: Magnitude,
    pub mixing_time_upper: Magnitude,
    pub convergence_time: Magnitude,
    pub lipschitz_l: Magnitude,
    pub perturbation_slack: Magnitude,
    pub inputs: BoundsInputs,
    /// Some quantity was only representable through its logarithm.
    pub log_space: bool,
    /// `A >= 4`; when false, `rho_lower` is the formula evaluated outside its
    /// hypothesis.
    pub lemma2_hypothesis_met: bool,
    /// The time bound carries an unspecified multiplicative constant.
    pub up_to_constant: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Constant of the modified-rule time bound.
    pub c: f64,
    pub state_cap: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            c: 1.0,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

pub fn assemble_report(
    game: &PotentialGame,
    config: &DynamicsConfig,
    eps: f64,
) -> Result<BoundsReport> {
    assemble_report_with(game, config, eps, &ReportOptions::default())
}

fn ln_min(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Chooses `beta` by the threshold matching the rule, builds the chain at that
/// `beta`, reads off `p_min` and `mu_min`, and evaluates every bound.
pub fn assemble_report_with(
    game: &PotentialGame,
    config: &DynamicsConfig,
    eps: f64,
    opts: &ReportOptions,
) -> Result<BoundsReport> {
    game.require_theorem_compatible()?;
    let constants = game_constants(game);
    let delta = constants.delta.value()?;
    let (n, a) = (game.num_players(), game.num_actions());
    let variant = BoundVariant::for_rule(config.rule);
    let mut notes = Vec::new();

    let (beta, opt_count) = match variant {
        BoundVariant::Theorem1 | BoundVariant::Theorem2 => (
            beta_threshold_general(
                delta,
                a,
                n,
                constants.optimal_count,
                eps,
                ThresholdVariant::Theorem1,
            )?,
            constants.optimal_count,
        ),
        BoundVariant::Theorem3Noisy | BoundVariant::Theorem3FixedShare => (
            beta_threshold_general(
                delta,
                a,
                n,
                constants.optimal_count,
                eps,
                ThresholdVariant::Theorem3,
            )?,
            constants.optimal_count,
        ),
        BoundVariant::Corollary1 => {
            let occupied: BTreeSet<Vec<usize>> = constants
                .optimal_indices
                .iter()
                .map(|&i| occupancy_of(&game.profile_of(i), n, a).map(|x| x.counts().to_vec()))
                .collect::<Result<_>>()?;
            let y_star = occupied.len();
            (beta_threshold_symmetric(delta, a, n, y_star, eps)?, y_star)
        }
    };

    let chain_rule = match variant {
        BoundVariant::Corollary1 => {
            notes.push("mu_min and p_min are read from the log-linear chain on profiles".into());
            Rule::LogLinear
        }
        _ => config.rule,
    };
    let chain_config = DynamicsConfig {
        rule: chain_rule,
        beta,
        ..config.clone()
    };
    let noise = chain_config.noise_table(game);
    let chain = build_transition_with(game, &chain_config, &noise, opts.state_cap)?;
    let envelope = chain.envelope().ok_or_else(|| {
        Error::InvalidParameter("single-action games have no neighbor transitions".into())
    })?;
    let ln_p_min = envelope.ln_p_min;

    let ln_mu_min = match chain_rule {
        Rule::LogLinear | Rule::BinaryLogLinear => ln_min(&gibbs_log_stationary(game, beta)),
        _ => {
            let mu = stationary_of(&chain)?;
            let m = mu.min();
            if m > 0.0 {
                m.ln()
            } else {
                notes.push(
                    "stationary minimum underflowed; using the general-form floor N!(p_min/N)^N"
                        .into(),
                );
                ln_stationary_floor(n, ln_p_min)
            }
        }
    };

    let lemma2_hypothesis_met = a >= 4;
    if !lemma2_hypothesis_met {
        notes.push(format!(
            "A = {a} < 4: the log-Sobolev lower bound is evaluated outside its hypothesis"
        ));
    }
    let ln_rho = ln_log_sobolev_lower_bound(n, a, ln_mu_min, ln_p_min);
    let ln_mixing = ln_mixing_time_upper_bound(ln_rho, ln_mu_min, eps);

    let ln_time = match variant {
        BoundVariant::Theorem1 => ln_convergence_time(TimeVariant::Theorem1, n, a, beta, eps),
        BoundVariant::Theorem2 => ln_convergence_time(TimeVariant::Theorem2, n, a, beta, eps),
        BoundVariant::Theorem3Noisy | BoundVariant::Theorem3FixedShare => {
            ln_theorem3_time(n, a, ln_p_min, eps)
        }
        BoundVariant::Corollary1 => ln_corollary1_time(n, a, config.alpha, opts.c, beta, eps),
    };

    let states = game.num_profiles() as f64;
    let (ln_l, slack) = match variant {
        BoundVariant::Theorem3Noisy | BoundVariant::Theorem3FixedShare => {
            // The Lipschitz constant belongs to the unperturbed log-linear chain.
            let base = build_transition_with(
                game,
                &DynamicsConfig::new(Rule::LogLinear, beta),
                &noise,
                opts.state_cap,
            )?;
            let base_env = base.envelope().expect("checked above");
            let base_mu = ln_min(&gibbs_log_stationary(game, beta));
            let base_rho = ln_log_sobolev_lower_bound(n, a, base_mu, base_env.ln_p_min);
            let ln_l = ln_lipschitz_constant(base_rho, base_mu, states);
            let kind = if variant == BoundVariant::Theorem3Noisy {
                PerturbationKind::Noisy
            } else {
                PerturbationKind::FixedShare
            };
            let slack =
                Magnitude::from_ln(ln_perturbation_slack(kind, ln_l, n, a, beta, config.xi)?);
            (ln_l, slack)
        }
        _ => (
            ln_lipschitz_constant(ln_rho, ln_mu_min, states),
            Magnitude::zero(),
        ),
    };

    let rho_lower = Magnitude::from_ln(ln_rho);
    let mixing_time_upper = Magnitude::from_ln(ln_mixing);
    let convergence_time = Magnitude::from_ln(ln_time);
    let lipschitz_l = Magnitude::from_ln(ln_l);
    let p_min = Magnitude::from_ln(ln_p_min);
    let mu_min = Magnitude::from_ln(ln_mu_min);
    let log_space = [
        rho_lower,
        mixing_time_upper,
        convergence_time,
        lipschitz_l,
        slack,
        p_min,
        mu_min,
    ]
    .iter()
    .any(Magnitude::is_log_only);

    Ok(BoundsReport {
        beta_threshold: beta,
        rho_lower,
        mixing_time_upper,
        convergence_time,
        lipschitz_l,
        perturbation_slack: slack,
        inputs: BoundsInputs {
            num_players: n,
            num_actions: a,
            delta,
            opt_count,
            eps,
            xi: config.xi,
            alpha: config.alpha,
            c: (variant == BoundVariant::Corollary1).then_some(opts.c),
            beta,
            p_min,
            mu_min,
            variant,
        },
        log_space,
        lemma2_hypothesis_met,
        up_to_constant: variant == BoundVariant::Corollary1,
        notes,
    })
}
