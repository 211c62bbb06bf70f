//! Closed-form thresholds and time bounds.
//!
//! Every bound has an `ln_*` form that stays finite when the plain value
//! would overflow (`e^{4 beta}` at large `beta`) or underflow (`p_min^3`).
//! The plain forms are thin wrappers that exponentiate.

mod report;

pub use report::{
    assemble_report, assemble_report_with, BoundVariant, BoundsInputs, BoundsReport, Magnitude,
    ReportOptions,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln(ln(max(x, e)))` for `x = e^{ln_x}`.
fn ln_ln_clamped_from_ln(ln_x: f64) -> f64 {
    ln_x.max(1.0).ln()
}

fn check_eps(eps: f64, upper: f64) -> Result<()> {
    if !(eps > 0.0 && eps < upper) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, {upper}), got {eps}"
        )));
    }
    Ok(())
}

fn check_shape(num_players: usize, num_actions: usize) -> Result<()> {
    if num_players == 0 || num_actions == 0 {
        return Err(Error::InvalidParameter("need N >= 1 and A >= 1".into()));
    }
    Ok(())
}

/// `ln(A^N - k)` for `k < A^N`, without forming `A^N` when it is huge.
fn ln_profiles_minus(num_players: usize, num_actions: usize, k: f64) -> f64 {
    let ln_total = num_players as f64 * (num_actions as f64).ln();
    ln_total + (-k * (-ln_total).exp()).ln_1p()
}

/// Which inflation of `1/eps` the general threshold uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdVariant {
    /// `1/eps`: the stationary distribution alone is eps-efficient.
    Lemma1,
    /// `2/eps`: half the budget goes to mixing.
    Theorem1,
    /// `4/eps`: the perturbed-chain setting.
    Theorem3,
}

impl ThresholdVariant {
    pub fn factor(self) -> f64 {
        match self {
            ThresholdVariant::Lemma1 => 1.0,
            ThresholdVariant::Theorem1 => 2.0,
            ThresholdVariant::Theorem3 => 4.0,
        }
    }
}

/// `(1/delta) ln((A^N - A_*) (k/(eps A_*) - 1/A_*))`, or 0 when the logarithm's
/// argument is at most one.
pub fn beta_threshold_general(
    delta: f64,
    num_actions: usize,
    num_players: usize,
    opt_count: usize,
    eps: f64,
    variant: ThresholdVariant,
) -> Result<f64> {
    check_shape(num_players, num_actions)?;
    check_eps(eps, 1.0)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::DegenerateGame);
    }
    let ln_total = num_players as f64 * (num_actions as f64).ln();
    if opt_count == 0 || (opt_count as f64).ln() >= ln_total - 1e-12 {
        return Err(Error::DegenerateGame);
    }
    let k = variant.factor();
    let tail = (k / eps - 1.0) / opt_count as f64;
    if !(tail > 0.0) {
        return Ok(0.0);
    }
    let ln_arg = ln_profiles_minus(num_players, num_actions, opt_count as f64) + tail.ln();
    Ok((ln_arg / delta).max(0.0))
}

/// `(1/delta) ln((N+1)^{A-1} (1/(eps Y_*) - 1/Y_*))`, or 0 when the argument is
/// at most one.
pub fn beta_threshold_symmetric(
    delta: f64,
    num_actions: usize,
    num_players: usize,
    y_star: usize,
    eps: f64,
) -> Result<f64> {
    check_shape(num_players, num_actions)?;
    check_eps(eps, 1.0)?;
    if !(delta > 0.0) || !delta.is_finite() || y_star == 0 {
        return Err(Error::DegenerateGame);
    }
    let tail = (1.0 / eps - 1.0) / y_star as f64;
    if !(tail > 0.0) {
        return Ok(0.0);
    }
    let ln_arg = (num_actions as f64 - 1.0) * ((num_players + 1) as f64).ln() + tail.ln();
    Ok((ln_arg / delta).max(0.0))
}

/// `ln` of `16 pi^2 A^{N-2} mu_min p_min^3 / (25 N^2)`, with no check on `A`.
pub fn ln_log_sobolev_lower_bound(
    num_players: usize,
    num_actions: usize,
    ln_mu_min: f64,
    ln_p_min: f64,
) -> f64 {
    let (n, a) = (num_players as f64, num_actions as f64);
    (16.0 * PI * PI / 25.0).ln() + (n - 2.0) * a.ln() + ln_mu_min + 3.0 * ln_p_min - 2.0 * n.ln()
}

/// Log-Sobolev lower bound for `P P*` of a chain in the general neighbor
/// form. Requires `A >= 4`.
pub fn log_sobolev_lower_bound(
    num_players: usize,
    num_actions: usize,
    mu_min: f64,
    p_min: f64,
) -> Result<f64> {
    if num_actions < 4 {
        return Err(Error::Hypothesis(format!(
            "the log-Sobolev lower bound needs A >= 4, got A = {num_actions}"
        )));
    }
    log_sobolev_lower_bound_unguarded(num_players, num_actions, mu_min, p_min)
}

/// The same expression evaluated for any `A`; outside `A >= 4` it is not
/// a proven bound.
pub fn log_sobolev_lower_bound_unguarded(
    num_players: usize,
    num_actions: usize,
    mu_min: f64,
    p_min: f64,
) -> Result<f64> {
    check_shape(num_players, num_actions)?;
    if !(mu_min > 0.0 && mu_min <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mu_min must lie in (0,1], got {mu_min}"
        )));
    }
    if !(0.0..=1.0).contains(&p_min) {
        return Err(Error::InvalidParameter(format!(
            "p_min must lie in [0,1], got {p_min}"
        )));
    }
    if p_min == 0.0 {
        return Ok(0.0);
    }
    Ok(ln_log_sobolev_lower_bound(num_players, num_actions, mu_min.ln(), p_min.ln()).exp())
}

/// `ln` of the log-linear specialization `16 pi^2 e^{-4 beta} / (25 N^2 A^5)`.
pub fn ln_log_linear_rho_lower_bound(num_players: usize, num_actions: usize, beta: f64) -> f64 {
    (16.0 * PI * PI / 25.0).ln()
        - 4.0 * beta
        - 2.0 * (num_players as f64).ln()
        - 5.0 * (num_actions as f64).ln()
}

pub fn log_linear_rho_lower_bound(num_players: usize, num_actions: usize, beta: f64) -> f64 {
    ln_log_linear_rho_lower_bound(num_players, num_actions, beta).exp()
}

/// `ln` of `(1/rho)(ln ln(1/mu_min) + 2 ln(4/eps))`.
pub fn ln_mixing_time_upper_bound(ln_rho: f64, ln_mu_min: f64, eps: f64) -> f64 {
    let bracket = ln_ln_clamped_from_ln(-ln_mu_min) + 2.0 * (4.0 / eps).ln();
    -ln_rho + bracket.ln()
}

/// Mixing-time bound to total variation `eps/4`. The inner `ln(1/mu_min)` is
/// clamped below at 1, which only enlarges the bound. `eps` may range over
/// `(0, 4]`.
pub fn mixing_time_upper_bound(rho: f64, mu_min: f64, eps: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rho must be positive, got {rho}"
        )));
    }
    if !(mu_min > 0.0 && mu_min < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mu_min must lie in (0,1), got {mu_min}"
        )));
    }
    if !(eps > 0.0 && eps <= 4.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0,4], got {eps}"
        )));
    }
    Ok(ln_mixing_time_upper_bound(rho.ln(), mu_min.ln(), eps).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeVariant {
    /// Log-linear learning.
    Theorem1,
    /// Binary log-linear learning (constant 8 times larger).
    Theorem2,
}

/// `ln` of the theorem time with no check on `A`; `ln beta` is clamped at 0.
pub fn ln_convergence_time(
    variant: TimeVariant,
    num_players: usize,
    num_actions: usize,
    beta: f64,
    eps: f64,
) -> f64 {
    let (n, a) = (num_players as f64, num_actions as f64);
    let denom = match variant {
        TimeVariant::Theorem1 => 16.0 * PI * PI,
        TimeVariant::Theorem2 => 2.0 * PI * PI,
    };
    let ln_const = 25f64.ln() + 2.0 * n.ln() + 5.0 * a.ln() - denom.ln();
    let log_beta = if beta > 1.0 { beta.ln() } else { 0.0 };
    let bracket = ln_ln_clamped_from_ln(n * a.ln()) + log_beta + 2.0 * (4.0 / eps).ln();
    ln_const + 4.0 * beta + bracket.ln()
}

/// `C N^2 A^5 e^{4 beta} (ln ln A^N + ln beta + 2 ln(4/eps))` with
/// `C = 25/(16 pi^2)` (Theorem1) or `25/(2 pi^2)` (Theorem2). Requires `A >= 4`.
/// May be `+inf` when it overflows; use [`ln_convergence_time`] then.
pub fn convergence_time(
    variant: TimeVariant,
    num_players: usize,
    num_actions: usize,
    beta: f64,
    eps: f64,
) -> Result<f64> {
    check_shape(num_players, num_actions)?;
    if num_actions < 4 {
        return Err(Error::Hypothesis(format!(
            "the convergence-time bound needs A >= 4, got A = {num_actions}"
        )));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    check_eps(eps, 1.0)?;
    let base =
        ln_convergence_time(TimeVariant::Theorem1, num_players, num_actions, beta, eps).exp();
    Ok(match variant {
        TimeVariant::Theorem1 => base,
        TimeVariant::Theorem2 => 8.0 * base,
    })
}

/// `ln` of `(2S/rho)(ln ln(1/mu_min) + ln(8S))`.
pub fn ln_lipschitz_constant(ln_rho: f64, ln_mu_min: f64, num_states: f64) -> f64 {
    let bracket = ln_ln_clamped_from_ln(-ln_mu_min) + (8.0 * num_states).ln();
    (2.0 * num_states).ln() - ln_rho + bracket.ln()
}

/// Lipschitz constant of the stationary distribution with respect to the
/// transition matrix, in the spectral norm.
pub fn lipschitz_constant(rho: f64, mu_min: f64, num_states: usize) -> Result<f64> {
    if !(rho > 0.0) || !(mu_min > 0.0 && mu_min <= 1.0) || num_states == 0 {
        return Err(Error::InvalidParameter(format!(
            "need rho > 0, mu_min in (0,1], states > 0; got {rho}, {mu_min}, {num_states}"
        )));
    }
    Ok(ln_lipschitz_constant(rho.ln(), mu_min.ln(), num_states as f64).exp())
}

/// `ln` of the general-chain time bound, both logarithms clamped at `e`.
pub fn ln_theorem3_time(num_players: usize, num_actions: usize, ln_p_min: f64, eps: f64) -> f64 {
    let (n, a) = (num_players as f64, num_actions as f64);
    let two_pi = 2.0 * PI;
    let ln_pref =
        25f64.ln() + 1.5 * n.ln() + n - 2.5 * two_pi.ln() - n * a.ln() - (n + 3.0) * ln_p_min;
    // ln(e^N / (p_min^N sqrt(2 pi N)))
    let inner = (n - n * ln_p_min - 0.5 * (two_pi * n).ln()).max(1.0);
    let outer = (4f64.ln() + n * a.ln() - 2.0 * eps.ln() + inner.ln()).max(1.0);
    ln_pref + outer.ln()
}

pub fn theorem3_time(num_players: usize, num_actions: usize, p_min: f64, eps: f64) -> Result<f64> {
    check_shape(num_players, num_actions)?;
    if !(p_min > 0.0 && p_min <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p_min must lie in (0,1], got {p_min}"
        )));
    }
    check_eps(eps, 1.0)?;
    Ok(ln_theorem3_time(num_players, num_actions, p_min.ln(), eps).exp())
}

/// `ln` of the stationary floor `N! (p_min/N)^N` of a general-form chain.
pub fn ln_stationary_floor(num_players: usize, ln_p_min: f64) -> f64 {
    let n = num_players as f64;
    let ln_fact: f64 = (1..=num_players).map(|k| (k as f64).ln()).sum();
    ln_fact + n * (ln_p_min - n.ln())
}

pub fn stationary_floor(num_players: usize, p_min: f64) -> f64 {
    if p_min <= 0.0 {
        return 0.0;
    }
    ln_stationary_floor(num_players, p_min.ln()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    Noisy,
    FixedShare,
}

/// Additive potential loss of the perturbed rule: `7 L A^{3N/2} beta xi / (2N)`
/// for noisy utilities (needs `2 beta xi <= 1`) or `L A^N xi / sqrt(N)` for
/// fixed share.
pub fn perturbation_slack(
    kind: PerturbationKind,
    lipschitz: f64,
    num_players: usize,
    num_actions: usize,
    beta: f64,
    xi: f64,
) -> Result<f64> {
    Ok(ln_perturbation_slack(kind, lipschitz.ln(), num_players, num_actions, beta, xi)?.exp())
}

/// `ln` of [`perturbation_slack`]; `-inf` when `xi = 0`.
pub fn ln_perturbation_slack(
    kind: PerturbationKind,
    ln_lipschitz: f64,
    num_players: usize,
    num_actions: usize,
    beta: f64,
    xi: f64,
) -> Result<f64> {
    check_shape(num_players, num_actions)?;
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "xi must be finite and >= 0, got {xi}"
        )));
    }
    let (n, a) = (num_players as f64, num_actions as f64);
    match kind {
        PerturbationKind::Noisy => {
            if 2.0 * beta * xi > 1.0 {
                return Err(Error::Hypothesis(format!(
                    "noisy-utility slack needs 2*beta*xi <= 1, got {}",
                    2.0 * beta * xi
                )));
            }
            Ok((7.0f64 / 2.0).ln() + ln_lipschitz + 1.5 * n * a.ln() + (beta * xi).ln() - n.ln())
        }
        PerturbationKind::FixedShare => Ok(ln_lipschitz + n * a.ln() + xi.ln() - 0.5 * n.ln()),
    }
}

/// Entrywise premise for noisy utilities: `|P_hat - P| <= 7 beta xi / (2N)`.
pub fn noisy_entry_premise(num_players: usize, beta: f64, xi: f64) -> f64 {
    7.0 * beta * xi / (2.0 * num_players as f64)
}

/// Spectral-norm premise for fixed share: `||P_hat - P||_2 <= xi sqrt(A^N / N)`.
pub fn fixed_share_norm_premise(num_players: usize, num_actions: usize, xi: f64) -> f64 {
    let n = num_players as f64;
    xi * (0.5 * (n * (num_actions as f64).ln() - n.ln())).exp()
}

/// `ln` of the modified-rule time bound
/// `N/(alpha c) e^{3 beta} (ln((A-1) ln(N+1)) + ln beta + 2 ln(4/eps))`.
/// Both `ln beta` and the first logarithm are clamped at 0. The constant `c`
/// is unspecified in the source result, so the value holds only up to it.
pub fn ln_corollary1_time(
    num_players: usize,
    num_actions: usize,
    alpha: f64,
    c: f64,
    beta: f64,
    eps: f64,
) -> f64 {
    let n = num_players as f64;
    let first = ((num_actions as f64 - 1.0) * (n + 1.0).ln()).max(1.0).ln();
    let log_beta = if beta > 1.0 { beta.ln() } else { 0.0 };
    let bracket = first + log_beta + 2.0 * (4.0 / eps).ln();
    n.ln() - (alpha * c).ln() + 3.0 * beta + bracket.ln()
}

pub fn corollary1_time(
    num_players: usize,
    num_actions: usize,
    alpha: f64,
    c: f64,
    beta: f64,
    eps: f64,
) -> Result<f64> {
    check_shape(num_players, num_actions)?;
    check_eps(eps, 1.0)?;
    if !(alpha > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(
            "alpha and c must be positive".into(),
        ));
    }
    Ok(ln_corollary1_time(num_players, num_actions, alpha, c, beta, eps).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn general_threshold_examples() {
        let b = beta_threshold_general(2.0, 2, 2, 1, 0.5, ThresholdVariant::Lemma1).unwrap();
        assert!(close(b, 3f64.ln() / 2.0, 1e-14));
        let b = beta_threshold_general(0.1, 10, 2, 1, 0.05, ThresholdVariant::Theorem1).unwrap();
        assert!(close(b, 10.0 * (99.0f64 * 39.0).ln(), 1e-13));
        assert!((b - 82.6).abs() < 0.05);
        // eps close to 1 with almost every profile optimal.
        assert_eq!(
            beta_threshold_general(1.0, 2, 2, 3, 0.99, ThresholdVariant::Lemma1).unwrap(),
            0.0
        );
        assert!(matches!(
            beta_threshold_general(0.0, 2, 2, 1, 0.5, ThresholdVariant::Lemma1),
            Err(Error::DegenerateGame)
        ));
        assert!(matches!(
            beta_threshold_general(1.0, 2, 2, 4, 0.5, ThresholdVariant::Lemma1),
            Err(Error::DegenerateGame)
        ));
    }

    #[test]
    fn symmetric_threshold_examples() {
        assert!(close(
            beta_threshold_symmetric(1.0, 2, 3, 1, 0.5).unwrap(),
            4f64.ln(),
            1e-14
        ));
        assert!(close(
            beta_threshold_symmetric(0.5, 3, 10, 1, 0.1).unwrap(),
            2.0 * (121.0f64 * 9.0).ln(),
            1e-14
        ));
        assert_eq!(
            beta_threshold_symmetric(1.0, 2, 3, 1, 1.0 - 1e-12).unwrap(),
            0.0
        );
    }

    #[test]
    fn log_sobolev_examples() {
        let r = log_sobolev_lower_bound(2, 4, 1.0 / 16.0, 0.25).unwrap();
        assert!(close(r, PI * PI / 6400.0, 1e-14));
        assert!((r - 1.542e-3).abs() < 1e-6);
        assert_eq!(log_sobolev_lower_bound(2, 4, 0.1, 0.0).unwrap(), 0.0);
        assert!(matches!(
            log_sobolev_lower_bound(2, 3, 0.1, 0.1),
            Err(Error::Hypothesis(_))
        ));
        let beta: f64 = 1.7;
        let (n, a) = (3usize, 5usize);
        let mu_min = (-beta).exp() / (a as f64).powi(n as i32);
        let p_min = (-beta).exp() / a as f64;
        let general = log_sobolev_lower_bound(n, a, mu_min, p_min).unwrap();
        assert!(close(
            general,
            log_linear_rho_lower_bound(n, a, beta),
            1e-12
        ));
    }

    #[test]
    fn mixing_bound_examples() {
        let rho = 1.542e-3;
        let t = mixing_time_upper_bound(rho, 1.0 / 16.0, 0.2).unwrap();
        assert!((t - 4546.0).abs() < 1.0, "{t}");
        let at_four = mixing_time_upper_bound(rho, 1.0 / 16.0, 4.0).unwrap();
        assert!(close(at_four, 16f64.ln().ln() / rho, 1e-12));
        assert!(mixing_time_upper_bound(2.0 * rho, 1.0 / 16.0, 0.2).unwrap() < t);
        // mu_min above 1/e: inner log clamped, first term zero.
        let clamp = mixing_time_upper_bound(1.0, 0.5, 0.2).unwrap();
        assert!(close(clamp, 2.0 * 20f64.ln(), 1e-14));
    }

    #[test]
    fn convergence_time_examples() {
        let t1 = convergence_time(TimeVariant::Theorem1, 2, 4, 1.0, 0.2).unwrap();
        let expected = 25.0 * 4.0 * 1024.0 / (16.0 * PI * PI)
            * 4f64.exp()
            * (16f64.ln().ln() + 2.0 * 20f64.ln());
        assert!(close(t1, expected, 1e-12));
        assert!((t1 - 2.48e5).abs() < 0.01e5, "{t1}");
        let t2 = convergence_time(TimeVariant::Theorem2, 2, 4, 1.0, 0.2).unwrap();
        assert_eq!(t2, 8.0 * t1);
        assert!(convergence_time(TimeVariant::Theorem1, 2, 3, 1.0, 0.2).is_err());
        let huge = ln_convergence_time(TimeVariant::Theorem1, 2, 4, 300.0, 0.2);
        assert!(huge.is_finite() && huge > 1200.0);
    }

    #[test]
    fn lipschitz_examples() {
        let l = lipschitz_constant(0.01, 0.05, 4).unwrap();
        let expected = 800.0 * ((20f64).ln().ln() + 32f64.ln());
        assert!(close(l, expected, 1e-14));
        assert!(close(
            lipschitz_constant(0.02, 0.05, 4).unwrap(),
            l / 2.0,
            1e-14
        ));
    }

    #[test]
    fn theorem3_examples() {
        let p = (-1f64).exp() / 4.0;
        let t = theorem3_time(2, 4, p, 0.2).unwrap();
        assert!(t.is_finite() && t > 0.0);
        assert!(theorem3_time(2, 4, 1.0, 0.2).unwrap() < t);
        assert!(theorem3_time(2, 4, 0.0, 0.2).is_err());
        assert!(close(stationary_floor(2, 0.5), 2.0 * 0.0625, 1e-14));
    }

    #[test]
    fn slack_examples() {
        let s = perturbation_slack(PerturbationKind::Noisy, 1e6, 2, 4, 2.0, 0.1).unwrap();
        assert!(close(s, 2.24e7, 1e-12));
        assert_eq!(
            perturbation_slack(PerturbationKind::Noisy, 1e6, 2, 4, 2.0, 0.0).unwrap(),
            0.0
        );
        assert!(matches!(
            perturbation_slack(PerturbationKind::Noisy, 1.0, 2, 4, 2.0, 0.3),
            Err(Error::Hypothesis(_))
        ));
        let f = perturbation_slack(PerturbationKind::FixedShare, 10.0, 4, 3, 1.0, 0.01).unwrap();
        assert!(close(f, 10.0 * 81.0 * 0.01 / 2.0, 1e-13));
        assert!(close(
            fixed_share_norm_premise(2, 4, 0.1),
            0.1 * 8f64.sqrt(),
            1e-14
        ));
    }

    #[test]
    fn corollary1_time_shape() {
        let t = corollary1_time(3, 2, 1.0, 1.0, 2.0, 0.1).unwrap();
        let expected = 3.0 * 6f64.exp() * (4f64.ln().ln() + 2f64.ln() + 2.0 * 40f64.ln());
        assert!(close(t, expected, 1e-13));
        assert!(close(
            corollary1_time(3, 2, 2.0, 1.0, 2.0, 0.1).unwrap(),
            t / 2.0,
            1e-13
        ));
    }
}
