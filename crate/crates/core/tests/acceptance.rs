//! One test per acceptance criterion. Each prints a single
//! `[acceptance] PASS|FAIL <criterion>: <detail>` line.

mod common;

use std::time::{Duration, Instant};

use common::{expected_potential, gap_suite, random_suite, report, suite_chains};
use loglinear_core::bounds::{
    beta_threshold_general, convergence_time, fixed_share_norm_premise, lipschitz_constant,
    ln_mixing_time_upper_bound, log_sobolev_lower_bound, noisy_entry_premise, stationary_floor,
    ThresholdVariant, TimeVariant,
};
use loglinear_core::dynamics::{run_trajectory, DynamicsConfig, Initial, Rule};
use loglinear_core::experiments::{
    check_invariants, export_csv, read_sweep_result, run_experiment, ExperimentConfig,
    ExperimentKind,
};
use loglinear_core::game::{game_constants, occupancy_of, symmetric_identical_interest};
use loglinear_core::markov::{
    build_transition, check_detailed_balance, distribution_at_time, estimate_log_sobolev,
    gibbs_stationary, multiplicative_reversibilization, occupancy_gibbs,
    spectral_gap_reversibilized, spectral_norm_of_difference, stationary_of, tv_distance,
    OccupancyChain, SobolevOptions, StepCount, TransitionMatrix,
};
use loglinear_core::PotentialGame;

fn finish(name: &str, failures: &[String], detail: String) {
    let passed = failures.is_empty();
    let detail = if passed {
        detail
    } else {
        format!("{detail}; failures: {}", failures.join(" | "))
    };
    report(name, passed, &detail);
    assert!(passed, "{name}: {detail}");
}

fn within(name: &str, started: Instant, budget: Duration, failures: &mut Vec<String>) -> String {
    let elapsed = started.elapsed();
    if elapsed > budget {
        failures.push(format!("{name} took {elapsed:.1?}, budget {budget:?}"));
    }
    format!("{elapsed:.1?} (budget {budget:?})")
}

#[test]
fn stationary_distribution_identity() {
    let started = Instant::now();
    let games = random_suite();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let chains = suite_chains(&games);
    for c in &chains {
        let mu = stationary_of(&c.chain).unwrap();
        let tv = tv_distance(mu.probs(), gibbs_stationary(c.game, c.beta).probs()).unwrap();
        worst = worst.max(tv);
        if !(tv <= 1e-10) {
            failures.push(format!(
                "game {} {:?} beta {}: TV {tv:e}",
                c.game_index, c.rule, c.beta
            ));
        }
    }
    let time = within(
        "stationary identity",
        started,
        Duration::from_secs(30),
        &mut failures,
    );
    finish(
        "stationary distribution equals Gibbs (log-linear and binary)",
        &failures,
        format!(
            "{} chains, max TV {worst:.2e} (tol 1e-10), {time}",
            chains.len()
        ),
    );
}

#[test]
fn detailed_balance() {
    let games = random_suite();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let chains = suite_chains(&games);
    for c in &chains {
        let mu = gibbs_stationary(c.game, c.beta);
        let check = check_detailed_balance(&c.chain, mu.probs(), 1e-12).unwrap();
        worst = worst.max(check.max_violation);
        if !check.holds {
            failures.push(format!(
                "game {} {:?} beta {}: {:e}",
                c.game_index, c.rule, c.beta, check.max_violation
            ));
        }
    }
    finish(
        "detailed balance",
        &failures,
        format!(
            "{} chains, max violation {worst:.2e} (tol 1e-12)",
            chains.len()
        ),
    );
}

#[test]
fn gibbs_efficiency_at_threshold() {
    let games = random_suite();
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut min_margin = f64::INFINITY;
    for (g, game) in games.iter().enumerate() {
        let c = game_constants(game);
        for eps in [0.5, 0.2, 0.1] {
            let beta = beta_threshold_general(
                c.delta.value().unwrap(),
                game.num_actions(),
                2,
                c.optimal_count,
                eps,
                ThresholdVariant::Lemma1,
            )
            .unwrap();
            let mu = gibbs_stationary(game, beta);
            let margin = expected_potential(game, mu.probs()) - (c.max_potential - eps);
            min_margin = min_margin.min(margin);
            checks += 1;
            if !(margin >= 0.0) {
                failures.push(format!("game {g} eps {eps}: margin {margin:e}"));
            }
        }
    }
    finish(
        "stationary efficiency: E_mu[Phi] >= max Phi - eps at the threshold beta",
        &failures,
        format!("{checks} checks, smallest margin {min_margin:.3e}"),
    );
}

struct LowerBoundInputs {
    mu_min: f64,
    rho_lb: f64,
}

fn lower_bound_inputs(
    game: &PotentialGame,
    chain: &TransitionMatrix,
    mu: &[f64],
) -> LowerBoundInputs {
    let mu_min = mu.iter().copied().fold(f64::INFINITY, f64::min);
    let p_min = chain.envelope().unwrap().p_min;
    let rho_lb =
        log_sobolev_lower_bound(game.num_players(), game.num_actions(), mu_min, p_min).unwrap();
    LowerBoundInputs { mu_min, rho_lb }
}

#[test]
fn log_sobolev_lower_bound_necessary_conditions() {
    let started = Instant::now();
    let games = random_suite();
    let mut failures = Vec::new();
    let mut count = 0;
    let mut min_gap_ratio = f64::INFINITY;
    let mut min_sobolev_ratio = f64::INFINITY;
    let opts = SobolevOptions::default();
    for c in suite_chains(&games)
        .iter()
        .filter(|c| c.game.num_actions() >= 4)
    {
        let mu = gibbs_stationary(c.game, c.beta);
        let lb = lower_bound_inputs(c.game, &c.chain, mu.probs());
        let gap = spectral_gap_reversibilized(&c.chain, mu.probs()).unwrap();
        let pps = multiplicative_reversibilization(&c.chain, mu.probs()).unwrap();
        let sob = estimate_log_sobolev(&pps, mu.probs(), &opts).unwrap();
        count += 1;
        if lb.rho_lb > 0.0 {
            min_gap_ratio = min_gap_ratio.min(gap / (2.0 * lb.rho_lb));
            min_sobolev_ratio = min_sobolev_ratio.min(sob.value / lb.rho_lb);
        }
        if !(gap >= 2.0 * lb.rho_lb) {
            failures.push(format!(
                "game {} {:?} beta {}: gap {gap:e} < 2 rho_lb",
                c.game_index, c.rule, c.beta
            ));
        }
        if !(sob.value >= lb.rho_lb) {
            failures.push(format!(
                "game {} {:?} beta {}: estimate {:e} < rho_lb {:e}",
                c.game_index, c.rule, c.beta, sob.value, lb.rho_lb
            ));
        }
    }
    let time = within(
        "log-Sobolev bound",
        started,
        Duration::from_secs(120),
        &mut failures,
    );
    finish(
        "log-Sobolev lower bound: lambda(PP*) >= 2 rho_lb and log-Sobolev estimate >= rho_lb",
        &failures,
        format!(
            "{count} chains with A >= 4, {} restarts, min lambda/(2 rho_lb) {min_gap_ratio:.3e}, min estimate/rho_lb {min_sobolev_ratio:.3e}, {time}",
            opts.restarts
        ),
    );
}

#[test]
fn mixing_bound_soundness() {
    let started = Instant::now();
    let games = random_suite();
    let eps = 0.2;
    let mut failures = Vec::new();
    let mut count = 0;
    let mut max_ln_t: f64 = 0.0;
    let mut worst_tv: f64 = 0.0;
    for c in suite_chains(&games)
        .iter()
        .filter(|c| c.game.num_actions() >= 4)
    {
        let mu = gibbs_stationary(c.game, c.beta);
        let lb = lower_bound_inputs(c.game, &c.chain, mu.probs());
        let ln_t = ln_mixing_time_upper_bound(lb.rho_lb.ln(), lb.mu_min.ln(), eps);
        let t = StepCount::from_ln(ln_t).unwrap();
        max_ln_t = max_ln_t.max(ln_t);
        let n = mu.len();
        let uniform = vec![1.0 / n as f64; n];
        let mut worst_start = vec![0.0; n];
        worst_start[mu.argmin()] = 1.0;
        for start in [uniform, worst_start] {
            let evo = distribution_at_time(&c.chain, &start, t).unwrap();
            let tv = tv_distance(evo.dist.probs(), mu.probs()).unwrap();
            worst_tv = worst_tv.max(tv);
            count += 1;
            if !(tv <= eps / 4.0) {
                failures.push(format!(
                    "game {} {:?} beta {}: TV {tv:e} at t = {t}",
                    c.game_index, c.rule, c.beta
                ));
            }
        }
    }
    let time = within(
        "mixing bound",
        started,
        Duration::from_secs(60),
        &mut failures,
    );
    finish(
        "mixing-time bound: TV(mu0 P^t, mu) <= eps/4 at the bound (eps = 0.2)",
        &failures,
        format!(
            "{count} (chain, start) pairs with A >= 4, largest t = e^{max_ln_t:.1}, max TV {worst_tv:.2e}, {time}"
        ),
    );
}

fn theorem_end_to_end(rule: Rule, variant: TimeVariant) -> (Vec<String>, usize, f64, f64) {
    let eps = 0.2;
    let mut failures = Vec::new();
    let mut passed = 0;
    let mut min_margin = f64::INFINITY;
    let mut max_ln_t: f64 = 0.0;
    for (g, game) in gap_suite().iter().enumerate() {
        let c = game_constants(game);
        let beta = beta_threshold_general(
            c.delta.value().unwrap(),
            4,
            2,
            c.optimal_count,
            eps,
            ThresholdVariant::Theorem1,
        )
        .unwrap();
        let t = convergence_time(variant, 2, 4, beta, eps).unwrap();
        max_ln_t = max_ln_t.max(t.ln());
        let chain = build_transition(game, &DynamicsConfig::new(rule, beta)).unwrap();
        let uniform = vec![1.0 / 16.0; 16];
        let evo =
            distribution_at_time(&chain, &uniform, StepCount::from_f64_ceil(t).unwrap()).unwrap();
        let margin = expected_potential(game, evo.dist.probs()) - (c.max_potential - eps);
        min_margin = min_margin.min(margin);
        if margin >= 0.0 {
            passed += 1;
        } else {
            failures.push(format!(
                "game {g}: margin {margin:e} at beta {beta:.3}, t {t:.3e}"
            ));
        }
    }
    (failures, passed, min_margin, max_ln_t)
}

#[test]
fn log_linear_convergence_time() {
    let (failures, passed, margin, ln_t) =
        theorem_end_to_end(Rule::LogLinear, TimeVariant::Theorem1);
    finish(
        "log-linear convergence: E_{mu^t}[Phi] >= max Phi - eps at the bound (beta, t)",
        &failures,
        format!("{passed}/20 games, smallest margin {margin:.3e}, largest t = e^{ln_t:.1}"),
    );
}

#[test]
fn binary_convergence_time() {
    let (mut failures, passed, margin, ln_t) =
        theorem_end_to_end(Rule::BinaryLogLinear, TimeVariant::Theorem2);
    let mut ratios = Vec::new();
    for beta in [0.0, 1.0, 7.5, 30.0] {
        let t1 = convergence_time(TimeVariant::Theorem1, 2, 4, beta, 0.2).unwrap();
        let t2 = convergence_time(TimeVariant::Theorem2, 2, 4, beta, 0.2).unwrap();
        ratios.push(t2 / t1);
        if t2 / t1 != 8.0 {
            failures.push(format!("ratio {} at beta {beta}", t2 / t1));
        }
    }
    finish(
        "binary convergence: E_{mu^t}[Phi] >= max Phi - eps; bound ratio to log-linear is 8",
        &failures,
        format!("{passed}/20 games, smallest margin {margin:.3e}, largest t = e^{ln_t:.1}, ratios {ratios:?}"),
    );
}

struct PerturbedPair {
    label: String,
    rule: Rule,
    beta: f64,
    xi: f64,
    game: PotentialGame,
    base: TransitionMatrix,
    perturbed: TransitionMatrix,
}

/// 25 games, each paired with a fixed-share (xi = 0.05) and a noisy
/// (xi = 0.02) perturbation of its log-linear chain.
fn perturbed_pairs() -> Vec<PerturbedPair> {
    let mut out = Vec::new();
    for g in 0..25u64 {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9000 + g);
        let game = loglinear_core::game::random_potential_game(2, 4, &mut rng).unwrap();
        let beta = 1.0 + (g % 5) as f64;
        let base = build_transition(&game, &DynamicsConfig::new(Rule::LogLinear, beta)).unwrap();
        for (rule, xi) in [(Rule::FixedShare, 0.05), (Rule::NoisyLogLinear, 0.02)] {
            let config = DynamicsConfig::new(rule, beta)
                .with_xi(xi)
                .with_noise_seed(77 + g);
            let perturbed = build_transition(&game, &config).unwrap();
            out.push(PerturbedPair {
                label: format!("game {g} {} beta {beta} xi {xi}", rule.name()),
                rule,
                beta,
                xi,
                game: game.clone(),
                base: base.clone(),
                perturbed,
            });
        }
    }
    out
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn stationary_distribution_is_lipschitz() {
    let mut failures = Vec::new();
    let pairs = perturbed_pairs();
    let mut max_ratio: f64 = 0.0;
    for p in &pairs {
        let mu1 = gibbs_stationary(&p.game, p.beta);
        let mu2 = stationary_of(&p.perturbed).unwrap();
        let lb = lower_bound_inputs(&p.game, &p.base, mu1.probs());
        let l = lipschitz_constant(lb.rho_lb, lb.mu_min, p.game.num_profiles()).unwrap();
        let lhs = l2(mu1.probs(), mu2.probs());
        let norm = spectral_norm_of_difference(&p.base, &p.perturbed).unwrap();
        max_ratio = max_ratio.max(lhs / (l * norm));
        if !(lhs <= l * norm) {
            failures.push(format!("{}: {lhs:e} > {l:e} * {norm:e}", p.label));
        }
    }
    finish(
        "Lipschitz stationary map: ||mu1 - mu2||_2 <= L ||P1 - P2||_2",
        &failures,
        format!(
            "{} perturbed pairs, max ||mu1-mu2|| / (L ||P1-P2||) {max_ratio:.3e}",
            pairs.len()
        ),
    );
}

#[test]
fn perturbation_premises() {
    let mut failures = Vec::new();
    let pairs = perturbed_pairs();
    let (mut noisy, mut fixed) = (0, 0);
    let (mut noisy_ratio, mut fixed_ratio): (f64, f64) = (0.0, 0.0);
    for p in &pairs {
        let diff = p.perturbed.matrix() - p.base.matrix();
        match p.rule {
            Rule::NoisyLogLinear => {
                assert!(2.0 * p.beta * p.xi <= 1.0);
                let bound = noisy_entry_premise(2, p.beta, p.xi);
                let worst = diff.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                noisy += 1;
                noisy_ratio = noisy_ratio.max(worst / bound);
                if !(worst <= bound) {
                    failures.push(format!("{}: max entry {worst:e} > {bound:e}", p.label));
                }
            }
            _ => {
                let bound = fixed_share_norm_premise(2, 4, p.xi);
                let norm = spectral_norm_of_difference(&p.perturbed, &p.base).unwrap();
                fixed += 1;
                fixed_ratio = fixed_ratio.max(norm / bound);
                if !(norm <= bound) {
                    failures.push(format!("{}: norm {norm:e} > {bound:e}", p.label));
                }
            }
        }
    }
    finish(
        "perturbation premises: entrywise noisy bound and fixed-share spectral bound",
        &failures,
        format!(
            "{noisy} noisy chains (max ratio {noisy_ratio:.3}), {fixed} fixed-share chains (max ratio {fixed_ratio:.3})"
        ),
    );
}

#[test]
fn perturbed_stationary_floor() {
    let mut failures = Vec::new();
    let pairs = perturbed_pairs();
    let mut min_ratio = f64::INFINITY;
    for p in &pairs {
        let mu = stationary_of(&p.perturbed).unwrap();
        let floor = stationary_floor(2, p.perturbed.envelope().unwrap().p_min);
        min_ratio = min_ratio.min(mu.min() / floor);
        if !(mu.min() >= floor) {
            failures.push(format!("{}: min {:e} < floor {floor:e}", p.label, mu.min()));
        }
    }
    finish(
        "perturbed stationary floor: min stationary entry >= N!(p_min/N)^N",
        &failures,
        format!(
            "{} perturbed chains, min (mu_min / floor) {min_ratio:.3}",
            pairs.len()
        ),
    );
}

fn plateau_configs() -> Vec<(&'static str, ExperimentConfig)> {
    let delta = ExperimentConfig {
        delta_values: vec![0.15, 0.1, 0.075],
        eps_values: vec![0.05],
        exact_horizon: Some(10_000_000_000),
        ..ExperimentConfig::default()
    };
    let eps = ExperimentConfig {
        delta_values: vec![0.1],
        eps_values: vec![0.1, 0.05, 0.025, 0.01],
        exact_horizon: Some(10_000_000_000),
        ..ExperimentConfig::default()
    };
    let comparison = ExperimentConfig {
        kind: ExperimentKind::Comparison,
        delta_values: vec![0.1],
        eps_values: vec![0.05],
        exact_horizon: Some(1_000_000_000),
        trajectories: 20,
        ..ExperimentConfig::default()
    };
    vec![
        ("delta sweep", delta),
        ("eps sweep", eps),
        ("comparison", comparison),
    ]
}

#[test]
fn plateau_experiments() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for (name, config) in plateau_configs() {
        let result = run_experiment(&config).unwrap();
        let path = dir.path().join(format!("{}.csv", name.replace(' ', "_")));
        export_csv(&result, &path).unwrap();
        let back = read_sweep_result(&path).unwrap();
        if back != result {
            failures.push(format!("{name}: CSV read-back differs"));
        }
        for outcome in check_invariants(&config, &result).unwrap() {
            if !outcome.passed {
                failures.push(format!("{name}: {} ({})", outcome.name, outcome.detail));
            } else if outcome.name.contains("grows") || outcome.name.contains("threshold") {
                details.push(format!("{name}: {} ({})", outcome.name, outcome.detail));
            }
        }
    }
    let time = within(
        "plateau experiments",
        started,
        Duration::from_secs(600),
        &mut failures,
    );
    finish(
        "plateau-game orderings and comparison outcome",
        &failures,
        format!("{}; {time}", details.join("; ")),
    );
}

#[test]
fn modified_symmetric_occupancy() {
    let game = symmetric_identical_interest(3, 2, |x| [0.2, 0.9, 0.1, 0.6][x.counts()[1]]).unwrap();
    let (beta, alpha) = (1.5, 1.0);
    let states = OccupancyChain::new(&game, beta, alpha)
        .unwrap()
        .states()
        .to_vec();
    let gibbs = occupancy_gibbs(&game, beta, &states).unwrap();
    let config = DynamicsConfig::new(Rule::ModifiedSymmetric, beta)
        .with_alpha(alpha)
        .with_seed(31);
    let events = 2_000_000;
    let traj = run_trajectory(&game, &config, events, &Initial::Uniform).unwrap();
    let times = traj.event_times.as_ref().unwrap();
    let state_of: Vec<usize> = (0..game.num_profiles())
        .map(|i| {
            let x = occupancy_of(&game.profile_of(i), 3, 2).unwrap();
            states.iter().position(|s| s == &x).unwrap()
        })
        .collect();
    // Time-weighted occupancy in equal-length batches of events.
    let batches = 50;
    let per = events / batches;
    let mut batch_freq = vec![vec![0.0; states.len()]; batches];
    for (b, freq) in batch_freq.iter_mut().enumerate() {
        let (lo, hi) = (b * per, (b + 1) * per);
        let span = times[hi] - times[lo];
        for k in lo..hi {
            freq[state_of[traj.indices[k]]] += (times[k + 1] - times[k]) / span;
        }
    }
    let mut failures = Vec::new();
    let mut max_z: f64 = 0.0;
    for s in 0..states.len() {
        let xs: Vec<f64> = batch_freq.iter().map(|f| f[s]).collect();
        let mean = xs.iter().sum::<f64>() / batches as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
        let se = (var / batches as f64).sqrt();
        let z = (mean - gibbs[s]).abs() / se;
        max_z = max_z.max(z);
        if !(z <= 4.0) {
            failures.push(format!(
                "state {:?}: {mean:.5} vs {:.5} ({z:.2} SE)",
                states[s].counts(),
                gibbs[s]
            ));
        }
    }
    finish(
        "modified dynamics: occupancy frequencies match Gibbs on occupancy states",
        &failures,
        format!(
            "N=3, A=2, {events} events, {batches} batch means, max deviation {max_z:.2} SE (tol 4)"
        ),
    );
}
