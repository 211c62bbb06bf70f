use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spectral::gap_and_vector;
use super::stationary::check_detailed_balance;
use super::TransitionMatrix;
use crate::error::{Error, Result};

/// Below this entropy the iterate is treated as constant and re-centered.
const DEGENERATE_ENTROPY: f64 = 1e-14;

/// `E(f,f) = 1/2 sum_{a,b} (f(a) - f(b))^2 P(a,b) mu(a)`.
pub fn dirichlet_form(p: &TransitionMatrix, mu: &[f64], f: &[f64]) -> Result<f64> {
    let n = p.size();
    if mu.len() != n || f.len() != n {
        return Err(Error::Shape(
            "vector length does not match the chain".into(),
        ));
    }
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            let d = f[a] - f[b];
            total += d * d * p.get(a, b) * mu[a];
        }
    }
    Ok(0.5 * total)
}

/// `L(f^2) = sum mu f^2 ln(f^2 / ||f||^2_mu)`, with `0 ln 0 = 0`.
pub fn entropy_functional(mu: &[f64], f: &[f64]) -> Result<f64> {
    if mu.len() != f.len() {
        return Err(Error::Shape(
            "vector length does not match the distribution".into(),
        ));
    }
    Ok(entropy(mu, f))
}

/// `(1+u) ln(1+u) - u`, accurate near `u = 0`.
fn entropy_term(u: f64) -> f64 {
    if u.abs() < 1e-2 {
        // sum_{k>=2} (-1)^k u^k / (k (k-1))
        let mut acc = 0.0;
        let mut pow = u * u;
        for k in 2..10 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * pow / (k * (k - 1)) as f64;
            pow *= u;
        }
        acc
    } else if u <= -1.0 {
        1.0
    } else {
        (1.0 + u) * u.ln_1p() - u
    }
}

/// Written as `sum mu s ((1+u) ln(1+u) - u)` with `f^2 = s (1+u)`, which adds
/// zero to the textbook form but keeps every term nonnegative and free of
/// cancellation for nearly constant `f`.
fn entropy(mu: &[f64], f: &[f64]) -> f64 {
    let s: f64 = mu.iter().zip(f).map(|(m, x)| m * x * x).sum();
    if !(s > 0.0) {
        return 0.0;
    }
    mu.iter()
        .zip(f)
        .map(|(m, x)| m * s * entropy_term((x * x - s) / s))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when the relative change of the quotient drops below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SobolevOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 2000,
            tol: 1e-10,
            seed: 0,
        }
    }
}

impl SobolevOptions {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

/// Best quotient `E(f,f) / L(f^2)` found. Any feasible `f` bounds the
/// log-Sobolev constant from above, so `value >= rho` always.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevEstimate {
    pub value: f64,
    pub restarts: usize,
    pub converged: bool,
    pub minimizer: Vec<f64>,
}

/// Symmetrized edge list `(a, b, mu(a)P(a,b) + mu(b)P(b,a))` for `a < b`.
struct Edges(Vec<(usize, usize, f64)>);

impl Edges {
    fn new(p: &TransitionMatrix, mu: &[f64]) -> Self {
        let n = p.size();
        let mut e = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let w = mu[a] * p.get(a, b) + mu[b] * p.get(b, a);
                if w > 0.0 {
                    e.push((a, b, w));
                }
            }
        }
        Edges(e)
    }

    fn form(&self, f: &[f64]) -> f64 {
        0.5 * self
            .0
            .iter()
            .map(|&(a, b, w)| w * (f[a] - f[b]).powi(2))
            .sum::<f64>()
    }

    fn form_grad(&self, f: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for &(a, b, w) in &self.0 {
            let d = w * (f[a] - f[b]);
            out[a] += d;
            out[b] -= d;
        }
    }
}

fn entropy_grad(mu: &[f64], f: &[f64], out: &mut [f64]) {
    let s: f64 = mu.iter().zip(f).map(|(m, x)| m * x * x).sum();
    let ln_s = s.ln();
    for ((o, m), x) in out.iter_mut().zip(mu).zip(f) {
        *o = if *x == 0.0 {
            0.0
        } else {
            2.0 * m * x * ((x * x).ln() - ln_s)
        };
    }
}

fn normalize(mu: &[f64], f: &mut [f64]) {
    let norm = mu
        .iter()
        .zip(f.iter())
        .map(|(m, x)| m * x * x)
        .sum::<f64>()
        .sqrt();
    if norm > 0.0 {
        f.iter_mut().for_each(|x| *x /= norm);
    }
}

fn recenter(mu: &[f64], f: &mut [f64]) {
    let mean: f64 = mu.iter().zip(f.iter()).map(|(m, x)| m * x).sum();
    f.iter_mut().for_each(|x| *x -= mean);
    normalize(mu, f);
}

fn quotient(edges: &Edges, mu: &[f64], f: &[f64]) -> f64 {
    let l = entropy(mu, f);
    if l <= 0.0 {
        return f64::INFINITY;
    }
    edges.form(f) / l
}

/// Projected gradient descent from one start. Returns the final quotient and
/// whether the relative-change criterion was met.
fn descend(edges: &Edges, mu: &[f64], f: &mut [f64], opts: &SobolevOptions) -> (f64, bool) {
    let n = f.len();
    normalize(mu, f);
    if entropy(mu, f) < DEGENERATE_ENTROPY {
        recenter(mu, f);
    }
    let mut r = quotient(edges, mu, f);
    if !r.is_finite() {
        return (r, false);
    }
    let (mut ge, mut gl, mut g) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut step = 1.0;
    let mut trial = vec![0.0; n];
    for _ in 0..opts.max_iters {
        let l = entropy(mu, f);
        edges.form_grad(f, &mut ge);
        entropy_grad(mu, f, &mut gl);
        for k in 0..n {
            g[k] = (ge[k] - r * gl[k]) / l;
        }
        let gnorm2: f64 = g.iter().map(|x| x * x).sum();
        if gnorm2 == 0.0 {
            return (r, true);
        }
        let mut accepted = None;
        while step > 1e-30 {
            for k in 0..n {
                trial[k] = f[k] - step * g[k];
            }
            normalize(mu, &mut trial);
            if entropy(mu, &trial) < DEGENERATE_ENTROPY {
                recenter(mu, &mut trial);
            }
            let rt = quotient(edges, mu, &trial);
            if rt.is_finite() && rt <= r - 1e-4 * step * gnorm2 {
                accepted = Some(rt);
                break;
            }
            step *= 0.5;
        }
        let Some(rt) = accepted else {
            return (r, true);
        };
        f.copy_from_slice(&trial);
        let rel = (r - rt).abs() / r.abs().max(f64::MIN_POSITIVE);
        r = rt;
        step *= 2.0;
        if rel < opts.tol {
            return (r, true);
        }
    }
    (r, false)
}

/// Multi-start minimization of `E(f,f) / L(f^2)` over nonconstant `f`.
///
/// One start follows the slowest eigenvector when the pair is reversible,
/// one concentrates on the least likely state, and the rest are random
/// positive vectors.
pub fn estimate_log_sobolev(
    p: &TransitionMatrix,
    mu: &[f64],
    opts: &SobolevOptions,
) -> Result<SobolevEstimate> {
    let n = p.size();
    if mu.len() != n {
        return Err(Error::Shape(
            "distribution length does not match the chain".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two states".into()));
    }
    let edges = Edges::new(p, mu);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let reversible = check_detailed_balance(p, mu, 1e-10)?.holds && mu.iter().all(|&m| m > 0.0);
    let mut best = SobolevEstimate {
        value: f64::INFINITY,
        restarts: opts.restarts,
        converged: false,
        minimizer: vec![1.0; n],
    };
    for k in 0..opts.restarts.max(1) {
        let mut f: Vec<f64> = match k {
            0 if reversible => {
                let (_, v) = gap_and_vector(p, mu);
                let scale = v
                    .iter()
                    .fold(0.0f64, |m, x| m.max(x.abs()))
                    .max(f64::MIN_POSITIVE);
                v.iter().map(|x| 1.0 + 0.5 * x / scale).collect()
            }
            1 => {
                let low = mu
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                (0..n).map(|i| if i == low { 10.0 } else { 1.0 }).collect()
            }
            _ => (0..n).map(|_| rng.gen_range(0.1..2.0)).collect(),
        };
        let (value, conv) = descend(&edges, mu, &mut f, opts);
        if value.is_finite() {
            best.converged |= conv;
            if value < best.value {
                best.value = value;
                best.minimizer = f;
            }
        }
    }
    Ok(best)
}
