use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::stationary::{normalize_rows, stationary_of, tv_distance};
use super::TransitionMatrix;
use crate::dist::DistributionVector;
use crate::error::{Error, Result};

/// Bits of mantissa kept when a step count is too large for `u64`.
const MANTISSA_BITS: i64 = 53;

/// A possibly astronomically large step count `mantissa * 2^shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCount {
    pub mantissa: u64,
    pub shift: u32,
}

impl From<u64> for StepCount {
    fn from(t: u64) -> Self {
        Self {
            mantissa: t,
            shift: 0,
        }
    }
}

impl StepCount {
    /// Smallest representable count `>= x` (exact for `x < 2^63`).
    pub fn from_f64_ceil(x: f64) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step count must be finite and >= 0, got {x}"
            )));
        }
        if x < 9.2e18 {
            return Ok(Self::from(x.ceil() as u64));
        }
        Self::from_ln(x.ln())
    }

    /// A count `>= e^{ln_t}`; works far beyond the range of `f64`.
    pub fn from_ln(ln_t: f64) -> Result<Self> {
        if ln_t.is_nan() || ln_t == f64::INFINITY {
            return Err(Error::InvalidParameter(format!(
                "invalid log step count {ln_t}"
            )));
        }
        if ln_t < 43.0 {
            return Self::from_f64_ceil(ln_t.exp());
        }
        let log2_t = ln_t / std::f64::consts::LN_2;
        let shift = (log2_t.ceil() as i64 - MANTISSA_BITS).max(0);
        let rest = ln_t - shift as f64 * std::f64::consts::LN_2;
        // Round up generously against the error in `rest`.
        let mantissa = (rest.exp() * (1.0 + 1e-12)).ceil() as u64;
        Ok(Self {
            mantissa,
            shift: shift as u32,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    pub fn as_f64(&self) -> f64 {
        self.mantissa as f64 * 2f64.powi(self.shift as i32)
    }

    pub fn ln(&self) -> f64 {
        (self.mantissa as f64).ln() + self.shift as f64 * std::f64::consts::LN_2
    }

    pub fn as_u64(&self) -> Option<u64> {
        self.mantissa.checked_mul(1u64.checked_shl(self.shift)?)
    }
}

impl fmt::Display for StepCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_u64() {
            Some(t) => write!(f, "{t}"),
            None => write!(f, "{}*2^{}", self.mantissa, self.shift),
        }
    }
}

/// Result of evolving a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub dist: DistributionVector,
    /// Sum over squarings of the largest row-sum defect removed by
    /// renormalization.
    pub drift: f64,
    pub squarings: u32,
}

fn square(q: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let mut next = q * q;
    let drift = normalize_rows(&mut next);
    (next, drift)
}

/// `mu0 P^t` by binary exponentiation, renormalizing rows after every squaring.
pub fn distribution_at_time(p: &TransitionMatrix, mu0: &[f64], t: StepCount) -> Result<Evolution> {
    let start = DistributionVector::new(mu0.to_vec())?;
    if start.len() != p.size() {
        return Err(Error::Shape(format!(
            "distribution of length {} for a {}-state chain",
            start.len(),
            p.size()
        )));
    }
    if t.is_zero() {
        return Ok(Evolution {
            dist: start,
            drift: 0.0,
            squarings: 0,
        });
    }
    let mut q = p.matrix().clone();
    let mut drift = 0.0;
    let mut squarings = 0;
    for _ in 0..t.shift {
        let (next, d) = square(&q);
        q = next;
        drift += d;
        squarings += 1;
    }
    let mut v = DVector::from_column_slice(mu0);
    let mut m = t.mantissa;
    while m > 0 {
        if m & 1 == 1 {
            v = q.tr_mul(&v);
        }
        m >>= 1;
        if m > 0 {
            let (next, d) = square(&q);
            q = next;
            drift += d;
            squarings += 1;
        }
    }
    let s = v.sum();
    let probs = v.iter().map(|x| x.max(0.0) / s).collect();
    Ok(Evolution {
        dist: DistributionVector::from_raw(probs),
        drift,
        squarings,
    })
}

/// Smallest `t` with `TV(mu0 P^t, mu) <= eps`, `mu` being the stationary
/// distribution of `p`.
pub fn empirical_mixing_time(p: &TransitionMatrix, mu0: &[f64], eps: f64) -> Result<u64> {
    let mu = stationary_of(p)?;
    empirical_mixing_time_to(p, mu0, mu.probs(), eps)
}

/// Like [`empirical_mixing_time`] with an explicit target distribution.
/// Doubling finds a bracketing power of two, binary search then narrows it
/// using the cached powers `P^{2^j}`.
pub fn empirical_mixing_time_to(
    p: &TransitionMatrix,
    mu0: &[f64],
    target: &[f64],
    eps: f64,
) -> Result<u64> {
    if mu0.len() != p.size() || target.len() != p.size() {
        return Err(Error::Shape(
            "distribution length does not match the chain".into(),
        ));
    }
    if tv_distance(mu0, target)? <= eps {
        return Ok(0);
    }
    let mut powers = vec![p.matrix().clone()];
    let mut below = DVector::from_column_slice(mu0);
    let mut v = powers[0].tr_mul(&below);
    let mut k = 0usize;
    while tv_distance(v.as_slice(), target)? > eps {
        if k >= 62 {
            return Err(Error::NotConverged(format!(
                "TV still above {eps} after 2^62 steps"
            )));
        }
        let (next, _) = square(&powers[k]);
        below = v.clone();
        v = powers[k].tr_mul(&v);
        powers.push(next);
        k += 1;
    }
    if k == 0 {
        return Ok(1);
    }
    // TV > eps at 2^{k-1}, <= eps at 2^k.
    let mut t = 1u64 << (k - 1);
    let mut cur = below;
    for j in (0..k - 1).rev() {
        let w = powers[j].tr_mul(&cur);
        if tv_distance(w.as_slice(), target)? > eps {
            cur = w;
            t += 1 << j;
        }
    }
    Ok(t + 1)
}

/// Cached powers `P^{2^k}` for repeatedly advancing distributions by
/// arbitrary step counts.
#[derive(Debug, Clone)]
pub struct PowerLadder {
    powers: Vec<DMatrix<f64>>,
    drift: f64,
}

impl PowerLadder {
    pub fn new(p: &TransitionMatrix) -> Self {
        Self {
            powers: vec![p.matrix().clone()],
            drift: 0.0,
        }
    }

    pub fn size(&self) -> usize {
        self.powers[0].nrows()
    }

    /// Largest row-sum correction applied while squaring so far.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    fn power(&mut self, k: usize) -> &DMatrix<f64> {
        while self.powers.len() <= k {
            let (next, drift) = square(self.powers.last().expect("non-empty"));
            self.drift = self.drift.max(drift);
            self.powers.push(next);
        }
        &self.powers[k]
    }

    /// `v P^steps` for a row vector `v`.
    pub fn advance(&mut self, v: &[f64], steps: u64) -> Vec<f64> {
        let mut cur = DVector::from_column_slice(v);
        let mut rest = steps;
        let mut k = 0;
        while rest > 0 {
            if rest & 1 == 1 {
                cur = self.power(k).tr_mul(&cur);
            }
            rest >>= 1;
            k += 1;
        }
        cur.as_slice().to_vec()
    }
}

/// Row-compressed copy of a transition matrix for long exact evolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseChain {
    size: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseChain {
    pub fn from_transition(p: &TransitionMatrix) -> Self {
        let n = p.size();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for i in 0..n {
            for j in 0..n {
                let v = p.get(i, j);
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            offsets.push(cols.len());
        }
        Self {
            size: n,
            offsets,
            cols,
            vals,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nonzeros(&self) -> usize {
        self.vals.len()
    }

    /// `out = v P`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..self.size {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for k in self.offsets[i]..self.offsets[i + 1] {
                out[self.cols[k]] += vi * self.vals[k];
            }
        }
    }

    /// Evolves `v` for `steps` rounds, calling `visit(t, &mu_t)` for
    /// `t = 0..=steps`.
    pub fn evolve<F: FnMut(usize, &[f64])>(&self, v: &[f64], steps: usize, mut visit: F) {
        let mut cur = v.to_vec();
        let mut next = vec![0.0; self.size];
        visit(0, &cur);
        for t in 1..=steps {
            self.apply_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
            visit(t, &cur);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DynamicsConfig, Rule};
    use crate::game::tests::intro_game;
    use crate::markov::{build_transition, gibbs_stationary};

    fn two_state() -> TransitionMatrix {
        TransitionMatrix::from_rows(&[vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap()
    }

    #[test]
    fn step_count_forms() {
        let t = StepCount::from(12);
        assert_eq!(t.as_u64(), Some(12));
        let big = StepCount::from_f64_ceil(1e32).unwrap();
        assert!(big.as_f64() >= 1e32);
        assert!(big.as_f64() < 1e32 * (1.0 + 1e-10));
        assert_eq!(big.as_u64(), None);
        let huge = StepCount::from_ln(2000.0).unwrap();
        assert!((huge.ln() - 2000.0).abs() < 1e-9);
        assert!(StepCount::from_f64_ceil(-1.0).is_err());
        assert_eq!(StepCount::from_f64_ceil(3.2).unwrap().mantissa, 4);
    }

    #[test]
    fn small_times() {
        let p = two_state();
        let mu0 = [1.0, 0.0];
        assert_eq!(
            distribution_at_time(&p, &mu0, 0.into())
                .unwrap()
                .dist
                .probs(),
            &mu0
        );
        let one = distribution_at_time(&p, &mu0, 1.into()).unwrap();
        assert!((one.dist[0] - 0.9).abs() < 1e-14 && (one.dist[1] - 0.1).abs() < 1e-14);
        // Direct iteration agrees with binary powering.
        let mut v = mu0.to_vec();
        for _ in 0..37 {
            v = p.apply(&v).unwrap();
        }
        let e = distribution_at_time(&p, &mu0, 37.into()).unwrap();
        assert!(tv_distance(&v, e.dist.probs()).unwrap() < 1e-14);
    }

    #[test]
    fn long_horizon_reaches_gibbs() {
        let g = sixteen_state_game();
        let p = build_transition(&g, &DynamicsConfig::new(Rule::LogLinear, 1.0)).unwrap();
        let mu0 = DistributionVector::point_mass(16, 5);
        let e = distribution_at_time(&p, mu0.probs(), 1_000_000_000.into()).unwrap();
        let mu = gibbs_stationary(&g, 1.0);
        assert!(tv_distance(e.dist.probs(), mu.probs()).unwrap() < 1e-8);
        assert!(e.drift < 1e-12);
    }

    fn sixteen_state_game() -> crate::game::PotentialGame {
        let phi = (0..16).map(|k| ((k * 7) % 16) as f64 / 15.0).collect();
        crate::game::PotentialGame::identical_interest(2, 4, phi).unwrap()
    }

    #[test]
    fn mixing_time_is_minimal() {
        let g = intro_game().rescaled_to_unit().unwrap();
        let p = build_transition(&g, &DynamicsConfig::new(Rule::LogLinear, 3.0)).unwrap();
        let mu0 = DistributionVector::uniform(4);
        let mu = stationary_of(&p).unwrap();
        let t = empirical_mixing_time(&p, mu0.probs(), 0.01).unwrap();
        assert!(t > 0);
        let at = distribution_at_time(&p, mu0.probs(), t.into()).unwrap();
        let before = distribution_at_time(&p, mu0.probs(), (t - 1).into()).unwrap();
        assert!(tv_distance(at.dist.probs(), mu.probs()).unwrap() <= 0.01);
        assert!(tv_distance(before.dist.probs(), mu.probs()).unwrap() > 0.01);
        assert_eq!(empirical_mixing_time(&p, mu.probs(), 0.01).unwrap(), 0);
        assert_eq!(empirical_mixing_time(&p, mu0.probs(), 1.0).unwrap(), 0);
    }

    #[test]
    fn sparse_matches_dense() {
        let g = intro_game();
        let p = build_transition(&g, &DynamicsConfig::new(Rule::LogLinear, 0.4)).unwrap();
        let s = SparseChain::from_transition(&p);
        let mut last = Vec::new();
        s.evolve(&[0.25; 4], 20, |t, v| {
            if t == 20 {
                last = v.to_vec();
            }
        });
        let e = distribution_at_time(&p, &[0.25; 4], 20.into()).unwrap();
        assert!(tv_distance(&last, e.dist.probs()).unwrap() < 1e-14);
    }
}
