use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::TransitionMatrix;
use crate::dist::DistributionVector;
use crate::error::{Error, Result};

/// Largest chain solved by direct elimination; bigger chains use repeated
/// squaring.
const DIRECT_SOLVE_MAX: usize = 2_000;
const POWER_RESIDUAL: f64 = 1e-13;

/// Half the L1 distance.
pub fn tv_distance(d1: &[f64], d2: &[f64]) -> Result<f64> {
    if d1.len() != d2.len() {
        return Err(Error::Shape(format!(
            "lengths {} and {} differ",
            d1.len(),
            d2.len()
        )));
    }
    Ok(0.5 * d1.iter().zip(d2).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

fn l1_residual(p: &TransitionMatrix, mu: &[f64]) -> f64 {
    let next = p.matrix().tr_mul(&DVector::from_column_slice(mu));
    next.iter().zip(mu).map(|(a, b)| (a - b).abs()).sum()
}

/// The unique stationary distribution of an irreducible chain.
///
/// Uses Grassmann-Taksar-Heyman elimination, which involves no subtractions
/// and stays accurate for strongly metastable chains. Chains above a size
/// threshold fall back to power iteration from the uniform start.
pub fn stationary_of(p: &TransitionMatrix) -> Result<DistributionVector> {
    let n = p.size();
    let mu = if n <= DIRECT_SOLVE_MAX {
        gth(p)?
    } else {
        power(p)?
    };
    let residual = l1_residual(p, &mu);
    if !(residual <= 1e-10) {
        return Err(Error::NotConverged(format!(
            "stationary residual {residual:e}"
        )));
    }
    Ok(DistributionVector::from_raw(mu))
}

fn gth(p: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = p.size();
    // Row-major working copy.
    let mut a: Vec<f64> = (0..n * n).map(|k| p.get(k / n, k % n)).collect();
    for k in (1..n).rev() {
        let s: f64 = a[k * n..k * n + k].iter().sum();
        if !(s > 0.0) {
            return Err(Error::NotConverged(format!(
                "chain is reducible: state {k} cannot reach lower-indexed states"
            )));
        }
        for i in 0..k {
            a[i * n + k] /= s;
        }
        for i in 0..k {
            let f = a[i * n + k];
            if f == 0.0 {
                continue;
            }
            for j in 0..k {
                a[i * n + j] += f * a[k * n + j];
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        pi[k] = (0..k).map(|i| pi[i] * a[i * n + k]).sum();
    }
    let total: f64 = pi.iter().sum();
    Ok(pi.into_iter().map(|x| x / total).collect())
}

fn power(p: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = p.size();
    let mut q = p.matrix().clone();
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..64 {
        v = q.tr_mul(&v);
        let s = v.sum();
        v /= s;
        if l1_residual(p, v.as_slice()) <= POWER_RESIDUAL {
            return Ok(v.as_slice().to_vec());
        }
        q = &q * &q;
        normalize_rows(&mut q);
    }
    Err(Error::NotConverged(
        "power iteration did not converge; chain may be reducible or periodic".into(),
    ))
}

pub(crate) fn normalize_rows(q: &mut DMatrix<f64>) -> f64 {
    let mut drift: f64 = 0.0;
    for mut row in q.row_iter_mut() {
        let s: f64 = row.iter().sum();
        drift = drift.max((s - 1.0).abs());
        row /= s;
    }
    drift
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceCheck {
    pub holds: bool,
    pub max_violation: f64,
    pub worst_pair: Option<(usize, usize)>,
}

/// `max |mu(a) P(a,b) - mu(b) P(b,a)|` over all pairs, compared with `tol`.
pub fn check_detailed_balance(p: &TransitionMatrix, mu: &[f64], tol: f64) -> Result<BalanceCheck> {
    let n = p.size();
    if mu.len() != n {
        return Err(Error::Shape(format!(
            "distribution of length {} for {n} states",
            mu.len()
        )));
    }
    let mut worst = 0.0;
    let mut pair = None;
    for a in 0..n {
        for b in a + 1..n {
            let v = (mu[a] * p.get(a, b) - mu[b] * p.get(b, a)).abs();
            if v > worst {
                worst = v;
                pair = Some((a, b));
            }
        }
    }
    Ok(BalanceCheck {
        holds: worst <= tol,
        max_violation: worst,
        worst_pair: pair,
    })
}

/// `P*(a,b) = mu(b) P(b,a) / mu(a)`.
pub fn time_reversal(p: &TransitionMatrix, mu: &[f64]) -> Result<TransitionMatrix> {
    let n = p.size();
    if mu.len() != n {
        return Err(Error::Shape(format!(
            "distribution of length {} for {n} states",
            mu.len()
        )));
    }
    if let Some(i) = mu.iter().position(|&m| !(m > 0.0)) {
        return Err(Error::ZeroStationaryMass(i));
    }
    let m = DMatrix::from_fn(n, n, |a, b| mu[b] * p.get(b, a) / mu[a]);
    Ok(TransitionMatrix::from_parts(m, p.shape(), None, None))
}
