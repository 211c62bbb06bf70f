use nalgebra::{DMatrix, SymmetricEigen};

use super::stationary::{check_detailed_balance, time_reversal};
use super::TransitionMatrix;
use crate::error::{Error, Result};

/// Detailed-balance tolerance, relative to the largest stationary mass.
const REVERSIBILITY_TOL: f64 = 1e-10;

fn require_reversible(p: &TransitionMatrix, mu: &[f64]) -> Result<()> {
    let max_mu = mu.iter().copied().fold(0.0, f64::max);
    let check = check_detailed_balance(p, mu, REVERSIBILITY_TOL * max_mu)?;
    if !check.holds {
        return Err(Error::NotReversible(check.max_violation));
    }
    if let Some(i) = mu.iter().position(|&m| !(m > 0.0)) {
        return Err(Error::ZeroStationaryMass(i));
    }
    Ok(())
}

/// `I - D^{1/2} P D^{-1/2}` with the diagonal written as the off-diagonal row
/// mass, so tiny gaps do not cancel against 1.
fn laplacian(p: &TransitionMatrix, mu: &[f64]) -> DMatrix<f64> {
    let n = p.size();
    let sq: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
    let mut l = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            -0.5 * (sq[i] / sq[j] * p.get(i, j) + sq[j] / sq[i] * p.get(j, i))
        }
    });
    for i in 0..n {
        l[(i, i)] = (0..n).filter(|&j| j != i).map(|j| p.get(i, j)).sum();
    }
    l
}

/// Spectral gap: the second smallest eigenvalue of `I - D^{1/2} P D^{-1/2}`
/// for a chain reversible with respect to `mu`.
pub fn spectral_gap(p: &TransitionMatrix, mu: &[f64]) -> Result<f64> {
    if mu.len() != p.size() {
        return Err(Error::Shape(
            "distribution length does not match the chain".into(),
        ));
    }
    require_reversible(p, mu)?;
    if p.size() == 1 {
        return Ok(0.0);
    }
    let (gap, _) = gap_and_vector(p, mu);
    Ok(gap)
}

/// Gap together with the corresponding eigenvector in function coordinates
/// (`D^{-1/2}` applied).
pub(crate) fn gap_and_vector(p: &TransitionMatrix, mu: &[f64]) -> (f64, Vec<f64>) {
    let n = p.size();
    let mut l = laplacian(p, mu);
    // Move the zero eigenvalue (eigenvector sqrt(mu)) far above the spectrum.
    let sq: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] += 4.0 * sq[i] * sq[j];
        }
    }
    let eig = SymmetricEigen::new(l);
    let (k, &gap) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    let v = eig.eigenvectors.column(k);
    let f = (0..n).map(|i| v[i] / sq[i]).collect();
    (gap.max(0.0), f)
}

/// The multiplicative reversibilization `P P*`, reversible with respect to `mu`.
pub fn multiplicative_reversibilization(
    p: &TransitionMatrix,
    mu: &[f64],
) -> Result<TransitionMatrix> {
    let rev = time_reversal(p, mu)?;
    let m = p.matrix() * rev.matrix();
    Ok(TransitionMatrix::from_parts(m, p.shape(), None, None))
}

/// Spectral gap of `P P*`; defined for any ergodic chain.
pub fn spectral_gap_reversibilized(p: &TransitionMatrix, mu: &[f64]) -> Result<f64> {
    let pp = multiplicative_reversibilization(p, mu)?;
    spectral_gap(&pp, mu)
}

/// Largest singular value of `P - Q`.
pub fn spectral_norm_of_difference(p: &TransitionMatrix, q: &TransitionMatrix) -> Result<f64> {
    if p.size() != q.size() {
        return Err(Error::Shape("matrices differ in size".into()));
    }
    let d = p.matrix() - q.matrix();
    Ok(d.singular_values().iter().copied().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DynamicsConfig, Rule};
    use crate::game::tests::intro_game;
    use crate::markov::{build_transition, gibbs_stationary, stationary_of};

    #[test]
    fn two_state_gap() {
        let (p, q) = (0.3, 0.15);
        let m = TransitionMatrix::from_rows(&[vec![1.0 - p, p], vec![q, 1.0 - q]]).unwrap();
        let mu = [q / (p + q), p / (p + q)];
        assert!((spectral_gap(&m, &mu).unwrap() - (p + q)).abs() < 1e-14);
    }

    #[test]
    fn rank_one_gap_is_one() {
        let mu = [0.2, 0.3, 0.5];
        let m = TransitionMatrix::from_rows(&[mu.to_vec(), mu.to_vec(), mu.to_vec()]).unwrap();
        assert!((spectral_gap(&m, &mu).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_reversible_is_rejected() {
        let m = TransitionMatrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.0, 0.5],
        ])
        .unwrap();
        let mu = stationary_of(&m).unwrap();
        assert!(matches!(
            spectral_gap(&m, mu.probs()),
            Err(Error::NotReversible(_))
        ));
        let g = spectral_gap_reversibilized(&m, mu.probs()).unwrap();
        assert!(g > 0.0 && g <= 2.0);
    }

    #[test]
    fn tiny_gaps_are_resolved() {
        let g = intro_game();
        let p = build_transition(&g, &DynamicsConfig::new(Rule::LogLinear, 3.0)).unwrap();
        let mu = gibbs_stationary(&g, 3.0);
        let gap = spectral_gap(&p, mu.probs()).unwrap();
        assert!(gap > 0.0 && gap < 1e-3, "gap {gap}");
    }

    #[test]
    fn spectral_norm_of_identity_shift() {
        let a = TransitionMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((spectral_norm_of_difference(&a, &b).unwrap() - 2.0).abs() < 1e-14);
    }
}
