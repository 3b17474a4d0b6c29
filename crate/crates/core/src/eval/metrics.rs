use alloc::vec::Vec;

use crate::error::Result;
use crate::index::EstimateMap;

pub const PREC_DEFAULT: usize = 10;

/// Mean squared error over all interaction sets.
pub fn mse(est: &EstimateMap, truth: &EstimateMap) -> Result<f64> {
    est.check_compatible(truth)?;
    let total: f64 = est
        .scores()
        .iter()
        .zip(truth.scores())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(total / est.len() as f64)
}

/// Indices of the `m` largest absolute scores; ties go to the smaller key.
fn top_m(scores: &[f64], m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].abs().total_cmp(&scores[a].abs()).then(a.cmp(&b)));
    idx.truncate(m);
    idx.sort_unstable();
    idx
}

/// Fraction of the `m` largest-magnitude true interactions that are also
/// among the `m` largest-magnitude estimates. `m` is capped at the number
/// of interaction sets.
pub fn prec_at(est: &EstimateMap, truth: &EstimateMap, m: usize) -> Result<f64> {
    est.check_compatible(truth)?;
    let m = m.min(est.len());
    if m == 0 {
        return Ok(1.0);
    }
    let a = top_m(est.scores(), m);
    let b = top_m(truth.scores(), m);
    let hits = a.iter().filter(|i| b.binary_search(i).is_ok()).count();
    Ok(hits as f64 / m as f64)
}

/// Mean and standard error (unbiased sample variance); the error is 0 for
/// fewer than two values.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let r = values.len();
    if r == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / r as f64;
    if r < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1) as f64;
    (mean, libm::sqrt(var / r as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::IndexKind;

    fn map(scores: &[f64], n: usize, k: usize) -> EstimateMap {
        EstimateMap::from_scores(n, k, IndexKind::Sii, scores.to_vec()).unwrap()
    }

    #[test]
    fn mse_examples() {
        let gt = map(&[1.0, 2.0], 2, 1);
        assert_eq!(mse(&gt, &gt).unwrap(), 0.0);
        assert_eq!(mse(&map(&[0.0, 2.0], 2, 1), &gt).unwrap(), 0.5);
        let a = map(&[0.3, -1.0, 2.0], 3, 2);
        let b = map(&[1.0, 0.5, -2.0], 3, 2);
        let scaled = |m: &EstimateMap| map(&m.scores().iter().map(|v| v * 3.0).collect::<Vec<_>>(), 3, 2);
        assert!((mse(&scaled(&a), &scaled(&b)).unwrap() - 9.0 * mse(&a, &b).unwrap()).abs() < 1e-12);
        assert!(mse(&a, &gt).is_err());
    }

    #[test]
    fn prec_examples() {
        let n = 6;
        let scores: Vec<f64> = (0..15).map(|i| (i as f64) - 7.2).collect();
        let gt = map(&scores, n, 2);
        assert_eq!(prec_at(&gt, &gt, 10).unwrap(), 1.0);
        let neg = map(&scores.iter().map(|v| -v).collect::<Vec<_>>(), n, 2);
        assert_eq!(prec_at(&neg, &gt, 10).unwrap(), 1.0);
        // top 2 by magnitude: indices 0 (7.2) and 14 (6.8)
        let other = map(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 9.0, 9.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], n, 2);
        assert_eq!(prec_at(&other, &gt, 2).unwrap(), 0.0);
        // fewer sets than m
        let small = map(&[1.0, 2.0, 3.0], 3, 2);
        assert_eq!(prec_at(&small, &small, 10).unwrap(), 1.0);
    }

    #[test]
    fn prec_ties_use_smaller_key() {
        let gt = map(&[0.0, 0.0, 0.0, 5.0], 4, 1);
        let est = map(&[0.0, 0.0, 0.0, 0.0], 4, 1);
        // estimate picks key 0, truth picks key 3
        assert_eq!(prec_at(&est, &gt, 1).unwrap(), 0.0);
        assert_eq!(prec_at(&est, &est, 1).unwrap(), 1.0);
    }

    #[test]
    fn mean_and_se_examples() {
        assert_eq!(mean_and_se(&[2.0]), (2.0, 0.0));
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - libm::sqrt(5.0 / 12.0)).abs() < 1e-15);
    }
}
