use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Probability of drawing each coalition size `0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeDistribution {
    probs: Vec<f64>,
}

impl SizeDistribution {
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidParameter("size probabilities must be non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("size probabilities must sum to 1"));
        }
        Ok(SizeDistribution { probs })
    }

    /// `1/(n-3)` on every size in `{2, ..., n-2}`.
    pub fn uniform(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut probs = vec![0.0; n + 1];
        let p = 1.0 / (n - 3) as f64;
        for q in &mut probs[2..=n - 2] {
            *q = p;
        }
        Ok(SizeDistribution { probs })
    }

    /// The pairwise distribution `β_n/(s(s-1))` on small sizes mirrored on
    /// large ones, restricted to `{2, ..., n-2}`.
    pub fn pairs(n: usize) -> Result<Self> {
        check_n(n)?;
        let nf = n as f64;
        let beta = if n % 2 == 0 {
            (nf * nf - 2.0 * nf) / (2.0 * (nf * nf - 4.0 * nf + 2.0))
        } else {
            (nf - 1.0) / (2.0 * (nf - 3.0))
        };
        let mut probs = vec![0.0; n + 1];
        for (s, q) in probs.iter_mut().enumerate().take(n - 1).skip(2) {
            let sf = s as f64;
            *q = if 2 * s < n {
                // s <= (n-1)/2
                beta / (sf * (sf - 1.0))
            } else {
                let r = nf - sf;
                beta / (r * (r - 1.0))
            };
        }
        Ok(SizeDistribution { probs })
    }

    pub fn players(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, size: usize) -> f64 {
        self.probs[size]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.players();
        (0..=n).all(|s| (self.probs[s] - self.probs[n - s]).abs() <= 1e-12)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidParameter("size distributions need n >= 4"));
    }
    Ok(())
}
