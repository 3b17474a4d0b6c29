use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact binomial coefficient; exact for every `n <= 64`.
pub fn binomial_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

#[inline]
pub fn binomial(n: usize, k: usize) -> f64 {
    binomial_u64(n, k) as f64
}

/// `ln(m!)` for `m = 0..=max`.
pub fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = vec![0.0; max + 1];
    for m in 1..=max {
        out[m] = out[m - 1] + libm::log(m as f64);
    }
    out
}

pub const MAX_BERNOULLI: usize = 32;

/// Bernoulli numbers `B_0..=B_m` as exact rationals, with `B_1 = -1/2`.
///
/// Uses `sum_{j=0}^{m} C(m+1, j) B_j = 0`.
pub fn bernoulli_numbers(m: usize) -> Result<Vec<BigRational>> {
    if m > MAX_BERNOULLI {
        return Err(Error::InvalidParameter("Bernoulli index above 32"));
    }
    let mut out: Vec<BigRational> = Vec::with_capacity(m + 1);
    out.push(BigRational::one());
    for k in 1..=m {
        let mut acc = BigRational::zero();
        for (j, b) in out.iter().enumerate() {
            acc += b * BigRational::from_integer(BigInt::from(binomial_u64(k + 1, j)));
        }
        out.push(-acc / BigRational::from_integer(BigInt::from(k as u64 + 1)));
    }
    Ok(out)
}

pub fn bernoulli_number(m: usize) -> Result<BigRational> {
    Ok(bernoulli_numbers(m)?.pop().unwrap())
}

pub fn bernoulli_f64(m: usize) -> Result<Vec<f64>> {
    Ok(bernoulli_numbers(m)?
        .iter()
        .map(|b| b.to_f64().unwrap_or(f64::NAN))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_u64(6, 3), 20);
        assert_eq!(binomial_u64(32, 16), 601_080_390);
        assert_eq!(binomial_u64(64, 32), 1_832_624_140_942_590_534);
        assert_eq!(binomial_u64(3, 5), 0);
        assert_eq!(binomial_u64(0, 0), 1);
    }

    #[test]
    fn ln_factorial_matches_product() {
        let lf = ln_factorials(10);
        assert!((lf[10] - libm::log(3_628_800.0)).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli_number(0).unwrap(), rat(1, 1));
        assert_eq!(bernoulli_number(1).unwrap(), rat(-1, 2));
        assert_eq!(bernoulli_number(2).unwrap(), rat(1, 6));
        assert_eq!(bernoulli_number(3).unwrap(), rat(0, 1));
        assert_eq!(bernoulli_number(4).unwrap(), rat(-1, 30));
        assert_eq!(bernoulli_number(12).unwrap(), rat(-691, 2730));
        assert_eq!(bernoulli_number(32).unwrap(), rat(-7_709_321_041_217, 510));
        assert!(bernoulli_number(33).is_err());
    }
}
