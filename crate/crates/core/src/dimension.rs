//! Integer arithmetic on Hilbert-space dimensions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// `Some((p, n))` when `d = p^n` with `p` prime and `n >= 1`.
pub fn prime_power(d: usize) -> Option<(u32, u32)> {
    match factorize(d).as_slice() {
        [(p, n)] => Some((*p, *n)),
        _ => None,
    }
}

/// Prime factorization as `(prime, multiplicity)` pairs in increasing prime order.
pub fn factorize(mut d: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= d {
        let mut n = 0;
        while d.is_multiple_of(p) {
            d /= p;
            n += 1;
        }
        if n > 0 {
            out.push((p as u32, n));
        }
        p += 1;
    }
    if d > 1 {
        out.push((d as u32, 1));
    }
    out
}

/// Number of distinct primes dividing `d`.
pub fn omega(d: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    Ok(factorize(d).len())
}

/// Least prime power strictly greater than `d`.
pub fn smallest_prime_power_above(d: usize) -> usize {
    (d + 1..).find(|&k| prime_power(k).is_some()).expect("prime powers are unbounded")
}

/// `d = ∏ p_a^{n_a}` split into whole prime-power subsystems `D_a = p_a^{n_a}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionFactorization {
    pub dim: usize,
    pub factors: Vec<(u32, u32)>,
}

impl DimensionFactorization {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        Ok(Self { dim, factors: factorize(dim) })
    }

    /// Subsystem dimensions `D_a`, smallest prime first.
    pub fn subsystem_dims(&self) -> Vec<usize> {
        self.factors.iter().map(|&(p, n)| (p as usize).pow(n)).collect()
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_examples() {
        assert_eq!(omega(6).unwrap(), 2);
        assert_eq!(omega(8).unwrap(), 1);
        assert_eq!(omega(30).unwrap(), 3);
        assert_eq!(omega(1), Err(Error::DimensionTooSmall(1)));
    }

    #[test]
    fn prime_power_above() {
        assert_eq!(smallest_prime_power_above(6), 7);
        assert_eq!(smallest_prime_power_above(15), 16);
        assert_eq!(smallest_prime_power_above(2), 3);
        assert_eq!(smallest_prime_power_above(10), 11);
        assert_eq!(smallest_prime_power_above(12), 13);
    }

    #[test]
    fn factorization() {
        assert_eq!(prime_power(16), Some((2, 4)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(1), None);
        let f = DimensionFactorization::new(360).unwrap();
        assert_eq!(f.subsystem_dims(), vec![8, 9, 5]);
        assert_eq!(f.subsystem_dims().iter().product::<usize>(), 360);
    }
}
