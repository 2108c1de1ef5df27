use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The primes in `[m, 2m - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeWindow {
    pub m: u64,
    pub primes: Vec<u64>,
}

impl PrimeWindow {
    /// `N_m`.
    pub fn count(&self) -> usize {
        self.primes.len()
    }
}

fn small_primes(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut k = i * i;
        while k <= limit {
            composite[k] = true;
            k += i;
        }
    }
    out
}

/// Segmented sieve over `[m, 2m - 1]`.
pub fn primes_in_window(m: u64) -> Result<PrimeWindow> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("prime window needs m >= 2, got {m}")));
    }
    let lo = m;
    let hi = 2 * m - 1;
    let mut is_prime = vec![true; (hi - lo + 1) as usize];
    for p in small_primes(hi.isqrt()) {
        let start = (p * p).max(lo.div_ceil(p) * p);
        let mut k = start;
        while k <= hi {
            is_prime[(k - lo) as usize] = false;
            k += p;
        }
    }
    let primes = is_prime.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| lo + i as u64).collect();
    Ok(PrimeWindow { m, primes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn small_windows() {
        assert_eq!(primes_in_window(10).unwrap().primes, vec![11, 13, 17, 19]);
        assert_eq!(primes_in_window(2).unwrap().primes, vec![2, 3]);
        assert_eq!(primes_in_window(3).unwrap().primes, vec![3, 5]);
        assert!(primes_in_window(1).is_err());
        assert!(primes_in_window(0).is_err());
    }

    #[test]
    fn matches_trial_division() {
        for m in (2..400).chain([1024, 4093, 65_536]) {
            let expected: Vec<u64> = (m..2 * m).filter(|&n| trial_division(n)).collect();
            assert_eq!(primes_in_window(m).unwrap().primes, expected, "m = {m}");
        }
    }
}
