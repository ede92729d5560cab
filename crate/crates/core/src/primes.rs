//! Small prime generation.

/// The first `count` primes, by an incremental sieve over odd candidates.
pub fn first_primes(count: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|&&p| p * p <= candidate).all(|&p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += if candidate == 2 { 1 } else { 2 };
    }
    primes
}

/// The `k`-th prime, 1-based (`nth_prime(1) == 2`).
pub fn nth_prime(k: usize) -> u64 {
    assert!(k >= 1, "primes are 1-indexed");
    first_primes(k)[k - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        assert_eq!(first_primes(8), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(nth_prime(3), 5);
        assert_eq!(nth_prime(100), 541);
    }
}
