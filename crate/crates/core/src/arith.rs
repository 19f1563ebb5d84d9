//! Integer and modular arithmetic primitives.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("cannot factor zero")]
    Zero,
    #[error("{a} is not invertible modulo {n}")]
    NotInvertible { a: i64, n: u64 },
    #[error("modulus must be positive")]
    NonPositiveModulus,
    #[error("expected an odd integer, got {0}")]
    EvenArgument(i64),
}

/// Prime factorization of a positive integer, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// Product of the distinct primes.
    pub fn radical(&self) -> u64 {
        self.primes().product()
    }

    /// Recompose the value from the factor list.
    pub fn recompose(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }

    /// Builds a factorization from prime powers, merging repeated primes.
    /// Zero exponents are dropped.
    pub fn from_factors(mut factors: Vec<(u64, u32)>) -> Self {
        factors.sort_unstable();
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        merged.retain(|&(_, e)| e > 0);
        let value = merged.iter().map(|&(p, e)| p.pow(e)).product();
        Factorization { value, factors: merged }
    }

    pub fn mul(&self, other: &Factorization) -> Factorization {
        let mut f = self.factors.clone();
        f.extend_from_slice(&other.factors);
        Factorization::from_factors(f)
    }

    /// Exact quotient; `None` when `other` does not divide `self`.
    pub fn div(&self, other: &Factorization) -> Option<Factorization> {
        let mut out = self.factors.clone();
        for &(p, e) in &other.factors {
            let slot = out.iter_mut().find(|(q, _)| *q == p)?;
            if slot.1 < e {
                return None;
            }
            slot.1 -= e;
        }
        Some(Factorization::from_factors(out))
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Trial-division factorization.
pub fn factorize(n: u64) -> Result<Factorization, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    let mut factors = Vec::new();
    let mut rest = n;
    let mut push = |p: u64, rest: &mut u64| {
        let mut e = 0;
        while (*rest).is_multiple_of(p) {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut rest);
    let mut p = 3;
    while p * p <= rest {
        push(p, &mut rest);
        p += 2;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Factorization { value: n, factors })
}

pub fn is_square_free(n: u64) -> Result<bool, ArithError> {
    Ok(factorize(n)?.factors.iter().all(|&(_, e)| e == 1))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return false;
        }
        p += 2;
    }
    true
}

/// Number of distinct prime factors.
pub fn omega(n: u64) -> usize {
    factorize(n).map_or(0, |f| f.factors.len())
}

pub fn euler_phi(n: u64) -> u64 {
    match factorize(n) {
        Ok(f) => f
            .factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product(),
        Err(_) => 0,
    }
}

pub fn gcd(a: i64, b: i64) -> u64 {
    a.unsigned_abs().gcd(&b.unsigned_abs())
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Least nonnegative residue of `a` modulo `n`.
pub fn modulo(a: i64, n: u64) -> u64 {
    (a as i128).rem_euclid(n as i128) as u64
}

/// Inverse of `a` modulo `n`, in `[0, n)`.
pub fn mod_inverse(a: i64, n: u64) -> Result<u64, ArithError> {
    if n == 0 {
        return Err(ArithError::NonPositiveModulus);
    }
    if n == 1 {
        return Ok(0);
    }
    let ext = (modulo(a, n) as i128).extended_gcd(&(n as i128));
    if ext.gcd != 1 {
        return Err(ArithError::NotInvertible { a, n });
    }
    Ok(ext.x.rem_euclid(n as i128) as u64)
}

/// Jacobi symbol `(a/n)` for odd positive `n`; the Kronecker extension is
/// used when `n` is even.
pub fn jacobi_symbol(a: i64, n: i64) -> Result<i32, ArithError> {
    if n <= 0 {
        return Err(ArithError::NonPositiveModulus);
    }
    Ok(kronecker_symbol(a, n as u64))
}

/// Kronecker symbol `(a/n)` for `n >= 1`.
pub fn kronecker_symbol(a: i64, n: u64) -> i32 {
    let mut n = n;
    let mut sign = 1;
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        // (a/2) = +1 for a = ±1 mod 8, -1 for a = ±3 mod 8
        if twos % 2 == 1 && matches!(modulo(a, 8), 3 | 5) {
            sign = -sign;
        }
        n >>= twos;
    }
    sign * odd_jacobi(modulo(a, n), n)
}

fn odd_jacobi(mut a: u64, mut n: u64) -> i32 {
    debug_assert!(n % 2 == 1);
    let mut t = 1;
    a %= n;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// `1` when `m ≡ 1 (mod 4)` and `3` (the exponent of `i`, i.e. `ζ₄`) when
/// `m ≡ 3 (mod 4)`. See [`crate::cyclotomic::eps_factor`] for the field value.
pub fn eps_exponent(m: i64) -> Result<u32, ArithError> {
    if m % 2 == 0 {
        return Err(ArithError::EvenArgument(m));
    }
    Ok(if modulo(m, 4) == 1 { 0 } else { 1 })
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Units modulo `n` in increasing order.
pub fn units_mod(n: u64) -> Vec<u64> {
    (0..n).filter(|&x| x.gcd(&n) == 1).collect()
}

pub fn square_free_up_to(max: u64) -> Vec<u64> {
    (1..=max)
        .filter(|&n| is_square_free(n).unwrap_or(false))
        .collect()
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n).take_while(|d| d * d <= n).filter(|d| n.is_multiple_of(*d)).collect();
    let small = out.clone();
    for d in small.into_iter().rev() {
        if d * d != n {
            out.push(n / d);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().factors().is_empty());
        assert_eq!(factorize(12).unwrap().factors(), &[(2, 2), (3, 1)]);
        assert_eq!(factorize(105).unwrap().factors(), &[(3, 1), (5, 1), (7, 1)]);
        assert_eq!(factorize(0), Err(ArithError::Zero));
    }

    #[test]
    fn factorize_round_trip_to_a_million() {
        for n in 1..=1_000_000u64 {
            let f = factorize(n).unwrap();
            assert_eq!(f.recompose(), n);
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
            assert!(f.factors().iter().all(|&(p, e)| e >= 1 && is_prime(p)));
        }
    }

    #[test]
    fn square_free_examples() {
        assert!(is_square_free(1).unwrap());
        assert!(is_square_free(15).unwrap());
        assert!(!is_square_free(12).unwrap());
    }

    // Euler's criterion for an odd prime p.
    fn legendre_by_euler(a: i64, p: u64) -> i32 {
        let r = pow_mod(modulo(a, p), (p - 1) / 2, p);
        match r {
            0 => 0,
            1 => 1,
            _ => -1,
        }
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi_symbol(1, 3).unwrap(), 1);
        assert_eq!(
            jacobi_symbol(2, 15).unwrap(),
            legendre_by_euler(2, 3) * legendre_by_euler(2, 5)
        );
        assert_eq!(jacobi_symbol(2, 15).unwrap(), 1);
        // (3/4) = (3/2)^2 under the Kronecker extension
        assert_eq!(jacobi_symbol(3, 4).unwrap(), 1);
        assert_eq!(jacobi_symbol(3, 8).unwrap(), -1);
        assert_eq!(jacobi_symbol(6, 9).unwrap(), 0);
        assert!(jacobi_symbol(1, 0).is_err());
    }

    #[test]
    fn jacobi_matches_euler_product() {
        for n in (3..200u64).step_by(2) {
            let f = factorize(n).unwrap();
            for a in -50..50i64 {
                let expected: i32 = f
                    .factors()
                    .iter()
                    .map(|&(p, e)| legendre_by_euler(a, p).pow(e))
                    .product();
                assert_eq!(kronecker_symbol(a, n), expected, "({a}/{n})");
            }
        }
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(1, 5).unwrap(), 1);
        assert_eq!(mod_inverse(3, 20).unwrap(), 7);
        assert_eq!(mod_inverse(4, 7).unwrap(), 2);
        assert_eq!(mod_inverse(-3, 7).unwrap(), 2);
        assert!(matches!(mod_inverse(4, 6), Err(ArithError::NotInvertible { .. })));
    }

    #[test]
    fn eps_exponent_examples() {
        assert_eq!(eps_exponent(1).unwrap(), 0);
        assert_eq!(eps_exponent(3).unwrap(), 1);
        assert_eq!(eps_exponent(7).unwrap(), 1);
        assert_eq!(eps_exponent(-1).unwrap(), 1);
        assert!(eps_exponent(4).is_err());
    }

    #[test]
    fn divisors_sorted() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(49), vec![1, 7, 49]);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn jacobi_is_multiplicative_in_top(a in -1000i64..1000, b in -1000i64..1000, k in 0u64..500) {
                let n = 2 * k + 1;
                prop_assert_eq!(kronecker_symbol(a * b, n), kronecker_symbol(a, n) * kronecker_symbol(b, n));
            }

            #[test]
            fn kronecker_is_multiplicative_in_bottom(a in -1000i64..1000, m in 1u64..300, n in 1u64..300) {
                prop_assert_eq!(kronecker_symbol(a, m * n), kronecker_symbol(a, m) * kronecker_symbol(a, n));
            }

            #[test]
            fn inverse_inverts(a in -10_000i64..10_000, n in 1u64..5000) {
                if let Ok(x) = mod_inverse(a, n) {
                    prop_assert_eq!(mul_mod(modulo(a, n), x, n), 1 % n);
                } else {
                    prop_assert!(gcd(a, n as i64) > 1);
                }
            }
        }
    }
}
