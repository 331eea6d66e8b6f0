//! Small-integer number theory used throughout: modular powers, primality,
//! factorization by trial division, square roots modulo prime powers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = (base as u128) % m;
    let mut acc: u128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

pub fn mod_inv(a: u64, modulus: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(modulus as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(modulus as i128) as u64)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as (prime, exponent) pairs in increasing order.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    factor(n).iter().all(|&(_, e)| e == 1)
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    out.sort_unstable();
    out
}

pub fn mobius(n: u64) -> i32 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Legendre symbol of `a` modulo the odd prime `p`.
pub fn legendre(a: i64, p: u64) -> i32 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if mod_pow(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Kronecker symbol (disc / ell) for a fundamental discriminant and a prime.
pub fn kronecker(disc: i64, ell: u64) -> i32 {
    if disc.rem_euclid(ell as i64) == 0 {
        return 0;
    }
    if ell == 2 {
        match disc.rem_euclid(8) {
            1 | 7 => 1,
            _ => -1,
        }
    } else {
        legendre(disc, ell)
    }
}

/// Least primitive root modulo the odd prime `p`.
pub fn primitive_root(p: u64) -> u64 {
    let order = p - 1;
    let primes: Vec<u64> = factor(order).into_iter().map(|(q, _)| q).collect();
    (2..p)
        .find(|&g| primes.iter().all(|&q| mod_pow(g, order / q, p) != 1))
        .unwrap_or(1)
}

/// Least generator of the cyclic group `(Z/p^c)^x` for odd `p`.
pub fn primitive_root_prime_power(p: u64, c: u32) -> u64 {
    let modulus = p.pow(c);
    let order = euler_phi(modulus);
    let primes: Vec<u64> = factor(order).into_iter().map(|(q, _)| q).collect();
    (2..modulus.max(3))
        .filter(|g| g % p != 0)
        .find(|&g| primes.iter().all(|&q| mod_pow(g, order / q, modulus) != 1))
        .unwrap_or(1)
}

/// Hensel lift of a simple root `r0` of `x^2 = a (mod p)` to `mod p^m`.
pub fn hensel_sqrt(a: i64, r0: u64, p: u64, m: u32) -> u64 {
    let mut r = r0 as i128;
    let mut modulus = p as i128;
    for _ in 1..m {
        modulus *= p as i128;
        // Newton step r <- r - (r^2 - a) / (2r)
        let f = (r * r - a as i128).rem_euclid(modulus);
        let inv = mod_inv(((2 * r).rem_euclid(modulus)) as u64, modulus as u64)
            .expect("2r invertible at a simple root") as i128;
        r = (r - f * inv).rem_euclid(modulus);
    }
    r.rem_euclid(modulus) as u64
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut t = n.abs();
    while (&t % &pb).is_zero() {
        t /= &pb;
        v += 1;
    }
    v
}

/// Valuation of a nonzero rational (may be negative).
pub fn valuation_q(x: &Q, p: u64) -> i64 {
    valuation(x.numer(), p) as i64 - valuation(x.denom(), p) as i64
}

/// Reduce a p-integral rational modulo `modulus` (a power of p).
pub fn rational_mod(x: &Q, modulus: u64) -> Option<u64> {
    let m = BigInt::from(modulus);
    let den = x.denom().mod_floor(&m).to_u64()?;
    let inv = mod_inv(den, modulus)?;
    let num = x.numer().mod_floor(&m).to_u64()?;
    Some(((num as u128 * inv as u128) % modulus as u128) as u64)
}

pub fn q_pow(x: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}
