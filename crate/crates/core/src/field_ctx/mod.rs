//! Arithmetic of `K = Q(sqrt(-D))`, the choice of prime above `p` fixed by
//! the canonical square root `r` of `-D`, the splitting
//! `K (x) Q_p = Q_p x Q_p`, and reduction of exact values to `Z/p^M`.

pub mod algebraic;
pub mod arith;
pub mod cyclotomic;
pub mod element;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use algebraic::AlgebraicValue;
pub use arith::Q;
pub use element::FieldElement;

use crate::error::{Error, Result};
use arith::{
    euler_phi, hensel_sqrt, is_prime, is_squarefree, legendre, mod_pow, primitive_root,
    primitive_root_prime_power, q_frac, rational_mod,
};

/// The CM field with its p-adic data. `r` and `w` are derived from
/// `(D, p, M)` and never read from configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CMContext {
    #[serde(rename = "D")]
    pub d: u64,
    pub p: u64,
    pub c: u32,
    #[serde(rename = "M")]
    pub precision: u32,
    #[serde(skip)]
    pub r: u64,
    #[serde(skip)]
    pub w: u32,
}

impl CMContext {
    pub fn new(d: u64, p: u64, c: u32, precision: u32) -> Result<Self> {
        if d == 0 || !is_squarefree(d) {
            return Err(Error::NotSquarefree(d));
        }
        if p == 2 || !is_prime(p) {
            return Err(Error::BadPrime(p));
        }
        if c == 0 || precision < 2 * c {
            return Err(Error::PrecisionTooLow { m: precision, two_c: 2 * c });
        }
        if d % p == 0 || legendre(-(d as i64), p) != 1 {
            return Err(Error::NotSplit { d, p });
        }
        let r0 = (0..p)
            .find(|&x| (x * x + d) % p == 0)
            .expect("residue has a root");
        let r = hensel_sqrt(-(d as i64), r0, p, precision);
        let w = match d {
            1 => 4,
            3 => 6,
            _ => 2,
        };
        Ok(CMContext { d, p, c, precision, r, w })
    }

    /// Fill in derived fields after deserialization.
    pub fn validated(self) -> Result<Self> {
        Self::new(self.d, self.p, self.c, self.precision)
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.precision)
    }

    /// `p^c`, the level modulus.
    pub fn level_modulus(&self) -> u64 {
        self.p.pow(self.c)
    }

    /// Fundamental discriminant of `K`.
    pub fn disc(&self) -> i64 {
        let d = self.d as i64;
        if d % 4 == 3 {
            -d
        } else {
            -4 * d
        }
    }

    /// All `w` roots of unity of `O_K`, as elements of `K`.
    pub fn units(&self) -> Vec<FieldElement> {
        let d = self.d;
        let gen = match d {
            1 => FieldElement::sqrt_minus_d(1),
            3 => FieldElement::new(q_frac(1, 2), q_frac(1, 2), 3),
            _ => FieldElement::from_int(-1),
        };
        let mut out = vec![FieldElement { d, ..FieldElement::one() }];
        for _ in 1..self.w {
            let next = out.last().unwrap() * &gen;
            out.push(next);
        }
        out
    }

    /// A generator of the unit group of `O_K`.
    pub fn unit_generator(&self) -> FieldElement {
        self.units()[1 % self.w as usize].clone()
    }

    /// `x -> (sigma(x), sigma_bar(x)) mod p^M`.
    pub fn embed_p(&self, x: &FieldElement) -> Result<(u64, u64)> {
        self.embed_p_mod(x, self.modulus())
    }

    /// As `embed_p`, reduced modulo an arbitrary power of `p` dividing `p^M`.
    pub fn embed_p_mod(&self, x: &FieldElement, modulus: u64) -> Result<(u64, u64)> {
        let u = rational_mod(&x.u, modulus).ok_or(Error::NegativeValuation)?;
        let v = rational_mod(&x.v, modulus).ok_or(Error::NegativeValuation)?;
        let r = self.r % modulus;
        let vr = (v as u128 * r as u128 % modulus as u128) as u64;
        Ok(((u + vr) % modulus, (u + modulus - vr) % modulus))
    }

    /// Reduce an exact value to `Z/p^M` along the prime fixed by
    /// `zeta_m -> omega(g)^{(p-1)/m}` and `sqrt(-D) -> r`.
    pub fn reduce_mod_p(&self, a: &AlgebraicValue, precision: u32) -> Result<u64> {
        let descended;
        let mut a = a;
        if a.order() % self.p == 0 || (self.p - 1) % a.order() != 0 {
            let primes: Vec<u64> = arith::factor(a.order()).into_iter().map(|(q, _)| q).collect();
            descended = a.descend(&primes);
            a = &descended;
        }
        let m = a.order();
        if m % self.p == 0 {
            return Err(Error::WildRegime { m, p: self.p });
        }
        if (self.p - 1) % m != 0 {
            return Err(Error::RootNotInZp { m, p: self.p });
        }
        let modulus = self.p.pow(precision);
        let zeta = self.canonical_root_of_unity(m, precision);
        let r = if precision <= self.precision {
            self.r % modulus
        } else {
            hensel_sqrt(-(self.d as i64), self.r % self.p, self.p, precision)
        };
        let (re, im) = a.raw_parts();
        let mut acc: u128 = 0;
        let mut zpow: u128 = 1;
        let md = modulus as u128;
        for j in 0..m as usize {
            let mut term: u128 = 0;
            if !re[j].is_zero() {
                term += rational_mod(&re[j], modulus).ok_or(Error::NegativeValuation)? as u128;
            }
            if !im[j].is_zero() {
                let v = rational_mod(&im[j], modulus).ok_or(Error::NegativeValuation)? as u128;
                term += v * r as u128 % md;
            }
            acc = (acc + term % md * zpow) % md;
            zpow = zpow * zeta as u128 % md;
        }
        Ok(acc as u64)
    }

    /// The canonical primitive `m`-th root of unity in `Z/p^M` for `m | p-1`:
    /// the Teichmuller lift of `g^{(p-1)/m}`, `g` the least primitive root.
    pub fn canonical_root_of_unity(&self, m: u64, precision: u32) -> u64 {
        let modulus = self.p.pow(precision);
        let g = primitive_root(self.p);
        let teich = mod_pow(g, self.p.pow(precision - 1), modulus);
        mod_pow(teich, (self.p - 1) / m, modulus)
    }

    pub fn unit_group(&self) -> UnitGroup {
        UnitGroup::new(self.p, self.c)
    }
}

/// The cyclic group `(Z/p^c)^x` with a discrete-log table for its least
/// generator.
#[derive(Clone, Debug)]
pub struct UnitGroup {
    pub p: u64,
    pub c: u32,
    pub modulus: u64,
    pub order: u64,
    pub generator: u64,
    log: Vec<Option<u64>>,
}

impl UnitGroup {
    pub fn new(p: u64, c: u32) -> Self {
        let modulus = p.pow(c);
        let order = euler_phi(modulus);
        let generator = primitive_root_prime_power(p, c);
        let mut log = vec![None; modulus as usize];
        let mut x = 1u64;
        for i in 0..order {
            log[x as usize] = Some(i);
            x = x * generator % modulus;
        }
        UnitGroup { p, c, modulus, order, generator, log }
    }

    pub fn log(&self, x: u64) -> Option<u64> {
        self.log[(x % self.modulus) as usize]
    }

    pub fn is_unit(&self, x: u64) -> bool {
        x % self.p != 0
    }

    /// Units in increasing residue order.
    pub fn elements(&self) -> impl Iterator<Item = u64> + '_ {
        (1..self.modulus).filter(move |x| x % self.p != 0)
    }
}

/// Integer value of a rational determined modulo `p^M`, helper for tests.
pub fn residue_of_int(n: &BigInt, modulus: u64) -> u64 {
    let m = BigInt::from(modulus);
    (((n % &m) + &m) % &m).to_u64().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_ctx::arith::q;

    #[test]
    fn init_examples() {
        let ctx = CMContext::new(1, 5, 1, 2).unwrap();
        assert_eq!(ctx.r, 7);
        assert_eq!((ctx.r * ctx.r + 1) % 25, 0);
        assert_eq!(ctx.w, 4);
        assert!(matches!(CMContext::new(1, 7, 1, 2), Err(Error::NotSplit { .. })));
        assert!(matches!(CMContext::new(4, 5, 1, 2), Err(Error::NotSquarefree(4))));
        assert!(matches!(CMContext::new(1, 5, 2, 3), Err(Error::PrecisionTooLow { .. })));
        assert!(matches!(CMContext::new(5, 5, 1, 2), Err(Error::NotSplit { .. })));
    }

    #[test]
    fn embed_examples() {
        let ctx = CMContext::new(1, 5, 1, 2).unwrap();
        assert_eq!(ctx.embed_p(&FieldElement::from_int(3)).unwrap(), (3, 3));
        let i = FieldElement::sqrt_minus_d(1);
        assert_eq!(ctx.embed_p_mod(&i, 5).unwrap(), (2, 3));
        let (a, b) = ctx.embed_p_mod(&i, 5).unwrap();
        assert_eq!(ctx.embed_p_mod(&(&i * &i), 5).unwrap(), (a * a % 5, b * b % 5));
        assert_eq!(ctx.embed_p_mod(&(&i * &i), 5).unwrap(), (4, 4));
        assert!(ctx.embed_p(&FieldElement::rational(q_frac(1, 5))).is_err());
    }

    #[test]
    fn reduce_examples() {
        let ctx = CMContext::new(1, 5, 1, 2).unwrap();
        assert_eq!(ctx.reduce_mod_p(&AlgebraicValue::from_int(7), 2).unwrap(), 7);
        let i = AlgebraicValue::from_field_element(&FieldElement::sqrt_minus_d(1));
        assert_eq!(ctx.reduce_mod_p(&i, 1).unwrap(), 2);
        let fifth = AlgebraicValue::rational(q_frac(1, 5));
        assert_eq!(ctx.reduce_mod_p(&fifth, 2), Err(Error::NegativeValuation));
        let z5 = AlgebraicValue::root_of_unity(5, 1);
        assert!(matches!(ctx.reduce_mod_p(&z5, 2), Err(Error::WildRegime { .. })));
    }

    #[test]
    fn canonical_roots_have_exact_order() {
        let ctx = CMContext::new(1, 13, 1, 4).unwrap();
        let modulus = ctx.modulus();
        for m in [1, 2, 3, 4, 6, 12] {
            let z = ctx.canonical_root_of_unity(m, 4);
            assert_eq!(mod_pow(z, m, modulus), 1);
            for d in 1..m {
                if m % d == 0 {
                    assert_ne!(mod_pow(z, d, modulus), 1);
                }
            }
        }
    }

    #[test]
    fn units_have_norm_one() {
        for d in [1, 2, 3, 5] {
            let p = [5, 3, 7, 3][[1, 2, 3, 5].iter().position(|&x| x == d).unwrap()];
            let ctx = CMContext::new(d, p, 1, 2).unwrap();
            let us = ctx.units();
            assert_eq!(us.len() as u32, ctx.w);
            for u in us {
                assert_eq!(u.norm(), q(1));
            }
        }
    }

    #[test]
    fn unit_group_logs() {
        let g = UnitGroup::new(5, 2);
        assert_eq!(g.order, 20);
        assert_eq!(g.elements().count(), 20);
        assert_eq!(g.log(1), Some(0));
        assert_eq!(g.log(g.generator), Some(1));
        assert_eq!(g.log(5), None);
    }
}
