use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::arith::{q, Q};
use crate::error::{Error, Result};

/// An element `u + v*sqrt(-D)` of `K = Q(sqrt(-D))`.
///
/// `d` is carried with the value so that products are self-contained; an
/// element with `v = 0` is compatible with any `D`.
#[derive(Clone, Debug)]
pub struct FieldElement {
    pub u: Q,
    pub v: Q,
    pub d: u64,
}

impl FieldElement {
    pub fn new(u: Q, v: Q, d: u64) -> Self {
        FieldElement { u, v, d }
    }

    pub fn rational(u: Q) -> Self {
        FieldElement { u, v: Q::zero(), d: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(q(n))
    }

    /// `sqrt(-D)`.
    pub fn sqrt_minus_d(d: u64) -> Self {
        FieldElement { u: Q::zero(), v: q(1), d }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.v.is_zero()
    }

    fn join_d(&self, other: &Self) -> u64 {
        match (self.v.is_zero(), other.v.is_zero()) {
            (true, _) => other.d.max(self.d),
            (_, true) => self.d.max(other.d),
            _ => {
                assert_eq!(self.d, other.d, "mixing elements of different fields");
                self.d
            }
        }
    }

    pub fn conj(&self) -> Self {
        FieldElement { u: self.u.clone(), v: -self.v.clone(), d: self.d }
    }

    /// `N_{K/Q}(x) = u^2 + D v^2`.
    pub fn norm(&self) -> Q {
        &self.u * &self.u + Q::from_integer(BigInt::from(self.d)) * &self.v * &self.v
    }

    pub fn trace(&self) -> Q {
        &self.u + &self.u
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::InvalidMatrix("inverse of zero".into()));
        }
        Ok(FieldElement { u: &self.u / &n, v: -(&self.v / &n), d: self.d })
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = FieldElement { d: self.d, ..Self::one() };
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Both coordinates are integers.
    pub fn is_integral_coords(&self) -> bool {
        self.u.is_integer() && self.v.is_integer()
    }

    pub fn as_rational(&self) -> Option<&Q> {
        self.v.is_zero().then_some(&self.u)
    }

    /// Parse the format produced by `Display`: `u`, `u+v*sqrt(-D)` or `v*sqrt(-D)`.
    pub fn parse(s: &str, d: u64) -> Result<Self> {
        let bad = || Error::Parse(format!("field element {s:?}"));
        let parse_q = |t: &str| -> Result<Q> { t.parse::<Q>().map_err(|_| bad()) };
        let Some(body) = s.strip_suffix("*sqrt(-D)") else {
            return Ok(Self::rational(parse_q(s)?));
        };
        // split at the last sign that is not at position 0 and not after '/'
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'/');
        let (u, v) = match split {
            Some(i) => (parse_q(&body[..i])?, parse_q(body[i..].trim_start_matches('+'))?),
            None => (Q::zero(), parse_q(body)?),
        };
        Ok(FieldElement { u, v, d })
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.is_zero() {
            return write!(f, "{}", self.u);
        }
        if self.u.is_zero() {
            return write!(f, "{}*sqrt(-D)", self.v);
        }
        if self.v.is_negative() {
            write!(f, "{}{}*sqrt(-D)", self.u, self.v)
        } else {
            write!(f, "{}+{}*sqrt(-D)", self.u, self.v)
        }
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.u == other.u && self.v == other.v && (self.v.is_zero() || self.d == other.d)
    }
}

impl Eq for FieldElement {}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.u.cmp(&other.u).then_with(|| self.v.cmp(&other.v))
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        let d = self.join_d(rhs);
        FieldElement { u: &self.u + &rhs.u, v: &self.v + &rhs.v, d }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        let d = self.join_d(rhs);
        FieldElement { u: &self.u - &rhs.u, v: &self.v - &rhs.v, d }
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        let d = self.join_d(rhs);
        let dq = Q::from_integer(BigInt::from(d));
        FieldElement {
            u: &self.u * &rhs.u - dq * &self.v * &rhs.v,
            v: &self.u * &rhs.v + &self.v * &rhs.u,
            d,
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { u: -self.u.clone(), v: -self.v.clone(), d: self.d }
    }
}

impl From<i64> for FieldElement {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl One for FieldElement {
    fn one() -> Self {
        FieldElement::one()
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        &self * &rhs
    }
}
