//! Exact values in the presentation ring `Q[x, y] / (Phi_m(x), y^2 + D)`,
//! `x <-> zeta_m`, `y <-> sqrt(-D)`.
//!
//! Internally a value is stored in the group ring `Q[x]/(x^m - 1)` (on both
//! the `1` and the `y` component) and reduced modulo `Phi_m` only when
//! compared or serialized. Multiplying by a root of unity is then a rotation,
//! which keeps the large finite sums of the p-local oracle cheap.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::arith::Q;
use super::cyclotomic::reduce;
use super::element::FieldElement;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct AlgebraicValue {
    m: u64,
    d: u64,
    re: Vec<Q>,
    im: Vec<Q>,
}

impl AlgebraicValue {
    pub fn zero() -> Self {
        AlgebraicValue { m: 1, d: 0, re: vec![Q::zero()], im: vec![Q::zero()] }
    }

    pub fn one() -> Self {
        Self::rational(Q::one())
    }

    pub fn rational(x: Q) -> Self {
        AlgebraicValue { m: 1, d: 0, re: vec![x], im: vec![Q::zero()] }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(Q::from_integer(n.into()))
    }

    /// `zeta_order^exp`.
    pub fn root_of_unity(order: u64, exp: i64) -> Self {
        let mut v = Self::zeros(order, 0);
        v.re[exp.rem_euclid(order as i64) as usize] = Q::one();
        v
    }

    pub fn from_field_element(x: &FieldElement) -> Self {
        AlgebraicValue { m: 1, d: x.d, re: vec![x.u.clone()], im: vec![x.v.clone()] }
    }

    fn zeros(m: u64, d: u64) -> Self {
        AlgebraicValue {
            m,
            d,
            re: vec![Q::zero(); m as usize],
            im: vec![Q::zero(); m as usize],
        }
    }

    /// Root-of-unity order of the presentation.
    pub fn order(&self) -> u64 {
        self.m
    }

    pub fn discriminant_param(&self) -> u64 {
        self.d
    }

    fn has_y(&self) -> bool {
        self.im.iter().any(|c| !c.is_zero())
    }

    fn join_d(&self, other: &Self) -> u64 {
        match (self.has_y(), other.has_y()) {
            (false, _) => other.d.max(self.d),
            (_, false) => self.d.max(other.d),
            _ => {
                assert_eq!(self.d, other.d, "mixing values over different quadratic fields");
                self.d
            }
        }
    }

    /// Re-present over `zeta_big` with `m | big`.
    pub fn lift(&self, big: u64) -> Self {
        assert!(big % self.m == 0, "lift target {big} not a multiple of {}", self.m);
        if big == self.m {
            return self.clone();
        }
        let step = (big / self.m) as usize;
        let mut out = Self::zeros(big, self.d);
        for j in 0..self.m as usize {
            if !self.re[j].is_zero() {
                out.re[j * step] = self.re[j].clone();
            }
            if !self.im[j].is_zero() {
                out.im[j * step] = self.im[j].clone();
            }
        }
        out
    }

    fn common(&self, other: &Self) -> (Self, Self) {
        let l = self.m.lcm(&other.m);
        (self.lift(l), other.lift(l))
    }

    /// Normal form: `phi(m)` coefficients `(u_j, v_j)` of `x^j (u_j + v_j y)`.
    pub fn normal_form(&self) -> Vec<(Q, Q)> {
        let re = reduce(&self.re, self.m);
        let im = reduce(&self.im, self.m);
        re.into_iter().zip(im).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.normal_form().iter().all(|(u, v)| u.is_zero() && v.is_zero())
    }

    /// The value as an element of `K` when it has no cyclotomic part.
    pub fn as_field_element(&self) -> Option<FieldElement> {
        let nf = self.normal_form();
        if nf.iter().skip(1).any(|(u, v)| !u.is_zero() || !v.is_zero()) {
            return None;
        }
        let (u, v) = nf.into_iter().next().unwrap_or((Q::zero(), Q::zero()));
        Some(FieldElement::new(u, v, self.d))
    }

    pub fn as_rational(&self) -> Option<Q> {
        self.as_field_element().filter(|x| x.is_rational()).map(|x| x.u)
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut out = self.clone();
        for x in out.re.iter_mut().chain(out.im.iter_mut()) {
            if !x.is_zero() {
                *x *= c;
            }
        }
        out
    }

    /// Multiply by `zeta_order^exp`.
    pub fn mul_root(&self, order: u64, exp: i64) -> Self {
        let l = self.m.lcm(&order);
        let base = self.lift(l);
        let shift = (exp.rem_euclid(order as i64) as u64 * (l / order)) as usize;
        let l = l as usize;
        let mut out = Self::zeros(l as u64, self.d);
        for j in 0..l {
            if !base.re[j].is_zero() {
                out.re[(j + shift) % l] = base.re[j].clone();
            }
            if !base.im[j].is_zero() {
                out.im[(j + shift) % l] = base.im[j].clone();
            }
        }
        out
    }

    /// `self += c * zeta_m^shift * other`, where `other` is already presented
    /// over `self.order()`. This is the hot loop of the finite-sum oracles.
    pub fn add_scaled_rotated(&mut self, other: &Self, shift: u64, c: &Q) {
        assert_eq!(other.m, self.m, "add_scaled_rotated needs a common presentation");
        if other.has_y() {
            self.d = self.join_d(other);
        }
        let m = self.m as usize;
        let shift = (shift % self.m) as usize;
        for j in 0..m {
            if !other.re[j].is_zero() {
                self.re[(j + shift) % m] += &other.re[j] * c;
            }
            if !other.im[j].is_zero() {
                self.im[(j + shift) % m] += &other.im[j] * c;
            }
        }
    }

    /// `(j, c)` when the value is `c * zeta_m^j` with rational `c`.
    pub fn as_monomial(&self) -> Option<(u64, Q)> {
        if self.has_y() {
            return None;
        }
        let mut found = None;
        for (j, c) in self.re.iter().enumerate() {
            if !c.is_zero() {
                if found.is_some() {
                    return None;
                }
                found = Some((j as u64, c.clone()));
            }
        }
        found
    }

    /// The automorphism `x -> x^{-1}`, `y -> -y` (complex conjugation under
    /// any embedding).
    pub fn complex_conj(&self) -> Self {
        let m = self.m as usize;
        let mut out = Self::zeros(self.m, self.d);
        for j in 0..m {
            let t = (m - j) % m;
            out.re[t] = self.re[j].clone();
            out.im[t] = -self.im[j].clone();
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Rebuild from a normal form.
    pub fn from_normal_form(m: u64, d: u64, coeffs: &[(Q, Q)]) -> Self {
        let mut out = Self::zeros(m, d);
        for (j, (u, v)) in coeffs.iter().enumerate() {
            out.re[j] = u.clone();
            out.im[j] = v.clone();
        }
        out
    }

    /// Canonical JSON form: reduced modulo `Phi_m`, rationals as strings.
    pub fn to_json(&self) -> serde_json::Value {
        let poly: Vec<serde_json::Value> = self
            .normal_form()
            .into_iter()
            .map(|(u, v)| serde_json::json!([u.to_string(), v.to_string()]))
            .collect();
        serde_json::json!({ "m": self.m, "poly": poly })
    }

    pub fn from_json(v: &serde_json::Value, d: u64) -> Result<Self> {
        let bad = || Error::Parse(format!("algebraic value {v}"));
        let m = v.get("m").and_then(|m| m.as_u64()).ok_or_else(bad)?;
        let poly = v.get("poly").and_then(|p| p.as_array()).ok_or_else(bad)?;
        let mut coeffs = Vec::with_capacity(poly.len());
        for pair in poly {
            let u = pair.get(0).and_then(|s| s.as_str()).ok_or_else(bad)?;
            let w = pair.get(1).and_then(|s| s.as_str()).ok_or_else(bad)?;
            let u: Q = u.parse().map_err(|_| bad())?;
            let w: Q = w.parse().map_err(|_| bad())?;
            coeffs.push((u, w));
        }
        if coeffs.len() > m as usize {
            return Err(bad());
        }
        Ok(Self::from_normal_form(m, d, &coeffs))
    }

    /// Try to present the value over `zeta_{m/q}` for a prime `q | m`:
    /// average over `Gal(Q(zeta_m)/Q(zeta_{m/q}))` and keep the result if it
    /// equals the value.
    pub fn descend_once(&self, q: u64) -> Option<Self> {
        let m = self.m;
        if m % q != 0 {
            return None;
        }
        let small = m / q;
        let mut out = Self::zeros(small, self.d);
        if small % q == 0 {
            // H = {1 + t m/q}: keeps x^j with q | j, kills the rest
            for j in (0..m as usize).step_by(q as usize) {
                out.re[j / q as usize] = self.re[j].clone();
                out.im[j / q as usize] = self.im[j].clone();
            }
        } else {
            // CRT split j = j1 q + j2 small; the ramanujan sum over units mod q
            let inv_q = mod_inverse(q % small.max(1), small.max(1));
            let inv_s = mod_inverse(small % q, q);
            let neg = Q::new((-1).into(), BigInt::from(q - 1));
            for j in 0..m {
                let (a, b) = (&self.re[j as usize], &self.im[j as usize]);
                if a.is_zero() && b.is_zero() {
                    continue;
                }
                let j1 = if small == 1 { 0 } else { (j % small) * inv_q % small } as usize;
                let j2 = (j % q) * inv_s % q;
                if j2 == 0 {
                    out.re[j1] += a;
                    out.im[j1] += b;
                } else {
                    out.re[j1] += a * &neg;
                    out.im[j1] += b * &neg;
                }
            }
        }
        (out == *self).then_some(out)
    }

    /// Descend the presentation as far as possible at the primes in `qs`.
    pub fn descend(&self, qs: &[u64]) -> Self {
        let mut cur = self.clone();
        loop {
            let next = qs.iter().find_map(|&q| cur.descend_once(q));
            match next {
                Some(v) => cur = v,
                None => return cur,
            }
        }
    }

    /// The presentation over the smallest cyclotomic field containing the
    /// value; equal values give identical canonical forms.
    pub fn canonical(&self) -> Self {
        let qs: Vec<u64> = super::arith::factor(self.m).into_iter().map(|(q, _)| q).collect();
        self.descend(&qs)
    }

    /// Group-ring coefficients (lazy, unreduced) for `x^j`, used by reduction
    /// to `Z/p^M`.
    pub(crate) fn raw_parts(&self) -> (&[Q], &[Q]) {
        (&self.re, &self.im)
    }
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    super::arith::mod_inv(a, m).expect("coprime")
}

impl PartialEq for AlgebraicValue {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.common(other);
        let na = a.normal_form();
        let nb = b.normal_form();
        let y_used = na.iter().chain(nb.iter()).any(|(_, v)| !v.is_zero());
        na == nb && (!y_used || a.d == b.d || a.d == 0 || b.d == 0)
    }
}

impl Eq for AlgebraicValue {}

impl Add for &AlgebraicValue {
    type Output = AlgebraicValue;
    fn add(self, rhs: &AlgebraicValue) -> AlgebraicValue {
        let d = self.join_d(rhs);
        let (mut a, b) = self.common(rhs);
        a.d = d;
        for (x, y) in a.re.iter_mut().zip(&b.re) {
            if !y.is_zero() {
                *x += y;
            }
        }
        for (x, y) in a.im.iter_mut().zip(&b.im) {
            if !y.is_zero() {
                *x += y;
            }
        }
        a
    }
}

impl Neg for &AlgebraicValue {
    type Output = AlgebraicValue;
    fn neg(self) -> AlgebraicValue {
        self.scale(&-Q::one())
    }
}

impl Sub for &AlgebraicValue {
    type Output = AlgebraicValue;
    fn sub(self, rhs: &AlgebraicValue) -> AlgebraicValue {
        self + &(-rhs)
    }
}

impl Mul for &AlgebraicValue {
    type Output = AlgebraicValue;
    fn mul(self, rhs: &AlgebraicValue) -> AlgebraicValue {
        let d = self.join_d(rhs);
        let (a, b) = self.common(rhs);
        let m = a.m as usize;
        let mut out = AlgebraicValue::zeros(a.m, d);
        let dq = Q::from_integer(BigInt::from(d));
        let nz = |v: &[Q]| -> Vec<usize> { (0..m).filter(|&j| !v[j].is_zero()).collect() };
        let (ar, ai, br, bi) = (nz(&a.re), nz(&a.im), nz(&b.re), nz(&b.im));
        for &i in &ar {
            for &j in &br {
                out.re[(i + j) % m] += &a.re[i] * &b.re[j];
            }
            for &j in &bi {
                out.im[(i + j) % m] += &a.re[i] * &b.im[j];
            }
        }
        for &i in &ai {
            for &j in &br {
                out.im[(i + j) % m] += &a.im[i] * &b.re[j];
            }
            for &j in &bi {
                out.re[(i + j) % m] -= &dq * &a.im[i] * &b.im[j];
            }
        }
        out
    }
}

impl Add for AlgebraicValue {
    type Output = AlgebraicValue;
    fn add(self, rhs: AlgebraicValue) -> AlgebraicValue {
        &self + &rhs
    }
}

impl Mul for AlgebraicValue {
    type Output = AlgebraicValue;
    fn mul(self, rhs: AlgebraicValue) -> AlgebraicValue {
        &self * &rhs
    }
}

impl std::iter::Sum for AlgebraicValue {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(AlgebraicValue::zero(), |acc, x| &acc + &x)
    }
}

impl fmt::Display for AlgebraicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (j, (u, v)) in self.normal_form().into_iter().enumerate() {
            let c = FieldElement::new(u, v, self.d);
            if c.is_zero() {
                continue;
            }
            terms.push(match j {
                0 => format!("({c})"),
                _ => format!("({c})*z{}^{j}", self.m),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Serialize for AlgebraicValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraicValue {
    fn deserialize<De: Deserializer<'de>>(de: De) -> std::result::Result<Self, De::Error> {
        let v = serde_json::Value::deserialize(de)?;
        let d = v.get("D").and_then(|d| d.as_u64()).unwrap_or(0);
        AlgebraicValue::from_json(&v, d).map_err(serde::de::Error::custom)
    }
}
