//! Formal constants `rat * i^a * pi^b * G * sqrt(r) * prod L(.)^e * [exp]`,
//! kept in a canonical form so that equality is componentwise.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::field_ctx::arith::{factor, q, Q};

/// A formal `L^p(s, chi_E^{-1} tau^i)` factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LFactor {
    pub arg: i64,
    /// Power of `tau`, mod 2.
    pub tau_pow: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicConstant {
    /// Positive rational part (signs live in `pow_i`); zero for the zero object.
    pub rat: Q,
    pub pow_i: u32,
    pub pow_pi: i64,
    /// Products of Gamma values at positive integers.
    pub gamma_prod: Q,
    /// Squarefree radicand `r` of a remaining `sqrt(r)`; 1 when absent.
    pub sqrt_radicand: u64,
    /// Exponent of each formal L-factor.
    pub lfactors: BTreeMap<LFactor, i64>,
    /// Trace in an `e^{-2 pi tr}` factor, if present.
    pub exp_trace: Option<Q>,
}

impl SymbolicConstant {
    pub fn one() -> Self {
        SymbolicConstant {
            rat: Q::one(),
            pow_i: 0,
            pow_pi: 0,
            gamma_prod: Q::one(),
            sqrt_radicand: 1,
            lfactors: BTreeMap::new(),
            exp_trace: None,
        }
    }

    pub fn zero() -> Self {
        SymbolicConstant { rat: Q::zero(), ..Self::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero()
    }

    pub fn rational(x: Q) -> Self {
        SymbolicConstant { rat: x, ..Self::one() }.normalized()
    }

    pub fn i_power(a: i64) -> Self {
        SymbolicConstant { pow_i: a.rem_euclid(4) as u32, ..Self::one() }
    }

    pub fn pi_power(b: i64) -> Self {
        SymbolicConstant { pow_pi: b, ..Self::one() }
    }

    pub fn gamma(g: Q) -> Self {
        SymbolicConstant { gamma_prod: g, ..Self::one() }
    }

    /// `sqrt(x)` for a positive integer `x`.
    pub fn sqrt(x: u64) -> Self {
        SymbolicConstant { sqrt_radicand: x, ..Self::one() }.normalized()
    }

    pub fn l_factor(arg: i64, tau_pow: u32, exponent: i64) -> Self {
        let mut out = Self::one();
        out.lfactors.insert(LFactor { arg, tau_pow: tau_pow % 2 }, exponent);
        out
    }

    pub fn exp_marker(trace: Q) -> Self {
        SymbolicConstant { exp_trace: Some(trace), ..Self::one() }
    }

    /// Move signs into `pow_i` and squares out of the radicand.
    fn normalized(mut self) -> Self {
        if self.rat.is_zero() {
            return Self::zero();
        }
        if self.rat.is_negative() {
            self.rat = -self.rat;
            self.pow_i = (self.pow_i + 2) % 4;
        }
        let mut squarefree = 1u64;
        let mut root = 1u64;
        for (ell, e) in factor(self.sqrt_radicand) {
            root *= ell.pow(e / 2);
            if e % 2 == 1 {
                squarefree *= ell;
            }
        }
        self.rat *= Q::from_integer(BigInt::from(root));
        self.sqrt_radicand = squarefree;
        self.lfactors.retain(|_, e| *e != 0);
        self
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn inverse(&self) -> Self {
        assert!(!self.is_zero(), "inverse of the zero constant");
        let r = self.sqrt_radicand;
        SymbolicConstant {
            // 1/sqrt(r) = sqrt(r)/r
            rat: self.rat.recip() / q(r as i64),
            pow_i: (4 - self.pow_i) % 4,
            pow_pi: -self.pow_pi,
            gamma_prod: self.gamma_prod.recip(),
            sqrt_radicand: r,
            lfactors: self.lfactors.iter().map(|(k, e)| (*k, -e)).collect(),
            exp_trace: self.exp_trace.as_ref().map(|t| -t.clone()),
        }
        .normalized()
    }

    /// The numeric value when only rational, `i` and square-root parts are
    /// present and the `i`-power is real.
    pub fn as_real_algebraic(&self) -> Option<(Q, u64)> {
        if self.pow_pi != 0 || !self.gamma_prod.is_one() || !self.lfactors.is_empty() || self.exp_trace.is_some() {
            return None;
        }
        match self.pow_i {
            0 => Some((self.rat.clone(), self.sqrt_radicand)),
            2 => Some((-self.rat.clone(), self.sqrt_radicand)),
            _ => None,
        }
    }
}

impl std::ops::Mul for &SymbolicConstant {
    type Output = SymbolicConstant;
    fn mul(self, rhs: &SymbolicConstant) -> SymbolicConstant {
        if self.is_zero() || rhs.is_zero() {
            return SymbolicConstant::zero();
        }
        let mut lf = self.lfactors.clone();
        for (k, e) in &rhs.lfactors {
            *lf.entry(*k).or_insert(0) += e;
        }
        let exp_trace = match (&self.exp_trace, &rhs.exp_trace) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => Some(a + b),
        };
        SymbolicConstant {
            rat: &self.rat * &rhs.rat,
            pow_i: (self.pow_i + rhs.pow_i) % 4,
            pow_pi: self.pow_pi + rhs.pow_pi,
            gamma_prod: &self.gamma_prod * &rhs.gamma_prod,
            sqrt_radicand: self.sqrt_radicand * rhs.sqrt_radicand,
            lfactors: lf,
            exp_trace,
        }
        .normalized()
    }
}

impl std::ops::Mul for SymbolicConstant {
    type Output = SymbolicConstant;
    fn mul(self, rhs: SymbolicConstant) -> SymbolicConstant {
        &self * &rhs
    }
}

impl fmt::Display for SymbolicConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = vec![self.rat.to_string()];
        if self.pow_i != 0 {
            parts.push(format!("i^{}", self.pow_i));
        }
        if self.pow_pi != 0 {
            parts.push(format!("pi^{}", self.pow_pi));
        }
        if !self.gamma_prod.is_one() {
            parts.push(format!("[{}]", self.gamma_prod));
        }
        if self.sqrt_radicand != 1 {
            parts.push(format!("sqrt({})", self.sqrt_radicand));
        }
        for (l, e) in &self.lfactors {
            parts.push(format!("L^p({}, chi_E^-1 tau^{})^{}", l.arg, l.tau_pow, e));
        }
        if let Some(t) = &self.exp_trace {
            parts.push(format!("exp(-2pi*{t})"));
        }
        write!(f, "{}", parts.join(" * "))
    }
}

impl serde::Serialize for SymbolicConstant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let lf: Vec<serde_json::Value> = self
            .lfactors
            .iter()
            .map(|(l, e)| serde_json::json!({"arg": l.arg, "tau": l.tau_pow, "exp": e}))
            .collect();
        serde_json::json!({
            "rat": self.rat.to_string(),
            "powI": self.pow_i,
            "powPi": self.pow_pi,
            "gammaProd": self.gamma_prod.to_string(),
            "sqrt": self.sqrt_radicand,
            "lFactors": lf,
            "expTrace": self.exp_trace.as_ref().map(|t| t.to_string()),
        })
        .serialize(s)
    }
}

/// `Gamma(m) = (m-1)!` as a rational.
pub fn gamma_int(m: i64) -> Q {
    assert!(m >= 1);
    let mut acc = BigInt::one();
    for j in 1..m {
        acc *= j;
    }
    Q::from_integer(acc)
}

pub fn small_int(x: &Q) -> Option<i64> {
    x.is_integer().then(|| x.numer().to_i64()).flatten()
}
