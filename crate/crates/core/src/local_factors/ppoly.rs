//! The local polynomial at a prime `ell != p` for `n = 1`, obtained from the
//! spherical section by summing the Whittaker integral shell by shell:
//! the shell `|m| = ell^j` contributes `Y^j` times the Ramanujan sum
//! `c_{ell^j}(b) = sum_{a in (Z/ell^j)^x} e(a b / ell^j)`, evaluated here as an
//! exact cyclotomic sum. Dividing by the local factor `1 - Y` leaves the
//! polynomial.

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::EulerContext;
use crate::error::{Error, Result};
use crate::field_ctx::arith::{q, rational_mod, valuation_q, Q};
use crate::field_ctx::AlgebraicValue;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PPoly {
    pub ell: u64,
    pub ord: u32,
    pub b: u64,
    #[serde(rename = "D")]
    pub d: u64,
    /// Coefficients of `Y^0, Y^1, ...`.
    pub coeffs: Vec<i64>,
    /// Set when `ell | b`, where the section at `ell` is not pinned down.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub untested: bool,
}

impl PPoly {
    pub fn one(ell: u64, euler: &EulerContext) -> Self {
        PPoly { ell, ord: 0, b: euler.b, d: euler.d, coeffs: vec![1], untested: false }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, y: &AlgebraicValue) -> AlgebraicValue {
        let mut acc = AlgebraicValue::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * y) + &AlgebraicValue::from_int(*c);
        }
        acc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// File name under which a frozen copy is stored.
    pub fn golden_name(&self) -> String {
        format!("p_poly_l{}_o{}_b{}_D{}.json", self.ell, self.ord, self.b, self.d)
    }
}

/// `c_{ell^j}(b)` as an exact rational.
pub fn ramanujan_shell(beta: &Q, ell: u64, j: u32) -> Result<Q> {
    if j == 0 {
        return Ok(q(1));
    }
    let m = ell.pow(j);
    let b = rational_mod(beta, m).ok_or(Error::NegativeValuation)?;
    let mut group_ring = vec![(Q::zero(), Q::zero()); m as usize];
    for a in (1..m).filter(|a| a % ell != 0) {
        let e = (a as u128 * b as u128 % m as u128) as usize;
        group_ring[e].0 += q(1);
    }
    let v = AlgebraicValue::from_normal_form(m, 0, &group_ring);
    v.as_rational().ok_or_else(|| Error::Parse(format!("shell {j} at {ell} is not rational")))
}

/// Raw shell sums for shells `0..=last`.
pub fn shell_sums(beta: &Q, ell: u64, last: u32) -> Result<Vec<Q>> {
    (0..=last).map(|j| ramanujan_shell(beta, ell, j)).collect()
}

#[allow(non_snake_case)]
pub fn compute_P_poly(beta_val: &Q, ell: u64, n: usize, euler: &EulerContext) -> Result<PPoly> {
    if beta_val.is_zero() {
        return Err(Error::InvalidMatrix("P at beta = 0".into()));
    }
    if ell == euler.p {
        return Err(Error::InvalidMatrix(format!("P is not defined at ell = p = {ell}")));
    }
    let ord = valuation_q(beta_val, ell);
    if ord < 0 {
        return Err(Error::NegativeValuation);
    }
    let ord = ord as u32;
    let bad = ord > 0 || euler.b % ell == 0 || euler.d % ell == 0;
    if n > 1 {
        return if bad { Err(Error::UnsupportedP { ell }) } else { Ok(PPoly::one(ell, euler)) };
    }
    let level = crate::field_ctx::arith::valuation(&euler.b.into(), ell);
    let last = ord + 1 + level + 2;
    let raw = shell_sums(beta_val, ell, last)?;
    // the two shells past the expected range must vanish
    if raw[(last - 1) as usize..].iter().any(|c| !c.is_zero()) {
        return Err(Error::Parse(format!("shell sums at {ell} do not terminate")));
    }
    // divide by (1 - Y): partial sums, remainder is the full sum
    let mut coeffs = Vec::new();
    let mut acc = Q::zero();
    for c in &raw {
        acc += c;
        coeffs.push(acc.clone());
    }
    if !coeffs.last().unwrap().is_zero() {
        return Err(Error::Parse(format!("shell sum at {ell} not divisible by the local factor")));
    }
    while coeffs.len() > 1 && coeffs.last().unwrap().is_zero() {
        coeffs.pop();
    }
    let coeffs = coeffs
        .iter()
        .map(|c| c.is_integer().then(|| c.numer().to_i64()).flatten())
        .collect::<Option<Vec<i64>>>()
        .ok_or_else(|| Error::Parse(format!("non-integral P at {ell}")))?;
    Ok(PPoly { ell, ord, b: euler.b, d: euler.d, coeffs, untested: euler.b % ell == 0 })
}
