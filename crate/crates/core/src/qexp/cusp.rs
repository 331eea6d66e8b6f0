//! Transport of coefficients between cusps `m(h, lambda)` with diagonal
//! rational `h` and positive rational `lambda`, at `s = k/2`.
//!
//! Finite-adelic norms of rationals use `|a| = 1/|a|_inf`, and on `K`
//! `|a|_K = 1/a^2`. For rational `a` the finite part of `chi` is
//! `sign(a)^k`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{BetaIndex, Mismatch, QExpansion};
use crate::characters::HeckeCharacterData;
use crate::error::{Error, Result};
use crate::field_ctx::arith::{q_pow, valuation_q, Q};
use crate::field_ctx::{AlgebraicValue, CMContext};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspDatum {
    /// Diagonal of `h`.
    pub h: Vec<Q>,
    pub lambda: Q,
}

impl CuspDatum {
    pub fn new(h: Vec<Q>, lambda: Q, ctx: &CMContext) -> Result<Self> {
        if h.iter().any(|x| x.is_zero()) {
            return Err(Error::InvalidMatrix("h is not invertible".into()));
        }
        if !lambda.is_positive() {
            return Err(Error::InvalidMatrix("lambda must be positive".into()));
        }
        if h.iter().chain(std::iter::once(&lambda)).any(|x| valuation_q(x, ctx.p) != 0) {
            return Err(Error::NotPrimeToP);
        }
        Ok(CuspDatum { h, lambda })
    }

    pub fn standard(n: usize) -> Self {
        CuspDatum { h: vec![Q::one(); n], lambda: Q::one() }
    }

    fn det_h(&self) -> Q {
        self.h.iter().product()
    }
}

/// `(lambda^{-1} th^{-1} b h^{-1}, factor * cval)` with
/// `factor = |lambda|^{-n^2} chi(det h^{-1}) |det h^{-2}|^{n - k/2}`.
pub fn cusp_transform(
    cval: &AlgebraicValue,
    beta: &BetaIndex,
    cusp: &CuspDatum,
    chi: &HeckeCharacterData,
    k: i64,
) -> Result<(BetaIndex, AlgebraicValue)> {
    let n = beta.n();
    if cusp.h.len() != n {
        return Err(Error::InvalidMatrix(format!("h has size {}, index has size {n}", cusp.h.len())));
    }
    let left: Vec<Q> = cusp.h.iter().map(|x| (x * &cusp.lambda).recip()).collect();
    let right: Vec<Q> = cusp.h.iter().map(|x| x.recip()).collect();
    let index = BetaIndex::new(beta.scale_diag(&left, &right))?;
    let det_h = cusp.det_h();
    let nn = (n * n) as i64;
    // |lambda|^{-n^2} = lambda^{n^2}, |det h^{-2}|^{n-k/2} = |det h|^{2n-k}
    let mut factor = &q_pow(&cusp.lambda, nn) * &q_pow(&det_h.abs(), 2 * n as i64 - k);
    if det_h.is_negative() && chi.inf.k % 2 != 0 {
        factor = -factor;
    }
    Ok((index, cval.scale(&factor)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    pub pass: bool,
    /// Indices where the dual cusp disagrees with the scaled series.
    pub mismatches: Vec<Mismatch>,
    /// Transport by `lambda` then `lambda^{-1}` is the identity.
    pub involution: bool,
}

/// Transport through `m(1, lambda)` and through its dual `m(lambda, lambda^{-1})`
/// and compare up to `chi(lambda^{-n}) |lambda^{-n}|_K^{-k/2}`.
pub fn check_duality(e: &QExpansion, lambda: &Q, chi: &HeckeCharacterData, k: i64) -> Result<DualityReport> {
    let n = e.header.n;
    let there = CuspDatum { h: vec![Q::one(); n], lambda: lambda.clone() };
    let dual = CuspDatum { h: vec![lambda.clone(); n], lambda: lambda.recip() };
    let back = CuspDatum { h: vec![Q::one(); n], lambda: lambda.recip() };
    // |lambda^{-n}|_K = lambda^{2n}; chi(lambda^{-n}) = 1 for lambda > 0
    let scale = q_pow(lambda, -(n as i64) * k);
    let mut mismatches = Vec::new();
    let mut involution = true;
    for c in &e.coeffs {
        let (b1, a1) = cusp_transform(&c.value, &c.beta, &there, chi, k)?;
        let (b2, a2) = cusp_transform(&c.value, &c.beta, &dual, chi, k)?;
        let expected = a1.scale(&scale);
        if b1 != b2 || a2 != expected {
            mismatches.push(Mismatch {
                beta: c.beta.to_strings(),
                left: Some(serde_json::json!({"beta": b1.to_strings(), "value": expected.canonical().to_json()})),
                right: Some(serde_json::json!({"beta": b2.to_strings(), "value": a2.canonical().to_json()})),
            });
        }
        let (b3, a3) = cusp_transform(&a1, &b1, &back, chi, k)?;
        involution &= b3 == c.beta && a3 == c.value;
    }
    Ok(DualityReport { pass: mismatches.is_empty() && involution, mismatches, involution })
}
