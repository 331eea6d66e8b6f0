//! Normalizing constants, the archimedean coefficient, the local
//! polynomials away from `p`, the interpolation factor `alpha` and the
//! constant `Psi_{n,d,k}` of the differential operator.

pub mod ppoly;
pub mod symbolic;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field_ctx::arith::{factor, kronecker, q, q_pow, Q};
use crate::field_ctx::{AlgebraicValue, CMContext};
use crate::qexp::BetaIndex;
pub use ppoly::{compute_P_poly, PPoly};
pub use symbolic::{gamma_int, LFactor, SymbolicConstant};

/// Data of the section away from `p`: the auxiliary ideal `b O_E`, here a
/// positive integer prime to `p`, and the character `tau` of `K/Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerContext {
    pub b: u64,
    pub d: u64,
    pub disc: i64,
    pub p: u64,
}

impl EulerContext {
    pub fn new(b: u64, ctx: &CMContext) -> Result<Self> {
        if b == 0 || b % ctx.p == 0 {
            return Err(Error::Config(format!("b = {b} must be a positive integer prime to p")));
        }
        Ok(EulerContext { b, d: ctx.d, disc: ctx.disc(), p: ctx.p })
    }

    pub fn tau(&self, ell: u64) -> i32 {
        kronecker(self.disc, ell)
    }
}

pub(crate) fn check_k(k: i64, n: usize) -> Result<()> {
    let bound = 2 * n as i64 - 1;
    if k <= bound {
        return Err(Error::KOutOfRange { k, bound });
    }
    Ok(())
}

/// `C(n, K) = 2^{n(n-1)/2} |D_K|^{-n(n-1)/4}` for `E = Q`.
#[allow(non_snake_case)]
pub fn compute_C(n: usize, ctx: &CMContext) -> SymbolicConstant {
    let nn = (n * (n - 1)) as u32;
    let dk = ctx.disc().unsigned_abs();
    let two = SymbolicConstant::rational(q_pow(&q(2), (nn / 2) as i64));
    // |D_K|^{-nn/4} = |D_K|^{-a} * (|D_K|^{-1/2})^b with nn = 4a + 2b
    let a = (nn / 4) as i32;
    let mut out = &two * &SymbolicConstant::rational(q_pow(&q(dk as i64), -(a as i64)));
    if (nn / 2) % 2 == 1 {
        out = &out * &SymbolicConstant::sqrt(dk).inverse();
    }
    out
}

/// The constant part of the archimedean coefficient, without the
/// exponential marker.
pub fn archimedean_constant(k: i64, n: usize) -> SymbolicConstant {
    let n64 = n as i64;
    let two = SymbolicConstant::rational(q_pow(&q(2), (1 - n64) * n64 + n64 * k));
    let gamma: Q = (0..n64).map(|t| gamma_int(k - t)).product();
    let parts = [
        SymbolicConstant::i_power(-n64 * k),
        SymbolicConstant::pi_power(n64 * k - n64 * (n64 - 1) / 2),
        SymbolicConstant::gamma(gamma.recip()),
    ];
    parts.iter().fold(two, |acc, x| &acc * x)
}

/// The archimedean Fourier coefficient at `b`: a symbolic constant with
/// `e^{-2 pi tr b}` marker, and the exact part `det(b)^{k-n}`.
pub fn archimedean_coeff(beta: &BetaIndex, k: i64, n: usize) -> Result<(SymbolicConstant, AlgebraicValue)> {
    check_k(k, n)?;
    let det = beta.det();
    if det.is_zero() {
        return Ok((SymbolicConstant::zero(), AlgebraicValue::zero()));
    }
    let sym = &archimedean_constant(k, n) * &SymbolicConstant::exp_marker(beta.trace());
    Ok((sym, AlgebraicValue::rational(q_pow(&det, k - n as i64))))
}

/// `D(n, K, b, p, k) = C N(b)^{-n^2} (arch) prod_{i<n} L^p(k - i, chi_E^{-1} tau^i)^{-1}`.
#[allow(non_snake_case)]
pub fn compute_D(n: usize, ctx: &CMContext, euler: &EulerContext, k: i64) -> Result<SymbolicConstant> {
    check_k(k, n)?;
    let nb = SymbolicConstant::rational(q_pow(&q(euler.b as i64), -((n * n) as i64)));
    let mut out = &(&compute_C(n, ctx) * &nb) * &archimedean_constant(k, n);
    for i in 0..n {
        out = &out * &SymbolicConstant::l_factor(k - i as i64, i as u32, -1);
    }
    Ok(out)
}

/// The closed form at `n = 1`: `N(b) (-2 pi i)^k Gamma(k)^{-1} L^p(k, chi_E^{-1})^{-1}`,
/// built from its own factors rather than from `compute_D`.
pub fn normalizer_rank_one_closed_form(euler: &EulerContext, k: i64) -> SymbolicConstant {
    let minus_two_pi_i = &(&SymbolicConstant::rational(q(-2)) * &SymbolicConstant::pi_power(1))
        * &SymbolicConstant::i_power(1);
    let parts = [
        SymbolicConstant::rational(q(euler.b as i64)),
        minus_two_pi_i.pow(k as u32),
        SymbolicConstant::gamma(gamma_int(k).recip()),
        SymbolicConstant::l_factor(k, 0, -1),
    ];
    parts.iter().fold(SymbolicConstant::one(), |acc, x| &acc * x)
}

/// A local polynomial factor that is not available in closed form (`n > 1`
/// at a bad prime), carried with its argument so that both routes can be
/// compared factor by factor.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalP {
    pub ell: u64,
    pub ord: u32,
    pub arg: AlgebraicValue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Alpha {
    pub value: AlgebraicValue,
    pub formal: Vec<FormalP>,
}

impl Alpha {
    pub fn exact(&self) -> Result<&AlgebraicValue> {
        match self.formal.first() {
            Some(f) => Err(Error::UnsupportedP { ell: f.ell }),
            None => Ok(&self.value),
        }
    }
}

/// Primes `ell != p` dividing `N(det b) b D`.
pub fn bad_primes(det: &Q, euler: &EulerContext) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let num = det.numer().abs().to_u64().unwrap_or(0);
    for x in [num, euler.b, euler.d] {
        for (ell, _) in factor(x) {
            if ell != euler.p && !out.contains(&ell) {
                out.push(ell);
            }
        }
    }
    out.sort_unstable();
    out
}

/// `alpha(b) = prod_{ell bad} P_{b, ell}(arg(ell))`; `arg` supplies the
/// value of the formal variable at `ell`.
pub fn eval_alpha<A>(det: &Q, n: usize, euler: &EulerContext, arg: A) -> Result<Alpha>
where
    A: Fn(u64) -> Result<AlgebraicValue>,
{
    if det.is_zero() {
        return Err(Error::InvalidMatrix("alpha at a singular index".into()));
    }
    let mut value = AlgebraicValue::one();
    let mut formal = Vec::new();
    for ell in bad_primes(det, euler) {
        match compute_P_poly(det, ell, n, euler) {
            Ok(poly) => value = &value * &poly.eval(&arg(ell)?),
            Err(Error::UnsupportedP { .. }) if n > 1 => {
                let ord = crate::field_ctx::arith::valuation_q(det, ell) as u32;
                formal.push(FormalP { ell, ord, arg: arg(ell)? });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Alpha { value, formal })
}

/// `Psi_{n,d,k} = prod_{i=1..n} prod_{j=1..d} (i - j - k)`.
#[allow(non_snake_case)]
pub fn compute_Psi(n: usize, d: u32, k: i64) -> BigInt {
    let mut acc = BigInt::from(1);
    for i in 1..=n as i64 {
        for j in 1..=d as i64 {
            acc *= i - j - k;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_ctx::arith::q_frac;
    use crate::field_ctx::FieldElement;

    fn ctx(d: u64, p: u64) -> CMContext {
        CMContext::new(d, p, 1, 2).unwrap()
    }

    #[test]
    fn c_examples() {
        assert_eq!(compute_C(1, &ctx(1, 5)), SymbolicConstant::one());
        assert_eq!(compute_C(2, &ctx(1, 5)), SymbolicConstant::one());
        let c = compute_C(2, &ctx(3, 7));
        assert_eq!(c, &SymbolicConstant::rational(q_frac(2, 3)) * &SymbolicConstant::sqrt(3));
        assert_eq!(c.sqrt_radicand, 3);
    }

    #[test]
    fn archimedean_examples() {
        let one = BetaIndex::scalar(1, 1).unwrap();
        let (s, v) = archimedean_coeff(&one, 2, 1).unwrap();
        let expected = &(&SymbolicConstant::rational(q(-4)) * &SymbolicConstant::pi_power(2))
            * &SymbolicConstant::exp_marker(q(1));
        assert_eq!(s, expected);
        assert_eq!(v, AlgebraicValue::one());
        let b = BetaIndex::diagonal(&[1, 2], 1).unwrap();
        assert_eq!(archimedean_coeff(&b, 5, 2).unwrap().1, AlgebraicValue::from_int(8));
        assert_eq!(archimedean_coeff(&b, 3, 2), Err(Error::KOutOfRange { k: 3, bound: 3 }));
    }

    #[test]
    fn singular_index_gives_zero() {
        let b = BetaIndex::new_unchecked(vec![
            vec![FieldElement::from_int(1), FieldElement::from_int(1)],
            vec![FieldElement::from_int(1), FieldElement::from_int(1)],
        ]);
        let (s, v) = archimedean_coeff(&b, 5, 2).unwrap();
        assert!(s.is_zero() && v.is_zero());
    }

    #[test]
    fn d_examples() {
        let c = ctx(1, 5);
        let e = EulerContext::new(1, &c).unwrap();
        let d5 = compute_D(1, &c, &e, 5).unwrap();
        assert_eq!(d5.gamma_prod, q_frac(1, 24));
        for k in 3..=10 {
            assert_eq!(compute_D(1, &c, &e, k).unwrap(), normalizer_rank_one_closed_form(&e, k));
        }
    }

    #[test]
    fn psi_examples() {
        assert_eq!(compute_Psi(1, 0, 5), BigInt::from(1));
        assert_eq!(compute_Psi(1, 1, 5), BigInt::from(-5));
        assert_eq!(compute_Psi(2, 1, 4), BigInt::from(12));
    }

    #[test]
    fn alpha_examples() {
        let c = ctx(1, 5);
        let e = EulerContext::new(1, &c).unwrap();
        let triv = |_: u64| Ok(AlgebraicValue::one());
        assert_eq!(eval_alpha(&q(1), 1, &e, triv).unwrap().value, AlgebraicValue::one());
        assert_eq!(eval_alpha(&q(5), 1, &e, triv).unwrap().value, AlgebraicValue::one());
        let a2 = eval_alpha(&q(2), 1, &e, triv).unwrap().value;
        assert_eq!(a2, AlgebraicValue::from_int(3));
        let a3 = eval_alpha(&q(3), 1, &e, triv).unwrap().value;
        let a6 = eval_alpha(&q(6), 1, &e, triv).unwrap().value;
        assert_eq!(a6, &a2 * &a3);
        let formal = eval_alpha(&q(2), 2, &e, triv).unwrap();
        assert_eq!(formal.formal.len(), 1);
        assert_eq!(formal.exact(), Err(Error::UnsupportedP { ell: 2 }));
    }
}
