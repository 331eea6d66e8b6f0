//! q-expansions of the two series `G` and `E_F`, the operator `theta^d`,
//! and cusp transport.

pub mod beta;
pub mod cusp;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characters::{HeckeCharacterData, WeightFunction};
use crate::error::{Error, Result};
use crate::field_ctx::arith::{q, q_pow, Q};
use crate::field_ctx::{AlgebraicValue, CMContext, FieldElement};
use crate::local_factors::{check_k, compute_D, eval_alpha, EulerContext, FormalP, SymbolicConstant};
use crate::schwartz_p::{eval_phi_nu, lift_mu, nu_tuple, MuTuple, PartitionData};
pub use beta::{enumerate_beta, in_support, BetaIndex, HermitianMatrix};
pub use cusp::{check_duality, cusp_transform, CuspDatum, DualityReport};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub n: usize,
    pub k: i64,
    pub nu: i64,
    #[serde(rename = "D")]
    pub d: u64,
    pub p: u64,
    pub c: u32,
    pub b: u64,
    #[serde(rename = "B")]
    pub bound: u64,
    pub route: String,
    #[serde(rename = "charId")]
    pub char_id: String,
}

impl Header {
    fn new(n: usize, k: i64, nu: i64, euler: &EulerContext, bound: u64, ctx: &CMContext, route: &str, id: String) -> Self {
        Header { n, k, nu, d: ctx.d, p: ctx.p, c: ctx.c, b: euler.b, bound, route: route.into(), char_id: id }
    }

    /// The normalizer `D(n, K, b, p, k)`, reported alongside the series and
    /// never multiplied into it.
    pub fn normalizer(&self) -> Result<SymbolicConstant> {
        let ctx = CMContext::new(self.d, self.p, self.c, 2 * self.c)?;
        compute_D(self.n, &ctx, &EulerContext::new(self.b, &ctx)?, self.k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    pub beta: BetaIndex,
    pub value: AlgebraicValue,
    /// Local factors left unevaluated; the coefficient is `value` times
    /// their product.
    pub formal: Vec<FormalP>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion {
    pub header: Header,
    pub coeffs: Vec<Coefficient>,
}

fn rat(x: &Q, d: u64) -> FieldElement {
    FieldElement::new(x.clone(), Q::zero(), d)
}

fn check_blocks(mu: &MuTuple, part: &PartitionData) -> Result<()> {
    if mu.chars.len() != part.r() {
        return Err(Error::InvalidMatrix(format!("{} characters for {} blocks", mu.chars.len(), part.r())));
    }
    Ok(())
}

/// The holomorphic series: the coefficient at `b` is
/// `alpha(b) phi_nu(tb) det(b)^{k-n}` with `nu = chi1^{-1} chi2 mu`.
#[allow(non_snake_case, clippy::too_many_arguments)]
pub fn build_G(
    k: i64,
    nu: i64,
    chi: &HeckeCharacterData,
    mu: &MuTuple,
    euler: &EulerContext,
    bound: u64,
    ctx: &CMContext,
    part: &PartitionData,
) -> Result<QExpansion> {
    let n = part.n;
    check_k(k, n)?;
    check_blocks(mu, part)?;
    let nus = nu_tuple(chi, &lift_mu(mu, ctx)?)?;
    let chi12 = chi.fin.chi1_inv_chi2().inverse();
    let modulus = ctx.level_modulus();
    let arg = |ell: u64| Ok(chi12.eval(ell % modulus).scale(&q_pow(&q(ell as i64), -k)));
    let betas = enumerate_beta(n, bound, ctx, part)?;
    let coeffs = betas
        .into_par_iter()
        .map(|b| {
            let det = b.det();
            let alpha = eval_alpha(&det, n, euler, arg)?;
            let local = eval_phi_nu(&b.p_image(ctx, modulus)?.transpose(), &nus, part);
            let value = (&alpha.value * &local).scale(&q_pow(&det, k - n as i64));
            Ok(Coefficient { beta: b, value, formal: alpha.formal })
        })
        .collect::<Result<Vec<_>>>()?;
    let id = format!("{};{}", chi.id(), mu.id());
    Ok(QExpansion { header: Header::new(n, k, nu, euler, bound, ctx, "G", id), coeffs })
}

/// The p-adic series of a weight function: the coefficient at `b` is
/// `alpha_F(b) F(det b^{-1}) psi(det b^{-1}) det(b)^{-n} phi_mu(b)`.
#[allow(non_snake_case)]
pub fn build_E(
    f: &WeightFunction,
    mu: &MuTuple,
    euler: &EulerContext,
    bound: u64,
    ctx: &CMContext,
    part: &PartitionData,
) -> Result<QExpansion> {
    build_E_twisted(f, mu, 0, euler, bound, ctx, part)
}

/// `build_E` with `mu_r` replaced by `mu_r det^d`; on `b` the twist is the
/// exact factor `det(b)^d`.
#[allow(non_snake_case)]
pub fn build_E_twisted(
    f: &WeightFunction,
    mu: &MuTuple,
    d: u32,
    euler: &EulerContext,
    bound: u64,
    ctx: &CMContext,
    part: &PartitionData,
) -> Result<QExpansion> {
    let n = part.n;
    if f.c != ctx.c {
        return Err(Error::LevelMismatch { expected: ctx.c, found: f.c });
    }
    check_blocks(mu, part)?;
    let mu = lift_mu(mu, ctx)?;
    let arg = |ell: u64| f.eval_global(&rat(&q(ell as i64), ctx.d), ctx);
    let betas = enumerate_beta(n, bound, ctx, part)?;
    let coeffs = betas
        .into_par_iter()
        .map(|b| {
            let det = b.det();
            let alpha = eval_alpha(&det, n, euler, arg)?;
            let fd = f.eval_global(&rat(&det.recip(), ctx.d), ctx)?;
            let local = eval_phi_nu(&b.p_image(ctx, ctx.level_modulus())?, &mu.chars, part);
            let scale = q_pow(&det, d as i64 - n as i64);
            let value = (&(&alpha.value * &fd) * &local).scale(&scale);
            Ok(Coefficient { beta: b, value, formal: alpha.formal })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut id = format!("{};{}", f.id(), mu.id());
    if d > 0 {
        id.push_str(&format!(";det^{d}"));
    }
    Ok(QExpansion { header: Header::new(n, f.inf.k, f.inf.nu, euler, bound, ctx, "E", id), coeffs })
}

/// `theta^d`: multiply the coefficient at `b` by `det(b)^d`.
pub fn apply_theta(e: &QExpansion, d: u32) -> QExpansion {
    if d == 0 {
        return e.clone();
    }
    let (prior, base) = match e.header.route.strip_prefix("theta^").and_then(|r| r.split_once('.')) {
        Some((a, rest)) => (a.parse::<u32>().unwrap_or(0), rest.to_string()),
        None => (0, e.header.route.clone()),
    };
    let mut out = e.clone();
    out.header.route = format!("theta^{}.{}", prior + d, base);
    for c in &mut out.coeffs {
        c.value = c.value.scale(&q_pow(&c.beta.det(), d as i64));
    }
    out
}

/// A coefficient that differs between two series, or is present in one only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mismatch {
    pub beta: Vec<Vec<String>>,
    #[serde(rename = "lhs")]
    pub left: Option<serde_json::Value>,
    #[serde(rename = "rhs")]
    pub right: Option<serde_json::Value>,
}

fn formal_json(f: &FormalP) -> serde_json::Value {
    serde_json::json!({"ell": f.ell, "ord": f.ord, "arg": f.arg.canonical().to_json()})
}

impl Coefficient {
    fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "beta": self.beta.to_strings(),
            "value": self.value.canonical().to_json(),
        });
        if !self.formal.is_empty() {
            obj["formalP"] = self.formal.iter().map(formal_json).collect();
        }
        obj
    }

    fn from_json(v: &serde_json::Value, d: u64) -> Result<Self> {
        let bad = || Error::Parse(format!("coefficient {v}"));
        let rows: Vec<Vec<String>> = serde_json::from_value(v.get("beta").cloned().ok_or_else(bad)?)
            .map_err(|e| Error::Parse(e.to_string()))?;
        let beta = BetaIndex::new(HermitianMatrix::from_strings(&rows, d)?)?;
        let value = AlgebraicValue::from_json(v.get("value").ok_or_else(bad)?, d)?;
        let mut formal = Vec::new();
        if let Some(list) = v.get("formalP").and_then(|x| x.as_array()) {
            for f in list {
                let ell = f.get("ell").and_then(|x| x.as_u64()).ok_or_else(bad)?;
                let ord = f.get("ord").and_then(|x| x.as_u64()).ok_or_else(bad)? as u32;
                let arg = AlgebraicValue::from_json(f.get("arg").ok_or_else(bad)?, d)?;
                formal.push(FormalP { ell, ord, arg });
            }
        }
        Ok(Coefficient { beta, value, formal })
    }
}

impl QExpansion {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, beta: &BetaIndex) -> Option<&Coefficient> {
        self.coeffs.binary_search_by(|c| c.beta.cmp(beta)).ok().map(|i| &self.coeffs[i])
    }

    pub fn betas(&self) -> Vec<&BetaIndex> {
        self.coeffs.iter().map(|c| &c.beta).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "header": self.header,
            "coeffs": self.coeffs.iter().map(Coefficient::to_json).collect::<Vec<_>>(),
        })
    }

    /// Compact canonical serialization.
    pub fn to_canonical_string(&self) -> String {
        self.to_json().to_string()
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let header: Header = serde_json::from_value(v.get("header").cloned().ok_or_else(|| Error::Parse("no header".into()))?)
            .map_err(|e| Error::Parse(e.to_string()))?;
        let coeffs = v
            .get("coeffs")
            .and_then(|c| c.as_array())
            .ok_or_else(|| Error::Parse("no coeffs".into()))?
            .iter()
            .map(|c| Coefficient::from_json(c, header.d))
            .collect::<Result<Vec<_>>>()?;
        Ok(QExpansion { header, coeffs })
    }

    /// Scale every coefficient by `c`.
    pub fn scaled(&self, c: &AlgebraicValue) -> Self {
        let mut out = self.clone();
        for x in &mut out.coeffs {
            x.value = &x.value * c;
        }
        out
    }

    /// Coefficientwise comparison, ignoring headers; lists every `b` where
    /// the series differ.
    pub fn mismatches(&self, other: &QExpansion) -> Vec<Mismatch> {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.coeffs, &other.coeffs);
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.beta.cmp(&y.beta),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match ord {
                std::cmp::Ordering::Equal => {
                    if a[i].value != b[j].value || a[i].formal != b[j].formal {
                        out.push(Mismatch {
                            beta: a[i].beta.to_strings(),
                            left: Some(a[i].to_json()),
                            right: Some(b[j].to_json()),
                        });
                    }
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push(Mismatch { beta: a[i].beta.to_strings(), left: Some(a[i].to_json()), right: None });
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(Mismatch { beta: b[j].beta.to_strings(), left: None, right: Some(b[j].to_json()) });
                    j += 1;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{make_character, CharTable, FiniteCharacterPair, InfinityType};
    use crate::field_ctx::arith::q_frac;
    use crate::local_factors::compute_P_poly;

    fn setup(d: u64, p: u64) -> (CMContext, EulerContext) {
        let ctx = CMContext::new(d, p, 1, 4).unwrap();
        let e = EulerContext::new(1, &ctx).unwrap();
        (ctx, e)
    }

    /// A unit-compatible character with nontrivial finite part.
    fn nontrivial_chi(ctx: &CMContext, k: i64, nu: i64) -> HeckeCharacterData {
        let p = ctx.p;
        (0..p - 1)
            .flat_map(|a| (0..p - 1).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b)
            .find_map(|(a, b)| {
                make_character(InfinityType::new(k, nu), FiniteCharacterPair::from_exponents(p, 1, a, b), ctx).ok()
            })
            .unwrap()
    }

    #[test]
    fn g_at_one_is_one() {
        let (ctx, e) = setup(1, 5);
        let chi = make_character(InfinityType::new(4, 0), FiniteCharacterPair::trivial(5, 1), &ctx).unwrap();
        let g = build_G(4, 0, &chi, &MuTuple::trivial(5, 1, 1), &e, 6, &ctx, &PartitionData::ones(1)).unwrap();
        assert_eq!(g.coeffs[0].value, AlgebraicValue::one());
        assert!(g.get(&BetaIndex::scalar(5, 1).unwrap()).is_none());
        assert_eq!(g.len(), 5);
        assert_eq!(g.header.route, "G");
    }

    #[test]
    fn e_of_constant_function() {
        let (ctx, e) = setup(1, 5);
        let f = WeightFunction::from_fn(5, 1, InfinityType::new(0, 0), |_, _| AlgebraicValue::one());
        let s = build_E(&f, &MuTuple::trivial(5, 1, 1), &e, 8, &ctx, &PartitionData::ones(1)).unwrap();
        for c in &s.coeffs {
            let det = c.beta.det();
            let mut expected = AlgebraicValue::rational(det.recip());
            for ell in crate::local_factors::bad_primes(&det, &e) {
                expected = &expected * &compute_P_poly(&det, ell, 1, &e).unwrap().eval(&AlgebraicValue::one());
            }
            assert_eq!(c.value, expected);
        }
        assert_eq!(s.get(&BetaIndex::scalar(2, 1).unwrap()).unwrap().value, AlgebraicValue::rational(q_frac(3, 2)));
    }

    #[test]
    fn avatar_routes_agree_rank_one() {
        let (ctx, e) = setup(1, 5);
        let chi = nontrivial_chi(&ctx, 4, 2);
        let part = PartitionData::ones(1);
        let mu = MuTuple::new(vec![CharTable::from_exponent(5, 1, 1)]).unwrap();
        let g = build_G(4, 2, &chi, &mu, &e, 12, &ctx, &part).unwrap();
        let f = WeightFunction::avatar(&chi);
        let s = build_E(&f, &mu, &e, 12, &ctx, &part).unwrap();
        assert!(g.mismatches(&s).is_empty());
        assert_eq!(g.len(), s.len());
    }

    #[test]
    fn avatar_routes_agree_rank_two() {
        let (ctx, e) = setup(2, 3);
        let chi = nontrivial_chi(&ctx, 5, 0);
        let part = PartitionData::ones(2);
        let mu = MuTuple::new(vec![CharTable::from_exponent(3, 1, 1), CharTable::trivial(3, 1)]).unwrap();
        let g = build_G(5, 0, &chi, &mu, &e, 5, &ctx, &part).unwrap();
        let s = build_E(&WeightFunction::avatar(&chi), &mu, &e, 5, &ctx, &part).unwrap();
        assert!(g.mismatches(&s).is_empty());
        assert!(g.coeffs.iter().any(|c| !c.formal.is_empty()));
    }

    #[test]
    fn theta_examples() {
        let (ctx, e) = setup(1, 5);
        let chi = make_character(InfinityType::new(4, 0), FiniteCharacterPair::trivial(5, 1), &ctx).unwrap();
        let g = build_G(4, 0, &chi, &MuTuple::trivial(5, 1, 1), &e, 4, &ctx, &PartitionData::ones(1)).unwrap();
        assert_eq!(apply_theta(&g, 0), g);
        let t = apply_theta(&g, 3);
        let two = BetaIndex::scalar(2, 1).unwrap();
        assert_eq!(t.get(&two).unwrap().value, g.get(&two).unwrap().value.scale(&q(8)));
        assert_eq!(t.header.route, "theta^3.G");
        assert_eq!(apply_theta(&apply_theta(&g, 1), 2), t);
        let (ctx2, e2) = setup(2, 3);
        let chi2 = make_character(InfinityType::new(4, 0), FiniteCharacterPair::trivial(3, 1), &ctx2).unwrap();
        let g2 = build_G(4, 0, &chi2, &MuTuple::trivial(3, 1, 2), &e2, 3, &ctx2, &PartitionData::ones(2)).unwrap();
        let b = BetaIndex::diagonal(&[1, 2], 2).unwrap();
        assert_eq!(apply_theta(&g2, 1).get(&b).unwrap().value, g2.get(&b).unwrap().value.scale(&q(2)));
    }

    #[test]
    fn json_round_trip_and_determinism() {
        let (ctx, e) = setup(1, 5);
        let chi = nontrivial_chi(&ctx, 4, 2);
        let mu = MuTuple::trivial(5, 1, 1);
        let g = build_G(4, 2, &chi, &mu, &e, 10, &ctx, &PartitionData::ones(1)).unwrap();
        let text = g.to_canonical_string();
        let back = QExpansion::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_canonical_string(), text);
        let again = build_G(4, 2, &chi, &mu, &e, 10, &ctx, &PartitionData::ones(1)).unwrap();
        assert_eq!(again.to_canonical_string(), text);
    }
}
