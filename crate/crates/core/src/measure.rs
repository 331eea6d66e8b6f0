//! The Eisenstein measure through its moments: integration of test pairs
//! `(F, mu, d)` to q-expansions, and the interpolation, congruence and
//! rank-one bridge checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::characters::{
    check_weight_relation, make_character, CharTable, FiniteCharacterPair, HeckeCharacterData, InfinityType,
    WeightFunction,
};
use crate::error::{Error, Result};
use crate::field_ctx::arith::q;
use crate::field_ctx::{AlgebraicValue, CMContext};
use crate::local_factors::EulerContext;
use crate::qexp::{apply_theta, build_E_twisted, build_G, Mismatch, QExpansion};
use crate::schwartz_p::{two_variable_function, MuTuple, PartitionData, TwoVariableSchwartz};

/// An integrand `(F, mu det^d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestPair {
    pub f: WeightFunction,
    pub mu: MuTuple,
    pub d: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub check: String,
    pub params: serde_json::Value,
    pub pass: bool,
    pub failures: Vec<Mismatch>,
}

impl Report {
    fn new(check: &str, params: serde_json::Value, failures: Vec<Mismatch>) -> Self {
        Report { check: check.into(), params, pass: failures.is_empty(), failures }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }
}

fn ctx_params(ctx: &CMContext, euler: &EulerContext, bound: u64, part: &PartitionData) -> serde_json::Value {
    serde_json::json!({
        "D": ctx.d, "p": ctx.p, "c": ctx.c, "M": ctx.precision,
        "b": euler.b, "B": bound, "parts": part.parts,
    })
}

/// The moment of `tp`: the series `E_{F, mu det^d}`.
pub fn integrate(
    tp: &TestPair,
    euler: &EulerContext,
    bound: u64,
    ctx: &CMContext,
    part: &PartitionData,
) -> Result<QExpansion> {
    if !check_weight_relation(&tp.f, ctx)?.pass {
        return Err(Error::CorruptedWeightFunction);
    }
    build_E_twisted(&tp.f, &tp.mu, tp.d, euler, bound, ctx, part)
}

/// Compare the moment of `tp` with `theta^d G_{k, nu, chi, mu}`.
pub fn interpolation_report(
    tp: &TestPair,
    chi: &HeckeCharacterData,
    mu: &MuTuple,
    euler: &EulerContext,
    bound: u64,
    ctx: &CMContext,
    part: &PartitionData,
) -> Result<Report> {
    let g = build_G(chi.inf.k, chi.inf.nu, chi, mu, euler, bound, ctx, part)?;
    let lhs = integrate(tp, euler, bound, ctx, part)?;
    let rhs = apply_theta(&g, tp.d);
    let mut params = ctx_params(ctx, euler, bound, part);
    params["k"] = chi.inf.k.into();
    params["nu"] = chi.inf.nu.into();
    params["d"] = tp.d.into();
    params["charId"] = chi.id().into();
    params["mu"] = mu.id().into();
    Ok(Report::new("interpolation", params, lhs.mismatches(&rhs)))
}

pub fn verify_interpolation(
    chi: &HeckeCharacterData,
    mu: &MuTuple,
    d: u32,
    euler: &EulerContext,
    bound: u64,
    ctx: &CMContext,
    part: &PartitionData,
) -> Result<Report> {
    let tp = TestPair { f: WeightFunction::avatar(chi), mu: mu.clone(), d };
    interpolation_report(&tp, chi, mu, euler, bound, ctx, part)
}

fn congruent(a: &AlgebraicValue, b: &AlgebraicValue, m: u32, ctx: &CMContext) -> Result<bool> {
    Ok(ctx.reduce_mod_p(&(a - b), m)? == 0)
}

fn check_inputs_congruent(tp1: &TestPair, tp2: &TestPair, m: u32, ctx: &CMContext) -> Result<()> {
    let fail = Err(Error::NotCongruent { m });
    if tp1.d != tp2.d || tp1.f.inf != tp2.f.inf || tp1.mu.chars.len() != tp2.mu.chars.len() {
        return fail;
    }
    for (x1, x2) in tp1.f.points() {
        if !congruent(tp1.f.get(x1, x2), tp2.f.get(x1, x2), m, ctx)? {
            return fail;
        }
    }
    let units = ctx.unit_group();
    for (a, b) in tp1.mu.chars.iter().zip(&tp2.mu.chars) {
        for x in units.elements() {
            if !congruent(a.eval(x), b.eval(x), m, ctx)? {
                return fail;
            }
        }
    }
    Ok(())
}

/// Kummer-type check: pointwise congruent integrands mod `p^m` have
/// coefficientwise congruent moments, compared through `Z/p^M`.
pub fn verify_congruence(
    tp1: &TestPair,
    tp2: &TestPair,
    m: u32,
    euler: &EulerContext,
    bound: u64,
    ctx: &CMContext,
    part: &PartitionData,
) -> Result<Report> {
    if m > ctx.precision {
        return Err(Error::Config(format!("m = {m} exceeds the precision M = {}", ctx.precision)));
    }
    check_inputs_congruent(tp1, tp2, m, ctx)?;
    let e1 = integrate(tp1, euler, bound, ctx, part)?;
    let e2 = integrate(tp2, euler, bound, ctx, part)?;
    let pm = ctx.p.pow(m);
    let big = ctx.precision;
    let mut failures = Vec::new();
    for (c1, c2) in e1.coeffs.iter().zip(&e2.coeffs) {
        let r1 = ctx.reduce_mod_p(&c1.value, big)?;
        let r2 = ctx.reduce_mod_p(&c2.value, big)?;
        let mut ok = c1.beta == c2.beta && r1 % pm == r2 % pm && c1.formal.len() == c2.formal.len();
        for (f1, f2) in c1.formal.iter().zip(&c2.formal) {
            ok &= f1.ell == f2.ell && congruent(&f1.arg, &f2.arg, m, ctx)?;
        }
        if !ok {
            failures.push(Mismatch {
                beta: c1.beta.to_strings(),
                left: Some(r1.into()),
                right: Some(r2.into()),
            });
        }
    }
    if e1.len() != e2.len() {
        return Err(Error::Parse("moment series have different index sets".into()));
    }
    let mut params = ctx_params(ctx, euler, bound, part);
    params["m"] = m.into();
    params["d"] = tp1.d.into();
    params["F1"] = tp1.f.id().into();
    params["F2"] = tp2.f.id().into();
    params["mu1"] = tp1.mu.id().into();
    params["mu2"] = tp2.mu.id().into();
    Ok(Report::new("congruence", params, failures))
}

/// Unit-compatible characters of the given infinity type whose finite
/// parts have order prime to `p`.
pub fn tame_characters(inf: InfinityType, ctx: &CMContext) -> Vec<HeckeCharacterData> {
    let step = ctx.p.pow(ctx.c - 1);
    let order = (ctx.p - 1) * step;
    let mut out = Vec::new();
    for a in (0..order).step_by(step as usize) {
        for b in (0..order).step_by(step as usize) {
            let fin = FiniteCharacterPair::from_exponents(ctx.p, ctx.c, a, b);
            if let Ok(chi) = make_character(inf, fin, ctx) {
                out.push(chi);
            }
        }
    }
    out
}

/// Smallest point in the orbit of `(x1, x2)` under the global units.
fn orbit_rep(x1: u64, x2: u64, unit_images: &[(u64, u64)], modulus: u64) -> (u64, u64) {
    unit_images
        .iter()
        .map(|&(e1, e2)| (x1 * e1 % modulus, x2 * e2 % modulus))
        .min()
        .expect("identity is a unit")
}

fn unit_images(ctx: &CMContext) -> Result<Vec<(u64, u64)>> {
    let modulus = ctx.level_modulus();
    let g = ctx.embed_p_mod(&ctx.unit_generator(), modulus)?;
    let mut out = vec![(1, 1)];
    let mut cur = g;
    while cur != (1, 1) {
        out.push(cur);
        cur = (cur.0 * g.0 % modulus, cur.1 * g.1 % modulus);
    }
    Ok(out)
}

/// A random pair `(F, mu, d)`, `(F eps, mu, d)` with `F` an integral
/// combination of tame avatars and `eps = 1 + p^m t` constant on unit
/// orbits.
pub fn random_congruent_pair(seed: u64, m: u32, inf: InfinityType, ctx: &CMContext, r: usize) -> Result<(TestPair, TestPair)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chars = tame_characters(inf, ctx);
    if chars.is_empty() {
        return Err(Error::UnitIncompatible { unit: ctx.unit_generator().to_string() });
    }
    let (p, c) = (ctx.p, ctx.c);
    let mut f = WeightFunction::zero(p, c, inf);
    for _ in 0..3 {
        let chi = &chars[rng.gen_range(0..chars.len())];
        let coeff = AlgebraicValue::from_int(rng.gen_range(-3..=3));
        f = WeightFunction::linear_combination(&[(AlgebraicValue::one(), &f), (coeff, &WeightFunction::avatar(chi))]);
    }
    let images = unit_images(ctx)?;
    let modulus = ctx.level_modulus();
    let pm = q(p.pow(m) as i64);
    let mut t = std::collections::BTreeMap::new();
    let f2 = f.map(|x1, x2, v| {
        let rep = orbit_rep(x1, x2, &images, modulus);
        let s: i64 = *t.entry(rep).or_insert_with(|| rng.gen_range(-5..=5));
        v * &AlgebraicValue::rational(q(1) + &pm * q(s))
    });
    let step = p.pow(c - 1);
    let mu = MuTuple::new(
        (0..r).map(|_| CharTable::from_exponent(p, c, step * rng.gen_range(0..p - 1))).collect(),
    )?;
    let d = rng.gen_range(0..=2);
    Ok((TestPair { f, mu: mu.clone(), d }, TestPair { f: f2, mu, d }))
}

fn point_failure(x: u64, y: u64, lhs: &AlgebraicValue, rhs: &AlgebraicValue) -> Mismatch {
    Mismatch {
        beta: vec![vec![x.to_string(), y.to_string()]],
        left: Some(lhs.canonical().to_json()),
        right: Some(rhs.canonical().to_json()),
    }
}

/// The two rank-one identities relating the two-variable function of the
/// Schwartz pair to the functions `F(x, y)` of the classical measure:
/// `F(e^{-1}x, ey) = chi1 chi2^{-1}(e^{-1}) F(x, y) = e^k F(x, y)` for a unit
/// `e = +-1`, and `F(1, ab) = chi1 chi2^{-1}(b^{-1}) F(b, a)` for units `b`.
pub fn katz_bridge_check(pair: &TwoVariableSchwartz, e: i64, k: i64) -> Result<Report> {
    if pair.part.n != 1 {
        return Err(Error::InvalidMatrix("the bridge identities are stated for n = 1".into()));
    }
    if e != 1 && e != -1 {
        return Err(Error::InvalidMatrix(format!("{e} is not a unit of Z")));
    }
    let (first, second) = two_variable_function(pair);
    let p = first.p;
    let modulus = first.modulus();
    let f = |x: u64, y: u64| {
        let x = crate::schwartz_p::ResMat { n: 1, q: modulus, e: vec![x % modulus] };
        let y = crate::schwartz_p::ResMat { n: 1, q: modulus, e: vec![y % modulus] };
        first.get(&x) * second.get(&y)
    };
    let chi12 = pair.chi1_inv_chi2.inverse();
    let em = if e == 1 { 1 } else { modulus - 1 };
    let sign = AlgebraicValue::from_int(if e == -1 && k % 2 != 0 { -1 } else { 1 });
    let mut failures = Vec::new();
    for x in 0..modulus {
        for y in 0..modulus {
            let lhs = f(x * em, y * em);
            let base = f(x, y);
            let via_char = chi12.eval(em) * &base;
            let via_norm = &sign * &base;
            if lhs != via_char || lhs != via_norm {
                failures.push(point_failure(x, y, &lhs, &via_char));
            }
        }
    }
    for b in (1..modulus).filter(|b| b % p != 0) {
        let binv = crate::field_ctx::arith::mod_inv(b, modulus).expect("unit");
        for a in 0..modulus {
            let lhs = f(1, a * b);
            let rhs = chi12.eval(binv) * &f(b, a);
            if lhs != rhs {
                failures.push(point_failure(b, a, &lhs, &rhs));
            }
        }
    }
    let params = serde_json::json!({"p": p, "c": first.c, "e": e, "k": k, "nu": pair.nu.iter().map(|t| t.id()).collect::<Vec<_>>()});
    Ok(Report::new("bridge", params, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schwartz_p::build_schwartz_pair;

    fn setup() -> (CMContext, EulerContext, PartitionData) {
        let ctx = CMContext::new(1, 5, 1, 4).unwrap();
        let e = EulerContext::new(1, &ctx).unwrap();
        (ctx, e, PartitionData::ones(1))
    }

    #[test]
    fn interpolation_grid() {
        let (ctx, e, part) = setup();
        for k in [4, 6] {
            for nu in [0, 1] {
                let chis = tame_characters(InfinityType::new(k, nu), &ctx);
                assert!(!chis.is_empty());
                let mu = MuTuple::new(vec![CharTable::from_exponent(5, 1, 1)]).unwrap();
                for d in 0..=2 {
                    let r = verify_interpolation(&chis[0], &mu, d, &e, 6, &ctx, &part).unwrap();
                    assert!(r.pass, "k={k} nu={nu} d={d}");
                }
            }
        }
    }

    #[test]
    fn corrupted_mu_is_pinpointed() {
        let (ctx, e, part) = setup();
        let chi = &tame_characters(InfinityType::new(4, 0), &ctx)[0];
        let mu = MuTuple::trivial(5, 1, 1);
        let bad = MuTuple { c: 1, chars: vec![mu.chars[0].with_value(2, AlgebraicValue::from_int(7))] };
        let tp = TestPair { f: WeightFunction::avatar(chi), mu: bad, d: 0 };
        let r = interpolation_report(&tp, chi, &mu, &e, 8, &ctx, &part).unwrap();
        assert!(!r.pass);
        let hit: Vec<String> = r.failures.iter().map(|f| f.beta[0][0].clone()).collect();
        assert_eq!(hit, vec!["2", "7"]);
    }

    #[test]
    fn congruences() {
        let (ctx, e, part) = setup();
        let inf = InfinityType::new(4, 0);
        for seed in 0..5 {
            let (a, b) = random_congruent_pair(seed, 2, inf, &ctx, 1).unwrap();
            assert!(verify_congruence(&a, &b, 2, &e, 6, &ctx, &part).unwrap().pass);
            assert!(verify_congruence(&a, &a, 4, &e, 6, &ctx, &part).unwrap().pass);
            assert_eq!(verify_congruence(&a, &b, 3, &e, 6, &ctx, &part), Err(Error::NotCongruent { m: 3 }));
        }
    }

    #[test]
    fn bridge_identities() {
        let (ctx, _, part) = setup();
        for chi in tame_characters(InfinityType::new(4, 0), &ctx).iter().take(3) {
            let mu = MuTuple::new(vec![CharTable::from_exponent(5, 1, 3)]).unwrap();
            let pair = build_schwartz_pair(chi, &mu, &part, &ctx).unwrap();
            assert!(katz_bridge_check(&pair, 1, 4).unwrap().pass);
            assert!(katz_bridge_check(&pair, -1, 4).unwrap().pass);
        }
    }
}
