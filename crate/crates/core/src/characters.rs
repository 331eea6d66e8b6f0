//! Hecke characters of type A0 with conductor dividing `p^infinity`, their
//! splitting `(chi1, chi2^{-1})` at `p`, p-adic avatars, and locally constant
//! weight functions on `((Z/p^c)^x)^2`.

use num_integer::Integer;
use serde_json::json;

use crate::error::{Error, Result};
use crate::field_ctx::arith::{q_frac, rational_mod, Q};
use crate::field_ctx::{AlgebraicValue, CMContext, FieldElement, UnitGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InfinityType {
    pub k: i64,
    pub nu: i64,
}

impl InfinityType {
    pub fn new(k: i64, nu: i64) -> Self {
        InfinityType { k, nu }
    }

    /// `k + 2 nu`, the exponent in the unit relation.
    pub fn unit_weight(&self) -> i64 {
        self.k + 2 * self.nu
    }
}

/// A function on `(Z/p^c)^x`, zero on non-units. Usually a Dirichlet
/// character `g^i -> zeta_N^{e i}` for the least generator `g`, but arbitrary
/// locally constant tables are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct CharTable {
    pub p: u64,
    pub c: u32,
    exponent: Option<u64>,
    values: Vec<AlgebraicValue>,
}

impl CharTable {
    pub fn trivial(p: u64, c: u32) -> Self {
        Self::from_exponent(p, c, 0)
    }

    /// The character with `chi(g) = zeta_N^e`, `N = phi(p^c)`.
    pub fn from_exponent(p: u64, c: u32, e: u64) -> Self {
        let group = UnitGroup::new(p, c);
        let n = group.order;
        let e = e % n;
        let g = n.gcd(&e);
        let (order, step) = if e == 0 { (1, 0) } else { (n / g, e / g) };
        let mut values = vec![AlgebraicValue::zero(); group.modulus as usize];
        for x in group.elements() {
            let i = group.log(x).unwrap();
            values[x as usize] = AlgebraicValue::root_of_unity(order, ((step * i) % order) as i64);
        }
        CharTable { p, c, exponent: Some(e), values }
    }

    /// A table given on units by a closure; entries at non-units are ignored.
    pub fn from_fn<F: FnMut(u64) -> AlgebraicValue>(p: u64, c: u32, mut f: F) -> Self {
        let modulus = p.pow(c);
        let values = (0..modulus)
            .map(|x| if x % p == 0 { AlgebraicValue::zero() } else { f(x) })
            .collect();
        CharTable { p, c, exponent: None, values }
    }

    pub fn modulus(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn exponent(&self) -> Option<u64> {
        self.exponent
    }

    pub fn eval(&self, x: u64) -> &AlgebraicValue {
        &self.values[(x % self.modulus()) as usize]
    }

    /// Value at a p-integral rational; zero when `p` divides it.
    pub fn eval_q(&self, x: &Q) -> Result<AlgebraicValue> {
        let r = rational_mod(x, self.modulus()).ok_or(Error::NegativeValuation)?;
        Ok(self.eval(r).clone())
    }

    pub fn is_trivial(&self) -> bool {
        self.exponent == Some(0)
    }

    pub fn check_multiplicative(&self) -> Result<()> {
        let group = UnitGroup::new(self.p, self.c);
        let one = AlgebraicValue::one();
        if *self.eval(1) != one {
            return Err(Error::NotMultiplicative { a: 1, b: 1 });
        }
        // a cyclic group: it suffices that chi(g^{i+1}) = chi(g^i) chi(g)
        // and chi(g)^N = 1
        let g = group.generator;
        let cg = self.eval(g).clone();
        let mut x = 1u64;
        for _ in 0..group.order {
            let next = x * g % group.modulus;
            if *self.eval(next) != self.eval(x) * &cg {
                return Err(Error::NotMultiplicative { a: x, b: g });
            }
            x = next;
        }
        Ok(())
    }

    /// Pointwise inverse, the complex conjugate on root-of-unity values.
    pub fn inverse(&self) -> Self {
        CharTable {
            p: self.p,
            c: self.c,
            exponent: self.exponent.map(|e| {
                let n = UnitGroup::new(self.p, self.c).order;
                (n - e) % n
            }),
            values: self.values.iter().map(|v| v.complex_conj()).collect(),
        }
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.c != other.c || self.p != other.p {
            return Err(Error::LevelMismatch { expected: self.c, found: other.c });
        }
        let exponent = match (self.exponent, other.exponent) {
            (Some(a), Some(b)) => Some((a + b) % UnitGroup::new(self.p, self.c).order),
            _ => None,
        };
        if let Some(e) = exponent {
            return Ok(Self::from_exponent(self.p, self.c, e));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(CharTable { p: self.p, c: self.c, exponent: None, values })
    }

    /// Replace the value at one residue (fault injection, perturbations).
    pub fn with_value(&self, x: u64, v: AlgebraicValue) -> Self {
        let mut out = self.clone();
        let m = out.modulus();
        out.values[(x % m) as usize] = v;
        out.exponent = None;
        out
    }

    /// Short identifier used in series headers.
    pub fn id(&self) -> String {
        match self.exponent {
            Some(e) => format!("e{e}"),
            None => "table".to_string(),
        }
    }

    /// JSON array of `{residue, value}`; character values are written as
    /// `[order, exponent]`.
    pub fn to_json(&self) -> serde_json::Value {
        let group = UnitGroup::new(self.p, self.c);
        let entries: Vec<serde_json::Value> = group
            .elements()
            .map(|x| match self.exponent {
                Some(e) => {
                    let i = group.log(x).unwrap();
                    json!({"residue": x, "value": [group.order, (e * i) % group.order]})
                }
                None => json!({"residue": x, "value": self.eval(x).to_json()}),
            })
            .collect();
        serde_json::Value::Array(entries)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteCharacterPair {
    pub c: u32,
    pub chi1: CharTable,
    pub chi2: CharTable,
}

impl FiniteCharacterPair {
    pub fn new(chi1: CharTable, chi2: CharTable) -> Result<Self> {
        if chi1.c != chi2.c {
            return Err(Error::LevelMismatch { expected: chi1.c, found: chi2.c });
        }
        Ok(FiniteCharacterPair { c: chi1.c, chi1, chi2 })
    }

    pub fn trivial(p: u64, c: u32) -> Self {
        FiniteCharacterPair { c, chi1: CharTable::trivial(p, c), chi2: CharTable::trivial(p, c) }
    }

    pub fn from_exponents(p: u64, c: u32, e1: u64, e2: u64) -> Self {
        FiniteCharacterPair {
            c,
            chi1: CharTable::from_exponent(p, c, e1),
            chi2: CharTable::from_exponent(p, c, e2),
        }
    }

    /// `chi_p(x1, x2) = chi1(x1) chi2(x2)^{-1}`.
    pub fn chi_p(&self, x1: u64, x2: u64) -> AlgebraicValue {
        self.chi1.eval(x1) * &self.chi2.eval(x2).complex_conj()
    }

    /// `chi1^{-1} chi2` as a table on `(Z/p^c)^x`.
    pub fn chi1_inv_chi2(&self) -> CharTable {
        self.chi1.inverse().product(&self.chi2).expect("same level")
    }

    pub fn id(&self) -> String {
        format!("{},{}", self.chi1.id(), self.chi2.id())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeckeCharacterData {
    pub inf: InfinityType,
    pub fin: FiniteCharacterPair,
}

impl HeckeCharacterData {
    pub fn id(&self) -> String {
        format!("k={},nu={},chi=({})", self.inf.k, self.inf.nu, self.fin.id())
    }
}

/// The root of unity `zeta_w^j` in the presentation ring whose reduction
/// agrees with `sigma(e)^exponent`. Units of `O_K` are roots of unity, so
/// this identifies their `p`-adic images exactly with cyclotomic values.
pub fn unit_root_image(ctx: &CMContext, e: &FieldElement, exponent: i64) -> Result<AlgebraicValue> {
    let w = ctx.w as u64;
    let (x1, _) = ctx.embed_p_mod(e, ctx.p)?;
    let target = crate::field_ctx::arith::mod_pow(
        x1,
        exponent.rem_euclid(w as i64) as u64,
        ctx.p,
    );
    let zeta = ctx.canonical_root_of_unity(w, 1);
    let mut z = 1u64;
    for j in 0..w {
        if z == target {
            return Ok(AlgebraicValue::root_of_unity(w, j as i64));
        }
        z = z * zeta % ctx.p;
    }
    Err(Error::NotPrimeToP)
}

fn unit_compatible(fin: &FiniteCharacterPair, inf: InfinityType, ctx: &CMContext) -> Result<Option<FieldElement>> {
    let modulus = ctx.level_modulus();
    for e in ctx.units() {
        let (e1, e2) = ctx.embed_p_mod(&e, modulus)?;
        let lhs = fin.chi_p(e1, e2);
        let rhs = unit_root_image(ctx, &e, inf.unit_weight())?;
        if lhs != rhs {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

pub fn make_character(inf: InfinityType, fin: FiniteCharacterPair, ctx: &CMContext) -> Result<HeckeCharacterData> {
    if fin.chi1.p != ctx.p || fin.c != ctx.c {
        return Err(Error::LevelMismatch { expected: ctx.c, found: fin.c });
    }
    fin.chi1.check_multiplicative()?;
    fin.chi2.check_multiplicative()?;
    if let Some(e) = unit_compatible(&fin, inf, ctx)? {
        return Err(Error::UnitIncompatible { unit: e.to_string() });
    }
    Ok(HeckeCharacterData { inf, fin })
}

/// `sigma(a)^{-k-nu} sigma_bar(a)^{nu}`, exactly in `K`.
pub fn psi(inf: InfinityType, a: &FieldElement) -> Result<AlgebraicValue> {
    let x = &a.pow(-inf.k - inf.nu)? * &a.conj().pow(inf.nu)?;
    Ok(AlgebraicValue::from_field_element(&x))
}

/// Residues `(x1, x2)` of a p-unit at level `p^c`.
pub fn level_image(ctx: &CMContext, a: &FieldElement) -> Result<(u64, u64)> {
    let (x1, x2) = ctx.embed_p_mod(a, ctx.level_modulus())?;
    if x1 % ctx.p == 0 || x2 % ctx.p == 0 {
        return Err(Error::NotPrimeToP);
    }
    Ok((x1, x2))
}

pub fn eval_avatar(chi: &HeckeCharacterData, a: &FieldElement, ctx: &CMContext) -> Result<AlgebraicValue> {
    let (x1, x2) = level_image(ctx, a)?;
    Ok(&chi.fin.chi_p(x1, x2) * &psi(chi.inf, a)?)
}

/// A locally constant function on `((Z/p^c)^x)^2`, the finite part of a
/// weight function; its global value at `a` is `F(embed(a)) psi_{k,nu}(a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    pub p: u64,
    pub c: u32,
    pub inf: InfinityType,
    table: Vec<AlgebraicValue>,
}

impl WeightFunction {
    pub fn from_fn<F: FnMut(u64, u64) -> AlgebraicValue>(p: u64, c: u32, inf: InfinityType, mut f: F) -> Self {
        let modulus = p.pow(c);
        let mut table = Vec::with_capacity((modulus * modulus) as usize);
        for x1 in 0..modulus {
            for x2 in 0..modulus {
                if x1 % p == 0 || x2 % p == 0 {
                    table.push(AlgebraicValue::zero());
                } else {
                    table.push(f(x1, x2));
                }
            }
        }
        WeightFunction { p, c, inf, table }
    }

    pub fn zero(p: u64, c: u32, inf: InfinityType) -> Self {
        Self::from_fn(p, c, inf, |_, _| AlgebraicValue::zero())
    }

    pub fn avatar(chi: &HeckeCharacterData) -> Self {
        let fin = &chi.fin;
        Self::from_fn(fin.chi1.p, fin.c, chi.inf, |x1, x2| fin.chi_p(x1, x2))
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.c)
    }

    pub fn get(&self, x1: u64, x2: u64) -> &AlgebraicValue {
        let m = self.modulus();
        &self.table[((x1 % m) * m + (x2 % m)) as usize]
    }

    pub fn set(&mut self, x1: u64, x2: u64, v: AlgebraicValue) {
        let m = self.modulus();
        self.table[((x1 % m) * m + (x2 % m)) as usize] = v;
    }

    /// `F(embed(a)) psi_{k,nu}(a)` at a global p-unit `a`.
    pub fn eval_global(&self, a: &FieldElement, ctx: &CMContext) -> Result<AlgebraicValue> {
        let (x1, x2) = level_image(ctx, a)?;
        Ok(self.get(x1, x2) * &psi(self.inf, a)?)
    }

    pub fn map<G: FnMut(u64, u64, &AlgebraicValue) -> AlgebraicValue>(&self, mut g: G) -> Self {
        Self::from_fn(self.p, self.c, self.inf, |x1, x2| g(x1, x2, self.get(x1, x2)))
    }

    pub fn linear_combination(terms: &[(AlgebraicValue, &WeightFunction)]) -> Self {
        let first = terms[0].1;
        first.map(|x1, x2, _| {
            terms.iter().map(|(c, f)| c * f.get(x1, x2)).sum()
        })
    }

    /// Short content hash of the table.
    pub fn id(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(format!("{}:{}:{}:{}", self.p, self.c, self.inf.k, self.inf.nu));
        for v in &self.table {
            h.update(v.canonical().to_json().to_string());
        }
        format!("F{}", &hex::encode(h.finalize())[..12])
    }

    /// Points of the level group in canonical order.
    pub fn points(&self) -> Vec<(u64, u64)> {
        let m = self.modulus();
        let p = self.p;
        let mut out = Vec::new();
        for x1 in (1..m).filter(|x| x % p != 0) {
            for x2 in (1..m).filter(|x| x % p != 0) {
                out.push((x1, x2));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightReport {
    pub pass: bool,
    /// `(unit, x1, x2)` of the first violation.
    pub first_violation: Option<(String, u64, u64)>,
}

pub fn check_weight_relation(f: &WeightFunction, ctx: &CMContext) -> Result<WeightReport> {
    let modulus = f.modulus();
    for e in ctx.units() {
        let (e1, e2) = ctx.embed_p_mod(&e, modulus)?;
        let factor = unit_root_image(ctx, &e, f.inf.unit_weight())?;
        for (x1, x2) in f.points() {
            let lhs = f.get(e1 * x1 % modulus, e2 * x2 % modulus);
            let rhs = &factor * f.get(x1, x2);
            if *lhs != rhs {
                return Ok(WeightReport { pass: false, first_violation: Some((e.to_string(), x1, x2)) });
            }
        }
    }
    Ok(WeightReport { pass: true, first_violation: None })
}

/// Fourier coefficients `c_{a,b} = N^{-2} sum F(x) chi_a(x1)^{-1} chi_b(x2)^{-1}`
/// on the character group of `((Z/p^c)^x)^2`, with `chi_a(g) = zeta_N^a`.
/// Zero coefficients are omitted.
pub fn fourier_coefficients(f: &WeightFunction) -> Vec<((u64, u64), AlgebraicValue)> {
    let group = UnitGroup::new(f.p, f.c);
    let n = group.order;
    let mut m = n;
    for (x1, x2) in f.points() {
        m = m.lcm(&f.get(x1, x2).order());
    }
    let lifted: Vec<(u64, u64, AlgebraicValue)> = f
        .points()
        .into_iter()
        .filter(|&(x1, x2)| !f.get(x1, x2).is_zero())
        .map(|(x1, x2)| (group.log(x1).unwrap(), group.log(x2).unwrap(), f.get(x1, x2).lift(m)))
        .collect();
    let scale = q_frac(1, (n * n) as i64);
    let step = m / n;
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let mut acc = AlgebraicValue::zero().lift(m);
            for (i, j, v) in &lifted {
                let e = (n - (a * i + b * j) % n) % n;
                acc.add_scaled_rotated(v, e * step, &scale);
            }
            if !acc.is_zero() {
                out.push(((a, b), acc));
            }
        }
    }
    out
}

/// Write `F = sum c_i F_i` with each `F_i` the avatar table of a character
/// of the same infinity type.
pub fn decompose_locally_constant(
    f: &WeightFunction,
    ctx: &CMContext,
) -> Result<Vec<(AlgebraicValue, HeckeCharacterData)>> {
    let n = UnitGroup::new(f.p, f.c).order;
    let mut out = Vec::new();
    for ((a, b), coeff) in fourier_coefficients(f) {
        // F = sum c chi_a(x1) chi_b(x2): chi1 = chi_a, chi2 = chi_b^{-1}
        let fin = FiniteCharacterPair::from_exponents(f.p, f.c, a, (n - b) % n);
        match make_character(f.inf, fin, ctx) {
            Ok(chi) => out.push((coeff, chi)),
            Err(Error::UnitIncompatible { .. }) => return Err(Error::CorruptedWeightFunction),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub fn recombine(terms: &[(AlgebraicValue, HeckeCharacterData)], p: u64, c: u32, inf: InfinityType) -> WeightFunction {
    let mut acc = WeightFunction::zero(p, c, inf);
    for (coeff, chi) in terms {
        let g = WeightFunction::avatar(chi);
        acc = acc.map(|x1, x2, v| v + &(coeff * g.get(x1, x2)));
    }
    acc
}
