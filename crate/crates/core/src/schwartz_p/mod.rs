//! Siegel-section machinery at the split prime `p`: the support set of
//! matrices with unit leading minors, the minor-product functions, the group
//! `Gamma(c)`, partial Fourier transforms on `M_n(Z/p^c)`, and the Schwartz
//! pair whose section has Fourier coefficients `phi_nu(tb)`.

pub mod matrix;
pub mod oracle;

use num_bigint::BigInt;
use num_integer::Integer;

use crate::characters::{CharTable, HeckeCharacterData};
use crate::error::{Error, Result};
use crate::field_ctx::arith::{q_frac, Q};
use crate::field_ctx::{AlgebraicValue, CMContext};
pub use matrix::{all_matrices, gl_order, ResMat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionData {
    pub n: usize,
    pub parts: Vec<usize>,
}

impl PartitionData {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.iter().any(|&x| x == 0) {
            return Err(Error::InvalidMatrix(format!("bad partition {parts:?}")));
        }
        Ok(PartitionData { n: parts.iter().sum(), parts })
    }

    /// The partition `(1, ..., 1)`.
    pub fn ones(n: usize) -> Self {
        PartitionData { n, parts: vec![1; n] }
    }

    pub fn r(&self) -> usize {
        self.parts.len()
    }

    /// Cumulative sizes `n1, n1+n2, ..., n`.
    pub fn boundaries(&self) -> Vec<usize> {
        self.parts
            .iter()
            .scan(0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }

    /// `(lo, hi)` index ranges of the diagonal blocks.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let b = self.boundaries();
        let mut lo = 0;
        b.into_iter()
            .map(|hi| {
                let out = (lo, hi);
                lo = hi;
                out
            })
            .collect()
    }

    fn block_of(&self, i: usize) -> usize {
        self.boundaries().iter().position(|&b| i < b).unwrap()
    }
}

/// `r` tables on `(Z/p^c)^x`; characters in most uses, but any locally
/// constant table is accepted.
#[derive(Clone, Debug, PartialEq)]
pub struct MuTuple {
    pub c: u32,
    pub chars: Vec<CharTable>,
}

impl MuTuple {
    pub fn new(chars: Vec<CharTable>) -> Result<Self> {
        let c = chars.first().map(|t| t.c).ok_or_else(|| Error::InvalidMatrix("empty mu".into()))?;
        if let Some(t) = chars.iter().find(|t| t.c != c) {
            return Err(Error::LevelMismatch { expected: c, found: t.c });
        }
        Ok(MuTuple { c, chars })
    }

    pub fn trivial(p: u64, c: u32, r: usize) -> Self {
        MuTuple { c, chars: vec![CharTable::trivial(p, c); r] }
    }

    pub fn id(&self) -> String {
        self.chars.iter().map(|t| t.id()).collect::<Vec<_>>().join(",")
    }
}

/// `nu_i = chi1^{-1} chi2 mu_i`.
pub fn nu_tuple(chi: &HeckeCharacterData, mu: &MuTuple) -> Result<Vec<CharTable>> {
    let base = chi.fin.chi1_inv_chi2();
    mu.chars.iter().map(|m| base.product(m)).collect()
}

fn unit_mod_p(x: u64, p: u64) -> bool {
    x % p != 0
}

fn char_quotient(a: &CharTable, b: &CharTable, x: u64) -> AlgebraicValue {
    a.eval(x) * &b.eval(x).complex_conj()
}

/// `phi_nu(X) = prod_{i<r} (nu_i nu_{i+1}^{-1})(det A_i) * nu_r(det X)` on the
/// support set, 0 off it; `A_i` the leading minor at the i-th boundary.
pub fn eval_phi_nu(x: &ResMat, nu: &[CharTable], part: &PartitionData) -> AlgebraicValue {
    let p = nu[0].p;
    let bounds = part.boundaries();
    let minors: Vec<u64> = bounds.iter().map(|&s| x.leading_minor(s)).collect();
    if minors.iter().any(|&m| !unit_mod_p(m, p)) {
        return AlgebraicValue::zero();
    }
    let r = part.r();
    let mut acc = nu[r - 1].eval(minors[r - 1]).clone();
    for i in 0..r - 1 {
        acc = &acc * &char_quotient(&nu[i], &nu[i + 1], minors[i]);
    }
    acc
}

/// Membership in `Gamma(c)`: below-block entries vanish mod `p^c`, diagonal
/// blocks are invertible mod `p`.
pub fn in_gamma(x: &ResMat, part: &PartitionData, p: u64) -> bool {
    let n = part.n;
    for i in 0..n {
        for j in 0..n {
            if part.block_of(i) > part.block_of(j) && x.get(i, j) != 0 {
                return false;
            }
        }
    }
    part.blocks().iter().all(|&(lo, hi)| unit_mod_p(x.block(lo, hi).det(), p))
}

/// `prod mu_i(det m_i)` on `Gamma(c)`, 0 elsewhere.
pub fn eval_phi_mu_gamma(x: &ResMat, mu: &MuTuple, part: &PartitionData) -> AlgebraicValue {
    let p = mu.chars[0].p;
    if !in_gamma(x, part, p) {
        return AlgebraicValue::zero();
    }
    let mut acc = AlgebraicValue::one();
    for (t, (lo, hi)) in mu.chars.iter().zip(part.blocks()) {
        acc = &acc * t.eval(x.block(lo, hi).det());
    }
    acc
}

/// The product of the diagonal-block determinant characters without the
/// `Gamma(c)` cut-off; used where the support is handled separately.
pub fn eval_phi_mu_minors(x: &ResMat, mu: &MuTuple, part: &PartitionData) -> AlgebraicValue {
    let p = mu.chars[0].p;
    let bounds = part.boundaries();
    let minors: Vec<u64> = bounds.iter().map(|&s| x.leading_minor(s)).collect();
    if minors.iter().any(|&m| !unit_mod_p(m, p)) {
        return AlgebraicValue::zero();
    }
    // det of the i-th diagonal block of an upper block-triangular matrix with
    // these leading minors is minor_i / minor_{i-1}
    let q = x.q;
    let mut acc = AlgebraicValue::one();
    let mut prev = 1u64;
    for (t, &m) in mu.chars.iter().zip(&minors) {
        let inv = crate::field_ctx::arith::mod_inv(prev, q).unwrap();
        let blk = (m as u128 * inv as u128 % q as u128) as u64;
        acc = &acc * t.eval(blk);
        prev = m;
    }
    acc
}

/// A function on `M_n(Z/p^c)`, table indexed by `ResMat::index`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMatrixFunction {
    pub n: usize,
    pub p: u64,
    pub c: u32,
    table: Vec<AlgebraicValue>,
}

impl FiniteMatrixFunction {
    pub fn from_fn<F: FnMut(&ResMat) -> AlgebraicValue>(n: usize, p: u64, c: u32, mut f: F) -> Self {
        let q = p.pow(c);
        let table = all_matrices(n, q).map(|m| f(&m)).collect();
        FiniteMatrixFunction { n, p, c, table }
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.c)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, x: &ResMat) -> &AlgebraicValue {
        &self.table[x.index() as usize]
    }

    pub fn get_index(&self, i: usize) -> &AlgebraicValue {
        &self.table[i]
    }

    pub fn values(&self) -> &[AlgebraicValue] {
        &self.table
    }

    pub fn matrices(&self) -> impl Iterator<Item = ResMat> {
        all_matrices(self.n, self.modulus())
    }

    /// JSON object keyed by row-major residues.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .matrices()
            .zip(&self.table)
            .filter(|(_, v)| !v.is_zero())
            .map(|(m, v)| {
                let key = m.e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                (key, v.to_json())
            })
            .collect();
        serde_json::Value::Object(map)
    }
}

/// `G(N) = w * sum_Y F(Y) zeta_q^{<Y, N>}`, computed one coordinate at a time.
fn fourier_kernel(f: &FiniteMatrixFunction, weight: &Q) -> FiniteMatrixFunction {
    let q = f.modulus();
    let m = f.table.iter().fold(q, |acc, v| acc.lcm(&v.order()));
    let step = m / q;
    let mut cur: Vec<AlgebraicValue> = f.table.iter().map(|v| v.lift(m)).collect();
    let dims = f.n * f.n;
    let one = Q::from_integer(BigInt::from(1));
    let zero = AlgebraicValue::zero().lift(m);
    for axis in 0..dims {
        let stride = q.pow((dims - 1 - axis) as u32) as usize;
        let mut next = vec![zero.clone(); cur.len()];
        for base in 0..cur.len() {
            if (base / stride) as u64 % q != 0 {
                continue;
            }
            for a in 0..q as usize {
                let out = &mut next[base + a * stride];
                for j in 0..q as usize {
                    let v = &cur[base + j * stride];
                    out.add_scaled_rotated(v, ((a * j) as u64 % q) * step, &one);
                }
            }
        }
        cur = next;
    }
    let table = cur.into_iter().map(|v| v.scale(weight)).collect();
    FiniteMatrixFunction { n: f.n, p: f.p, c: f.c, table }
}

/// `F^(N) = p^{-c n^2} sum_Y F(Y) e_p(-tr(Y tN)/p^c)`, the dual index `N`
/// standing for the class of `N / p^c`.
pub fn partial_fourier(f: &FiniteMatrixFunction) -> FiniteMatrixFunction {
    let w = q_frac(1, f.modulus().pow((f.n * f.n) as u32) as i64);
    fourier_kernel(f, &w)
}

/// The transform on the dual side: each class of `p^{-c}M_n/M_n` has volume 1.
pub fn dual_fourier(f: &FiniteMatrixFunction) -> FiniteMatrixFunction {
    fourier_kernel(f, &Q::from_integer(BigInt::from(1)))
}

/// `vol(Gamma(c))` for `vol(GL_n(Z_p)) = 1`.
pub fn gamma_volume(part: &PartitionData, p: u64, c: u32) -> Q {
    let q = p.pow(c);
    let count = all_matrices(part.n, q).filter(|x| in_gamma(x, part, p)).count() as i64;
    q_frac(count, gl_order(part.n, p, c) as i64)
}

#[derive(Clone, Debug)]
pub struct TwoVariableSchwartz {
    pub part: PartitionData,
    pub nu: Vec<CharTable>,
    /// `chi1^{-1} chi2`, the weight of the `X`-integral.
    pub chi1_inv_chi2: CharTable,
    pub phi1: FiniteMatrixFunction,
    pub phi2: FiniteMatrixFunction,
    pub vol: Q,
}

pub fn build_schwartz_pair(
    chi: &HeckeCharacterData,
    mu: &MuTuple,
    part: &PartitionData,
    ctx: &CMContext,
) -> Result<TwoVariableSchwartz> {
    if mu.c > ctx.c || chi.fin.c != ctx.c {
        return Err(Error::LevelMismatch { expected: ctx.c, found: mu.c.max(chi.fin.c) });
    }
    if mu.chars.len() != part.r() {
        return Err(Error::InvalidMatrix(format!(
            "{} characters for {} blocks",
            mu.chars.len(),
            part.r()
        )));
    }
    let mu = lift_mu(mu, ctx)?;
    let nu = nu_tuple(chi, &mu)?;
    let (n, p, c) = (part.n, ctx.p, ctx.c);
    let phi1 = FiniteMatrixFunction::from_fn(n, p, c, |x| eval_phi_mu_gamma(x, &mu, part));
    let phi_nu = FiniteMatrixFunction::from_fn(n, p, c, |x| eval_phi_nu(x, &nu, part));
    Ok(TwoVariableSchwartz {
        part: part.clone(),
        chi1_inv_chi2: chi.fin.chi1_inv_chi2(),
        phi1,
        phi2: partial_fourier(&phi_nu),
        vol: gamma_volume(part, p, c),
        nu,
    })
}

/// Inflate tables of lower level to level `c`.
pub fn lift_mu(mu: &MuTuple, ctx: &CMContext) -> Result<MuTuple> {
    if mu.c == ctx.c {
        return Ok(mu.clone());
    }
    let chars = mu
        .chars
        .iter()
        .map(|t| CharTable::from_fn(ctx.p, ctx.c, |x| t.eval(x).clone()))
        .collect();
    Ok(MuTuple { c: ctx.c, chars })
}

/// The local coefficient at `p`: `phi_nu(tb)`.
pub fn coeff_at_p(beta: &ResMat, pair: &TwoVariableSchwartz) -> AlgebraicValue {
    eval_phi_nu(&beta.transpose(), &pair.nu, &pair.part)
}

/// The two-variable function `F(X, Y) = vol^{-1} Phi1(X) phi_nu(Y)` whose
/// partial transform is the pair; `phi_nu` is recovered from `Phi2` by
/// the inverse transform.
pub fn two_variable_function(pair: &TwoVariableSchwartz) -> (FiniteMatrixFunction, FiniteMatrixFunction) {
    let back = dual_fourier(&pair.phi2);
    let phi_nu = FiniteMatrixFunction::from_fn(back.n, back.p, back.c, |y| back.get(&y.neg()).clone());
    let inv_vol = pair.vol.recip();
    let first = FiniteMatrixFunction::from_fn(back.n, back.p, back.c, |x| pair.phi1.get(x).scale(&inv_vol));
    (first, phi_nu)
}

/// Exhaustive check of `F(X, tX^{-1} Y) = chi1 chi2^{-1}(det X) F(1, Y)` over
/// `X` in `Gamma(c)` and all `Y`; returns the first violation.
pub fn check_transformation(pair: &TwoVariableSchwartz) -> Option<(ResMat, ResMat)> {
    let (first, second) = two_variable_function(pair);
    let (n, p) = (first.n, first.p);
    let q = first.modulus();
    let chi12 = pair.chi1_inv_chi2.inverse();
    let one = first.get(&ResMat::identity(n, q)).clone();
    // second takes few distinct values; compare through their classes
    let mut distinct: Vec<AlgebraicValue> = Vec::new();
    let class: Vec<usize> = second
        .values()
        .iter()
        .map(|v| match distinct.iter().position(|d| d == v) {
            Some(i) => i,
            None => {
                distinct.push(v.clone());
                distinct.len() - 1
            }
        })
        .collect();
    for x in all_matrices(n, q).filter(|x| in_gamma(x, &pair.part, p)) {
        let tinv = x.inverse().expect("Gamma(c) is invertible").transpose();
        let fx = first.get(&x);
        let w = chi12.eval(x.det()) * &one;
        let left: Vec<AlgebraicValue> = distinct.iter().map(|v| fx * v).collect();
        let right: Vec<AlgebraicValue> = distinct.iter().map(|v| &w * v).collect();
        let same: Vec<Vec<bool>> = left.iter().map(|l| right.iter().map(|r| l == r).collect()).collect();
        for y in second.matrices() {
            let moved = tinv.mul(&y).index() as usize;
            if !same[class[moved]][class[y.index() as usize]] {
                return Some((x, y));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{make_character, FiniteCharacterPair, InfinityType};
    use crate::field_ctx::arith::q;

    fn nus(p: u64, e: &[u64]) -> Vec<CharTable> {
        e.iter().map(|&x| CharTable::from_exponent(p, 1, x)).collect()
    }

    #[test]
    fn transformation_hypothesis() {
        let ctx = CMContext::new(1, 5, 1, 2).unwrap();
        let chi = crate::characters::make_character(
            crate::characters::InfinityType::new(4, 2),
            crate::characters::FiniteCharacterPair::from_exponents(5, 1, 1, 3),
            &ctx,
        )
        .unwrap();
        for (part, mu) in [
            (PartitionData::ones(1), MuTuple::new(vec![CharTable::from_exponent(5, 1, 1)]).unwrap()),
            (PartitionData::ones(2), MuTuple::new(vec![CharTable::from_exponent(5, 1, 2), CharTable::trivial(5, 1)]).unwrap()),
            (PartitionData::new(vec![2]).unwrap(), MuTuple::new(vec![CharTable::from_exponent(5, 1, 3)]).unwrap()),
        ] {
            let mut pair = build_schwartz_pair(&chi, &mu, &part, &ctx).unwrap();
            assert_eq!(check_transformation(&pair), None);
            let n = part.n;
            let x = ResMat { n, q: 5, e: (0..n * n).map(|i| if i % (n + 1) == 0 { 2 } else { 0 }).collect() };
            pair.phi1 = FiniteMatrixFunction::from_fn(n, 5, 1, |m| {
                let v = pair.phi1.get(m).clone();
                if *m == x { v.scale(&q_frac(2, 1)) } else { v }
            });
            assert!(check_transformation(&pair).is_some());
        }
    }

    #[test]
    fn phi_nu_examples() {
        let part = PartitionData::ones(2);
        let triv = nus(5, &[0, 0]);
        for x in all_matrices(2, 5) {
            let ind = x.get(0, 0) % 5 != 0 && x.det() % 5 != 0;
            let v = eval_phi_nu(&x, &triv, &part);
            assert_eq!(v, AlgebraicValue::from_int(ind as i64));
        }
        let nu = nus(5, &[1, 3]);
        let x = ResMat::new(2, 5, &[2, 0, 0, 3]);
        assert_eq!(eval_phi_nu(&x, &nu, &part), nu[0].eval(2) * nu[1].eval(3));
        assert!(eval_phi_nu(&ResMat::new(2, 5, &[0, 1, 1, 0]), &nu, &part).is_zero());
    }

    #[test]
    fn phi_mu_gamma_examples() {
        let part = PartitionData::ones(2);
        let mu = MuTuple::new(nus(5, &[1, 2])).unwrap();
        assert_eq!(eval_phi_mu_gamma(&ResMat::identity(2, 5), &mu, &part), AlgebraicValue::one());
        let x = ResMat::new(2, 5, &[2, 4, 0, 3]);
        assert_eq!(eval_phi_mu_gamma(&x, &mu, &part), mu.chars[0].eval(2) * mu.chars[1].eval(3));
        assert!(eval_phi_mu_gamma(&ResMat::new(2, 5, &[2, 0, 1, 3]), &mu, &part).is_zero());
    }

    #[test]
    fn fourier_examples() {
        let ones = FiniteMatrixFunction::from_fn(1, 5, 1, |_| AlgebraicValue::one());
        let t = partial_fourier(&ones);
        for (i, v) in t.values().iter().enumerate() {
            assert_eq!(*v, AlgebraicValue::from_int((i == 0) as i64));
        }
        let units = FiniteMatrixFunction::from_fn(1, 5, 1, |x| AlgebraicValue::from_int((x.e[0] != 0) as i64));
        let t = partial_fourier(&units);
        assert_eq!(t.get_index(0).as_rational(), Some(q_frac(4, 5)));
        for a in 1..5 {
            assert_eq!(t.get_index(a).as_rational(), Some(q_frac(-1, 5)));
        }
    }

    #[test]
    fn double_transform_negates() {
        for (n, p) in [(1, 5), (2, 3)] {
            let nu = nus(p, &[1, 0][..n]);
            let part = PartitionData::ones(n);
            let f = FiniteMatrixFunction::from_fn(n, p, 1, |x| {
                &eval_phi_nu(x, &nu, &part) + &AlgebraicValue::from_int(x.e[0] as i64)
            });
            let back = dual_fourier(&partial_fourier(&f));
            for x in f.matrices() {
                assert_eq!(back.get(&x), f.get(&x.neg()));
            }
        }
    }

    #[test]
    fn plancherel() {
        let f = FiniteMatrixFunction::from_fn(1, 7, 1, |x| {
            &AlgebraicValue::root_of_unity(3, x.e[0] as i64) * &AlgebraicValue::from_int(x.e[0] as i64 - 2)
        });
        let t = partial_fourier(&f);
        let norm = |g: &FiniteMatrixFunction| -> AlgebraicValue {
            g.values().iter().map(|v| v * &v.complex_conj()).sum()
        };
        assert_eq!(norm(&t), norm(&f).scale(&q_frac(1, 7)));
    }

    #[test]
    fn gamma_volumes() {
        assert_eq!(gamma_volume(&PartitionData::ones(1), 5, 1), q(1));
        assert_eq!(gamma_volume(&PartitionData::ones(2), 5, 1), q_frac(1, 6));
        assert_eq!(gamma_volume(&PartitionData::new(vec![2]).unwrap(), 3, 1), q(1));
    }

    #[test]
    fn coeff_at_p_examples() {
        let ctx = CMContext::new(1, 5, 1, 2).unwrap();
        let chi = make_character(InfinityType::new(0, 0), FiniteCharacterPair::trivial(5, 1), &ctx).unwrap();
        let part = PartitionData::ones(2);
        let pair = build_schwartz_pair(&chi, &MuTuple::trivial(5, 1, 2), &part, &ctx).unwrap();
        assert_eq!(coeff_at_p(&ResMat::identity(2, 5), &pair), AlgebraicValue::one());
        assert!(coeff_at_p(&ResMat::new(2, 5, &[1, 2, 2, 4]), &pair).is_zero());
        let part1 = PartitionData::ones(1);
        let mu = MuTuple::new(nus(5, &[1])).unwrap();
        let pair = build_schwartz_pair(&chi, &mu, &part1, &ctx).unwrap();
        assert_eq!(coeff_at_p(&ResMat::new(1, 5, &[2]), &pair), *mu.chars[0].eval(2));
    }

    #[test]
    fn minor_formula_matches_gamma_on_gamma() {
        let part = PartitionData::ones(2);
        let mu = MuTuple::new(nus(5, &[1, 3])).unwrap();
        for x in all_matrices(2, 5) {
            if in_gamma(&x, &part, 5) {
                assert_eq!(eval_phi_mu_minors(&x, &mu, &part), eval_phi_mu_gamma(&x, &mu, &part));
            }
        }
    }
}
