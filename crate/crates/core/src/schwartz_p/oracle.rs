//! The local Fourier coefficient at `p` as the literal double sum
//!
//! `f_b = int_{GL_n(Z_p)} chi1^{-1}chi2(det X) int_{M_n(Q_p)} Phi(-X, -XN) e_p(-tr(bN)) dN dX`
//!
//! with `Phi(X1, X2) = vol^{-1} Phi1(-X1) Phi2(X2)`. Both integrands are
//! locally constant at level `p^c`, so the integrals are finite sums:
//! `X` over `GL_n(Z/p^c)` with mass `1/|GL_n(Z/p^c)|`, `N` over
//! `p^{-c}M_n(Z_p)/M_n(Z_p)` with mass 1 per class.

use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;

use super::{all_matrices, gl_order, FiniteMatrixFunction, ResMat, TwoVariableSchwartz};
use crate::field_ctx::arith::{q_frac, Q};
use crate::field_ctx::AlgebraicValue;

/// Where the Schwartz function is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// `Phi(-X, -XN)`.
    Negated,
    /// `Phi(X, XN)`; differs from `Negated` by `chi1^{-1}chi2((-1)^n)`.
    Direct,
}

/// The inner integral `H(N) = sum_X w(X) Phi2(+-XN)`, before the outer
/// character sum.
struct Inner {
    q: u64,
    m: u64,
    h: Vec<AlgebraicValue>,
    scale: Q,
}

fn inner(pair: &TwoVariableSchwartz, sampling: Sampling) -> Inner {
    let n = pair.part.n;
    let q = pair.phi1.modulus();
    let p = pair.phi1.p;
    // X-weights chi1^{-1}chi2(det X) Phi(+-X, .)
    let weights: Vec<(ResMat, AlgebraicValue)> = all_matrices(n, q)
        .filter(|x| x.det() % p != 0)
        .filter_map(|x| {
            let first = match sampling {
                Sampling::Negated => pair.phi1.get(&x).clone(),
                Sampling::Direct => pair.phi1.get(&x.neg()).clone(),
            };
            if first.is_zero() {
                return None;
            }
            let w = &first * pair.chi1_inv_chi2.eval(x.det());
            let xs = match sampling {
                Sampling::Negated => x.neg(),
                Sampling::Direct => x,
            };
            Some((xs, w))
        })
        .collect();
    let mut m = q;
    for v in pair.phi2.values() {
        m = m.lcm(&v.order());
    }
    for (_, w) in &weights {
        m = m.lcm(&w.order());
    }
    let phi2: Vec<AlgebraicValue> = pair.phi2.values().iter().map(|v| v.lift(m)).collect();
    let weights: Vec<(ResMat, Option<(u64, Q)>, AlgebraicValue)> = weights
        .into_iter()
        .map(|(x, w)| {
            let mono = w.as_monomial().map(|(j, c)| (j * (m / w.order()), c));
            (x, mono, w.lift(m))
        })
        .collect();
    let h: Vec<AlgebraicValue> = (0..pair.phi2.len())
        .into_par_iter()
        .map(|ni| {
            let nmat = ResMat::from_index(n, q, ni as u64);
            let mut acc = AlgebraicValue::zero().lift(m);
            for (x, mono, w) in &weights {
                let v = &phi2[x.mul(&nmat).index() as usize];
                match mono {
                    Some((shift, c)) => acc.add_scaled_rotated(v, *shift, c),
                    None => acc.add_scaled_rotated(&(w * v).lift(m), 0, &Q::one()),
                }
            }
            acc
        })
        .collect();
    let scale = q_frac(1, gl_order(n, p, pair.phi1.c) as i64) / &pair.vol;
    Inner { q, m, h, scale }
}

fn outer(inn: &Inner, beta: &ResMat) -> AlgebraicValue {
    let n = beta.n;
    let step = inn.m / inn.q;
    let one = Q::one();
    let mut acc = AlgebraicValue::zero().lift(inn.m);
    for (ni, hv) in inn.h.iter().enumerate() {
        let nmat = ResMat::from_index(n, inn.q, ni as u64);
        // e_p(-tr(b N / p^c)) = zeta_{p^c}^{tr(bN)}
        acc.add_scaled_rotated(hv, beta.trace_product(&nmat) * step, &one);
    }
    acc.scale(&inn.scale)
}

pub fn brute_force_coeff_at_p(beta: &ResMat, pair: &TwoVariableSchwartz) -> AlgebraicValue {
    brute_force_coeff_at_p_sampled(beta, pair, Sampling::Negated)
}

pub fn brute_force_coeff_at_p_sampled(beta: &ResMat, pair: &TwoVariableSchwartz, sampling: Sampling) -> AlgebraicValue {
    let q = pair.phi1.modulus();
    outer(&inner(pair, sampling), &beta.reduce(q))
}

/// The oracle at every `b` in `M_n(Z/p^c)`, sharing the inner sum.
pub fn brute_force_all(pair: &TwoVariableSchwartz) -> FiniteMatrixFunction {
    let inn = inner(pair, Sampling::Negated);
    let n = pair.part.n;
    let values: Vec<AlgebraicValue> = (0..pair.phi2.len())
        .into_par_iter()
        .map(|bi| outer(&inn, &ResMat::from_index(n, inn.q, bi as u64)))
        .collect();
    let mut it = values.into_iter();
    FiniteMatrixFunction::from_fn(n, pair.phi1.p, pair.phi1.c, |_| it.next().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{make_character, CharTable, FiniteCharacterPair, InfinityType};
    use crate::field_ctx::CMContext;
    use crate::schwartz_p::{build_schwartz_pair, coeff_at_p, MuTuple, PartitionData};

    #[test]
    fn trivial_n1_value() {
        let ctx = CMContext::new(1, 5, 1, 2).unwrap();
        let chi = make_character(InfinityType::new(0, 0), FiniteCharacterPair::trivial(5, 1), &ctx).unwrap();
        let part = PartitionData::ones(1);
        let pair = build_schwartz_pair(&chi, &MuTuple::trivial(5, 1, 1), &part, &ctx).unwrap();
        let v = brute_force_coeff_at_p(&ResMat::new(1, 5, &[2]), &pair);
        assert_eq!(v, AlgebraicValue::one());
    }

    #[test]
    fn point_mass_gives_constant() {
        let ctx = CMContext::new(1, 5, 1, 2).unwrap();
        let chi = make_character(InfinityType::new(0, 0), FiniteCharacterPair::trivial(5, 1), &ctx).unwrap();
        let part = PartitionData::ones(1);
        let mut pair = build_schwartz_pair(&chi, &MuTuple::trivial(5, 1, 1), &part, &ctx).unwrap();
        pair.phi2 = FiniteMatrixFunction::from_fn(1, 5, 1, |x| AlgebraicValue::from_int((x.e[0] == 0) as i64));
        let all = brute_force_all(&pair);
        for v in all.values() {
            assert_eq!(v, all.get_index(0));
        }
    }

    #[test]
    fn n1_matches_fast_path_with_characters() {
        let ctx = CMContext::new(1, 5, 1, 2).unwrap();
        let chi = make_character(InfinityType::new(2, 0), FiniteCharacterPair::from_exponents(5, 1, 1, 3), &ctx);
        let chi = chi.or_else(|_| {
            make_character(InfinityType::new(2, 0), FiniteCharacterPair::from_exponents(5, 1, 2, 0), &ctx)
        });
        let chi = chi.unwrap();
        let part = PartitionData::ones(1);
        let mu = MuTuple::new(vec![CharTable::from_exponent(5, 1, 1)]).unwrap();
        let pair = build_schwartz_pair(&chi, &mu, &part, &ctx).unwrap();
        let all = brute_force_all(&pair);
        for b in all.matrices() {
            assert_eq!(*all.get(&b), coeff_at_p(&b, &pair), "beta = {:?}", b.e);
            let direct = brute_force_coeff_at_p_sampled(&b, &pair, Sampling::Direct);
            let sign = pair.chi1_inv_chi2.eval(4).clone();
            assert_eq!(direct, &sign * all.get(&b));
        }
    }
}
