//! Cyclotomic polynomials and reduction of group-ring vectors
//! `Q[x]/(x^m - 1)` to the normal form modulo `Phi_m`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::Zero;

use super::arith::{divisors, euler_phi, mobius, Q};

/// Dense integer coefficients of `Phi_m`, lowest degree first.
fn compute_phi(m: u64) -> Vec<i64> {
    // Phi_m = prod_{d | m} (x^d - 1)^{mu(m/d)}
    let mut poly = vec![1i64];
    let divs = divisors(m);
    for &d in &divs {
        if mobius(m / d) == 1 {
            let d = d as usize;
            let mut next = vec![0i64; poly.len() + d];
            for (i, &c) in poly.iter().enumerate() {
                next[i + d] += c;
                next[i] -= c;
            }
            poly = next;
        }
    }
    for &d in &divs {
        if mobius(m / d) == -1 {
            // exact division by x^d - 1: q_i = q_{i-d} - a_i, run from the top
            let d = d as usize;
            let deg = poly.len() - 1;
            let mut quot = vec![0i64; deg + 1 - d];
            let mut rem = poly.clone();
            for i in (0..quot.len()).rev() {
                let c = rem[i + d];
                quot[i] = c;
                rem[i + d] -= c;
                rem[i] += c;
            }
            debug_assert!(rem.iter().all(|&c| c == 0));
            poly = quot;
        }
    }
    poly
}

struct PhiData {
    degree: usize,
    /// nonzero terms of Phi_m below the leading one
    lower: Vec<(usize, i64)>,
}

fn phi_cache() -> &'static Mutex<HashMap<u64, Arc<PhiData>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<PhiData>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn phi_data(m: u64) -> Arc<PhiData> {
    if let Some(d) = phi_cache().lock().unwrap().get(&m) {
        return d.clone();
    }
    let dense = compute_phi(m);
    let degree = dense.len() - 1;
    debug_assert_eq!(degree as u64, euler_phi(m));
    debug_assert_eq!(dense[degree], 1);
    let lower = dense[..degree]
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (i, c))
        .collect();
    let data = Arc::new(PhiData { degree, lower });
    phi_cache().lock().unwrap().insert(m, data.clone());
    data
}

/// Dense coefficients of the m-th cyclotomic polynomial.
pub fn cyclotomic_poly(m: u64) -> Vec<i64> {
    compute_phi(m)
}

/// Reduce a length-`m` vector over `x^j` modulo `Phi_m`; returns `phi(m)`
/// coefficients.
pub fn reduce(coeffs: &[Q], m: u64) -> Vec<Q> {
    let data = phi_data(m);
    let mut work: Vec<Q> = coeffs.to_vec();
    for i in (data.degree..work.len()).rev() {
        if work[i].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut work[i], Q::zero());
        let shift = i - data.degree;
        for &(j, a) in &data.lower {
            work[shift + j] -= &c * Q::from_integer(a.into());
        }
    }
    work.truncate(data.degree);
    work
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_ctx::arith::q;

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(20), vec![1, 0, -1, 0, 1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_poly(9), vec![1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(cyclotomic_poly(15).len() - 1, 8);
    }

    #[test]
    fn sum_of_all_fifth_roots_vanishes() {
        let v: Vec<Q> = (0..5).map(|_| q(1)).collect();
        assert!(reduce(&v, 5).iter().all(|c| c.is_zero()));
    }

    #[test]
    fn large_prime_power_degree() {
        let m = 7u64.pow(4);
        let mut v = vec![Q::zero(); m as usize];
        v[m as usize - 1] = q(1);
        let r = reduce(&v, m);
        assert_eq!(r.len() as u64, euler_phi(m));
    }
}
