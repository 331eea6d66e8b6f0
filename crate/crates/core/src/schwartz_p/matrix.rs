//! Small square matrices over `Z/q`, stored row-major. Sizes here are at
//! most 3, so determinants go by cofactor expansion.

use crate::field_ctx::arith::mod_inv;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResMat {
    pub n: usize,
    pub q: u64,
    pub e: Vec<u64>,
}

impl ResMat {
    pub fn new(n: usize, q: u64, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), n * n);
        let e = entries.iter().map(|&x| x.rem_euclid(q as i64) as u64).collect();
        ResMat { n, q, e }
    }

    pub fn identity(n: usize, q: u64) -> Self {
        let mut e = vec![0; n * n];
        for i in 0..n {
            e[i * n + i] = 1 % q;
        }
        ResMat { n, q, e }
    }

    pub fn zero(n: usize, q: u64) -> Self {
        ResMat { n, q, e: vec![0; n * n] }
    }

    /// The matrix with base-`q` digits of `idx` as row-major entries.
    pub fn from_index(n: usize, q: u64, mut idx: u64) -> Self {
        let mut e = vec![0; n * n];
        for slot in e.iter_mut().rev() {
            *slot = idx % q;
            idx /= q;
        }
        ResMat { n, q, e }
    }

    pub fn index(&self) -> u64 {
        self.e.iter().fold(0, |acc, &x| acc * self.q + x)
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.e[i * self.n + j]
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut e = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                e[j * n + i] = self.e[i * n + j];
            }
        }
        ResMat { n, q: self.q, e }
    }

    pub fn neg(&self) -> Self {
        let q = self.q;
        ResMat { n: self.n, q, e: self.e.iter().map(|&x| (q - x) % q).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let q = self.q as u128;
        let mut e = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: u128 = 0;
                for t in 0..n {
                    acc += self.e[i * n + t] as u128 * other.e[t * n + j] as u128;
                }
                e[i * n + j] = (acc % q) as u64;
            }
        }
        ResMat { n, q: self.q, e }
    }

    /// `sum_ij A_ij B_ij`, which is `tr(A tB)`.
    pub fn pairing(&self, other: &Self) -> u64 {
        let q = self.q as u128;
        let s: u128 = self.e.iter().zip(&other.e).map(|(&a, &b)| a as u128 * b as u128).sum();
        (s % q) as u64
    }

    pub fn trace_product(&self, other: &Self) -> u64 {
        self.pairing(&other.transpose())
    }

    /// Submatrix on rows and columns `lo..hi`.
    pub fn block(&self, lo: usize, hi: usize) -> Self {
        let s = hi - lo;
        let mut e = Vec::with_capacity(s * s);
        for i in lo..hi {
            for j in lo..hi {
                e.push(self.get(i, j));
            }
        }
        ResMat { n: s, q: self.q, e }
    }

    pub fn det(&self) -> u64 {
        let signed: Vec<i128> = self.e.iter().map(|&x| x as i128).collect();
        det_rec(&signed, self.n, self.q as i128).rem_euclid(self.q as i128) as u64
    }

    /// Determinant of the leading `s x s` block.
    pub fn leading_minor(&self, s: usize) -> u64 {
        self.block(0, s).det()
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let d = self.det();
        let dinv = mod_inv(d, self.q)?;
        let mut e = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                // adj(A)_{ij} = (-1)^{i+j} det(A without row j, column i)
                let cof = if n == 1 { 1 } else { self.cofactor(j, i) };
                e[i * n + j] = (cof as u128 * dinv as u128 % self.q as u128) as u64;
            }
        }
        Some(ResMat { n, q: self.q, e })
    }

    fn cofactor(&self, row: usize, col: usize) -> u64 {
        let n = self.n;
        let mut sub = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != row) {
            for j in (0..n).filter(|&j| j != col) {
                sub.push(self.get(i, j) as i128);
            }
        }
        let q = self.q as i128;
        let d = det_rec(&sub, n - 1, q);
        let signed = if (row + col) % 2 == 0 { d } else { -d };
        signed.rem_euclid(q) as u64
    }

    /// Reduce to a smaller modulus dividing `q`.
    pub fn reduce(&self, q: u64) -> Self {
        ResMat { n: self.n, q, e: self.e.iter().map(|&x| x % q).collect() }
    }
}

fn det_rec(m: &[i128], n: usize, q: i128) -> i128 {
    match n {
        0 => 1,
        1 => m[0] % q,
        2 => (m[0] * m[3] - m[1] * m[2]) % q,
        _ => {
            let mut acc = 0i128;
            for col in 0..n {
                let mut sub = Vec::with_capacity((n - 1) * (n - 1));
                for i in 1..n {
                    for j in (0..n).filter(|&j| j != col) {
                        sub.push(m[i * n + j]);
                    }
                }
                let term = m[col] * det_rec(&sub, n - 1, q) % q;
                acc = if col % 2 == 0 { acc + term } else { acc - term } % q;
            }
            acc
        }
    }
}

/// All of `M_n(Z/q)` in index order.
pub fn all_matrices(n: usize, q: u64) -> impl Iterator<Item = ResMat> {
    let count = q.pow((n * n) as u32);
    (0..count).map(move |i| ResMat::from_index(n, q, i))
}

/// `|GL_n(Z/p^c)| = p^{(c-1) n^2} prod_{i<n} (p^n - p^i)`.
pub fn gl_order(n: usize, p: u64, c: u32) -> u64 {
    let n32 = n as u32;
    let base: u64 = (0..n32).map(|i| p.pow(n32) - p.pow(i)).product();
    base * p.pow((c - 1) * n32 * n32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for i in [0u64, 1, 17, 624] {
            assert_eq!(ResMat::from_index(2, 5, i).index(), i);
        }
        assert_eq!(ResMat::new(2, 5, &[0, 0, 0, 1]).index(), 1);
    }

    #[test]
    fn inverse_and_det() {
        for m in all_matrices(2, 5) {
            if let Some(inv) = m.inverse() {
                assert_eq!(m.mul(&inv), ResMat::identity(2, 5));
            } else {
                assert_eq!(m.det() % 5, 0);
            }
        }
        let a = ResMat::new(3, 7, &[1, 2, 3, 0, 1, 4, 5, 6, 0]);
        assert_eq!(a.det(), 1);
        assert_eq!(a.mul(&a.inverse().unwrap()), ResMat::identity(3, 7));
    }

    #[test]
    fn gl_orders() {
        assert_eq!(gl_order(2, 5, 1), 480);
        assert_eq!(gl_order(1, 5, 2), 20);
        let count = all_matrices(2, 3).filter(|m| m.det() % 3 != 0).count() as u64;
        assert_eq!(count, gl_order(2, 3, 1));
    }
}
