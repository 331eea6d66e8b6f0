//! Hermitian index matrices `b` of the q-expansion, and their enumeration.

use std::cmp::Ordering;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::field_ctx::arith::{q, Q};
use crate::field_ctx::{CMContext, FieldElement};
use crate::schwartz_p::{PartitionData, ResMat};

/// A hermitian matrix over `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermitianMatrix {
    rows: Vec<Vec<FieldElement>>,
}

/// A positive-definite hermitian index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaIndex(HermitianMatrix);

impl HermitianMatrix {
    pub fn new(rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("not square".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if rows[i][j] != rows[j][i].conj() {
                    return Err(Error::InvalidMatrix(format!("not hermitian at ({i},{j})")));
                }
            }
        }
        Ok(HermitianMatrix { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &FieldElement {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<FieldElement>] {
        &self.rows
    }

    fn minor_det(&self, s: usize) -> FieldElement {
        let m: Vec<Vec<FieldElement>> = self.rows[..s].iter().map(|r| r[..s].to_vec()).collect();
        det_field(&m)
    }

    /// Leading principal minors; rational for hermitian matrices.
    pub fn leading_minors(&self) -> Vec<Q> {
        (1..=self.n()).map(|s| self.minor_det(s).u).collect()
    }

    pub fn det(&self) -> Q {
        self.minor_det(self.n()).u
    }

    pub fn trace(&self) -> Q {
        (0..self.n()).map(|i| self.rows[i][i].u.clone()).sum()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.leading_minors().iter().all(|m| m.is_positive())
    }

    /// Image under the first coordinate of `K (x) Q_p = Q_p x Q_p`, mod `modulus`.
    pub fn p_image(&self, ctx: &CMContext, modulus: u64) -> Result<ResMat> {
        let n = self.n();
        let mut e = Vec::with_capacity(n * n);
        for row in &self.rows {
            for x in row {
                e.push(ctx.embed_p_mod(x, modulus)?.0);
            }
        }
        Ok(ResMat { n, q: modulus, e })
    }

    /// `A b B` for diagonal rational `A, B` given by their entries.
    pub fn scale_diag(&self, left: &[Q], right: &[Q]) -> Self {
        let n = self.n();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let s = &left[i] * &right[j];
                        FieldElement::new(&self.rows[i][j].u * &s, &self.rows[i][j].v * &s, self.rows[i][j].d)
                    })
                    .collect()
            })
            .collect();
        HermitianMatrix { rows }
    }

    /// Entries as strings, row-major.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
    }

    pub fn from_strings(rows: &[Vec<String>], d: u64) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| FieldElement::parse(s, d)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(parsed)
    }

    fn cmp_key(&self) -> (Q, Vec<&FieldElement>) {
        (self.trace(), self.rows.iter().flatten().collect())
    }
}

fn det_field(m: &[Vec<FieldElement>]) -> FieldElement {
    let n = m.len();
    match n {
        0 => FieldElement::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = FieldElement::zero();
            for col in 0..n {
                let sub: Vec<Vec<FieldElement>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = &m[0][col] * &det_field(&sub);
                acc = if col % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

impl Ord for HermitianMatrix {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_key().cmp(&other.cmp_key())
    }
}

impl PartialOrd for HermitianMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl BetaIndex {
    pub fn new(m: HermitianMatrix) -> Result<Self> {
        if !m.is_positive_definite() {
            return Err(Error::InvalidMatrix("index not positive definite".into()));
        }
        Ok(BetaIndex(m))
    }

    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        Self::new(HermitianMatrix::new(rows)?)
    }

    /// No hermitian or positivity checks.
    pub fn new_unchecked(rows: Vec<Vec<FieldElement>>) -> Self {
        BetaIndex(HermitianMatrix { rows })
    }

    pub fn scalar(a: i64, d: u64) -> Result<Self> {
        Self::diagonal(&[a], d)
    }

    pub fn diagonal(entries: &[i64], d: u64) -> Result<Self> {
        let n = entries.len();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let x = if i == j { entries[i] } else { 0 };
                        FieldElement { d, ..FieldElement::from_int(x) }
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.0
    }

    /// In `Her_n(O)`-lattice form: integer diagonal and integral coordinates.
    pub fn is_lattice_point(&self) -> bool {
        let m = &self.0;
        (0..m.n()).all(|i| (0..m.n()).all(|j| m.entry(i, j).is_integral_coords()))
    }
}

impl std::ops::Deref for BetaIndex {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.0
    }
}

impl Ord for BetaIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for BetaIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Leading minors at the partition boundaries of the p-image are units.
pub fn in_support(beta: &HermitianMatrix, ctx: &CMContext, part: &PartitionData) -> Result<bool> {
    let img = beta.p_image(ctx, ctx.p)?;
    Ok(part.boundaries().into_iter().all(|s| img.leading_minor(s) % ctx.p != 0))
}

/// All positive-definite `b` in `Her_n(Z[sqrt(-D)])` with integer diagonal
/// and `tr b <= B` whose p-image lies in the support set, in canonical order.
pub fn enumerate_beta(n: usize, bound: u64, ctx: &CMContext, part: &PartitionData) -> Result<Vec<BetaIndex>> {
    let d = ctx.d;
    let mut out = Vec::new();
    let mut diag = vec![1i64; n];
    enumerate_diag(n, bound as i64, 0, &mut diag, &mut |diag: &[i64]| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut choice = vec![(0i64, 0i64); pairs.len()];
        let mut rec = |choice: &[(i64, i64)]| -> Result<()> {
            let mut rows = vec![vec![FieldElement { d, ..FieldElement::zero() }; n]; n];
            for i in 0..n {
                rows[i][i] = FieldElement { d, ..FieldElement::from_int(diag[i]) };
            }
            for (&(i, j), &(u, v)) in pairs.iter().zip(choice) {
                rows[i][j] = FieldElement::new(q(u), q(v), d);
                rows[j][i] = rows[i][j].conj();
            }
            let m = HermitianMatrix { rows };
            if m.is_positive_definite() && in_support(&m, ctx, part)? {
                out.push(BetaIndex(m));
            }
            Ok(())
        };
        enumerate_offdiag(&pairs, diag, d as i64, 0, &mut choice, &mut rec)
    })?;
    out.sort();
    Ok(out)
}

fn enumerate_diag<F>(n: usize, budget: i64, i: usize, diag: &mut Vec<i64>, f: &mut F) -> Result<()>
where
    F: FnMut(&[i64]) -> Result<()>,
{
    if i == n {
        return f(diag);
    }
    let rest = (n - i - 1) as i64;
    for a in 1..=budget - rest {
        diag[i] = a;
        enumerate_diag(n, budget - a, i + 1, diag, f)?;
    }
    Ok(())
}

fn enumerate_offdiag<F>(
    pairs: &[(usize, usize)],
    diag: &[i64],
    d: i64,
    t: usize,
    choice: &mut Vec<(i64, i64)>,
    f: &mut F,
) -> Result<()>
where
    F: FnMut(&[(i64, i64)]) -> Result<()>,
{
    if t == pairs.len() {
        return f(choice);
    }
    let (i, j) = pairs[t];
    let cap = diag[i] * diag[j];
    let mut u = 0i64;
    while u * u < cap {
        u += 1;
    }
    for u in -u..=u {
        for v in -cap..=cap {
            if u * u + d * v * v < cap {
                choice[t] = (u, v);
                enumerate_offdiag(pairs, diag, d, t + 1, choice, f)?;
            }
        }
    }
    Ok(())
}
