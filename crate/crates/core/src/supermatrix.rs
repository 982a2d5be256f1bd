//! Block supermatrices over formal entries: products, pseudo-units, minors, inversion.

use crate::algebra::{AssumptionSet, Ctx, PartitionRelation, Substitution, SuperElement};
use crate::error::{Error, Result};
use crate::nu::{entry_add, entry_mul, entry_sub, FormalEntry, NuInvolution};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Strictly increasing list of `k+l` column indices from `1..=m+n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    pub indices: Vec<usize>,
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub n: usize,
}

impl MultiIndex {
    pub fn new(indices: Vec<usize>, k: usize, l: usize, m: usize, n: usize) -> Result<Self> {
        if indices.len() != k + l {
            return Err(Error::InvalidIndex(format!(
                "{indices:?} has length {}, expected {}",
                indices.len(),
                k + l
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndex(format!("{indices:?} is not strictly increasing")));
        }
        if indices.first().map(|&i| i == 0).unwrap_or(false)
            || indices.last().map(|&i| i > m + n).unwrap_or(false)
        {
            return Err(Error::InvalidIndex(format!("{indices:?} outside 1..={}", m + n)));
        }
        Ok(MultiIndex {
            indices,
            k,
            l,
            m,
            n,
        })
    }

    /// All multi-indices for `(k, l, m, n)`, in lexicographic order.
    pub fn all(k: usize, l: usize, m: usize, n: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(start: usize, need: usize, top: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if need == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..=top {
                if top - i + 1 < need {
                    break;
                }
                cur.push(i);
                rec(i + 1, need - 1, top, cur, out);
                cur.pop();
            }
        }
        let mut raw = Vec::new();
        rec(1, k + l, m + n, &mut cur, &mut raw);
        for v in raw {
            out.push(MultiIndex {
                indices: v,
                k,
                l,
                m,
                n,
            });
        }
        out
    }

    /// `k` even columns and `l` odd ones (an ordinary, non-ν chart).
    pub fn is_balanced(&self) -> bool {
        self.indices.iter().filter(|&&i| i <= self.m).count() == self.k
    }

    pub fn contains(&self, c: usize) -> bool {
        self.indices.binary_search(&c).is_ok()
    }

    pub fn label(&self) -> String {
        self.indices
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.label())
    }
}

/// `(k|l)×(m|n)` matrix; row `r` is even iff `r < k`, column `c` is even iff `c < m`.
#[derive(Clone, PartialEq)]
pub struct SuperMatrix {
    pub ctx: Ctx,
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub n: usize,
    entries: Vec<Vec<FormalEntry>>,
}

impl fmt::Debug for SuperMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "({}|{})x({}|{})", self.k, self.l, self.m, self.n)?;
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl SuperMatrix {
    /// Build and validate dimensions and parity discipline.
    pub fn new(ctx: &Ctx, k: usize, l: usize, m: usize, n: usize, entries: Vec<Vec<FormalEntry>>) -> Result<Self> {
        let a = SuperMatrix::new_unchecked(ctx, k, l, m, n, entries)?;
        a.check_parity()?;
        Ok(a)
    }

    /// Dimensions are checked, parity is not.
    pub fn new_unchecked(
        ctx: &Ctx,
        k: usize,
        l: usize,
        m: usize,
        n: usize,
        entries: Vec<Vec<FormalEntry>>,
    ) -> Result<Self> {
        if entries.len() != k + l || entries.iter().any(|r| r.len() != m + n) {
            return Err(Error::DimensionMismatch(format!(
                "expected ({k}|{l})x({m}|{n}) entries"
            )));
        }
        for row in &entries {
            for e in row {
                if let FormalEntry::Ring(a) = e {
                    if !crate::algebra::context::same_ctx(a.ctx(), ctx) {
                        return Err(Error::ContextMismatch("matrix entry".into()));
                    }
                }
            }
        }
        Ok(SuperMatrix {
            ctx: ctx.clone(),
            k,
            l,
            m,
            n,
            entries,
        })
    }

    pub fn zeros(ctx: &Ctx, k: usize, l: usize, m: usize, n: usize) -> Self {
        SuperMatrix {
            ctx: ctx.clone(),
            k,
            l,
            m,
            n,
            entries: vec![vec![FormalEntry::zero(ctx); m + n]; k + l],
        }
    }

    pub fn identity(ctx: &Ctx, k: usize, l: usize) -> Self {
        let mut a = SuperMatrix::zeros(ctx, k, l, k, l);
        for i in 0..k + l {
            a.entries[i][i] = FormalEntry::one(ctx);
        }
        a
    }

    /// Matrix of ring elements.
    pub fn from_ring(ctx: &Ctx, k: usize, l: usize, m: usize, n: usize, rows: Vec<Vec<SuperElement>>) -> Result<Self> {
        SuperMatrix::new(
            ctx,
            k,
            l,
            m,
            n,
            rows.into_iter()
                .map(|r| r.into_iter().map(FormalEntry::Ring).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.k + self.l
    }

    pub fn cols(&self) -> usize {
        self.m + self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &FormalEntry {
        &self.entries[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, e: FormalEntry) {
        self.entries[r][c] = e;
    }

    pub fn entries(&self) -> &[Vec<FormalEntry>] {
        &self.entries
    }

    /// Expected parity of cell `(r, c)`.
    pub fn block_parity(&self, r: usize, c: usize) -> u8 {
        ((r >= self.k) != (c >= self.m)) as u8
    }

    pub fn check_parity(&self) -> Result<()> {
        for (r, row) in self.entries.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                let p = self.block_parity(r, c);
                if !e.has_parity(p) {
                    return Err(Error::ParityViolation(format!(
                        "entry ({}, {}) = {e} in a block of parity {p}",
                        r + 1,
                        c + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn equals(&self, other: &SuperMatrix) -> bool {
        self.k == other.k
            && self.l == other.l
            && self.m == other.m
            && self.n == other.n
            && self
                .entries
                .iter()
                .flatten()
                .zip(other.entries.iter().flatten())
                .all(|(a, b)| a.equals(b))
    }

    /// Equality modulo a partition relation (ring entries only).
    pub fn equals_mod(&self, other: &SuperMatrix, rel: Option<&PartitionRelation>) -> bool {
        self.first_difference(other, rel).is_none()
    }

    /// First cell where the matrices disagree.
    pub fn first_difference(&self, other: &SuperMatrix, rel: Option<&PartitionRelation>) -> Option<(usize, usize)> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Some((0, 0));
        }
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                let same = match (&self.entries[r][c], &other.entries[r][c]) {
                    (FormalEntry::Ring(a), FormalEntry::Ring(b)) => a.equals(b, rel),
                    (FormalEntry::NuUnit, FormalEntry::NuUnit) => true,
                    _ => false,
                };
                if !same {
                    return Some((r, c));
                }
            }
        }
        None
    }

    pub fn is_identity(&self) -> bool {
        self.rows() == self.cols() && self.equals(&SuperMatrix::identity(&self.ctx, self.k, self.l))
    }

    /// Apply a ring map to every ring entry; 1ν is kept.
    pub fn map_ring(&self, ctx: &Ctx, mut f: impl FnMut(&SuperElement) -> Result<SuperElement>) -> Result<SuperMatrix> {
        let mut entries = Vec::with_capacity(self.rows());
        for row in &self.entries {
            let mut nr = Vec::with_capacity(row.len());
            for e in row {
                nr.push(match e {
                    FormalEntry::Ring(a) => FormalEntry::Ring(f(a)?),
                    FormalEntry::NuUnit => FormalEntry::NuUnit,
                });
            }
            entries.push(nr);
        }
        SuperMatrix::new_unchecked(ctx, self.k, self.l, self.m, self.n, entries)
    }

    pub fn substitute(&self, s: &Substitution, assume: &mut AssumptionSet) -> Result<SuperMatrix> {
        self.map_ring(&s.target, |a| s.apply(a, assume))
    }

    pub fn transpose_dims(&self) -> (usize, usize, usize, usize) {
        (self.m, self.n, self.k, self.l)
    }

    /// Row `r` as a vector of entries.
    pub fn row(&self, r: usize) -> &[FormalEntry] {
        &self.entries[r]
    }

    /// Rows with the given 0-based indices, keeping the column split.
    pub fn select_rows(&self, rows: &[usize], k: usize, l: usize) -> Result<SuperMatrix> {
        let entries = rows
            .iter()
            .map(|&r| {
                self.entries
                    .get(r)
                    .cloned()
                    .ok_or_else(|| Error::OutOfRange(format!("row {}", r + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        SuperMatrix::new_unchecked(&self.ctx, k, l, self.m, self.n, entries)
    }

    /// Columns with the given 0-based indices.
    pub fn select_cols(&self, cols: &[usize], m: usize, n: usize) -> Result<SuperMatrix> {
        let mut entries = Vec::with_capacity(self.rows());
        for row in &self.entries {
            let mut nr = Vec::with_capacity(cols.len());
            for &c in cols {
                nr.push(
                    row.get(c)
                        .cloned()
                        .ok_or_else(|| Error::OutOfRange(format!("column {}", c + 1)))?,
                );
            }
            entries.push(nr);
        }
        SuperMatrix::new_unchecked(&self.ctx, self.k, self.l, m, n, entries)
    }

    pub fn display_rows(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|e| e.to_string()).collect())
            .collect()
    }
}

/// `A·B` with dot products accumulated left to right in the inner index.
pub fn smul(a: &SuperMatrix, b: &SuperMatrix, inv: &NuInvolution) -> Result<SuperMatrix> {
    if a.m != b.k || a.n != b.l {
        return Err(Error::DimensionMismatch(format!(
            "column split {}|{} vs row split {}|{}",
            a.m, a.n, b.k, b.l
        )));
    }
    let ctx = &a.ctx;
    let mut entries = Vec::with_capacity(a.rows());
    for i in 0..a.rows() {
        let mut row = Vec::with_capacity(b.cols());
        for j in 0..b.cols() {
            let mut acc = FormalEntry::zero(ctx);
            for t in 0..a.cols() {
                let x = &a.entries[i][t];
                let y = &b.entries[t][j];
                if x.is_zero() || y.is_zero() {
                    continue;
                }
                acc = entry_add(&acc, &entry_mul(x, y, inv)?)?;
            }
            row.push(acc);
        }
        entries.push(row);
    }
    SuperMatrix::new_unchecked(ctx, a.k, a.l, b.m, b.n, entries)
}

/// Diagonal `(k|l)×(k|l)` matrix with 1 where row and column `i_a` parities agree, 1ν otherwise.
pub fn pseudo_unit(ctx: &Ctx, idx: &MultiIndex) -> SuperMatrix {
    let mut a = SuperMatrix::zeros(ctx, idx.k, idx.l, idx.k, idx.l);
    for (pos, &i) in idx.indices.iter().enumerate() {
        let row_even = pos < idx.k;
        let col_even = i <= idx.m;
        a.entries[pos][pos] = if row_even == col_even {
            FormalEntry::one(ctx)
        } else {
            FormalEntry::NuUnit
        };
    }
    a
}

/// Columns of `a` indexed by `idx`, in order, with column split `k|l`.
///
/// The result need not satisfy the parity discipline; `minor(A, J)·pseudo_unit(J)` does.
pub fn minor(a: &SuperMatrix, idx: &MultiIndex) -> Result<SuperMatrix> {
    if let Some(&c) = idx.indices.iter().find(|&&c| c == 0 || c > a.cols()) {
        return Err(Error::OutOfRange(format!("column {c} of a matrix with {} columns", a.cols())));
    }
    let cols: Vec<usize> = idx.indices.iter().map(|c| c - 1).collect();
    // split like the pseudo-unit it is multiplied with, so minor(A^I, I) = pseudo_unit(I)
    a.select_cols(&cols, idx.k, idx.l)
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum PivotKind {
    Constant,
    Unit,
    Function,
}

fn pivot_kind(e: &FormalEntry) -> Option<PivotKind> {
    match e {
        FormalEntry::NuUnit => Some(PivotKind::Unit),
        FormalEntry::Ring(a) => {
            if a.parity() != Some(0) {
                return None;
            }
            let b = a.body();
            if b.is_zero() {
                None
            } else if b.as_constant().is_some() {
                Some(PivotKind::Constant)
            } else {
                Some(PivotKind::Function)
            }
        }
    }
}

/// Gauss–Jordan inverse with graded pivoting; inverted pivots extend `assume`.
pub fn invert(b: &SuperMatrix, inv: &NuInvolution, assume: &mut AssumptionSet) -> Result<SuperMatrix> {
    if b.k != b.m || b.l != b.n {
        return Err(Error::DimensionMismatch(format!(
            "inverse of a ({}|{})x({}|{}) matrix",
            b.k, b.l, b.m, b.n
        )));
    }
    let ctx = &b.ctx;
    let size = b.rows();
    let mut w = b.entries.clone();
    let mut r = SuperMatrix::identity(ctx, b.k, b.l).entries;
    for c in 0..size {
        let pick = (c..size)
            .filter_map(|row| pivot_kind(&w[row][c]).map(|k| (k, row)))
            .min();
        let (kind, prow) = match pick {
            Some(p) => p,
            None => {
                return Err(Error::Singular(format!(
                    "no invertible pivot in column {} of the reduced matrix",
                    c + 1
                )))
            }
        };
        w.swap(c, prow);
        r.swap(c, prow);
        let scale = match kind {
            PivotKind::Unit => FormalEntry::NuUnit,
            _ => {
                let p = w[c][c].ring().expect("ring pivot").clone();
                FormalEntry::Ring(p.invert(assume)?)
            }
        };
        if !scale.is_one() {
            for j in 0..size {
                w[c][j] = entry_mul(&scale, &w[c][j], inv)?;
                r[c][j] = entry_mul(&scale, &r[c][j], inv)?;
            }
        }
        debug_assert!(w[c][c].is_one());
        for row in 0..size {
            if row == c || w[row][c].is_zero() {
                continue;
            }
            let f = w[row][c].clone();
            for j in 0..size {
                if !w[c][j].is_zero() {
                    let t = entry_mul(&f, &w[c][j], inv)?;
                    w[row][j] = entry_sub(ctx, &w[row][j], &t)?;
                }
                if !r[c][j].is_zero() {
                    let t = entry_mul(&f, &r[c][j], inv)?;
                    r[row][j] = entry_sub(ctx, &r[row][j], &t)?;
                }
            }
        }
    }
    SuperMatrix::new_unchecked(ctx, b.k, b.l, b.k, b.l, r)
}

/// Rank of the reduced matrix: odd generators set to 0, each 1ν kept as a
/// structural unit (a fresh even symbol, so it cannot cancel against ring entries).
pub fn reduced_rank(a: &SuperMatrix) -> usize {
    use crate::algebra::EvenScalar;
    let u = EvenScalar::var(a.ctx.p());
    let mut w: Vec<Vec<EvenScalar>> = a
        .entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| match e {
                    FormalEntry::Ring(x) => x.body(),
                    FormalEntry::NuUnit => u.clone(),
                })
                .collect()
        })
        .collect();
    let (rows, cols) = (a.rows(), a.cols());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !w[r][c].is_zero()) else {
            continue;
        };
        w.swap(rank, p);
        let inv = w[rank][c].recip().expect("nonzero pivot");
        for r in 0..rows {
            if r == rank || w[r][c].is_zero() {
                continue;
            }
            let f = w[r][c].mul(&inv);
            for j in c..cols {
                let t = f.mul(&w[rank][j]);
                w[r][j] = w[r][j].sub(&t);
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GeneratorContext;

    #[test]
    fn paper_pseudo_unit() {
        let ctx = GeneratorContext::standard(4, 4).unwrap();
        let i = MultiIndex::new(vec![1, 2, 3, 6], 2, 2, 3, 3).unwrap();
        let u = pseudo_unit(&ctx, &i);
        let diag: Vec<bool> = (0..4).map(|a| u.get(a, a).is_nu_unit()).collect();
        assert_eq!(diag, vec![false, false, true, false]);
        let nu = NuInvolution::toggle_first(&ctx);
        assert!(smul(&u, &u, &nu).unwrap().is_identity());
        assert!(invert(&u, &nu, &mut AssumptionSet::new()).unwrap().equals(&u));
    }

    #[test]
    fn two_by_two_odd_inverse() {
        let ctx = GeneratorContext::standard(0, 2).unwrap();
        let nu = NuInvolution::toggle_first(&ctx);
        let one = SuperElement::one(&ctx);
        let e1 = SuperElement::odd_gen(&ctx, 0);
        let e2 = SuperElement::odd_gen(&ctx, 1);
        let a = SuperMatrix::from_ring(&ctx, 1, 1, 1, 1, vec![vec![one.clone(), e1.clone()], vec![e2.clone(), one.clone()]]).unwrap();
        let ai = invert(&a, &nu, &mut AssumptionSet::new()).unwrap();
        let e12 = e1.mul(&e2).unwrap();
        let expect = SuperMatrix::from_ring(
            &ctx,
            1,
            1,
            1,
            1,
            vec![
                vec![one.add(&e12).unwrap(), e1.neg()],
                vec![e2.neg(), one.sub(&e12).unwrap()],
            ],
        )
        .unwrap();
        assert!(ai.equals(&expect), "{ai:?}");
        assert!(smul(&a, &ai, &nu).unwrap().is_identity());
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(MultiIndex::all(1, 1, 2, 2).len(), 6);
        assert_eq!(MultiIndex::all(2, 2, 3, 3).len(), 15);
        assert!(MultiIndex::new(vec![2, 1], 1, 1, 2, 2).is_err());
    }
}
