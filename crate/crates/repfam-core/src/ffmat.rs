//! Exact dense linear algebra over prime fields GF(p).
//!
//! This is the computational substrate for every matroid operation: rank via
//! Gaussian elimination, block row reduction for contraction, minors packed
//! into wedge vectors, and an incremental independence workspace for the
//! greedy representative-set selection. GF(2) gets a bit-packed elimination
//! path since graphic matroids default to it.

use crate::error::{Error, Result};
use crate::set::ElemSet;

/// Largest supported prime modulus: products of two values below 2^61 fit a
/// u128 without overflow during reduction.
pub const MAX_MODULUS: u64 = (1 << 61) - 1;

/// A scalar in GF(modulus).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldElement {
    pub value: u64,
    pub modulus: u64,
}

impl FieldElement {
    pub fn new(value: u64, modulus: u64) -> Self {
        debug_assert!(modulus >= 2 && modulus <= MAX_MODULUS);
        FieldElement { value: value % modulus, modulus }
    }
}

#[inline]
fn subm(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

#[inline]
fn mulm(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powm(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulm(acc, b, m);
        }
        b = mulm(b, b, m);
        e >>= 1;
    }
    acc
}

/// Multiplicative inverse by Fermat; `a` must be nonzero mod a prime `m`.
fn invm(a: u64, m: u64) -> u64 {
    debug_assert!(a % m != 0);
    powm(a, m - 2, m)
}

/// Dense row-major matrix over GF(modulus).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldMatrix {
    pub rows: usize,
    pub cols: usize,
    pub modulus: u64,
    entries: Vec<u64>,
}

impl FieldMatrix {
    pub fn zero(rows: usize, cols: usize, modulus: u64) -> Self {
        assert!(modulus >= 2 && modulus <= MAX_MODULUS, "modulus out of range");
        FieldMatrix { rows, cols, modulus, entries: vec![0; rows * cols] }
    }

    pub fn identity(n: usize, modulus: u64) -> Self {
        let mut m = FieldMatrix::zero(n, n, modulus);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u64>], modulus: u64) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = FieldMatrix::zero(r, c, modulus);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.entries[r * self.cols + c] = v % self.modulus;
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut t = FieldMatrix::zero(self.cols, self.rows, self.modulus);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Submatrix on the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> FieldMatrix {
        let mut s = FieldMatrix::zero(rows.len(), cols.len(), self.modulus);
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                s.set(i, j, self.get(r, c));
            }
        }
        s
    }

    /// Column `c` as a plain vector.
    pub fn column(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Row rank by Gaussian elimination; the input is not mutated.
    pub fn rank(&self) -> usize {
        if self.modulus == 2 {
            return rank_gf2(self);
        }
        let mut work = self.clone();
        let m = self.modulus;
        let mut rank = 0;
        for col in 0..work.cols {
            if rank == work.rows {
                break;
            }
            let Some(pivot) = (rank..work.rows).find(|&r| work.get(r, col) != 0) else {
                continue;
            };
            work.swap_rows(rank, pivot);
            let inv = invm(work.get(rank, col), m);
            for r in rank + 1..work.rows {
                let factor = mulm(work.get(r, col), inv, m);
                if factor != 0 {
                    work.sub_scaled_row(r, rank, factor);
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            let t = self.get(a, c);
            let v = self.get(b, c);
            self.set(a, c, v);
            self.set(b, c, t);
        }
    }

    /// row[target] -= factor * row[source]
    fn sub_scaled_row(&mut self, target: usize, source: usize, factor: u64) {
        let m = self.modulus;
        for c in 0..self.cols {
            let v = subm(self.get(target, c), mulm(factor, self.get(source, c), m), m);
            self.set(target, c, v);
        }
    }

    fn scale_row(&mut self, row: usize, factor: u64) {
        let m = self.modulus;
        for c in 0..self.cols {
            self.set(row, c, mulm(self.get(row, c), factor, m));
        }
    }

    /// Row reduction that turns the listed columns into an identity block on
    /// the first `pivot_cols.len()` rows with zeros everywhere else in those
    /// columns. Fails with [`Error::SingularPivot`] when the pivot columns
    /// are linearly dependent.
    pub fn row_reduce_with_pivots(&self, pivot_cols: &[usize]) -> Result<FieldMatrix> {
        let mut work = self.clone();
        let m = self.modulus;
        for (i, &col) in pivot_cols.iter().enumerate() {
            let Some(pivot) = (i..work.rows).find(|&r| work.get(r, col) != 0) else {
                return Err(Error::SingularPivot);
            };
            work.swap_rows(i, pivot);
            let inv = invm(work.get(i, col), m);
            work.scale_row(i, inv);
            for r in 0..work.rows {
                if r != i {
                    let factor = work.get(r, col);
                    if factor != 0 {
                        work.sub_scaled_row(r, i, factor);
                    }
                }
            }
        }
        Ok(work)
    }

    /// Determinant of a square matrix by elimination.
    pub fn determinant(&self) -> u64 {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return 1; // empty product
        }
        let mut work = self.clone();
        let m = self.modulus;
        let mut det = 1u64;
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| work.get(r, col) != 0) else {
                return 0;
            };
            if pivot != col {
                work.swap_rows(col, pivot);
                det = subm(0, det, m); // sign flip
            }
            let p = work.get(col, col);
            det = mulm(det, p, m);
            let inv = invm(p, m);
            for r in col + 1..n {
                let factor = mulm(work.get(r, col), inv, m);
                if factor != 0 {
                    work.sub_scaled_row(r, col, factor);
                }
            }
        }
        det
    }

    /// The wedge vector of the columns `col_set`: entry indexed by a
    /// p-subset R of rows (in mask order, which is colex) holds
    /// det(self[R, col_set]). It is the zero vector exactly when the chosen
    /// columns are linearly dependent.
    pub fn wedge_vector(&self, col_set: &[usize]) -> Vec<u64> {
        let p = col_set.len();
        assert!(p <= self.rows, "wedge of more columns than rows");
        let row_subsets = ElemSet::subsets_of_size(ElemSet::full(self.rows), p);
        row_subsets
            .iter()
            .map(|rs| {
                let rows: Vec<usize> = rs.iter().collect();
                self.submatrix(&rows, col_set).determinant()
            })
            .collect()
    }
}

/// Rank of a matrix over GF(2) with rows packed into u64 words.
fn rank_gf2(m: &FieldMatrix) -> usize {
    let words = m.cols.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = (0..m.rows)
        .map(|r| {
            let mut w = vec![0u64; words];
            for c in 0..m.cols {
                if m.get(r, c) == 1 {
                    w[c / 64] |= 1 << (c % 64);
                }
            }
            w
        })
        .collect();
    let mut rank = 0;
    for col in 0..m.cols {
        let (wi, bi) = (col / 64, col % 64);
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][wi] >> bi & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[wi] >> bi & 1 == 1 {
                for (w, pw) in row.iter_mut().zip(&pivot_row) {
                    *w ^= pw;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Incremental elimination workspace: accepts a vector iff it is linearly
/// independent of everything accepted so far. Rows are kept in echelon form,
/// indexed by pivot position.
pub struct EliminationWorkspace {
    dim: usize,
    modulus: u64,
    /// pivot column -> reduced row with leading 1 at that column
    rows: Vec<Option<Vec<u64>>>,
    accepted: usize,
}

impl EliminationWorkspace {
    pub fn new(dim: usize, modulus: u64) -> Self {
        EliminationWorkspace { dim, modulus, rows: vec![None; dim], accepted: 0 }
    }

    pub fn accepted(&self) -> usize {
        self.accepted
    }

    /// Try to absorb `v`; returns Ok(true) and keeps it iff independent.
    pub fn insert(&mut self, v: &[u64]) -> Result<bool> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        let m = self.modulus;
        let mut v: Vec<u64> = v.iter().map(|&x| x % m).collect();
        for col in 0..self.dim {
            if v[col] == 0 {
                continue;
            }
            match &self.rows[col] {
                Some(row) => {
                    let factor = v[col];
                    for (x, r) in v.iter_mut().zip(row) {
                        *x = subm(*x, mulm(factor, *r, m), m);
                    }
                }
                None => {
                    let inv = invm(v[col], m);
                    for x in v.iter_mut() {
                        *x = mulm(*x, inv, m);
                    }
                    self.rows[col] = Some(v);
                    self.accepted += 1;
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}
