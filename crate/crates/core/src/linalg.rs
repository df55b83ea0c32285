//! Dense exact linear algebra over `F_q`.
//!
//! Pivoting is first-nonzero throughout; there is no notion of pivot size over
//! a finite field, and it keeps every routine deterministic.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

/// Default cap on the number of square submatrices
/// [`Matrix::all_square_submatrices_invertible`] will examine.
pub const DEFAULT_SUBMATRIX_CAP: u128 = 1_000_000;

/// A row-major matrix over one prime field. Entries are stored as residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, reducing every entry mod `q`.
    pub fn new(field: FieldSpec, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let q = field.order();
        let data = data.into_iter().map(|v| v % q).collect();
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows(field: FieldSpec, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(field, rows.len(), cols, rows.concat())
    }

    pub fn from_fn(
        field: FieldSpec,
        rows: usize,
        cols: usize,
        mut entry: impl FnMut(usize, usize) -> u64,
    ) -> Self {
        let q = field.order();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(entry(r, c) % q);
            }
        }
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        Self::from_fn(field, n, n, |r, c| u64::from(r == c))
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.field.order();
    }

    pub fn element(&self, r: usize, c: usize) -> FieldElement {
        self.field.element(self.get(r, c))
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |r, c| self.get(c, r))
    }

    fn check_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field.order(),
                right: other.field.order(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d = f.add(*d, f.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "cannot add {:?} and {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(Matrix { data, ..*self })
    }

    pub fn scale(&self, c: u64) -> Matrix {
        let f = self.field;
        let c = c % f.order();
        Matrix {
            data: self.data.iter().map(|&v| f.mul(v, c)).collect(),
            ..*self
        }
    }

    /// `self += c * other`, shapes assumed equal.
    fn axpy(&mut self, c: u64, other: &Matrix) {
        let f = self.field;
        for (d, &s) in self.data.iter_mut().zip(&other.data) {
            *d = f.add(*d, f.mul(c, s));
        }
    }

    /// Sub-block `rows x cols` starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(self.field, rows, cols, |r, c| self.get(r0 + r, c0 + c))
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.data[(r0 + r) * self.cols + c0 + c] = block.get(r, c);
            }
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        Matrix::from_fn(self.field, self.rows, cols.len(), |r, c| {
            self.get(r, cols[c])
        })
    }

    /// Reduces a copy to row echelon form and returns the pivot columns, in
    /// increasing order.
    fn pivot_columns(&self) -> Vec<usize> {
        let f = self.field;
        let mut m = self.data.clone();
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| m[r * cols + col] != 0) else {
                continue;
            };
            if p != row {
                for c in col..cols {
                    m.swap(p * cols + c, row * cols + c);
                }
            }
            let inv = f.inv(m[row * cols + col]).expect("pivot is nonzero");
            for r in row + 1..self.rows {
                let factor = f.mul(m[r * cols + col], inv);
                if factor == 0 {
                    continue;
                }
                for c in col..cols {
                    let v = f.mul(factor, m[row * cols + c]);
                    m[r * cols + c] = f.sub(m[r * cols + c], v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.pivot_columns().len()
    }

    /// Greedy leftmost set of `rows` column indices whose square submatrix is
    /// invertible. Requires full row rank.
    pub fn select_information_columns(&self) -> Result<Vec<usize>> {
        let pivots = self.pivot_columns();
        if pivots.len() < self.rows {
            return Err(Error::Singular {
                rank: pivots.len(),
                expected: self.rows,
            });
        }
        Ok(pivots)
    }

    /// Whether every `rows x rows` column-submatrix is invertible, i.e. the row
    /// space is an MDS code. Checked exhaustively.
    pub fn all_square_submatrices_invertible(&self, cap: u128) -> Result<bool> {
        let (k, n) = self.shape();
        if k > n {
            return Err(Error::ShapeMismatch(format!(
                "{k}x{n} matrix has no {k}x{k} column-submatrices"
            )));
        }
        let count = binomial(n as u64, k as u64);
        if count > cap {
            return Err(Error::TooManySubmatrices { count, cap });
        }
        Ok((0..n)
            .combinations(k)
            .all(|cols| self.select_columns(&cols).rank() == k))
    }

    /// `self * v` for a column vector of residues.
    pub fn mul_vector(&self, v: &[u64]) -> Result<Vec<u64>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    /// `self * c` where `c` is a vector of matrix blocks: entry `i` of the
    /// result is `sum_t self[i][t] * c[t]`.
    pub fn mul_blocks(&self, c: &BlockVector) -> Result<BlockVector> {
        if c.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "block vector of length {} for {} columns",
                c.len(),
                self.cols
            )));
        }
        let (br, bc) = c.block_shape();
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let mut acc = Matrix::zeros(self.field, br, bc);
            for (t, block) in c.blocks().iter().enumerate() {
                let a = self.get(r, t);
                if a != 0 {
                    acc.axpy(a, block);
                }
            }
            out.push(acc);
        }
        BlockVector::new(out)
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(u128::from(n - i)) {
            Some(v) => v / u128::from(i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// A vector of equally-shaped matrices over one field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockVector {
    blocks: Vec<Matrix>,
}

impl BlockVector {
    pub fn new(blocks: Vec<Matrix>) -> Result<Self> {
        if let Some(first) = blocks.first() {
            for b in &blocks[1..] {
                first.check_field(b)?;
                if b.shape() != first.shape() {
                    return Err(Error::ShapeMismatch(format!(
                        "blocks of shape {:?} and {:?}",
                        first.shape(),
                        b.shape()
                    )));
                }
            }
        }
        Ok(BlockVector { blocks })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Matrix> {
        self.blocks
    }

    pub fn block_shape(&self) -> (usize, usize) {
        self.blocks.first().map_or((0, 0), Matrix::shape)
    }
}

/// `P A = L U` for a square invertible matrix, stored compactly. Built once per
/// evaluation matrix and reused for every right-hand side.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    field: FieldSpec,
    n: usize,
    /// Unit-lower `L` below the diagonal, `U` on and above it.
    lu: Vec<u64>,
    /// Row `i` of `P A` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    /// Inverses of the diagonal of `U`.
    diag_inv: Vec<u64>,
}

impl LuFactorization {
    pub fn new(a: &Matrix) -> Result<Self> {
        let (n, cols) = a.shape();
        if n != cols {
            return Err(Error::ShapeMismatch(format!(
                "{n}x{cols} matrix is not square"
            )));
        }
        let f = a.field;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| lu[r * n + k] != 0) else {
                return Err(Error::Singular {
                    rank: a.rank(),
                    expected: n,
                });
            };
            if p != k {
                for c in 0..n {
                    lu.swap(p * n + c, k * n + c);
                }
                perm.swap(p, k);
            }
            let inv = f.inv(lu[k * n + k])?;
            for r in k + 1..n {
                let l = f.mul(lu[r * n + k], inv);
                lu[r * n + k] = l;
                if l == 0 {
                    continue;
                }
                for c in k + 1..n {
                    let v = f.mul(l, lu[k * n + c]);
                    lu[r * n + c] = f.sub(lu[r * n + c], v);
                }
            }
        }
        let diag_inv = (0..n)
            .map(|i| f.inv(lu[i * n + i]))
            .collect::<Result<Vec<_>>>()?;
        Ok(LuFactorization {
            field: f,
            n,
            lu,
            perm,
            diag_inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A c = rhs` for scalar `rhs`.
    pub fn solve_vector(&self, rhs: &[u64]) -> Result<Vec<u64>> {
        if rhs.len() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side of length {} for a {n}x{n} system",
                rhs.len(),
                n = self.n
            )));
        }
        let f = self.field;
        let n = self.n;
        let mut y: Vec<u64> = self.perm.iter().map(|&p| rhs[p] % f.order()).collect();
        for i in 0..n {
            for j in 0..i {
                let v = f.mul(self.lu[i * n + j], y[j]);
                y[i] = f.sub(y[i], v);
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = f.mul(self.lu[i * n + j], y[j]);
                y[i] = f.sub(y[i], v);
            }
            y[i] = f.mul(y[i], self.diag_inv[i]);
        }
        Ok(y)
    }

    /// Solves `A c = rhs` where the unknowns and right-hand side are matrix
    /// blocks; the substitution runs on whole blocks at once.
    pub fn solve_blocks(&self, rhs: &BlockVector) -> Result<BlockVector> {
        if rhs.len() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side of length {} for a {n}x{n} system",
                rhs.len(),
                n = self.n
            )));
        }
        if let Some(b) = rhs.blocks.first() {
            if b.field != self.field {
                return Err(Error::FieldMismatch {
                    left: self.field.order(),
                    right: b.field.order(),
                });
            }
        }
        let n = self.n;
        let mut y: Vec<Matrix> = self.perm.iter().map(|&p| rhs.blocks[p].clone()).collect();
        let f = self.field;
        for i in 0..n {
            let (done, rest) = y.split_at_mut(i);
            for (j, yj) in done.iter().enumerate() {
                let l = self.lu[i * n + j];
                if l != 0 {
                    rest[0].axpy(f.neg(l), yj);
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = y.split_at_mut(i + 1);
            let yi = &mut head[i];
            for (off, yj) in tail.iter().enumerate() {
                let u = self.lu[i * n + i + 1 + off];
                if u != 0 {
                    yi.axpy(f.neg(u), yj);
                }
            }
            *yi = yi.scale(self.diag_inv[i]);
        }
        BlockVector::new(y)
    }
}

/// Solves `V c = rhs` for a block right-hand side.
pub fn solve(v: &Matrix, rhs: &BlockVector) -> Result<BlockVector> {
    LuFactorization::new(v)?.solve_blocks(rhs)
}
