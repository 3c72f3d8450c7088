//! Dense matrices and subspaces over a [`Field`].
//!
//! Everything here is exact. Row reduction is plain Gauss-Jordan; subspaces
//! keep their basis in reduced row echelon form, which makes the basis
//! canonical and span equality a structural comparison.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Symbol>,
    field: Field,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field.spec())?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Outcome of [`Matrix::solve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<Symbol>),
    /// Underdetermined but consistent. `particular` sets every free variable
    /// to zero; `nullspace` spans the homogeneous solutions.
    Parametric {
        particular: Vec<Symbol>,
        nullspace: Subspace,
    },
    Inconsistent,
}

impl Solution {
    pub fn particular(&self) -> Option<&[Symbol]> {
        match self {
            Solution::Unique(x) => Some(x),
            Solution::Parametric { particular, .. } => Some(particular),
            Solution::Inconsistent => None,
        }
    }
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
            field: field.clone(),
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_vec(field: &Field, rows: usize, cols: usize, data: Vec<Symbol>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&v| !field.contains(v as u64)) {
            return Err(Error::OutOfRange {
                value: bad as u64,
                order: field.order(),
            });
        }
        Ok(Self {
            rows,
            cols,
            data,
            field: field.clone(),
        })
    }

    /// Builds a matrix from row vectors; `cols` is needed for the zero-row case.
    pub fn from_rows<R: AsRef<[Symbol]>>(field: &Field, cols: usize, rows: &[R]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "row of length {} in a matrix with {cols} columns",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(field, rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Symbol {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Symbol) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Symbol] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Symbol>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.spec(), other.field.spec()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = f.mul_add(out.get(r, c), a, other.get(k, c));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Symbol]) -> Result<Vec<Symbol>> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r), x)).collect())
    }

    /// Row vector times matrix: `x^t M`.
    pub fn vec_mul(&self, x: &[Symbol]) -> Result<Vec<Symbol>> {
        if x.len() != self.rows {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                got: x.len(),
            });
        }
        let f = &self.field;
        let mut out = vec![0; self.cols];
        for (r, &a) in x.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(r)) {
                *o = f.mul_add(*o, a, m);
            }
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "stacking {} columns on {}",
                other.cols, self.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
            field: self.field.clone(),
        })
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            cols: self.cols,
            data,
            field: self.field.clone(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Reduced row echelon form and the pivot columns in ascending order.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place(m.cols);
        (m, pivots)
    }

    /// Reduces in place, only choosing pivots among the first `limit` columns.
    fn rref_in_place(&mut self, limit: usize) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..limit {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = f.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in c..self.cols {
                let v = f.mul(self.get(r, j), inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                let factor = self.get(i, c);
                if i == r || factor == 0 {
                    continue;
                }
                for j in c..self.cols {
                    let v = f.sub(self.get(i, j), f.mul(factor, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn invert(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut aug = Self::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            aug.data[r * 2 * n..r * 2 * n + n].copy_from_slice(self.row(r));
            aug.set(r, n + r, 1);
        }
        let pivots = aug.rref_in_place(n);
        if pivots.len() != n {
            return Err(Error::Singular);
        }
        let mut inv = Self::zeros(&self.field, n, n);
        for r in 0..n {
            inv.data[r * n..(r + 1) * n].copy_from_slice(&aug.row(r)[n..]);
        }
        Ok(inv)
    }

    /// Solves `A x = b`. Free variables of an underdetermined system are set
    /// to zero in the particular solution.
    pub fn solve(&self, b: &[Symbol]) -> Result<Solution> {
        if b.len() != self.rows {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                got: b.len(),
            });
        }
        let n = self.cols;
        let mut aug = Self::zeros(&self.field, self.rows, n + 1);
        for (r, &rhs) in b.iter().enumerate() {
            aug.data[r * (n + 1)..r * (n + 1) + n].copy_from_slice(self.row(r));
            aug.set(r, n, rhs);
        }
        let pivots = aug.rref_in_place(n);
        if (pivots.len()..self.rows).any(|r| aug.get(r, n) != 0) {
            return Ok(Solution::Inconsistent);
        }
        let mut x = vec![0; n];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, n);
        }
        if pivots.len() == n {
            return Ok(Solution::Unique(x));
        }
        Ok(Solution::Parametric {
            particular: x,
            nullspace: self.nullspace(),
        })
    }

    /// The right nullspace `{x : A x = 0}` as a subspace of `F^cols`.
    pub fn nullspace(&self) -> Subspace {
        let (r, pivots) = self.rref();
        let f = &self.field;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![0; self.cols];
            v[fc] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r.get(row, fc));
            }
            basis.push(v);
        }
        Subspace::from_vectors(f, self.cols, &basis).expect("shapes agree")
    }
}

/// A subspace of `F^ambient`, stored as an RREF basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

impl Subspace {
    pub fn zero(field: &Field, ambient: usize) -> Self {
        Self {
            ambient,
            basis: Matrix::zeros(field, 0, ambient),
        }
    }

    /// The span of `vectors` (which need not be independent).
    pub fn from_vectors<R: AsRef<[Symbol]>>(field: &Field, ambient: usize, vectors: &[R]) -> Result<Self> {
        Ok(Self::from_matrix(&Matrix::from_rows(field, ambient, vectors)?))
    }

    /// The row space of `m`.
    pub fn from_matrix(m: &Matrix) -> Self {
        let (r, pivots) = m.rref();
        Self {
            ambient: m.cols(),
            basis: r.select_rows(&(0..pivots.len()).collect::<Vec<_>>()),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn field(&self) -> &Field {
        self.basis.field()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch(self.ambient, other.ambient));
        }
        self.basis.same_field(&other.basis)
    }

    pub fn contains(&self, v: &[Symbol]) -> Result<bool> {
        if v.len() != self.ambient {
            return Err(Error::AmbientMismatch(self.ambient, v.len()));
        }
        let m = self
            .basis
            .vstack(&Matrix::from_rows(self.field(), self.ambient, &[v])?)?;
        Ok(m.rank() == self.dim())
    }

    pub fn is_subspace_of(&self, other: &Self) -> Result<bool> {
        self.check(other)?;
        Ok(self.sum(other)?.dim() == other.dim())
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_matrix(&self.basis.vstack(&other.basis)?))
    }

    /// Zassenhaus: reduce `[[U, U], [W, 0]]`; rows whose left half vanishes
    /// carry a basis of `U ∩ W` in their right half.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let b = self.ambient;
        let f = self.field();
        let mut m = Matrix::zeros(f, self.dim() + other.dim(), 2 * b);
        for r in 0..self.dim() {
            let row = self.basis.row(r);
            m.data[r * 2 * b..r * 2 * b + b].copy_from_slice(row);
            m.data[r * 2 * b + b..(r + 1) * 2 * b].copy_from_slice(row);
        }
        for r in 0..other.dim() {
            let at = (self.dim() + r) * 2 * b;
            m.data[at..at + b].copy_from_slice(other.basis.row(r));
        }
        let (red, _) = m.rref();
        let rows: Vec<Vec<Symbol>> = (0..red.rows())
            .map(|r| red.row(r))
            .filter(|row| row[..b].iter().all(|&v| v == 0) && row[b..].iter().any(|&v| v != 0))
            .map(|row| row[b..].to_vec())
            .collect();
        Self::from_vectors(f, b, &rows)
    }
}

/// Dimension of `U_1 + ... + U_m`.
pub fn sum_dim(spaces: &[Subspace]) -> Result<usize> {
    let Some(first) = spaces.first() else {
        return Ok(0);
    };
    let mut acc = first.basis.clone();
    for s in &spaces[1..] {
        first.check(s)?;
        acc = acc.vstack(&s.basis)?;
    }
    Ok(acc.rank())
}

/// `(1, x, x^2, ..., x^(len-1))`.
pub fn vandermonde_row(field: &Field, x: Symbol, len: usize) -> Vec<Symbol> {
    let mut row = Vec::with_capacity(len);
    let mut p = 1;
    for _ in 0..len {
        row.push(p);
        p = field.mul(p, x);
    }
    row
}
