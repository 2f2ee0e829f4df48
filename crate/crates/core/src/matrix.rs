//! Dense exact matrices over `ℚ` with Gauss–Jordan elimination.

use crate::error::Error;
use crate::rat::{rat, Rat};
use num::traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<Rat>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| crate::rat::format_rat(self.at(r, c)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rat>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        Matrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix::new(rows, cols, vec![Rat::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Rat::one();
        }
        m
    }

    /// Builds from integer rows, mostly for tests and fixtures.
    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&x| rat(x)));
        }
        Matrix::new(r, c, entries)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Matrix::new(rows, cols, entries)
    }

    /// Diagonal matrix from a list of scalars.
    pub fn diagonal(d: &[Rat]) -> Self {
        let n = d.len();
        Matrix::from_fn(n, n, |r, c| if r == c { d[r].clone() } else { Rat::zero() })
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &Rat {
        &self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Rat {
        &mut self.entries[r * self.cols + c]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    pub fn scale(&self, s: &Rat) -> Matrix {
        Matrix::new(
            self.rows,
            self.cols,
            self.entries.iter().map(|e| e * s).collect(),
        )
    }

    /// Matrix product `self * rhs`.
    pub fn mul_mat(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = Matrix::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.at_mut(i, j);
                    *cur = &*cur + &(a * b);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for (j, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc += self.at(i, j) * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// Horizontal stack `[self | rhs]`.
    pub fn hstack(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows);
        Matrix::from_fn(self.rows, self.cols + rhs.cols, |r, c| {
            if c < self.cols {
                self.at(r, c).clone()
            } else {
                rhs.at(r, c - self.cols).clone()
            }
        })
    }

    /// Vertical stack, `self` on top.
    pub fn vstack(&self, below: &Matrix) -> Matrix {
        assert_eq!(self.cols, below.cols);
        Matrix::from_fn(self.rows + below.rows, self.cols, |r, c| {
            if r < self.rows {
                self.at(r, c).clone()
            } else {
                below.at(r - self.rows, c).clone()
            }
        })
    }

    /// Block diagonal `diag(self, rhs)`.
    pub fn block_diag(&self, rhs: &Matrix) -> Matrix {
        Matrix::from_fn(self.rows + rhs.rows, self.cols + rhs.cols, |r, c| {
            if r < self.rows && c < self.cols {
                self.at(r, c).clone()
            } else if r >= self.rows && c >= self.cols {
                rhs.at(r - self.rows, c - self.cols).clone()
            } else {
                Rat::zero()
            }
        })
    }

    /// Submatrix by explicit row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |r, c| {
            self.at(rows[r], cols[c]).clone()
        })
    }

    /// Permutation-like map sending input coordinate `j` to output coordinate
    /// `perm[j]` in a space of dimension `out_dim`.
    pub fn coordinate_map(out_dim: usize, perm: &[usize]) -> Matrix {
        let mut m = Matrix::zero(out_dim, perm.len());
        for (j, &i) in perm.iter().enumerate() {
            *m.at_mut(i, j) = Rat::one();
        }
        m
    }

    /// Reduced row-echelon form together with the pivot column list.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0usize;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // find a pivot in this column
            let pivot_row = (row..m.rows).find(|&r| !m.at(r, col).is_zero());
            let Some(p) = pivot_row else { continue };
            if p != row {
                for c in 0..m.cols {
                    let a = m.at(p, c).clone();
                    let b = m.at(row, c).clone();
                    *m.at_mut(p, c) = b;
                    *m.at_mut(row, c) = a;
                }
            }
            let inv = Rat::one() / m.at(row, col).clone();
            for c in col..m.cols {
                let v = m.at(row, c) * &inv;
                *m.at_mut(row, c) = v;
            }
            for r in 0..m.rows {
                if r == row || m.at(r, col).is_zero() {
                    continue;
                }
                let f = m.at(r, col).clone();
                for c in col..m.cols {
                    let v = m.at(r, c) - &(&f * m.at(row, c));
                    *m.at_mut(r, c) = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the kernel, one vector per row, in the canonical
    /// pivot-complement parametrization.
    pub fn kernel_basis(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let mut free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.sort_unstable();
        let mut basis = Matrix::zero(free.len(), self.cols);
        for (i, &fcol) in free.iter().enumerate() {
            *basis.at_mut(i, fcol) = Rat::one();
            for (prow, &pcol) in pivots.iter().enumerate() {
                *basis.at_mut(i, pcol) = -r.at(prow, fcol).clone();
            }
        }
        basis
    }

    /// Solves `self * x = b` for one particular solution (lexicographically
    /// canonical: free variables set to zero).
    pub fn solve(&self, b: &[Rat]) -> Result<Vec<Rat>, Error> {
        assert_eq!(self.rows, b.len());
        let bm = Matrix::new(b.len(), 1, b.to_vec());
        let sol = self.solve_matrix(&bm)?;
        Ok((0..self.cols).map(|i| sol.at(i, 0).clone()).collect())
    }

    /// Solves `self * X = B` columnwise; errors if any column is unsolvable.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Matrix, Error> {
        assert_eq!(self.rows, b.rows);
        let aug = self.hstack(b);
        let (r, pivots) = aug.rref();
        // any pivot in the B-block means inconsistency
        if pivots.iter().any(|&p| p >= self.cols) {
            return Err(Error::Unsolvable("right-hand side not in column space"));
        }
        let mut x = Matrix::zero(self.cols, b.cols);
        for (prow, &pcol) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                *x.at_mut(pcol, j) = r.at(prow, self.cols + j).clone();
            }
        }
        Ok(x)
    }

    /// Exact inverse of a square matrix.
    pub fn inverse(&self) -> Result<Matrix, Error> {
        if self.rows != self.cols {
            return Err(Error::Singular);
        }
        let aug = self.hstack(&Matrix::identity(self.rows));
        let (r, pivots) = aug.rref();
        if pivots.len() != self.rows || pivots.iter().any(|&p| p >= self.cols) {
            return Err(Error::Singular);
        }
        Ok(Matrix::from_fn(self.rows, self.cols, |i, j| {
            r.at(i, self.cols + j).clone()
        }))
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::new(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::new(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix::new(
            self.rows,
            self.cols,
            self.entries.iter().map(|a| -a).collect(),
        )
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.mul_mat(rhs)
    }
}
