//! Small dense linear algebra: row-major matrices, LU with partial pivoting,
//! and the matrix products behind the oracle computations. Systems here are
//! diagonally dominant M-matrices of modest size, where partial pivoting is
//! accurate to near machine precision.

use crate::error::Error;
use crate::scalar::Real;
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self * other`, cache-friendly ikj order.
    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = out.row_mut(i);
            for (k, &aik) in arow.iter().enumerate() {
                if aik == T::zero() {
                    continue;
                }
                let brow = other.row(k);
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += aik * b;
                }
            }
        }
        out
    }

    /// `v * self` for a row vector `v`.
    pub fn vec_mat(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (k, &vk) in v.iter().enumerate() {
            if vk == T::zero() {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.row(k)) {
                *o += vk * b;
            }
        }
        out
    }

    /// `self * v` for a column vector `v`.
    pub fn mat_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &x)| a * x).sum())
            .collect()
    }

    /// LU factorization with partial pivoting (consumes the matrix).
    pub fn lu(mut self) -> Result<Lu<T>> {
        if self.rows != self.cols {
            return Err(Error::Validation("LU needs a square matrix".into()));
        }
        let n = self.rows;
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = self[(k, k)].abs();
            for i in (k + 1)..n {
                let cand = self[(i, k)].abs();
                if cand > best {
                    best = cand;
                    p = i;
                }
            }
            if best == T::zero() {
                return Err(Error::Validation("singular matrix".into()));
            }
            if p != k {
                piv.swap(p, k);
                self.swap_rows(p, k);
            }
            let pivot = self[(k, k)];
            for i in (k + 1)..n {
                let factor = self[(i, k)] / pivot;
                self[(i, k)] = factor;
                if factor == T::zero() {
                    continue;
                }
                let (upper, lower) = self.data.split_at_mut(i * n);
                let krow = &upper[k * n..k * n + n];
                let irow = &mut lower[..n];
                for j in (k + 1)..n {
                    irow[j] -= factor * krow[j];
                }
            }
        }
        Ok(Lu { n, a: self.data, piv })
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let (a, b) = self.data.split_at_mut(hi * self.cols);
        a[lo * self.cols..(lo + 1) * self.cols].swap_with_slice(&mut b[..self.cols]);
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Packed LU factors of a permuted matrix: `P A = L U`.
pub struct Lu<T> {
    n: usize,
    a: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<T> = self.piv.iter().map(|&p| b[p]).collect();
        // forward: L y = P b (unit diagonal)
        for i in 1..n {
            let row = &self.a[i * n..i * n + i];
            let mut acc = x[i];
            for (j, &l) in row.iter().enumerate() {
                acc -= l * x[j];
            }
            x[i] = acc;
        }
        // backward: U x = y
        for i in (0..n).rev() {
            let row = &self.a[i * n..(i + 1) * n];
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= row[j] * x[j];
            }
            x[i] = acc / row[i];
        }
        x
    }

    /// Solves `A^T x = b` using the same factors.
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y = b.to_vec();
        // U^T z = b (forward, non-unit diagonal)
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.a[j * n + i] * y[j];
            }
            y[i] = acc / self.a[i * n + i];
        }
        // L^T w = z (backward, unit diagonal)
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..n {
                acc -= self.a[j * n + i] * y[j];
            }
            y[i] = acc;
        }
        // x = P^T w
        let mut x = vec![T::zero(); n];
        for (i, &p) in self.piv.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}
