//! Variable-band (skyline) storage and in-place Cholesky factorization for
//! symmetric positive definite matrices.

use crate::error::{Result, TopOptError};
use crate::scalar::Scalar;

/// Lower triangle stored row by row; row `i` holds columns `first[i]..=i`.
#[derive(Clone, Debug)]
pub(crate) struct Skyline<T> {
    first: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> Skyline<T> {
    pub fn new(first: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(first.len() + 1);
        offsets.push(0);
        for (i, &f) in first.iter().enumerate() {
            debug_assert!(f <= i);
            offsets.push(offsets[i] + (i - f + 1));
        }
        let nnz = *offsets.last().unwrap_or(&0);
        Self {
            first,
            offsets,
            values: vec![T::zero(); nnz],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.first.len()
    }

    #[cfg(test)]
    pub fn stored_entries(&self) -> usize {
        self.values.len()
    }

    /// Storage position of entry `(row, col)` with `col <= row` inside the profile.
    #[inline]
    pub fn position(&self, row: usize, col: usize) -> usize {
        debug_assert!(col <= row && col >= self.first[row]);
        self.offsets[row] + (col - self.first[row])
    }

    #[inline]
    pub fn add_at(&mut self, pos: usize, v: T) {
        self.values[pos] += v;
    }

    /// Replaces the stored matrix by its Cholesky factor `L` (`A = L Lᵀ`).
    ///
    /// A pivot that is not clearly positive relative to the original diagonal
    /// entry reports the matrix as singular.
    pub fn factorize(&mut self) -> Result<()> {
        let n = self.dim();
        let guard = T::epsilon() * T::lit(64.0);
        for i in 0..n {
            let fi = self.first[i];
            let (head, tail) = self.values.split_at_mut(self.offsets[i]);
            let row_i = &mut tail[..i - fi + 1];
            for j in fi..i {
                let fj = self.first[j];
                let row_j = &head[self.offsets[j]..self.offsets[j + 1]];
                let k0 = fi.max(fj);
                let a = &row_i[k0 - fi..j - fi];
                let b = &row_j[k0 - fj..j - fj];
                let s = row_i[j - fi] - dot(a, b);
                row_i[j - fi] = s / row_j[j - fj];
            }
            let diag = row_i[i - fi];
            let off = &row_i[..i - fi];
            let d = diag - dot(off, off);
            if !(d > guard * diag.abs()) || !d.is_finite() {
                return Err(TopOptError::Structural(format!(
                    "stiffness matrix is singular at reduced equation {i} (pivot {d})"
                )));
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(())
    }

    /// Solves `L Lᵀ x = b` in place, assuming [`factorize`](Self::factorize) succeeded.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let s = b[i] - dot(&row[..i - fi], &b[fi..i]);
            b[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let xi = b[i] / row[i - fi];
            b[i] = xi;
            for (bk, &l) in b[fi..i].iter_mut().zip(&row[..i - fi]) {
                *bk -= l * xi;
            }
        }
    }
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    // four accumulators so the loop vectorizes; summation order is fixed
    let mut acc = [T::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}
