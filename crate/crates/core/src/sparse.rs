//! Compressed sparse row storage for the symmetric DG operators.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square CSR matrix with sorted, duplicate-free column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Sums duplicate entries in insertion order, so two entries receiving
    /// contributions in the same sequence end up bitwise equal.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len() / 2);
        let mut values: Vec<T> = Vec::with_capacity(triplets.len() / 2);
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) outside {n}x{n}");
            if last == Some((i, j)) {
                let acc = values.last_mut().expect("previous entry");
                *acc = *acc + v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, T::one())).collect())
    }

    /// Dense row-major input; zeros are not stored.
    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, trip)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(T::zero(), |k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    /// `vᵀ A w`
    pub fn bilinear(&self, v: &[T], w: &[T]) -> T {
        v.iter().zip(self.mul_vec(w)).map(|(&a, b)| a * b).sum()
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &a) in cols.iter().zip(vals) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Bitwise `A == Aᵀ`, including the sparsity pattern.
    pub fn is_symmetric_exact(&self) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(&j, &a)| {
                let (cj, vj) = self.row(j);
                cj.binary_search(&i)
                    .is_ok_and(|k| vj[k].to_f64_lossy().to_bits() == a.to_f64_lossy().to_bits())
            })
        })
    }

    /// Coordinate text dump, one `row col value` line per stored entry.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::with_capacity(self.nnz() * 32);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let _ = writeln!(out, "{i} {j} {:.17e}", v.to_f64_lossy());
            }
        }
        out
    }

    pub fn write_coordinate(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_coordinate_text()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_are_summed_and_sorted() {
        let a = CsrMatrix::from_triplets(
            3,
            vec![(2, 0, 1.0), (0, 1, 2.0), (0, 1, 3.0), (1, 1, 4.0), (0, 0, -1.0)],
        );
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.get(0, 1), 5.0);
        assert_eq!(a.get(0, 2), 0.0);
        assert_eq!(a.row(0).0, &[0, 1]);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![4.0, 4.0, 1.0]);
        assert!(!a.is_symmetric_exact());
        assert_eq!(a.max_asymmetry(), 5.0);
    }

    #[test]
    fn coordinate_dump() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let text = a.to_coordinate_text();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("0 0 2.00000000000000000e0"));
    }
}
