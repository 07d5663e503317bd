//! Compressed sparse row storage and triplet assembly.

use rayon::prelude::*;

use super::NumericsError;

/// Rows below this count are multiplied serially.
const PARALLEL_MATVEC_ROWS: usize = 4096;

/// Square or rectangular matrix in compressed row form.
///
/// Column indices within a row are strictly increasing and every stored
/// `(row, col)` pair is unique.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` contributions, summing duplicates.
    pub fn assemble(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, NumericsError> {
        for &(row, col, _) in triplets {
            if row >= nrows || col >= ncols {
                return Err(NumericsError::IndexOutOfRange {
                    row,
                    col,
                    nrows,
                    ncols,
                });
            }
        }

        // Counting sort by row, then sort each row by column and merge.
        let mut counts = vec![0usize; nrows + 1];
        for &(row, _, _) in triplets {
            counts[row + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut by_row = vec![(0usize, 0.0f64); triplets.len()];
        for &(row, col, value) in triplets {
            by_row[next[row]] = (col, value);
            next[row] += 1;
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for row in 0..nrows {
            let entries = &mut by_row[counts[row]..counts[row + 1]];
            entries.sort_by_key(|&(col, _)| col);
            let mut last: Option<usize> = None;
            for &(col, value) in entries.iter() {
                if last == Some(col) {
                    *values.last_mut().expect("merged entry") += value;
                } else {
                    col_indices.push(col);
                    values.push(value);
                    last = Some(col);
                }
            }
            row_offsets.push(col_indices.len());
        }

        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of one row.
    pub fn row(&self, row: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[row]..self.row_offsets[row + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    /// Stored value at `(row, col)`, or zero when the entry is structurally absent.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (cols, vals) = self.row(row);
        match cols.binary_search(&col) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Computes `y = A x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "matvec: input length");
        assert_eq!(y.len(), self.nrows, "matvec: output length");
        let row_dot = |row: usize| {
            let (cols, vals) = self.row(row);
            cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum::<f64>()
        };
        if self.nrows >= PARALLEL_MATVEC_ROWS {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(row, out)| *out = row_dot(row));
        } else {
            for (row, out) in y.iter_mut().enumerate() {
                *out = row_dot(row);
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `xᵀ A x` for a square matrix.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    /// Entry-wise linear combination `alpha·self + beta·other` of two
    /// matrices with the same shape.
    pub fn linear_combination(&self, alpha: f64, other: &SparseMatrix, beta: f64) -> Self {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for (m, scale) in [(self, alpha), (other, beta)] {
            for row in 0..m.nrows {
                let (cols, vals) = m.row(row);
                triplets.extend(cols.iter().zip(vals).map(|(&c, &v)| (row, c, scale * v)));
            }
        }
        Self::assemble(self.nrows, self.ncols, &triplets).expect("indices already validated")
    }

    /// Replaces the listed rows and columns by those of the identity.
    pub fn constrain_symmetric(&self, fixed: &[usize]) -> Self {
        let mut is_fixed = vec![false; self.nrows.max(self.ncols)];
        for &i in fixed {
            is_fixed[i] = true;
        }
        let mut triplets = Vec::with_capacity(self.nnz());
        for row in 0..self.nrows {
            if is_fixed[row] {
                triplets.push((row, row, 1.0));
                continue;
            }
            let (cols, vals) = self.row(row);
            for (&c, &v) in cols.iter().zip(vals) {
                if !is_fixed[c] {
                    triplets.push((row, c, v));
                }
            }
        }
        Self::assemble(self.nrows, self.ncols, &triplets).expect("indices already validated")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
