use super::SparseMatrix;

/// Incomplete LU factorization with the sparsity pattern of the input matrix.
///
/// `L` has a unit diagonal and is stored together with `U` in one value array.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    /// Returns `None` when a diagonal entry is missing or a pivot vanishes.
    pub fn factor(a: &SparseMatrix) -> Option<Self> {
        let n = a.nrows();
        let row_offsets = a.row_offsets().to_vec();
        let col_indices = a.col_indices().to_vec();
        let mut values = a.values().to_vec();

        let mut diag_pos = Vec::with_capacity(n);
        for i in 0..n {
            let cols = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            let pos = cols.binary_search(&i).ok()?;
            diag_pos.push(row_offsets[i] + pos);
        }

        // Position of column j in the current row, or usize::MAX.
        let mut marker = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (row_offsets[i], row_offsets[i + 1]);
            for p in start..end {
                marker[col_indices[p]] = p;
            }
            for p in start..diag_pos[i] {
                let k = col_indices[p];
                let pivot = values[diag_pos[k]];
                if pivot == 0.0 || !pivot.is_finite() {
                    return None;
                }
                let lik = values[p] / pivot;
                values[p] = lik;
                for q in diag_pos[k] + 1..row_offsets[k + 1] {
                    let target = marker[col_indices[q]];
                    if target != usize::MAX {
                        values[target] -= lik * values[q];
                    }
                }
            }
            let d = values[diag_pos[i]];
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            for p in start..end {
                marker[col_indices[p]] = usize::MAX;
            }
        }

        Some(Self {
            row_offsets,
            col_indices,
            values,
            diag_pos,
        })
    }

    /// Solves `L U x = rhs` in place.
    pub fn apply(&self, x: &mut [f64]) {
        let n = self.diag_pos.len();
        for i in 0..n {
            let mut s = x[i];
            for p in self.row_offsets[i]..self.diag_pos[i] {
                s -= self.values[p] * x[self.col_indices[p]];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in self.diag_pos[i] + 1..self.row_offsets[i + 1] {
                s -= self.values[p] * x[self.col_indices[p]];
            }
            x[i] = s / self.values[self.diag_pos[i]];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_factorization_is_exact() {
        // ILU(0) of a tridiagonal matrix has no fill, so it is the exact LU.
        let n = 6;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -2.0));
            }
        }
        let a = SparseMatrix::assemble(n, n, &t).unwrap();
        let ilu = Ilu0::factor(&a).unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let mut x = a.matvec(&x_true);
        ilu.apply(&mut x);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_is_detected() {
        let a = SparseMatrix::assemble(2, 2, &[(0, 0, 0.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)])
            .unwrap();
        assert!(Ilu0::factor(&a).is_none());
    }
}
