//! Compressed sparse row storage and products against per-vertex signals.

/// A real matrix in compressed sparse row form.
///
/// Invariants maintained by every constructor:
/// - `row_ptr` is nondecreasing, starts at 0 and ends at `nnz`;
/// - column indices are strictly increasing within each row and `< n_cols`;
/// - no explicitly stored zero values.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from (row, col, value) triplets.
    ///
    /// Duplicate entries are summed; entries that are exactly zero after
    /// summation are dropped. Panics if an index is out of range.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(i, j, _) in &entries {
            assert!(i < n_rows, "row index {i} out of range for {n_rows} rows");
            assert!(j < n_cols, "col index {j} out of range for {n_cols} cols");
        }
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut iter = entries.into_iter().peekable();
        while let Some((i, j, mut v)) = iter.next() {
            while let Some(&(i2, j2, v2)) = iter.peek() {
                if i2 == i && j2 == j {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != 0.0 {
                row_ptr[i + 1] += 1;
                col_idx.push(j);
                values.push(v);
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Builds a matrix directly from CSR arrays, checking the invariants.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        let m = SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        };
        m.check_invariants();
        m
    }

    /// The n-by-n identity.
    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    /// Entry (i, j), zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut row_ptr = vec![0usize; self.n_cols + 1];
        for &j in &self.col_idx {
            row_ptr[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            row_ptr[j + 1] += row_ptr[j];
        }
        let mut next = row_ptr.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let p = next[j];
                col_idx[p] = i;
                values[p] = v;
                next[j] += 1;
            }
        }
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Sparse matrix times dense n-by-3 signal.
    ///
    /// Accumulation runs row-major in stored column order, so the result is
    /// bit-reproducible across runs.
    pub fn mul_signal(&self, x: &[[f64; 3]]) -> Vec<[f64; 3]> {
        assert_eq!(
            self.n_cols,
            x.len(),
            "signal has {} rows, matrix has {} columns",
            x.len(),
            self.n_cols
        );
        let mut out = vec![[0.0; 3]; self.n_rows];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut acc = [0.0f64; 3];
            for (&j, &v) in cols.iter().zip(vals) {
                let xj = x[j];
                acc[0] += v * xj[0];
                acc[1] += v * xj[1];
                acc[2] += v * xj[2];
            }
            out[i] = acc;
        }
        out
    }

    /// Sparse matrix times dense vector.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(
            self.n_cols,
            x.len(),
            "vector has {} entries, matrix has {} columns",
            x.len(),
            self.n_cols
        );
        (0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }

    fn check_invariants(&self) {
        assert_eq!(self.row_ptr.len(), self.n_rows + 1);
        assert_eq!(self.row_ptr[0], 0);
        assert_eq!(*self.row_ptr.last().unwrap(), self.values.len());
        assert_eq!(self.col_idx.len(), self.values.len());
        for i in 0..self.n_rows {
            assert!(self.row_ptr[i] <= self.row_ptr[i + 1], "row_ptr not nondecreasing");
            let (cols, vals) = self.row(i);
            for w in cols.windows(2) {
                assert!(w[0] < w[1], "columns not strictly increasing in row {i}");
            }
            for &j in cols {
                assert!(j < self.n_cols, "column index {j} out of range");
            }
            for &v in vals {
                assert!(v != 0.0, "explicitly stored zero in row {i}");
            }
        }
    }
}

/// Sparse matrix times dense n-by-3 signal; alias for [`SparseMatrix::mul_signal`].
pub fn spmm(a: &SparseMatrix, x: &[[f64; 3]]) -> Vec<[f64; 3]> {
    a.mul_signal(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(a: &SparseMatrix, x: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let mut d = vec![vec![0.0; a.n_cols()]; a.n_rows()];
        for i in 0..a.n_rows() {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[i][j] = v;
            }
        }
        d.iter()
            .map(|row| {
                let mut acc = [0.0; 3];
                for (j, &v) in row.iter().enumerate() {
                    for k in 0..3 {
                        acc[k] += v * x[j][k];
                    }
                }
                acc
            })
            .collect()
    }

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 3.0), (1, 0, -3.0), (1, 0, 3.0)]);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.get(1, 1), 3.0);
    }

    #[test]
    fn identity_times_signal_is_identity() {
        let a = SparseMatrix::identity(4);
        let x = vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0], [-1.0, 0.5, 0.0]];
        assert_eq!(a.mul_signal(&x), x);
    }

    #[test]
    fn zero_matrix_times_signal_is_zero() {
        let a = SparseMatrix::from_triplets(3, 3, &[]);
        let x = vec![[1.0, 2.0, 3.0]; 3];
        assert_eq!(a.mul_signal(&x), vec![[0.0; 3]; 3]);
    }

    #[test]
    fn matches_dense_product_on_random_instances() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in [5usize, 20, 200] {
            let mut triplets = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if next() < 0.1 {
                        triplets.push((i, j, next() * 2.0 - 1.0));
                    }
                }
            }
            let a = SparseMatrix::from_triplets(n, n, &triplets);
            let x: Vec<[f64; 3]> = (0..n).map(|_| [next(), next(), next()]).collect();
            let got = a.mul_signal(&x);
            let want = dense_mul(&a, &x);
            let scale: f64 = want
                .iter()
                .flat_map(|r| r.iter())
                .fold(0.0f64, |m, &v| m.max(v.abs()))
                .max(1.0);
            for (g, w) in got.iter().zip(&want) {
                for k in 0..3 {
                    assert!((g[k] - w[k]).abs() <= 1e-13 * scale, "n={n}: {} vs {}", g[k], w[k]);
                }
            }
        }
    }

    #[test]
    fn transpose_round_trip() {
        let a = SparseMatrix::from_triplets(3, 4, &[(0, 1, 2.0), (0, 3, -1.0), (2, 0, 4.0)]);
        let t = a.transpose();
        assert_eq!(t.n_rows(), 4);
        assert_eq!(t.get(1, 0), 2.0);
        assert_eq!(t.get(3, 0), -1.0);
        assert_eq!(t.transpose(), a);
    }

    #[test]
    #[should_panic(expected = "columns")]
    fn dimension_mismatch_panics() {
        let a = SparseMatrix::identity(3);
        let x = vec![[0.0; 3]; 4];
        a.mul_signal(&x);
    }
}
