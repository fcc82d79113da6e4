//! Sparse Cholesky factorization `A = L L^T` for symmetric positive
//! definite matrices, with triangular solves.
//!
//! The factorization is up-looking: an elimination-tree symbolic phase
//! sizes the columns of `L`, then each row is computed with a sparse
//! triangular solve over the subtree reached from the row's pattern
//! (following the classic approach in Davis, "Direct Methods for Sparse
//! Linear Systems", ch. 4). A fill-reducing preordering is applied first;
//! see [`FillOrdering`].

use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use thiserror::Error;

use crate::ordering::{fill_reducing_permutation, FillOrdering};
use crate::sparse::SparseMatrix;

#[derive(Debug, Error)]
pub enum CholeskyError {
    #[error("matrix is {rows}x{cols}, factorization needs a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not positive definite: pivot {pivot} is not strictly positive")]
    NotPositiveDefinite { pivot: usize },
}

/// Count of numeric factorizations performed by this process.
///
/// Lets callers verify that factor caching works: repeated solves against
/// the same system must not grow this counter.
static FACTORIZATIONS: AtomicU64 = AtomicU64::new(0);

pub fn factorization_count() -> u64 {
    FACTORIZATIONS.load(AtomicOrdering::Relaxed)
}

const NONE: usize = usize::MAX;

/// Lower-triangular Cholesky factor with the ordering that produced it.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    /// `L` with the diagonal as the last entry of each row.
    lower: SparseMatrix,
    /// `L^T` (CSR of the upper triangle), kept for the backward solve.
    upper: SparseMatrix,
    /// `perm[new] = old`; `None` when factored in natural order.
    perm: Option<Vec<usize>>,
}

/// Factors `A` with the default ordering policy.
///
/// Matrices with more than 1000 rows get a fill-reducing preorder
/// (nested dissection); small systems are factored in natural order.
pub fn sparse_cholesky(a: &SparseMatrix) -> Result<CholeskyFactor, CholeskyError> {
    let ordering = if a.n_rows() > 1000 {
        FillOrdering::NestedDissection
    } else {
        FillOrdering::Natural
    };
    sparse_cholesky_with(a, ordering)
}

/// Factors `A` with an explicit ordering choice.
///
/// Only the lower triangle of `A` is read; the matrix is assumed
/// symmetric.
pub fn sparse_cholesky_with(
    a: &SparseMatrix,
    ordering: FillOrdering,
) -> Result<CholeskyFactor, CholeskyError> {
    if a.n_rows() != a.n_cols() {
        return Err(CholeskyError::NotSquare {
            rows: a.n_rows(),
            cols: a.n_cols(),
        });
    }
    let perm = fill_reducing_permutation(a, ordering);
    let permuted;
    let b = match &perm {
        Some(p) => {
            permuted = permute_symmetric(a, p);
            &permuted
        }
        None => a,
    };

    FACTORIZATIONS.fetch_add(1, AtomicOrdering::Relaxed);
    let n = b.n_rows();
    let parent = elimination_tree(b);

    // Symbolic phase: column counts of L via per-row tree reaches.
    let mut col_count = vec![1usize; n]; // diagonal
    {
        let mut marks = vec![NONE; n];
        for k in 0..n {
            marks[k] = k;
            for &j in b.row(k).0 {
                if j >= k {
                    break;
                }
                let mut j = j;
                while marks[j] != k {
                    col_count[j] += 1;
                    marks[j] = k;
                    j = parent[j];
                }
            }
        }
    }

    let mut col_ptr = vec![0usize; n + 1];
    for j in 0..n {
        col_ptr[j + 1] = col_ptr[j] + col_count[j];
    }
    let nnz = col_ptr[n];
    let mut row_idx = vec![0usize; nnz];
    let mut values = vec![0.0f64; nnz];
    let mut next_slot: Vec<usize> = col_ptr[..n].to_vec();

    // Numeric phase, row by row.
    let mut x = vec![0.0f64; n];
    let mut pattern = vec![0usize; n];
    let mut marks = vec![NONE; n];
    let mut climb = vec![0usize; n];
    for k in 0..n {
        // Reach of row k in the elimination tree, topological order in
        // pattern[top..n].
        marks[k] = k;
        let mut top = n;
        let (cols, vals) = b.row(k);
        let mut diag = 0.0f64;
        for (&j, &v) in cols.iter().zip(vals) {
            if j > k {
                break;
            }
            if j == k {
                diag = v;
                break;
            }
            x[j] = v;
            let mut len = 0usize;
            let mut t = j;
            while marks[t] != k {
                climb[len] = t;
                len += 1;
                marks[t] = k;
                t = parent[t];
            }
            while len > 0 {
                len -= 1;
                top -= 1;
                pattern[top] = climb[len];
            }
        }

        let mut d = diag;
        for t in top..n {
            let j = pattern[t];
            let xj = x[j];
            x[j] = 0.0;
            let ljj = values[col_ptr[j]];
            let lkj = xj / ljj;
            for p in (col_ptr[j] + 1)..next_slot[j] {
                x[row_idx[p]] -= values[p] * lkj;
            }
            d -= lkj * lkj;
            row_idx[next_slot[j]] = k;
            values[next_slot[j]] = lkj;
            next_slot[j] += 1;
        }
        if !(d > 0.0) {
            let pivot = perm.as_ref().map_or(k, |p| p[k]);
            return Err(CholeskyError::NotPositiveDefinite { pivot });
        }
        row_idx[next_slot[k]] = k;
        values[next_slot[k]] = d.sqrt();
        next_slot[k] += 1;
    }

    // The columns were built in ascending row order, so (col_ptr, row_idx)
    // is a valid CSR layout of L^T.
    let upper = SparseMatrix::from_csr(n, n, col_ptr, row_idx, values);
    let lower = upper.transpose();
    Ok(CholeskyFactor { lower, upper, perm })
}

/// Elimination tree of a symmetric matrix given by its lower triangle
/// (Liu's algorithm with path compression).
fn elimination_tree(b: &SparseMatrix) -> Vec<usize> {
    let n = b.n_rows();
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for &j in b.row(k).0 {
            if j >= k {
                break;
            }
            let mut j = j;
            while j != NONE && j < k {
                let next = ancestor[j];
                ancestor[j] = k;
                if next == NONE {
                    parent[j] = k;
                }
                j = next;
            }
        }
    }
    parent
}

/// `P A P^T` for `perm[new] = old`.
fn permute_symmetric(a: &SparseMatrix, perm: &[usize]) -> SparseMatrix {
    let n = a.n_rows();
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut triplets = Vec::with_capacity(a.nnz());
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            triplets.push((inv[i], inv[j], v));
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.lower.n_rows()
    }

    /// The factor `L`, lower triangular with strictly positive diagonal.
    pub fn lower(&self) -> &SparseMatrix {
        &self.lower
    }

    /// The fill-reducing permutation, if one was applied (`perm[new] = old`).
    pub fn permutation(&self) -> Option<&[usize]> {
        self.perm.as_deref()
    }

    /// Solves `A x = b` for one right-hand side.
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        self.solve(b)
    }

    /// Solves `A X = B` column-wise for an n-by-3 right-hand side.
    pub fn solve_signal(&self, b: &[[f64; 3]]) -> Vec<[f64; 3]> {
        self.solve(b)
    }

    fn solve<T: Scalable + Copy + Default>(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n(), "right-hand side length mismatch");
        let mut work: Vec<T> = match &self.perm {
            Some(p) => p.iter().map(|&old| b[old]).collect(),
            None => b.to_vec(),
        };
        self.forward_backward(&mut work);
        match &self.perm {
            Some(p) => {
                let mut out = vec![T::default(); b.len()];
                for (new, &old) in p.iter().enumerate() {
                    out[old] = work[new];
                }
                out
            }
            None => work,
        }
    }

    /// Forward substitution with `L`, then backward with `L^T`.
    fn forward_backward<T: Scalable + Copy>(&self, work: &mut [T]) {
        let n = self.n();
        // L y = b; the diagonal is the last entry of each CSR row of L.
        for i in 0..n {
            let (cols, vals) = self.lower.row(i);
            let mut acc = work[i];
            let last = cols.len() - 1;
            for t in 0..last {
                acc = acc.sub_scaled(work[cols[t]], vals[t]);
            }
            work[i] = acc.div(vals[last]);
        }
        // L^T x = y; the diagonal is the first entry of each CSR row of L^T.
        for i in (0..n).rev() {
            let (cols, vals) = self.upper.row(i);
            let mut acc = work[i];
            for t in 1..cols.len() {
                acc = acc.sub_scaled(work[cols[t]], vals[t]);
            }
            work[i] = acc.div(vals[0]);
        }
    }

    /// Relative Frobenius error of `L L^T` against `P A P^T`.
    pub fn reconstruction_error(&self, a: &SparseMatrix) -> f64 {
        let n = self.n();
        assert_eq!(a.n_rows(), n);
        let b = match &self.perm {
            Some(p) => permute_symmetric(a, p),
            None => a.clone(),
        };
        let mut scratch = vec![0.0f64; n];
        let mut touched = Vec::new();
        let mut err_sq = 0.0f64;
        let mut b_norm_sq = 0.0f64;
        for i in 0..n {
            // Row i of L L^T = sum over k in row i of L of L_ik * (row k of L^T).
            let (cols, vals) = self.lower.row(i);
            for (&k, &lik) in cols.iter().zip(vals) {
                let (ucols, uvals) = self.upper.row(k);
                for (&j, &u) in ucols.iter().zip(uvals) {
                    if scratch[j] == 0.0 {
                        touched.push(j);
                    }
                    scratch[j] += lik * u;
                }
            }
            let (bcols, bvals) = b.row(i);
            for (&j, &v) in bcols.iter().zip(bvals) {
                if scratch[j] == 0.0 {
                    touched.push(j);
                }
                scratch[j] -= v;
                b_norm_sq += v * v;
            }
            for &j in &touched {
                err_sq += scratch[j] * scratch[j];
                scratch[j] = 0.0;
            }
            touched.clear();
        }
        (err_sq / b_norm_sq).sqrt()
    }
}

/// Minimal arithmetic needed by the triangular solves.
trait Scalable {
    fn sub_scaled(self, other: Self, factor: f64) -> Self;
    fn div(self, divisor: f64) -> Self;
}

impl Scalable for f64 {
    fn sub_scaled(self, other: Self, factor: f64) -> Self {
        self - factor * other
    }
    fn div(self, divisor: f64) -> Self {
        self / divisor
    }
}

impl Scalable for [f64; 3] {
    fn sub_scaled(self, other: Self, factor: f64) -> Self {
        [
            self[0] - factor * other[0],
            self[1] - factor * other[1],
            self[2] - factor * other[2],
        ]
    }
    fn div(self, divisor: f64) -> Self {
        [self[0] / divisor, self[1] / divisor, self[2] / divisor]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{adjacency, degrees, laplacian};
    use crate::icosphere::icosphere;
    use crate::mesh::extract_edges;

    fn xorshift(state: &mut u64) -> f64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    /// B^T B + I for a random sparse B: symmetric positive definite.
    fn random_spd(n: usize, seed: u64) -> SparseMatrix {
        let mut state = seed | 1;
        let mut b = vec![vec![0.0f64; n]; n];
        for row in b.iter_mut() {
            for v in row.iter_mut() {
                if xorshift(&mut state) < 0.05 {
                    *v = xorshift(&mut state) * 2.0 - 1.0;
                }
            }
        }
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut v: f64 = (0..n).map(|k| b[k][i] * b[k][j]).sum();
                if i == j {
                    v += 1.0;
                }
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        SparseMatrix::from_triplets(n, n, &triplets)
    }

    #[test]
    fn identity_factors_to_identity() {
        let a = SparseMatrix::identity(5);
        let f = sparse_cholesky(&a).unwrap();
        assert_eq!(f.lower(), &SparseMatrix::identity(5));
    }

    #[test]
    fn two_by_two_known_factor() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 4.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 3.0)]);
        let f = sparse_cholesky(&a).unwrap();
        let l = f.lower();
        assert_eq!(l.get(0, 0), 2.0);
        assert_eq!(l.get(1, 0), 1.0);
        assert!((l.get(1, 1) - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(l.get(0, 1), 0.0);
        // L L^T reproduces A by direct multiplication.
        assert!(f.reconstruction_error(&a) < 1e-15);
    }

    #[test]
    fn random_spd_reconstruction() {
        for seed in [3u64, 17, 99] {
            let a = random_spd(100, seed);
            let f = sparse_cholesky(&a).unwrap();
            let err = f.reconstruction_error(&a);
            assert!(err < 1e-12, "seed {seed}: reconstruction error {err}");
        }
    }

    #[test]
    fn non_positive_definite_names_pivot() {
        // Indefinite: second pivot goes negative.
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        match sparse_cholesky(&a) {
            Err(CholeskyError::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected pivot failure, got {other:?}"),
        }
        // Zero matrix fails at the first pivot.
        let z = SparseMatrix::from_triplets(3, 3, &[]);
        match sparse_cholesky(&z) {
            Err(CholeskyError::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 0),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn non_square_rejected() {
        let a = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0)]);
        assert!(matches!(
            sparse_cholesky(&a),
            Err(CholeskyError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn solve_identity_and_scaled_identity() {
        let f = sparse_cholesky(&SparseMatrix::identity(4)).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5];
        assert_eq!(f.solve_vec(&b), b);

        // A = 2I solves through L = sqrt(2) I, so expect rounding at the
        // last bit rather than exact halves.
        let two = SparseMatrix::from_triplets(3, 3, &[(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0)]);
        let f = sparse_cholesky(&two).unwrap();
        let b = vec![2.0, -4.0, 1.0];
        for (got, want) in f.solve_vec(&b).iter().zip([1.0, -2.0, 0.5]) {
            assert!((got - want).abs() <= 1e-15 * want.abs());
        }
    }

    #[test]
    fn solve_residual_on_random_spd() {
        let a = random_spd(100, 42);
        let f = sparse_cholesky(&a).unwrap();
        let mut state = 5u64;
        let b: Vec<f64> = (0..100).map(|_| xorshift(&mut state) * 2.0 - 1.0).collect();
        let x = f.solve_vec(&b);
        let ax = a.mul_vec(&x);
        let num: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(num / den < 1e-10, "relative residual {}", num / den);
    }

    #[test]
    fn orderings_agree_on_mesh_system() {
        // I + mu L of an icosphere, factored under all three orderings:
        // identical solutions, valid reconstructions.
        let m = icosphere(2);
        let w = adjacency(&extract_edges(&m), m.n_vertices());
        let d = degrees(&w);
        let l = laplacian(&w, &d);
        let n = l.n_rows();
        let mut triplets = vec![];
        for i in 0..n {
            triplets.push((i, i, 1.0));
            let (cols, vals) = l.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, 2.5 * v));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &triplets);
        let mut state = 7u64;
        let b: Vec<f64> = (0..n).map(|_| xorshift(&mut state) * 2.0 - 1.0).collect();
        let mut solutions = Vec::new();
        for ord in [
            FillOrdering::Natural,
            FillOrdering::ReverseCuthillMcKee,
            FillOrdering::NestedDissection,
        ] {
            let f = sparse_cholesky_with(&a, ord).unwrap();
            assert!(f.reconstruction_error(&a) < 1e-12);
            solutions.push(f.solve_vec(&b));
        }
        for s in &solutions[1..] {
            for (p, q) in s.iter().zip(&solutions[0]) {
                assert!((p - q).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn signal_solve_matches_vector_solves() {
        let a = random_spd(60, 11);
        let f = sparse_cholesky(&a).unwrap();
        let mut state = 13u64;
        let b: Vec<[f64; 3]> = (0..60)
            .map(|_| [xorshift(&mut state), xorshift(&mut state), xorshift(&mut state)])
            .collect();
        let x = f.solve_signal(&b);
        for k in 0..3 {
            let col: Vec<f64> = b.iter().map(|r| r[k]).collect();
            let xk = f.solve_vec(&col);
            for (a, b) in x.iter().map(|r| r[k]).zip(xk) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn factorization_counter_increments() {
        let before = factorization_count();
        let _ = sparse_cholesky(&SparseMatrix::identity(3)).unwrap();
        let _ = sparse_cholesky(&SparseMatrix::identity(3)).unwrap();
        assert_eq!(factorization_count(), before + 2);
    }
}
