//! Graph operators on mesh connectivity: adjacency, degrees, normalized
//! adjacency, and the two Laplacians.

use crate::mesh::{extract_edges, EdgeSet, Mesh};
use crate::sparse::SparseMatrix;

/// The two operators the denoisers need, derived from mesh connectivity.
pub struct MeshOperators {
    pub normalized_adjacency: SparseMatrix,
    pub laplacian: SparseMatrix,
}

/// Builds `W_norm` and `L` from a mesh's face-derived edges.
pub fn mesh_operators(mesh: &Mesh) -> MeshOperators {
    let w = adjacency(&extract_edges(mesh), mesh.n_vertices());
    let d = degrees(&w);
    MeshOperators {
        normalized_adjacency: normalized_adjacency(&w, &d),
        laplacian: laplacian(&w, &d),
    }
}

/// Symmetric 0/1 adjacency matrix of an undirected edge set.
pub fn adjacency(edges: &EdgeSet, n: usize) -> SparseMatrix {
    let mut triplets = Vec::with_capacity(edges.len() * 2);
    for &(i, j) in edges.edges() {
        triplets.push((i, j, 1.0));
        triplets.push((j, i, 1.0));
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Vertex degrees: the number of stored entries in each row of `w`.
pub fn degrees(w: &SparseMatrix) -> Vec<usize> {
    (0..w.n_rows()).map(|i| w.row(i).0.len()).collect()
}

/// Row-normalized adjacency `D^{-1} W`.
///
/// Rows of zero degree become identity rows so that the result stays
/// row-stochastic and filtering leaves isolated vertices fixed.
pub fn normalized_adjacency(w: &SparseMatrix, degrees: &[usize]) -> SparseMatrix {
    assert_eq!(w.n_rows(), degrees.len(), "degree vector length mismatch");
    let n = w.n_rows();
    let mut triplets = Vec::with_capacity(w.nnz() + n);
    for i in 0..n {
        if degrees[i] == 0 {
            triplets.push((i, i, 1.0));
            continue;
        }
        let inv = 1.0 / degrees[i] as f64;
        let (cols, vals) = w.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            triplets.push((i, j, v * inv));
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Unnormalized graph Laplacian `L = D - W`.
pub fn laplacian(w: &SparseMatrix, degrees: &[usize]) -> SparseMatrix {
    assert_eq!(w.n_rows(), degrees.len(), "degree vector length mismatch");
    let n = w.n_rows();
    let mut triplets = Vec::with_capacity(w.nnz() + n);
    for i in 0..n {
        if degrees[i] > 0 {
            triplets.push((i, i, degrees[i] as f64));
        }
        let (cols, vals) = w.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            triplets.push((i, j, -v));
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Normalized Laplacian `I - W_norm`.
///
/// For identity rows of the normalized adjacency (isolated vertices) the
/// corresponding Laplacian row cancels to zero.
pub fn normalized_laplacian(w_norm: &SparseMatrix) -> SparseMatrix {
    let n = w_norm.n_rows();
    let mut triplets = Vec::with_capacity(w_norm.nnz() + n);
    for i in 0..n {
        triplets.push((i, i, 1.0));
        let (cols, vals) = w_norm.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            triplets.push((i, j, -v));
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{extract_edges, Mesh};

    /// Path graph 0 - 1 - 2.
    fn path3() -> (SparseMatrix, Vec<usize>) {
        let w = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)],
        );
        let d = degrees(&w);
        (w, d)
    }

    fn k4() -> (SparseMatrix, Vec<usize>) {
        let m = Mesh::new(
            vec![
                [1.0, 1.0, 1.0],
                [1.0, -1.0, -1.0],
                [-1.0, 1.0, -1.0],
                [-1.0, -1.0, 1.0],
            ],
            vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
        )
        .unwrap();
        let w = adjacency(&extract_edges(&m), 4);
        let d = degrees(&w);
        (w, d)
    }

    #[test]
    fn path_graph_adjacency_rows() {
        let (w, d) = path3();
        assert_eq!(w.row(0).0, &[1]);
        assert_eq!(w.row(1).0, &[0, 2]);
        assert_eq!(w.row(2).0, &[1]);
        assert_eq!(d, vec![1, 2, 1]);
    }

    #[test]
    fn empty_edge_set_gives_zero_matrix() {
        let m = Mesh::new(vec![[0.0; 3]; 3], vec![]).unwrap();
        let w = adjacency(&extract_edges(&m), 3);
        assert_eq!(w.nnz(), 0);
    }

    #[test]
    fn tetrahedron_is_complete_graph() {
        let (w, d) = k4();
        assert_eq!(w.nnz(), 12);
        assert_eq!(d, vec![3, 3, 3, 3]);
        for i in 0..4 {
            assert_eq!(w.get(i, i), 0.0, "diagonal must be zero");
        }
    }

    #[test]
    fn adjacency_is_symmetric() {
        let (w, _) = k4();
        assert_eq!(w.transpose(), w);
    }

    #[test]
    fn normalized_adjacency_rows_sum_to_one() {
        let (w, d) = path3();
        let wn = normalized_adjacency(&w, &d);
        assert_eq!(wn.get(1, 0), 0.5);
        assert_eq!(wn.get(1, 1), 0.0);
        assert_eq!(wn.get(1, 2), 0.5);
        for i in 0..3 {
            let sum: f64 = wn.row(i).1.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }

        let (w, d) = k4();
        let wn = normalized_adjacency(&w, &d);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!((wn.get(i, j) - 1.0 / 3.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn isolated_vertex_becomes_identity_row() {
        let w = SparseMatrix::from_triplets(3, 3, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let d = degrees(&w);
        let wn = normalized_adjacency(&w, &d);
        assert_eq!(wn.row(2).0, &[2]);
        assert_eq!(wn.get(2, 2), 1.0);

        // The unnormalized Laplacian row of an isolated vertex stays zero,
        // and `I - W_norm` cancels to zero on the identity row.
        let l = laplacian(&w, &d);
        assert_eq!(l.row(2).0.len(), 0);
        let ln = normalized_laplacian(&wn);
        assert_eq!(ln.row(2).0.len(), 0);
    }

    #[test]
    fn path_graph_laplacian_matrix() {
        let (w, d) = path3();
        let l = laplacian(&w, &d);
        let expected = [[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l.get(i, j), expected[i][j]);
            }
        }
    }

    #[test]
    fn single_vertex_laplacian_is_zero() {
        let w = SparseMatrix::from_triplets(1, 1, &[]);
        let l = laplacian(&w, &degrees(&w));
        assert_eq!(l.nnz(), 0);
    }

    #[test]
    fn laplacian_rows_sum_to_zero_and_psd() {
        let (w, d) = k4();
        let l = laplacian(&w, &d);
        for i in 0..4 {
            let sum: f64 = l.row(i).1.iter().sum();
            assert!(sum.abs() < 1e-12);
        }
        // x^T L x >= 0 for a deterministic batch of pseudo-random vectors.
        let mut state = 1u64;
        for _ in 0..50 {
            let x: Vec<f64> = (0..4)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect();
            let lx = l.mul_vec(&x);
            let q: f64 = x.iter().zip(&lx).map(|(a, b)| a * b).sum();
            assert!(q >= -1e-10);
        }
    }

    #[test]
    fn random_graph_laplacian_eigenvalues_nonnegative() {
        // Dense eigensolver oracle on a pseudo-random 50-vertex graph.
        let n = 50;
        let mut state = 0xabcdef12345u64;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                if state % 10 < 2 {
                    edges.push((i, j, 1.0));
                    edges.push((j, i, 1.0));
                }
            }
        }
        let w = SparseMatrix::from_triplets(n, n, &edges);
        let l = laplacian(&w, &degrees(&w));
        let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let (cols, vals) = l.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                dense[(i, j)] = v;
            }
        }
        let eig = nalgebra::SymmetricEigen::new(dense);
        for ev in eig.eigenvalues.iter() {
            assert!(*ev >= -1e-10, "negative eigenvalue {ev}");
        }
    }

    #[test]
    fn normalized_laplacian_path_graph() {
        let (w, d) = path3();
        let wn = normalized_adjacency(&w, &d);
        let ln = normalized_laplacian(&wn);
        assert_eq!(ln.get(1, 0), -0.5);
        assert_eq!(ln.get(1, 1), 1.0);
        assert_eq!(ln.get(1, 2), -0.5);
        for i in 0..3 {
            let sum: f64 = ln.row(i).1.iter().sum();
            assert!(sum.abs() < 1e-12);
        }
    }

    #[test]
    fn normalized_laplacian_annihilates_constants() {
        let m = crate::icosphere::icosphere(2);
        let w = adjacency(&extract_edges(&m), m.n_vertices());
        let d = degrees(&w);
        let ln = normalized_laplacian(&normalized_adjacency(&w, &d));
        let ones = vec![1.0; m.n_vertices()];
        for v in ln.mul_vec(&ones) {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn constant_signal_is_fixed_point_of_averaging() {
        let (w, d) = k4();
        let wn = normalized_adjacency(&w, &d);
        let c = vec![[3.0, -1.0, 0.25]; 4];
        let out = wn.mul_signal(&c);
        for row in out {
            for k in 0..3 {
                assert!((row[k] - c[0][k]).abs() < 1e-12);
            }
        }
    }
}
