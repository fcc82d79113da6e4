//! Triangle mesh representation, edge extraction and vertex normals.

use thiserror::Error;

/// Errors raised while constructing or parsing meshes.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mesh must contain at least one vertex")]
    Empty,
    #[error("face {face} references vertex {index}, but the mesh has {n_vertices} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        n_vertices: usize,
    },
    #[error("face {face} repeats vertex {index}")]
    DegenerateFace { face: usize, index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An immutable triangle mesh: vertex coordinates plus triangle index list.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
}

impl Mesh {
    /// Validates the index structure and builds a mesh.
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if vertices.is_empty() {
            return Err(MeshError::Empty);
        }
        let n = vertices.len();
        for (f, tri) in faces.iter().enumerate() {
            for &idx in tri {
                if idx >= n {
                    return Err(MeshError::IndexOutOfRange {
                        face: f,
                        index: idx,
                        n_vertices: n,
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                let dup = if tri[0] == tri[1] || tri[0] == tri[2] {
                    tri[0]
                } else {
                    tri[1]
                };
                return Err(MeshError::DegenerateFace { face: f, index: dup });
            }
        }
        Ok(Mesh { vertices, faces })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Same connectivity with replaced vertex coordinates.
    ///
    /// Panics if the row count changes.
    pub fn with_vertices(&self, vertices: Vec<[f64; 3]>) -> Mesh {
        assert_eq!(
            vertices.len(),
            self.vertices.len(),
            "replacement vertex matrix must keep the row count"
        );
        Mesh {
            vertices,
            faces: self.faces.clone(),
        }
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn bounding_box_diagonal(&self) -> f64 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt()
    }
}

/// Undirected edges (i, j) with i < j, sorted lexicographically, deduplicated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSet {
    edges: Vec<(usize, usize)>,
}

impl EdgeSet {
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// The set of undirected edges appearing in at least one face.
pub fn extract_edges(mesh: &Mesh) -> EdgeSet {
    let mut edges = Vec::with_capacity(mesh.n_faces() * 3);
    for tri in mesh.faces() {
        for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[0], tri[2])] {
            edges.push(if a < b { (a, b) } else { (b, a) });
        }
    }
    edges.sort_unstable();
    edges.dedup();
    EdgeSet { edges }
}

/// Per-vertex unit normals with a flag for rows that could not be normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalField {
    normals: Vec<[f64; 3]>,
    degenerate: Vec<bool>,
}

impl NormalField {
    pub fn normals(&self) -> &[[f64; 3]] {
        &self.normals
    }

    /// True for vertices whose accumulated normal had zero length
    /// (isolated vertices, or cancelling incident faces).
    pub fn is_degenerate(&self, i: usize) -> bool {
        self.degenerate[i]
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }
}

/// Area-weighted vertex normals.
///
/// Each incident face contributes half the cross product of its edge
/// vectors (a vector of length equal to the face area); the sum is then
/// normalized. Vertices where the sum vanishes keep a zero normal and are
/// flagged degenerate instead of producing NaNs.
pub fn vertex_normals(mesh: &Mesh) -> NormalField {
    let n = mesh.n_vertices();
    let verts = mesh.vertices();
    let mut acc = vec![[0.0f64; 3]; n];
    for tri in mesh.faces() {
        let a = verts[tri[0]];
        let b = verts[tri[1]];
        let c = verts[tri[2]];
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let fnormal = [
            0.5 * (u[1] * v[2] - u[2] * v[1]),
            0.5 * (u[2] * v[0] - u[0] * v[2]),
            0.5 * (u[0] * v[1] - u[1] * v[0]),
        ];
        for &i in tri {
            for k in 0..3 {
                acc[i][k] += fnormal[k];
            }
        }
    }
    let mut degenerate = vec![false; n];
    for (i, row) in acc.iter_mut().enumerate() {
        let norm = (row[0] * row[0] + row[1] * row[1] + row[2] * row[2]).sqrt();
        if norm == 0.0 {
            degenerate[i] = true;
        } else {
            for k in 0..3 {
                row[k] /= norm;
            }
        }
    }
    NormalField {
        normals: acc,
        degenerate,
    }
}
