//! Mesh denoising through graph operators, plus discrete optimal
//! transport utilities and a benchmark engine.
//!
//! The toolkit covers:
//!
//! - triangle mesh I/O (ASCII OFF/OBJ), edge extraction, vertex normals;
//! - sparse graph operators: adjacency, degrees, normalized adjacency and
//!   both Laplacians, with deterministic sparse-times-signal products;
//! - seeded Gaussian noise along vertex normals and the SNR metric;
//! - three denoisers: iterative filtering, explicit-Euler heat diffusion,
//!   and Sobolev regularization backed by a sparse Cholesky factorization
//!   that is built once and reused across solves;
//! - desk-scale optimal transport: exact Monge enumeration, Sinkhorn in
//!   plain and log-domain form, KL/entropy, Wasserstein-p, barycenters;
//! - a benchmark engine for parameter sweeps, SNR reporting and
//!   median-based timing, consumed by the `meshdn` CLI.
//!
//! Everything is deterministic given its inputs: noise uses a seeded
//! portable generator and all reductions run in a fixed order, so reports
//! reproduce bit for bit across runs and platforms.

pub mod bench;
pub mod cholesky;
pub mod denoise;
pub mod graph;
pub mod icosphere;
pub mod io;
pub mod mesh;
pub mod noise;
pub mod ordering;
pub mod sparse;
pub mod transport;

pub use cholesky::{sparse_cholesky, sparse_cholesky_with, CholeskyError, CholeskyFactor};
pub use denoise::{
    centroid, filter_denoise, heat_denoise, sobolev_denoise, FilterParams, HeatParams,
    SobolevParams, SobolevSolver,
};
pub use graph::{adjacency, degrees, laplacian, normalized_adjacency, normalized_laplacian};
pub use icosphere::icosphere;
pub use mesh::{extract_edges, vertex_normals, EdgeSet, Mesh, MeshError, NormalField};
pub use noise::{add_normal_noise, snr, NoiseParams};
pub use ordering::FillOrdering;
pub use sparse::{spmm, SparseMatrix};
