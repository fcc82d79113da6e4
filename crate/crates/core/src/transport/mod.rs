//! Discrete optimal transport at desk scale: exact Monge enumeration,
//! Kantorovich plans, entropic regularization via Sinkhorn scaling, and
//! iterative-Bregman barycenters.

mod barycenter;
mod entropy;
mod monge;
mod sinkhorn;
mod wasserstein;

pub use barycenter::barycenter;
pub use entropy::{entropy, kl_divergence};
pub use monge::monge_bruteforce;
pub use sinkhorn::{gibbs_kernel, sinkhorn, sinkhorn_log, GibbsKernel};
pub use wasserstein::{wasserstein_p, WassersteinEstimate};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("histogram weight {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("histogram weights sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("cost matrix entry ({row}, {col}) is not finite")]
    NonFiniteCost { row: usize, col: usize },
    #[error("regularization parameter must be strictly positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("Monge enumeration needs a square cost matrix, got {rows}x{cols}")]
    NonSquareCost { rows: usize, cols: usize },
    #[error("Monge enumeration is limited to {bound} points, got {n}")]
    EnumerationBound { n: usize, bound: usize },
    #[error("kernel row {0} is entirely zero, mass cannot route")]
    ZeroKernelRow(usize),
    #[error("kernel column {0} is entirely zero, mass cannot route")]
    ZeroKernelColumn(usize),
    #[error("numerical blowup in the scaling vectors, use the log-domain variant")]
    NumericalBlowup,
    #[error("histogram supports have different sizes ({0} vs {1})")]
    SupportMismatch(usize, usize),
    #[error("kernel must be strictly positive for the barycenter iteration")]
    NonPositiveKernel,
    #[error("kernel must be symmetric for the barycenter iteration")]
    NonSymmetricKernel,
    #[error("point clouds and histograms are inconsistent: {0}")]
    InconsistentSizes(String),
}

/// Dense row-major matrix used for costs, kernels, and transport plans.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Matrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            n_rows,
            n_cols,
            data,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    /// Row sums.
    pub fn row_marginal(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Column sums.
    pub fn col_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for i in 0..self.n_rows {
            for (j, v) in self.row(i).iter().enumerate() {
                out[j] += v;
            }
        }
        out
    }
}

/// A probability vector: nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    weights: Vec<f64>,
}

impl Histogram {
    pub fn new(weights: Vec<f64>) -> Result<Self, TransportError> {
        if weights.is_empty() {
            return Err(TransportError::EmptyHistogram);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(TransportError::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(TransportError::NotNormalized { sum });
        }
        Ok(Histogram { weights })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform histogram needs at least one point");
        Histogram {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Normalizes arbitrary nonnegative masses into a histogram.
    pub fn normalized(masses: Vec<f64>) -> Result<Self, TransportError> {
        let sum: f64 = masses.iter().sum();
        if sum <= 0.0 {
            return Err(TransportError::NotNormalized { sum });
        }
        Histogram::new(masses.into_iter().map(|m| m / sum).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|&v| (v - w).abs() <= 1e-12)
    }
}

/// A coupling matrix together with its L1 marginal residuals against the
/// target histograms it was built for.
#[derive(Clone, Debug)]
pub struct TransportPlan {
    gamma: Matrix,
    row_marginal_error: f64,
    col_marginal_error: f64,
}

impl TransportPlan {
    /// Wraps a nonnegative coupling, recording its residuals against
    /// `mu` and `nu`.
    pub fn new(gamma: Matrix, mu: &Histogram, nu: &Histogram) -> Self {
        let (row, col) = l1_residuals(&gamma, mu, nu);
        TransportPlan {
            gamma,
            row_marginal_error: row,
            col_marginal_error: col,
        }
    }

    pub fn gamma(&self) -> &Matrix {
        &self.gamma
    }

    pub fn row_marginal_error(&self) -> f64 {
        self.row_marginal_error
    }

    pub fn col_marginal_error(&self) -> f64 {
        self.col_marginal_error
    }
}

/// Scaling vectors and convergence record of a Sinkhorn run.
///
/// For the log-domain variant the scalings are reconstructed as
/// `exp(potential / epsilon)`; in strongly regularized regimes (tiny
/// epsilon) they can saturate to 0 or infinity even though the plan itself
/// is computed stably from the potentials.
#[derive(Clone, Debug)]
pub struct SinkhornState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub iterations_run: usize,
    /// (row, column) L1 residuals after each sweep.
    pub residual_history: Vec<(f64, f64)>,
}

impl SinkhornState {
    /// True when the final sweep met the tolerance on both marginals.
    pub fn converged(&self, tol: f64) -> bool {
        self.residual_history
            .last()
            .is_some_and(|&(r, c)| r <= tol && c <= tol)
    }
}

/// Points in R^d stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        let dim = points.first().map_or(0, |p| p.len());
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in &points {
            assert_eq!(p.len(), dim, "ragged point cloud");
            assert!(p.iter().all(|v| v.is_finite()), "coordinates must be finite");
            data.extend_from_slice(p);
        }
        PointCloud { data, dim }
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// A cost matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    matrix: Matrix,
}

impl CostMatrix {
    pub fn new(matrix: Matrix) -> Result<Self, TransportError> {
        for i in 0..matrix.n_rows() {
            for (j, v) in matrix.row(i).iter().enumerate() {
                if !v.is_finite() {
                    return Err(TransportError::NonFiniteCost { row: i, col: j });
                }
            }
        }
        Ok(CostMatrix { matrix })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, TransportError> {
        CostMatrix::new(Matrix::from_rows(rows))
    }

    /// Pairwise `||y_j - x_i||^p` ground costs between two point clouds.
    pub fn from_point_clouds(x: &PointCloud, y: &PointCloud, p: f64) -> Self {
        assert_eq!(x.dim(), y.dim(), "point clouds have different dimensions");
        let mut m = Matrix::zeros(x.len(), y.len());
        for i in 0..x.len() {
            for j in 0..y.len() {
                let d_sq: f64 = x
                    .point(i)
                    .iter()
                    .zip(y.point(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                m.set(i, j, d_sq.powf(p / 2.0));
            }
        }
        CostMatrix { matrix: m }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn max_entry(&self) -> f64 {
        self.matrix.iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The independent coupling `gamma = mu (x) nu`, always feasible.
pub fn product_plan(mu: &Histogram, nu: &Histogram) -> TransportPlan {
    let mut gamma = Matrix::zeros(mu.len(), nu.len());
    for (i, &a) in mu.weights().iter().enumerate() {
        for (j, &b) in nu.weights().iter().enumerate() {
            gamma.set(i, j, a * b);
        }
    }
    TransportPlan::new(gamma, mu, nu)
}

/// Total cost `sum c_ij gamma_ij` of a plan.
pub fn transport_cost(plan: &TransportPlan, c: &CostMatrix) -> f64 {
    let g = plan.gamma();
    assert_eq!(g.n_rows(), c.n_rows(), "plan and cost shapes disagree");
    assert_eq!(g.n_cols(), c.n_cols(), "plan and cost shapes disagree");
    g.iter().zip(c.matrix().iter()).map(|(a, b)| a * b).sum()
}

/// L1 residuals of a plan against target marginals.
pub fn marginal_residuals(plan: &TransportPlan, mu: &Histogram, nu: &Histogram) -> (f64, f64) {
    l1_residuals(plan.gamma(), mu, nu)
}

fn l1_residuals(gamma: &Matrix, mu: &Histogram, nu: &Histogram) -> (f64, f64) {
    assert_eq!(gamma.n_rows(), mu.len(), "plan and marginal shapes disagree");
    assert_eq!(gamma.n_cols(), nu.len(), "plan and marginal shapes disagree");
    let row: f64 = gamma
        .row_marginal()
        .iter()
        .zip(mu.weights())
        .map(|(a, b)| (a - b).abs())
        .sum();
    let col: f64 = gamma
        .col_marginal()
        .iter()
        .zip(nu.weights())
        .map(|(a, b)| (a - b).abs())
        .sum();
    (row, col)
}
