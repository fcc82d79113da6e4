//! The three denoisers: iterative filtering, explicit-Euler heat
//! diffusion, and Sobolev regularization through a cached sparse Cholesky
//! factorization.
//!
//! Filtering and heat diffusion act through the row-stochastic normalized
//! adjacency; Sobolev uses the unnormalized Laplacian in `(I + mu L) Y = X`.

use crate::cholesky::{sparse_cholesky, CholeskyError, CholeskyFactor};
use crate::sparse::SparseMatrix;

/// Iteration count for plain filtering.
#[derive(Clone, Copy, Debug)]
pub struct FilterParams {
    pub iterations: usize,
}

/// Time step and iteration count for explicit-Euler heat diffusion.
#[derive(Clone, Copy, Debug)]
pub struct HeatParams {
    pub tau: f64,
    pub iterations: usize,
}

impl HeatParams {
    pub fn new(tau: f64, iterations: usize) -> Self {
        assert!(tau.is_finite(), "time step must be finite");
        HeatParams { tau, iterations }
    }

    /// True when the step leaves the unconditionally stable range [0, 1].
    /// Such steps are allowed but each output row stops being a convex
    /// combination of input rows.
    pub fn stability_warning(&self) -> bool {
        self.tau < 0.0 || self.tau > 1.0
    }
}

/// Regularization weight for Sobolev denoising.
#[derive(Clone, Copy, Debug)]
pub struct SobolevParams {
    pub mu: f64,
}

impl SobolevParams {
    pub fn new(mu: f64) -> Self {
        assert!(mu.is_finite() && mu >= 0.0, "regularization weight must be finite and >= 0");
        SobolevParams { mu }
    }
}

/// Applies `k` neighborhood-averaging steps `X <- W_norm X`.
pub fn filter_denoise(
    x: &[[f64; 3]],
    w_norm: &SparseMatrix,
    params: &FilterParams,
) -> Vec<[f64; 3]> {
    assert_eq!(w_norm.n_cols(), x.len(), "signal and operator shapes disagree");
    let mut cur = x.to_vec();
    for _ in 0..params.iterations {
        cur = w_norm.mul_signal(&cur);
    }
    cur
}

/// Applies `k` explicit-Euler steps `X <- (1 - tau) X + tau W_norm X`.
///
/// `tau = 1` takes the pure filtering path, reproducing
/// [`filter_denoise`] bit for bit; `tau = 0` returns the input unchanged.
pub fn heat_denoise(x: &[[f64; 3]], w_norm: &SparseMatrix, params: &HeatParams) -> Vec<[f64; 3]> {
    assert_eq!(w_norm.n_cols(), x.len(), "signal and operator shapes disagree");
    if params.tau == 0.0 {
        return x.to_vec();
    }
    if params.tau == 1.0 {
        return filter_denoise(
            x,
            w_norm,
            &FilterParams {
                iterations: params.iterations,
            },
        );
    }
    let (tau, keep) = (params.tau, 1.0 - params.tau);
    let mut cur = x.to_vec();
    for _ in 0..params.iterations {
        let averaged = w_norm.mul_signal(&cur);
        for (c, a) in cur.iter_mut().zip(&averaged) {
            for k in 0..3 {
                c[k] = keep * c[k] + tau * a[k];
            }
        }
    }
    cur
}

/// A factored `(I + mu L)` system, reusable across right-hand sides.
///
/// Building the solver performs the single Cholesky factorization; every
/// [`SobolevSolver::solve`] call afterwards costs only two triangular
/// solves per coordinate, so sweeping different signals (or timing
/// repeated solves) never refactors.
#[derive(Debug)]
pub struct SobolevSolver {
    factor: CholeskyFactor,
    mu: f64,
}

impl SobolevSolver {
    /// Factors `I + mu L` for a symmetric positive semi-definite `L`.
    pub fn new(l: &SparseMatrix, params: &SobolevParams) -> Result<Self, CholeskyError> {
        let n = l.n_rows();
        let mut triplets = Vec::with_capacity(l.nnz() + n);
        for i in 0..n {
            triplets.push((i, i, 1.0));
            let (cols, vals) = l.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, params.mu * v));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &triplets);
        let factor = sparse_cholesky(&a)?;
        Ok(SobolevSolver {
            factor,
            mu: params.mu,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// The unique solution of `(I + mu L) Y = X`.
    pub fn solve(&self, x: &[[f64; 3]]) -> Vec<[f64; 3]> {
        self.factor.solve_signal(x)
    }
}

/// One-shot Sobolev denoising: factors `(I + mu L)` and solves for `x`.
///
/// `mu = 0` returns the input unchanged. To amortize the factorization
/// across several signals, build a [`SobolevSolver`] instead.
pub fn sobolev_denoise(
    x: &[[f64; 3]],
    l: &SparseMatrix,
    params: &SobolevParams,
) -> Result<Vec<[f64; 3]>, CholeskyError> {
    assert_eq!(l.n_cols(), x.len(), "signal and operator shapes disagree");
    if params.mu == 0.0 {
        return Ok(x.to_vec());
    }
    Ok(SobolevSolver::new(l, params)?.solve(x))
}

/// Column means of a signal.
pub fn centroid(x: &[[f64; 3]]) -> [f64; 3] {
    assert!(!x.is_empty(), "centroid of an empty signal");
    let mut sum = [0.0f64; 3];
    for row in x {
        for k in 0..3 {
            sum[k] += row[k];
        }
    }
    sum.map(|s| s / x.len() as f64)
}
