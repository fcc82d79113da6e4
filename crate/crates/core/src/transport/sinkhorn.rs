//! Gibbs kernels and Sinkhorn matrix scaling, in plain and log-domain form.

use super::{CostMatrix, Histogram, Matrix, SinkhornState, TransportError, TransportPlan};

/// `K = exp(-c / epsilon)` with a flag for entries that underflowed to
/// exactly zero (costs beyond roughly 745 epsilon in double precision).
#[derive(Clone, Debug)]
pub struct GibbsKernel {
    matrix: Matrix,
    has_underflow: bool,
}

impl GibbsKernel {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn has_underflow(&self) -> bool {
        self.has_underflow
    }
}

/// Entrywise `exp(-c_ij / epsilon)`.
pub fn gibbs_kernel(c: &CostMatrix, epsilon: f64) -> Result<GibbsKernel, TransportError> {
    if !(epsilon > 0.0) {
        return Err(TransportError::NonPositiveEpsilon(epsilon));
    }
    let mut matrix = Matrix::zeros(c.n_rows(), c.n_cols());
    let mut has_underflow = false;
    for i in 0..c.n_rows() {
        for j in 0..c.n_cols() {
            let v = (-c.get(i, j) / epsilon).exp();
            if v == 0.0 {
                has_underflow = true;
            }
            matrix.set(i, j, v);
        }
    }
    Ok(GibbsKernel {
        matrix,
        has_underflow,
    })
}

/// Classic Sinkhorn scaling: alternately rescale rows and columns of `k`
/// until both L1 marginal residuals fall below `tol` or `max_iters`
/// sweeps have run.
///
/// Fails when a kernel row or column is entirely zero (no mass can route
/// through it) or when the scaling vectors leave the finite range, in
/// which case the log-domain variant is the remedy.
pub fn sinkhorn(
    mu: &Histogram,
    nu: &Histogram,
    k: &Matrix,
    max_iters: usize,
    tol: f64,
) -> Result<(SinkhornState, TransportPlan), TransportError> {
    let (n, m) = (mu.len(), nu.len());
    assert_eq!(k.n_rows(), n, "kernel and row marginal shapes disagree");
    assert_eq!(k.n_cols(), m, "kernel and column marginal shapes disagree");
    assert!(max_iters >= 1, "at least one sweep is required");
    assert!(tol > 0.0, "tolerance must be positive");

    for i in 0..n {
        if k.row(i).iter().all(|&v| v == 0.0) {
            return Err(TransportError::ZeroKernelRow(i));
        }
    }
    for j in 0..m {
        if (0..n).all(|i| k.get(i, j) == 0.0) {
            return Err(TransportError::ZeroKernelColumn(j));
        }
    }

    let mut u = vec![1.0f64; n];
    let mut v = vec![1.0f64; m];
    let mut history = Vec::new();
    let mut iterations_run = 0;
    for _ in 0..max_iters {
        // u = mu ./ (K v)
        for i in 0..n {
            let kv: f64 = k.row(i).iter().zip(&v).map(|(a, b)| a * b).sum();
            u[i] = mu.weights()[i] / kv;
        }
        // v = nu ./ (K^T u)
        for j in 0..m {
            let ktu: f64 = (0..n).map(|i| k.get(i, j) * u[i]).sum();
            v[j] = nu.weights()[j] / ktu;
        }
        iterations_run += 1;

        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(TransportError::NumericalBlowup);
        }

        let plan = scale_kernel(k, &u, &v);
        let (r, c) = super::l1_residuals(&plan, mu, nu);
        history.push((r, c));
        if r <= tol && c <= tol {
            break;
        }
    }

    let plan = TransportPlan::new(scale_kernel(k, &u, &v), mu, nu);
    let state = SinkhornState {
        u,
        v,
        iterations_run,
        residual_history: history,
    };
    Ok((state, plan))
}

/// `diag(u) K diag(v)`.
pub fn scale_kernel(k: &Matrix, u: &[f64], v: &[f64]) -> Matrix {
    let mut out = Matrix::zeros(k.n_rows(), k.n_cols());
    for i in 0..k.n_rows() {
        for j in 0..k.n_cols() {
            out.set(i, j, u[i] * k.get(i, j) * v[j]);
        }
    }
    out
}

/// Log-domain Sinkhorn on the cost matrix directly.
///
/// Computes the same fixed point as [`sinkhorn`] on the Gibbs kernel of
/// `(c, epsilon)` but runs on dual potentials with log-sum-exp reductions,
/// so small `epsilon` cannot underflow the kernel. Zero-mass histogram
/// entries are handled through `-inf` potentials.
pub fn sinkhorn_log(
    mu: &Histogram,
    nu: &Histogram,
    c: &CostMatrix,
    epsilon: f64,
    max_iters: usize,
    tol: f64,
) -> Result<(SinkhornState, TransportPlan), TransportError> {
    let (n, m) = (mu.len(), nu.len());
    assert_eq!(c.n_rows(), n, "cost and row marginal shapes disagree");
    assert_eq!(c.n_cols(), m, "cost and column marginal shapes disagree");
    assert!(max_iters >= 1, "at least one sweep is required");
    assert!(tol > 0.0, "tolerance must be positive");
    if !(epsilon > 0.0) {
        return Err(TransportError::NonPositiveEpsilon(epsilon));
    }

    let log_mu: Vec<f64> = mu.weights().iter().map(|&w| w.ln()).collect();
    let log_nu: Vec<f64> = nu.weights().iter().map(|&w| w.ln()).collect();
    let mut f = vec![0.0f64; n];
    let mut g = vec![0.0f64; m];
    let mut scratch = vec![0.0f64; n.max(m)];
    let mut history = Vec::new();
    let mut iterations_run = 0;

    for _ in 0..max_iters {
        for i in 0..n {
            for j in 0..m {
                scratch[j] = (g[j] - c.get(i, j)) / epsilon;
            }
            f[i] = epsilon * (log_mu[i] - log_sum_exp(&scratch[..m]));
        }
        for j in 0..m {
            for i in 0..n {
                scratch[i] = (f[i] - c.get(i, j)) / epsilon;
            }
            g[j] = epsilon * (log_nu[j] - log_sum_exp(&scratch[..n]));
        }
        iterations_run += 1;

        let plan = plan_from_potentials(c, epsilon, &f, &g);
        let (r, cres) = super::l1_residuals(&plan, mu, nu);
        history.push((r, cres));
        if r <= tol && cres <= tol {
            break;
        }
    }

    let plan = TransportPlan::new(plan_from_potentials(c, epsilon, &f, &g), mu, nu);
    let state = SinkhornState {
        u: f.iter().map(|&fi| (fi / epsilon).exp()).collect(),
        v: g.iter().map(|&gj| (gj / epsilon).exp()).collect(),
        iterations_run,
        residual_history: history,
    };
    Ok((state, plan))
}

fn plan_from_potentials(c: &CostMatrix, epsilon: f64, f: &[f64], g: &[f64]) -> Matrix {
    let mut out = Matrix::zeros(c.n_rows(), c.n_cols());
    for i in 0..c.n_rows() {
        for j in 0..c.n_cols() {
            out.set(i, j, ((f[i] + g[j] - c.get(i, j)) / epsilon).exp());
        }
    }
    out
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}
