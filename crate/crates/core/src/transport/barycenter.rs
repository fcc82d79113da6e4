//! Entropic barycenters by iterative Bregman projections.

use super::{Histogram, Matrix, TransportError};

/// Weighted barycenter of histograms sharing one support, under the
/// symmetric positive kernel `k`.
///
/// Round-synchronous scaling: each input keeps a pair `(u_r, v_r)`; a
/// round updates `u_r = a_r ./ (K v_r)`, takes the barycenter as the
/// weighted geometric mean of `v_r .* (K^T u_r)` over inputs, then sets
/// `v_r = b ./ (K^T u_r)`. Stops when successive barycenters differ by at
/// most `tol` in L1, or after `max_iters` rounds.
///
/// The fixed point carries the kernel's entropic bias: even a single
/// input is reproduced only up to one kernel smoothing, so sharp kernels
/// (small regularization) track the inputs closely while wide kernels
/// blur them.
pub fn barycenter(
    histograms: &[Histogram],
    weights: &[f64],
    k: &Matrix,
    max_iters: usize,
    tol: f64,
) -> Result<Histogram, TransportError> {
    assert!(!histograms.is_empty(), "need at least one histogram");
    assert_eq!(histograms.len(), weights.len(), "one weight per histogram");
    assert!(max_iters >= 1, "at least one round is required");
    assert!(tol > 0.0, "tolerance must be positive");

    let n = histograms[0].len();
    for h in histograms {
        if h.len() != n {
            return Err(TransportError::SupportMismatch(n, h.len()));
        }
    }
    if k.n_rows() != n || k.n_cols() != n {
        return Err(TransportError::SupportMismatch(n, k.n_rows()));
    }
    if k.iter().any(|v| !(v > 0.0) || !v.is_finite()) {
        return Err(TransportError::NonPositiveKernel);
    }
    let kmax = k.iter().fold(0.0f64, f64::max);
    for i in 0..n {
        for j in (i + 1)..n {
            if (k.get(i, j) - k.get(j, i)).abs() > 1e-12 * kmax {
                return Err(TransportError::NonSymmetricKernel);
            }
        }
    }
    let wsum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| !(w > 0.0)) || (wsum - 1.0).abs() > 1e-12 {
        return Err(TransportError::NotNormalized { sum: wsum });
    }

    let r = histograms.len();
    let mut v = vec![vec![1.0f64; n]; r];
    let mut u = vec![vec![0.0f64; n]; r];
    let mut log_b = vec![0.0f64; n];
    let mut prev_b: Option<Vec<f64>> = None;
    let mut b = vec![0.0f64; n];

    for _ in 0..max_iters {
        for (ur, (vr, h)) in u.iter_mut().zip(v.iter().zip(histograms)) {
            for i in 0..n {
                let kv: f64 = k.row(i).iter().zip(vr.iter()).map(|(a, b)| a * b).sum();
                ur[i] = h.weights()[i] / kv;
            }
        }
        // b = weighted geometric mean of v_r .* (K^T u_r), in log space.
        log_b.iter_mut().for_each(|x| *x = 0.0);
        let mut ktu = vec![vec![0.0f64; n]; r];
        for (idx, ur) in u.iter().enumerate() {
            for j in 0..n {
                // K is symmetric, so K^T u = K u.
                let s: f64 = k.row(j).iter().zip(ur.iter()).map(|(a, b)| a * b).sum();
                ktu[idx][j] = s;
                log_b[j] += weights[idx] * (v[idx][j] * s).ln();
            }
        }
        for j in 0..n {
            b[j] = log_b[j].exp();
        }
        for (idx, vr) in v.iter_mut().enumerate() {
            for j in 0..n {
                vr[j] = b[j] / ktu[idx][j];
            }
        }
        if let Some(prev) = &prev_b {
            let delta: f64 = b.iter().zip(prev).map(|(x, y)| (x - y).abs()).sum();
            if delta <= tol {
                break;
            }
        }
        prev_b = Some(b.clone());
    }

    Histogram::normalized(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{gibbs_kernel, CostMatrix};

    /// Gaussian grid kernel on `n` points with spacing 1.
    fn grid_kernel(n: usize, epsilon: f64) -> Matrix {
        let mut cost = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let d = i as f64 - j as f64;
                cost.set(i, j, d * d);
            }
        }
        gibbs_kernel(&CostMatrix::new(cost).unwrap(), epsilon)
            .unwrap()
            .matrix()
            .clone()
    }

    #[test]
    fn single_input_returns_it() {
        // A sharp kernel keeps the entropic bias below the tolerance.
        let a = Histogram::new(vec![0.1, 0.2, 0.4, 0.2, 0.1]).unwrap();
        let k = grid_kernel(5, 0.05);
        let b = barycenter(&[a.clone()], &[1.0], &k, 1000, 1e-10).unwrap();
        for (x, y) in b.weights().iter().zip(a.weights()) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn identical_inputs_return_that_histogram() {
        let a = Histogram::new(vec![0.05, 0.15, 0.3, 0.3, 0.15, 0.05]).unwrap();
        let k = grid_kernel(6, 0.05);
        let inputs = vec![a.clone(), a.clone(), a.clone()];
        let b = barycenter(&inputs, &[0.25, 0.5, 0.25], &k, 1000, 1e-10).unwrap();
        for (x, y) in b.weights().iter().zip(a.weights()) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn point_mass_barycenter_mode_lies_between() {
        let n = 21;
        let (i, j) = (4usize, 16usize);
        let mut a = vec![0.0; n];
        a[i] = 1.0;
        let mut b = vec![0.0; n];
        b[j] = 1.0;
        let inputs = vec![Histogram::new(a).unwrap(), Histogram::new(b).unwrap()];
        let k = grid_kernel(n, 8.0);
        let bary = barycenter(&inputs, &[0.5, 0.5], &k, 2000, 1e-10).unwrap();
        let mode = bary
            .weights()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!((i..=j).contains(&mode), "mode {mode} outside [{i}, {j}]");
        // Exhaustive check: no position outside the segment beats the mode.
        let best = bary.weights()[mode];
        for (pos, &w) in bary.weights().iter().enumerate() {
            if !(i..=j).contains(&pos) {
                assert!(w < best);
            }
        }
    }

    #[test]
    fn rejects_mismatched_supports_and_bad_kernels() {
        let a = Histogram::uniform(3);
        let b = Histogram::uniform(4);
        let k = grid_kernel(3, 1.0);
        assert!(matches!(
            barycenter(&[a.clone(), b], &[0.5, 0.5], &k, 10, 1e-6),
            Err(TransportError::SupportMismatch(3, 4))
        ));
        let mut zeroed = k.clone();
        zeroed.set(0, 1, 0.0);
        assert!(matches!(
            barycenter(&[a.clone()], &[1.0], &zeroed, 10, 1e-6),
            Err(TransportError::NonPositiveKernel)
        ));
        let mut skew = k.clone();
        skew.set(0, 1, skew.get(0, 1) * 2.0);
        assert!(matches!(
            barycenter(&[a.clone()], &[1.0], &skew, 10, 1e-6),
            Err(TransportError::NonSymmetricKernel)
        ));
        assert!(matches!(
            barycenter(&[a], &[0.9], &k, 10, 1e-6),
            Err(TransportError::NotNormalized { .. })
        ));
    }

    #[test]
    fn output_is_normalized() {
        let a = Histogram::new(vec![0.7, 0.2, 0.1]).unwrap();
        let b = Histogram::new(vec![0.1, 0.2, 0.7]).unwrap();
        let k = grid_kernel(3, 2.0);
        let bary = barycenter(&[a, b], &[0.5, 0.5], &k, 500, 1e-9).unwrap();
        let sum: f64 = bary.weights().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        assert!(bary.weights().iter().all(|&w| w >= 0.0));
    }
}
