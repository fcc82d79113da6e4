//! Shannon entropy and Kullback-Leibler divergence of histograms.

use super::Histogram;

/// Shannon entropy in nats, with the convention `0 log 0 = 0`.
pub fn entropy(p: &Histogram) -> f64 {
    -p.weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * w.ln())
        .sum::<f64>()
}

/// `KL(p || q) = sum_i p_i log(p_i / q_i)`.
///
/// Conventions: `0 log 0 = 0`; a point where `p_i > 0` and `q_i = 0`
/// yields positive infinity (the sentinel, never a crash). Nonnegative by
/// Gibbs' inequality, zero exactly when the histograms coincide.
pub fn kl_divergence(p: &Histogram, q: &Histogram) -> f64 {
    assert_eq!(p.len(), q.len(), "histograms must have equal length");
    let mut acc = 0.0;
    for (&pi, &qi) in p.weights().iter().zip(q.weights()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        acc += pi * (pi / qi).ln();
    }
    acc
}
