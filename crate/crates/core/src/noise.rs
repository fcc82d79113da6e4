//! Seeded Gaussian noise along vertex normals, and the SNR quality metric.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::mesh::{Mesh, NormalField};

#[derive(Debug, Error)]
pub enum SnrError {
    #[error("reference signal has zero Frobenius norm")]
    ZeroReference,
}

/// Noise amplitude and generator seed.
#[derive(Clone, Copy, Debug)]
pub struct NoiseParams {
    pub rho: f64,
    pub seed: u64,
}

impl NoiseParams {
    /// Panics if `rho` is negative or not finite.
    pub fn new(rho: f64, seed: u64) -> Self {
        assert!(rho.is_finite() && rho >= 0.0, "noise amplitude must be finite and >= 0");
        NoiseParams { rho, seed }
    }
}

/// Horner evaluation; coefficients from highest degree down.
fn horner(r: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * r + c)
}

/// Inverse of the standard normal CDF.
///
/// Algorithm PPND16 from Wichura, "Algorithm AS 241: The Percentage Points
/// of the Normal Distribution" (1988); accurate to about 1 part in 1e16.
/// Pure f64 arithmetic, so results are identical on every platform.
pub fn standard_normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must lie in (0, 1)");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = horner(
            r,
            &[
                2.5090809287301226727e3,
                3.3430575583588128105e4,
                6.7265770927008700853e4,
                4.5921953931549871457e4,
                1.3731693765509461125e4,
                1.9715909503065514427e3,
                1.3314166789178437745e2,
                3.3871328727963666080e0,
            ],
        );
        let den = horner(
            r,
            &[
                5.2264952788528545610e3,
                2.8729085735721942674e4,
                3.9307895800092710610e4,
                2.1213794301586595867e4,
                5.3941960214247511077e3,
                6.8718700749205790830e2,
                4.2313330701600911252e1,
                1.0,
            ],
        );
        return q * num / den;
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        horner(
            r,
            &[
                7.74545014278341407640e-4,
                2.27238449892691845833e-2,
                2.41780725177450611770e-1,
                1.27045825245236838258e0,
                3.64784832476320460504e0,
                5.76949722146069140550e0,
                4.63033784615654529590e0,
                1.42343711074968357734e0,
            ],
        ) / horner(
            r,
            &[
                1.05075007164441684324e-9,
                5.47593808499534494600e-4,
                1.51986665636164571966e-2,
                1.48103976427480074590e-1,
                6.89767334985100004550e-1,
                1.67638483018380384940e0,
                2.05319162663775882187e0,
                1.0,
            ],
        )
    } else {
        let r = r - 5.0;
        horner(
            r,
            &[
                2.01033439929228813265e-7,
                2.71155556874348757815e-5,
                1.2426609473880784386e-3,
                2.6532189526576123093e-2,
                2.9656057182850489123e-1,
                1.7848265399172913358e0,
                5.4637849111641143699e0,
                6.6579046435011037772e0,
            ],
        ) / horner(
            r,
            &[
                2.04426310338993978564e-15,
                1.4215117583164458887e-7,
                1.8463183175100546818e-5,
                7.868691311456132591e-4,
                1.48753612908506148525e-2,
                1.3692988092273580531e-1,
                5.9983220655588793769e-1,
                1.0,
            ],
        )
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// One standard normal variate per vertex, in index order.
///
/// Each variate maps one ChaCha12 64-bit word through the open interval
/// (0, 1) -- u = (word >> 11 + 1/2) / 2^53 -- and then through the inverse
/// normal CDF, so a fixed seed yields the same displacements everywhere.
pub fn normal_variates(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
            standard_normal_quantile(u)
        })
        .collect()
}

/// Displaces each vertex by `rho * eps_i` along its unit normal, with
/// `eps_i` i.i.d. standard normal from the seeded generator.
///
/// Faces are untouched. Vertices with a degenerate (zero) normal keep their
/// position; their variate is still drawn so indices stay aligned.
pub fn add_normal_noise(mesh: &Mesh, normals: &NormalField, params: &NoiseParams) -> Mesh {
    assert_eq!(
        normals.len(),
        mesh.n_vertices(),
        "normal field does not match the mesh"
    );
    let eps = normal_variates(params.seed, mesh.n_vertices());
    let vertices = mesh
        .vertices()
        .iter()
        .zip(normals.normals())
        .zip(&eps)
        .map(|((v, n), e)| {
            let s = params.rho * e;
            [v[0] + s * n[0], v[1] + s * n[1], v[2] + s * n[2]]
        })
        .collect();
    mesh.with_vertices(vertices)
}

fn frobenius_norm_sq(x: &[[f64; 3]]) -> f64 {
    x.iter()
        .map(|r| r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
        .sum()
}

/// Signal-to-noise ratio in decibels: `-20 log10(|X - Y|_F / |Y|_F)`.
///
/// `x` is the estimate and `y` the reference whose norm sits in the
/// denominator. Returns positive infinity for a perfect reconstruction and
/// an error when the reference has zero norm.
pub fn snr(x: &[[f64; 3]], y: &[[f64; 3]]) -> Result<f64, SnrError> {
    assert_eq!(x.len(), y.len(), "signals must have equal shape");
    let ref_norm_sq = frobenius_norm_sq(y);
    if ref_norm_sq == 0.0 {
        return Err(SnrError::ZeroReference);
    }
    let diff_sq: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
            d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
        })
        .sum();
    if diff_sq == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * (diff_sq / ref_norm_sq).log10())
}
