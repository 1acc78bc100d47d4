//! Intrinsic-dimension estimation and the manifold dimension regularizer.

use crate::error::{Error, Result};
use crate::graph::knn;
use crate::matrix::{dist_sq, Matrix};
use crate::numerics::logdet_spd;

/// Configuration for the maximum-likelihood intrinsic-dimension estimator.
#[derive(Debug, Clone, Copy)]
pub struct IdEstimatorConfig {
    /// neighborhood size (includes the k-th neighbor that sets the radius)
    pub k: usize,
    /// distances below this are clamped to it to guard against duplicates
    pub min_distance: f64,
}

impl Default for IdEstimatorConfig {
    fn default() -> Self {
        IdEstimatorConfig {
            k: 8,
            min_distance: 1e-12,
        }
    }
}

/// Maximum-likelihood intrinsic dimension of a point cloud.
///
/// Per point z with neighbor distances r_1 <= ... <= r_k, the local estimate
/// is the Levina–Bickel inverse mean log-ratio
/// [(1/(k-1)) sum_i log(r_k / r_i)]^{-1}; the global estimate averages the
/// local ones.
pub fn mle_id(points: &Matrix, config: &IdEstimatorConfig) -> Result<f64> {
    let n = points.rows();
    let k = config.k;
    if k < 2 {
        return Err(Error::KTooSmall(format!("mle_id needs k >= 2, got {k}")));
    }
    if n < k + 1 {
        return Err(Error::TooFewPoints(format!(
            "mle_id with k={k} needs at least {} points, got {n}",
            k + 1
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        let nbrs = knn(points, points.row(i), k, i)?;
        let dists: Vec<f64> = nbrs
            .iter()
            .map(|&j| dist_sq(points.row(i), points.row(j)).sqrt().max(config.min_distance))
            .collect();
        let rk = dists[k - 1];
        let sum: f64 = dists[..k - 1].iter().map(|&r| (rk / r).ln()).sum();
        if sum <= 0.0 {
            return Err(Error::DegenerateCloud(format!(
                "all k nearest neighbors of point {i} are coincident"
            )));
        }
        total += (k - 1) as f64 / sum;
    }
    Ok(total / n as f64)
}

/// Median pairwise Euclidean distance between the rows of `points`.
///
/// Median of the sorted ascending list of all n(n-1)/2 distances; for an even
/// count, the mean of the two middle values.
pub fn median_pairwise_distance(points: &Matrix) -> Result<f64> {
    let n = points.rows();
    if n < 2 {
        return Err(Error::TooFewPoints(
            "median pairwise distance needs at least 2 points".into(),
        ));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for p in 0..n {
        for q in (p + 1)..n {
            dists.push(dist_sq(points.row(p), points.row(q)).sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = dists.len();
    Ok(if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    })
}

/// Kernel-weighted Dirichlet energy of a point cloud:
/// sum over unordered pairs of exp(-||z_p - z_q||^2 / (2 eps^2)) ||z_p - z_q||^2.
/// Coincident pairs contribute zero; at eps = 0 the kernel collapses to a
/// delta and the energy is exactly zero.
pub fn dirichlet_energy(points: &Matrix, epsilon: f64) -> Result<f64> {
    if epsilon < 0.0 || epsilon.is_nan() {
        return Err(Error::DegenerateCloud(format!(
            "dirichlet energy needs epsilon >= 0, got {epsilon}"
        )));
    }
    let n = points.rows();
    let inv = 1.0 / (2.0 * epsilon * epsilon);
    let mut total = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            let d2 = dist_sq(points.row(p), points.row(q));
            if d2 > 0.0 {
                total += (-d2 * inv).exp() * d2;
            }
        }
    }
    Ok(total)
}

/// Volume proxy sqrt(det(Sigma + I)) with the uncentered second-moment matrix
/// Sigma = (1/n) Z^T Z.
pub fn manifold_volume(points: &Matrix) -> Result<f64> {
    if points.rows() == 0 {
        return Err(Error::TooFewPoints("manifold volume of empty cloud".into()));
    }
    let mut sigma = points.scaled_gram();
    for i in 0..sigma.rows() {
        let v = sigma.get(i, i) + 1.0;
        sigma.set(i, i, v);
    }
    let logdet = logdet_spd(&sigma)?;
    let vol = (0.5 * logdet).exp();
    if !vol.is_finite() {
        return Err(Error::NonFinite("manifold volume overflowed".into()));
    }
    Ok(vol)
}

/// Dimension regularizer: manifold volume times Dirichlet energy.
/// `epsilon = None` uses the median pairwise distance heuristic.
pub fn loss_dim(points: &Matrix, epsilon: Option<f64>) -> Result<f64> {
    let eps = match epsilon {
        Some(e) => e,
        None => median_pairwise_distance(points)?,
    };
    Ok(manifold_volume(points)? * dirichlet_energy(points, eps)?)
}
