//! Dataset complexity metrics (Fisher discriminant ratio, fraction of
//! hyperspheres covering) and the class-separation regularizer.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{manifold_volume, mle_id, IdEstimatorConfig};
use crate::matrix::{dist_sq, Matrix};

fn check_labeled_cloud(points: &Matrix, labels: &[usize]) -> Result<usize> {
    let n = points.rows();
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} points but {} labels",
            n,
            labels.len()
        )));
    }
    if n == 0 {
        return Err(Error::TooFewPoints("empty labeled cloud".into()));
    }
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; n_classes];
    for &l in labels {
        seen[l] = true;
    }
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(Error::SingleClass);
    }
    Ok(n_classes)
}

/// Fisher discriminant ratio complexity F1 = 1 / (1 + max_f r_f), where r_f
/// is the per-feature between-class over within-class variance ratio.
/// A feature with zero within-class variance but nonzero between-class spread
/// separates perfectly: F1 = 0.
pub fn fdr(points: &Matrix, labels: &[usize]) -> Result<f64> {
    let n_classes = check_labeled_cloud(points, labels)?;
    let n = points.rows();
    let d = points.cols();

    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        counts[l] += 1;
    }

    let mut max_r: f64 = 0.0;
    for f in 0..d {
        let mut class_mean = vec![0.0; n_classes];
        let mut mean = 0.0;
        for i in 0..n {
            let x = points.get(i, f);
            class_mean[labels[i]] += x;
            mean += x;
        }
        mean /= n as f64;
        for (m, &c) in class_mean.iter_mut().zip(&counts) {
            if c > 0 {
                *m /= c as f64;
            }
        }
        let mut between = 0.0;
        for (c, &m) in counts.iter().zip(&class_mean) {
            let dm = m - mean;
            between += *c as f64 * dm * dm;
        }
        let mut within = 0.0;
        for i in 0..n {
            let dx = points.get(i, f) - class_mean[labels[i]];
            within += dx * dx;
        }
        if within == 0.0 {
            if between > 0.0 {
                return Ok(0.0); // perfectly separating feature
            }
            continue; // constant feature carries no information
        }
        max_r = max_r.max(between / within);
    }
    Ok(1.0 / (1.0 + max_r))
}

/// Fraction of hyperspheres covering.
///
/// Each point gets a ball of radius half the distance to its nearest enemy
/// (a point with a different label). Balls are scanned in descending-radius
/// order (ties by ascending index); a ball fully inside an already-kept ball
/// (with tolerance 1e-12) is absorbed. FHC = kept balls / n.
pub fn fhc(points: &Matrix, labels: &[usize]) -> Result<f64> {
    check_labeled_cloud(points, labels)?;
    let n = points.rows();

    let mut radius = vec![0.0; n];
    for i in 0..n {
        let mut best = f64::INFINITY;
        for j in 0..n {
            if labels[j] != labels[i] {
                best = best.min(dist_sq(points.row(i), points.row(j)));
            }
        }
        radius[i] = 0.5 * best.sqrt();
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| radius[b].partial_cmp(&radius[a]).unwrap().then(a.cmp(&b)));

    let mut survivors: Vec<usize> = Vec::new();
    for &i in &order {
        let absorbed = survivors.iter().any(|&s| {
            let d = dist_sq(points.row(s), points.row(i)).sqrt();
            d + radius[i] <= radius[s] + 1e-12
        });
        if !absorbed {
            survivors.push(i);
        }
    }
    Ok(survivors.len() as f64 / n as f64)
}

/// Separation regularizer: squared gap between the summed per-class manifold
/// volumes and the volume of the whole cloud. Exactly zero for a single
/// class, where the sum and the total coincide.
pub fn loss_sep(points: &Matrix, labels: &[usize]) -> Result<f64> {
    let n = points.rows();
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} points but {} labels",
            n,
            labels.len()
        )));
    }
    if n == 0 {
        return Err(Error::TooFewPoints("empty labeled cloud".into()));
    }
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let total = manifold_volume(points)?;
    let mut class_sum = 0.0;
    for c in 0..n_classes {
        let members: Vec<usize> = (0..points.rows()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        class_sum += manifold_volume(&points.select_rows(&members))?;
    }
    let gap = class_sum - total;
    Ok(gap * gap)
}

/// All complexity metrics for a labeled cloud, with errors tagged by the
/// metric that produced them.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexityReport {
    pub id_estimate: f64,
    pub fdr: f64,
    pub fhc: f64,
    pub per_class_volumes: Vec<f64>,
    pub total_volume: f64,
}

pub fn complexity_report(
    points: &Matrix,
    labels: &[usize],
    id_config: &IdEstimatorConfig,
) -> Result<ComplexityReport> {
    let id_estimate = mle_id(points, id_config).map_err(|e| e.in_metric("id"))?;
    let fdr = fdr(points, labels).map_err(|e| e.in_metric("fdr"))?;
    let fhc = fhc(points, labels).map_err(|e| e.in_metric("fhc"))?;
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut per_class_volumes = Vec::new();
    for c in 0..n_classes {
        let members: Vec<usize> = (0..points.rows()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        per_class_volumes.push(
            manifold_volume(&points.select_rows(&members))
                .map_err(|e| e.in_metric("per_class_volumes"))?,
        );
    }
    let total_volume = manifold_volume(points).map_err(|e| e.in_metric("total_volume"))?;
    Ok(ComplexityReport {
        id_estimate,
        fdr,
        fhc,
        per_class_volumes,
        total_volume,
    })
}
