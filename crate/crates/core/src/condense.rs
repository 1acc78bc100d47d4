//! Condensation: learn a small structure-free synthetic graph whose class
//! means track the two-hop representation of the original graph, regularized
//! toward low intrinsic dimension, curvature alignment, and class separation.
//!
//! Total loss per iterate:
//!   L = L_gc + alpha * sum_c L_dim(class c) + beta * L_cur + gamma * L_sep
//! computed on the PCA-reduced condensed cloud (the condensed graph carries
//! no edges, so its representation is its feature matrix).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_alignment, ricci_weights};
use crate::error::{Error, Result};
use crate::graph::{CondensedGraph, Graph};
use crate::manifold::{dirichlet_energy, manifold_volume, median_pairwise_distance};
use crate::matrix::Matrix;
use crate::numerics::pca_fit_transform;

/// How the Dirichlet-energy bandwidth is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsilonMode {
    /// median pairwise distance of the class cloud at hand
    MedianHeuristic,
    /// fixed bandwidth shared by all classes
    Fixed(f64),
}

/// How gradients are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradMode {
    /// analytic gradient for L_gc plus central finite differences for the
    /// regularizers (the default)
    Hybrid,
    /// central finite differences for the whole loss (cross-check mode)
    FullNumeric,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CondenseConfig {
    /// target condensed size per class as a fraction of the class size
    pub ratio: f64,
    pub epochs: usize,
    /// plain gradient-descent step size
    pub lr: f64,
    /// neighborhood size for kNN frames and the auxiliary Ricci graph
    pub k: usize,
    /// cap on the PCA dimension of the reduced condensed cloud
    pub pca_dims: usize,
    /// weight of the dimension regularizer
    pub alpha: f64,
    /// weight of the curvature regularizer
    pub beta: f64,
    /// weight of the separation regularizer
    pub gamma: f64,
    pub epsilon: EpsilonMode,
    pub grad_mode: GradMode,
    /// laziness of the Ollivier-Ricci random walk
    pub ricci_alpha: f64,
    pub seed: u64,
}

impl Default for CondenseConfig {
    fn default() -> Self {
        CondenseConfig {
            ratio: 0.1,
            epochs: 50,
            lr: 1e-2,
            k: 8,
            pca_dims: 8,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            epsilon: EpsilonMode::MedianHeuristic,
            grad_mode: GradMode::Hybrid,
            ricci_alpha: 0.5,
            seed: 0,
        }
    }
}

/// Loss breakdown at one iterate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossReport {
    pub epoch: usize,
    pub loss_gc: f64,
    pub loss_dim: f64,
    pub loss_cur: f64,
    pub loss_sep: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CondenseResult {
    pub condensed: CondensedGraph,
    /// per-epoch losses, evaluated at the pre-step iterate
    pub history: Vec<LossReport>,
    /// true when optimization hit a non-finite loss and the best earlier
    /// iterate was returned instead
    pub diverged: bool,
    /// true when some class had too few non-outlier nodes and outliers were
    /// admitted into the initialization pool
    pub outlier_fallback: bool,
}

/// Pick the initial condensed features: per class, max(1, round(ratio * n_c))
/// nodes drawn uniformly (seeded) from the non-outliers. A node is an outlier
/// when its mean feature distance to its classmates strictly exceeds
/// mean + 2 * population-std of those per-node means. When a class has fewer
/// non-outliers than its quota, the whole class becomes eligible and the
/// fallback flag is set.
pub fn init_condensed(graph: &Graph, ratio: f64, seed: u64) -> Result<(CondensedGraph, bool)> {
    if !(0.0 < ratio && ratio <= 1.0) {
        return Err(Error::Invariant(format!(
            "condense ratio must lie in (0, 1], got {ratio}"
        )));
    }
    if graph.num_nodes == 0 {
        return Err(Error::TooFewPoints("cannot condense an empty graph".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut fallback = false;

    for (c, members) in graph.class_members().into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let quota = ((ratio * members.len() as f64).round() as usize).max(1);

        // mean distance of each member to its classmates
        let mean_dist: Vec<f64> = members
            .iter()
            .map(|&i| {
                let others = members.len().saturating_sub(1);
                if others == 0 {
                    return 0.0;
                }
                members
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| {
                        crate::matrix::dist_sq(graph.features.row(i), graph.features.row(j)).sqrt()
                    })
                    .sum::<f64>()
                    / others as f64
            })
            .collect();
        let mu = mean_dist.iter().sum::<f64>() / members.len() as f64;
        let var =
            mean_dist.iter().map(|d| (d - mu) * (d - mu)).sum::<f64>() / members.len() as f64;
        let cutoff = mu + 2.0 * var.sqrt();
        let mut pool: Vec<usize> = members
            .iter()
            .zip(&mean_dist)
            .filter(|(_, &d)| d <= cutoff)
            .map(|(&i, _)| i)
            .collect();
        if quota > pool.len() {
            pool = members.clone();
            fallback = true;
        }
        if quota > pool.len() {
            return Err(Error::ClassMissingInCondensed(c));
        }
        let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), quota)
            .into_iter()
            .map(|local| pool[local])
            .collect();
        picked.sort_unstable();
        for &i in &picked {
            rows.push(graph.features.row(i).to_vec());
            labels.push(c);
        }
    }
    Ok((
        CondensedGraph {
            features: Matrix::from_rows(&rows)?,
            labels,
        },
        fallback,
    ))
}

/// Per-class means of the rows of `points` grouped by `labels`; classes with
/// no members get an empty entry.
fn class_means(points: &Matrix, labels: &[usize]) -> Vec<Option<Vec<f64>>> {
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let d = points.cols();
    let mut sums = vec![vec![0.0; d]; n_classes];
    let mut counts = vec![0usize; n_classes];
    for (i, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(points.row(i)) {
            *s += x;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(mut s, c)| {
            if c == 0 {
                None
            } else {
                for v in &mut s {
                    *v /= c as f64;
                }
                Some(s)
            }
        })
        .collect()
}

/// Condensation backbone loss: sum over classes of the squared distance
/// between the class mean of the original two-hop representation and the
/// class mean of the condensed features.
pub fn loss_gc(graph: &Graph, condensed: &CondensedGraph) -> Result<f64> {
    let z = graph.representation();
    loss_gc_from_means(&class_means(&z, &graph.labels), condensed)
}

fn loss_gc_from_means(
    target_means: &[Option<Vec<f64>>],
    condensed: &CondensedGraph,
) -> Result<f64> {
    let cond_means = class_means(&condensed.features, &condensed.labels);
    let mut total = 0.0;
    for (c, target) in target_means.iter().enumerate() {
        let Some(target) = target else { continue };
        let Some(cond) = cond_means.get(c).and_then(|m| m.as_ref()) else {
            return Err(Error::ClassMissingInCondensed(c));
        };
        if target.len() != cond.len() {
            return Err(Error::DimensionMismatch(format!(
                "class {c}: target mean has {} dims, condensed mean {}",
                target.len(),
                cond.len()
            )));
        }
        total += crate::matrix::dist_sq(target, cond);
    }
    Ok(total)
}

/// PCA-reduce `points` when its ambient dimension exceeds the configured cap;
/// the effective target is min(pca_dims, n - 1, d), at least 1.
fn reduce(points: &Matrix, pca_dims: usize) -> Result<Matrix> {
    let d = points.cols();
    if d <= pca_dims {
        return Ok(points.clone());
    }
    let target = pca_dims.min(points.rows().saturating_sub(1)).max(1).min(d);
    pca_fit_transform(points, target)
}

/// Dimension regularizer summed per class over the reduced cloud. Classes
/// with fewer than two points contribute zero.
fn dim_term(reduced: &Matrix, labels: &[usize], epsilon: EpsilonMode) -> Result<f64> {
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut total = 0.0;
    for c in 0..n_classes {
        let members: Vec<usize> = (0..reduced.rows()).filter(|&i| labels[i] == c).collect();
        if members.len() < 2 {
            continue;
        }
        let cloud = reduced.select_rows(&members);
        let eps = match epsilon {
            EpsilonMode::Fixed(e) => e,
            EpsilonMode::MedianHeuristic => median_pairwise_distance(&cloud)?,
        };
        total += manifold_volume(&cloud)? * dirichlet_energy(&cloud, eps)?;
    }
    Ok(total)
}

fn sep_term(reduced: &Matrix, labels: &[usize]) -> Result<f64> {
    crate::complexity::loss_sep(reduced, labels)
}

/// Regularizer evaluation with optionally frozen Ricci weights (frozen
/// weights keep the curvature term piecewise-smooth across FD probes).
fn regularizers(
    features: &Matrix,
    labels: &[usize],
    cfg: &CondenseConfig,
    frozen_weights: Option<&[f64]>,
) -> Result<(f64, f64, f64)> {
    let reduced = reduce(features, cfg.pca_dims)?;
    let dim = if cfg.alpha != 0.0 {
        dim_term(&reduced, labels, cfg.epsilon)?
    } else {
        0.0
    };
    let cur = if cfg.beta != 0.0 {
        match frozen_weights {
            Some(w) => curvature_alignment(&reduced, labels, cfg.k, w)?,
            None => {
                let w = ricci_weights(&reduced, labels, cfg.k, cfg.ricci_alpha)?;
                curvature_alignment(&reduced, labels, cfg.k, &w)?
            }
        }
    } else {
        0.0
    };
    let sep = if cfg.gamma != 0.0 {
        sep_term(&reduced, labels)?
    } else {
        0.0
    };
    Ok((dim, cur, sep))
}

/// Full loss breakdown for a condensed graph against an original graph.
pub fn total_loss(
    graph: &Graph,
    condensed: &CondensedGraph,
    cfg: &CondenseConfig,
) -> Result<LossReport> {
    let z = graph.representation();
    let means = class_means(&z, &graph.labels);
    total_loss_from_means(&means, condensed, cfg, None, 0)
}

fn total_loss_from_means(
    target_means: &[Option<Vec<f64>>],
    condensed: &CondensedGraph,
    cfg: &CondenseConfig,
    frozen_weights: Option<&[f64]>,
    epoch: usize,
) -> Result<LossReport> {
    let gc = loss_gc_from_means(target_means, condensed)?;
    let (dim, cur, sep) = regularizers(&condensed.features, &condensed.labels, cfg, frozen_weights)?;
    let total = gc + cfg.alpha * dim + cfg.beta * cur + cfg.gamma * sep;
    Ok(LossReport {
        epoch,
        loss_gc: gc,
        loss_dim: dim,
        loss_cur: cur,
        loss_sep: sep,
        total,
    })
}

/// Gradient of the total loss at `condensed` under the configured grad mode.
pub fn loss_gradient(
    graph: &Graph,
    condensed: &CondensedGraph,
    cfg: &CondenseConfig,
) -> Result<Matrix> {
    let z = graph.representation();
    let means = class_means(&z, &graph.labels);
    gradient(&means, condensed, cfg)
}

/// Central finite difference of `f` over every entry of `features`.
/// Entries are probed independently and in parallel; the step is
/// h = 1e-4 * (1 + |x|).
fn numeric_gradient<F>(features: &Matrix, f: F) -> Result<Matrix>
where
    F: Fn(&Matrix) -> Result<f64> + Sync,
{
    let rows = features.rows();
    let cols = features.cols();
    let entries: Vec<Result<f64>> = (0..rows * cols)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / cols, idx % cols);
            let x = features.get(i, j);
            let h = 1e-4 * (1.0 + x.abs());
            let mut plus = features.clone();
            plus.set(i, j, x + h);
            let mut minus = features.clone();
            minus.set(i, j, x - h);
            Ok((f(&plus)? - f(&minus)?) / (2.0 * h))
        })
        .collect();
    let mut grad = Matrix::zeros(rows, cols);
    for (idx, v) in entries.into_iter().enumerate() {
        grad.set(idx / cols, idx % cols, v?);
    }
    Ok(grad)
}

/// Gradient of the total loss with respect to the condensed features.
fn gradient(
    target_means: &[Option<Vec<f64>>],
    condensed: &CondensedGraph,
    cfg: &CondenseConfig,
) -> Result<Matrix> {
    // Ricci weights are piecewise constant in the features; freezing them at
    // the current iterate keeps FD probes on one smooth piece.
    let frozen: Option<Vec<f64>> = if cfg.beta != 0.0 {
        let reduced = reduce(&condensed.features, cfg.pca_dims)?;
        Some(ricci_weights(
            &reduced,
            &condensed.labels,
            cfg.k,
            cfg.ricci_alpha,
        )?)
    } else {
        None
    };
    let labels = condensed.labels.clone();

    match cfg.grad_mode {
        GradMode::FullNumeric => numeric_gradient(&condensed.features, |feats| {
            let probe = CondensedGraph {
                features: feats.clone(),
                labels: labels.clone(),
            };
            total_loss_from_means(target_means, &probe, cfg, frozen.as_deref(), 0)
                .map(|r| r.total)
        }),
        GradMode::Hybrid => {
            // analytic part: d L_gc / d x_i = -(2 / n_c) (mu_c - mu'_c)
            let cond_means = class_means(&condensed.features, &condensed.labels);
            let mut counts = vec![0usize; cond_means.len()];
            for &c in &condensed.labels {
                counts[c] += 1;
            }
            let mut grad = Matrix::zeros(condensed.features.rows(), condensed.features.cols());
            for (i, &c) in condensed.labels.iter().enumerate() {
                let (Some(target), Some(cond)) = (
                    target_means.get(c).and_then(|m| m.as_ref()),
                    cond_means[c].as_ref(),
                ) else {
                    return Err(Error::ClassMissingInCondensed(c));
                };
                let scale = -2.0 / counts[c] as f64;
                let row = grad.row_mut(i);
                for ((g, t), m) in row.iter_mut().zip(target).zip(cond) {
                    *g = scale * (t - m);
                }
            }
            if cfg.alpha != 0.0 || cfg.beta != 0.0 || cfg.gamma != 0.0 {
                let reg_grad = numeric_gradient(&condensed.features, |feats| {
                    let (dim, cur, sep) = regularizers(feats, &labels, cfg, frozen.as_deref())?;
                    Ok(cfg.alpha * dim + cfg.beta * cur + cfg.gamma * sep)
                })?;
                for i in 0..grad.rows() {
                    for j in 0..grad.cols() {
                        let v = grad.get(i, j) + reg_grad.get(i, j);
                        grad.set(i, j, v);
                    }
                }
            }
            Ok(grad)
        }
    }
}

/// Run the condensation loop: seeded initialization from non-outlier nodes,
/// then plain gradient descent on the total loss. Returns the best iterate
/// seen (by total loss); if a non-finite loss or gradient is encountered the
/// loop stops early and the result is flagged as diverged.
pub fn condense(graph: &Graph, cfg: &CondenseConfig) -> Result<CondenseResult> {
    let z = graph.representation();
    let target_means = class_means(&z, &graph.labels);
    let (init, outlier_fallback) = init_condensed(graph, cfg.ratio, cfg.seed)?;

    let mut current = init;
    let mut best_features = current.features.clone();
    let mut best_loss = f64::INFINITY;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut diverged = false;

    // Numeric breakdown (overflowing volumes, eigensolves that stop
    // converging, indefinite covariances) on a later iterate means the
    // descent left the region where the loss is evaluable; treat it like a
    // non-finite loss and fall back to the best iterate instead of erroring.
    let numeric_breakdown = |e: &Error| {
        matches!(
            e,
            Error::NonFinite(_)
                | Error::NoConvergence
                | Error::NotPositiveDefinite
                | Error::DegenerateCloud(_)
        )
    };

    for epoch in 0..cfg.epochs {
        let report = match total_loss_from_means(&target_means, &current, cfg, None, epoch) {
            Ok(r) => r,
            Err(e) if epoch > 0 && numeric_breakdown(&e) => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if !report.total.is_finite() {
            diverged = true;
            break;
        }
        if report.total < best_loss {
            best_loss = report.total;
            best_features = current.features.clone();
        }
        history.push(report);

        let grad = match gradient(&target_means, &current, cfg) {
            Ok(g) => g,
            Err(e) if numeric_breakdown(&e) => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if !grad.is_finite() {
            diverged = true;
            break;
        }
        for i in 0..current.features.rows() {
            for j in 0..current.features.cols() {
                let v = current.features.get(i, j) - cfg.lr * grad.get(i, j);
                current.features.set(i, j, v);
            }
        }
    }

    if !diverged {
        // final iterate after the last step
        match total_loss_from_means(&target_means, &current, cfg, None, cfg.epochs) {
            Ok(report) if report.total.is_finite() => {
                if report.total < best_loss {
                    best_features = current.features.clone();
                }
            }
            Ok(_) => diverged = true,
            Err(e) if numeric_breakdown(&e) => diverged = true,
            Err(e) => return Err(e),
        }
    }

    Ok(CondenseResult {
        condensed: CondensedGraph {
            features: best_features,
            labels: current.labels,
        },
        history,
        diverged,
        outlier_fallback,
    })
}
