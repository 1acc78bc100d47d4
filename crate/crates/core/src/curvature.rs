//! Local tangent frames, closed-form Gaussian curvature from a quadratic
//! height-map fit, Ollivier-Ricci edge curvature with exact Wasserstein-1
//! transport, and the curvature-alignment regularizer.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::flow::min_cost_transport;
use crate::graph::{knn, Graph};
use crate::matrix::Matrix;
use crate::numerics::{det, solve, sym_eig};

/// Local PCA frame at a point: a tangent basis and a normal direction
/// estimated from the k nearest neighbors.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    /// mean of the neighbor points
    pub center: Vec<f64>,
    /// d x (d-1) matrix whose columns span the tangent space,
    /// in descending neighborhood-variance order
    pub basis: Matrix,
    /// unit normal: the least-variance direction of the neighborhood
    pub normal: Vec<f64>,
    /// indices of the neighbors the frame was fit on
    pub neighbors: Vec<usize>,
}

/// Fit the tangent frame at `points[i]` from its k nearest neighbors.
pub fn tangent_frame(points: &Matrix, i: usize, k: usize) -> Result<TangentFrame> {
    let d = points.cols();
    if d < 2 {
        return Err(Error::Dimension(format!(
            "tangent frame needs ambient dimension >= 2, got {d}"
        )));
    }
    if k < d {
        return Err(Error::KTooSmall(format!(
            "tangent frame needs k >= ambient dimension ({d}), got k={k}"
        )));
    }
    let neighbors = knn(points, points.row(i), k, i)?;
    let mut center = vec![0.0; d];
    for &j in &neighbors {
        for (c, x) in center.iter_mut().zip(points.row(j)) {
            *c += x;
        }
    }
    for c in &mut center {
        *c /= k as f64;
    }
    let mut y = Matrix::zeros(k, d);
    for (r, &j) in neighbors.iter().enumerate() {
        for (col, (x, c)) in points.row(j).iter().zip(&center).enumerate() {
            y.set(r, col, x - c);
        }
    }
    let m = y.transpose().matmul(&y)?;
    let eig = sym_eig(&m)?;
    let normal = eig.eigenvector(d - 1);
    let mut basis = Matrix::zeros(d, d - 1);
    for j in 0..(d - 1) {
        for r in 0..d {
            basis.set(r, j, eig.vectors.get(r, j));
        }
    }
    Ok(TangentFrame {
        center,
        basis,
        normal,
        neighbors,
    })
}

/// Result of the local quadratic fit at a point.
#[derive(Debug, Clone)]
pub struct CurvatureFit {
    /// symmetrized (d-1) x (d-1) second-fundamental-form estimate
    pub theta: Matrix,
    /// Gaussian curvature det(theta)
    pub gaussian: f64,
    /// whether the Tikhonov ridge was applied to the normal equations
    pub ridged: bool,
}

/// Closed-form Gaussian curvature at `points[i]`.
///
/// Projects each neighbor into the tangent frame (offsets o_j from the
/// neighborhood center, heights t_j along the normal from the point itself),
/// solves the least-squares quadratic fit t ~ o' (theta/2) o via the normal
/// equations with a relative Tikhonov ridge, symmetrizes, and returns
/// det(theta). When the neighborhood is smaller than the number of quadratic
/// coefficients, the equivalent dual (k x k) system is solved instead.
pub fn fit_gaussian_curvature(points: &Matrix, i: usize, k: usize) -> Result<CurvatureFit> {
    let frame = tangent_frame(points, i, k)?;
    let d = points.cols();
    let m = d - 1;
    let m2 = m * m;

    // rows of O: flattened outer products o_j o_j'; rhs: normal heights
    let mut o_mat = Matrix::zeros(k, m2);
    let mut t = vec![0.0; k];
    for (r, &j) in frame.neighbors.iter().enumerate() {
        let xj = points.row(j);
        let mut o = vec![0.0; m];
        for (col, oc) in o.iter_mut().enumerate() {
            for (row, (x, c)) in xj.iter().zip(&frame.center).enumerate() {
                *oc += (x - c) * frame.basis.get(row, col);
            }
        }
        for a in 0..m {
            for b in 0..m {
                o_mat.set(r, a * m + b, o[a] * o[b]);
            }
        }
        t[r] = xj
            .iter()
            .zip(points.row(i))
            .zip(&frame.normal)
            .map(|((x, y), u)| (x - y) * u)
            .sum();
    }

    // lambda is relative to tr(O'O) = ||O||_F^2, shared by both formulations
    let frob2: f64 = (0..k)
        .map(|r| o_mat.row(r).iter().map(|v| v * v).sum::<f64>())
        .sum();
    let lambda = 1e-8 * frob2 / m2 as f64;
    let ridged = lambda > 0.0;

    let theta_vec: Vec<f64> = if k < m2 {
        // dual: (O'O + lI)^{-1} O' t = O' (OO' + lI)^{-1} t
        let mut gram = o_mat.matmul(&o_mat.transpose())?;
        for r in 0..k {
            let v = gram.get(r, r) + lambda;
            gram.set(r, r, v);
        }
        let y = solve(&gram, &t)?;
        (0..m2)
            .map(|c| (0..k).map(|r| o_mat.get(r, c) * y[r]).sum())
            .collect()
    } else {
        let mut q = o_mat.transpose().matmul(&o_mat)?;
        for c in 0..m2 {
            let v = q.get(c, c) + lambda;
            q.set(c, c, v);
        }
        let p: Vec<f64> = (0..m2)
            .map(|c| (0..k).map(|r| o_mat.get(r, c) * t[r]).sum())
            .collect();
        solve(&q, &p)?
    };

    let mut theta = Matrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let v = theta_vec[a * m + b] + theta_vec[b * m + a];
            theta.set(a, b, v); // 2 * symmetrized entry
        }
    }
    let gaussian = det(&theta)?;
    if !gaussian.is_finite() {
        return Err(Error::NonFinite("gaussian curvature".into()));
    }
    Ok(CurvatureFit {
        theta,
        gaussian,
        ridged,
    })
}

/// BFS hop distances from `start`; usize::MAX marks unreachable nodes.
fn bfs_distances(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[start] = 0;
    let mut q = VecDeque::from([start]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    dist
}

/// Split a float in [0, 1] into an exact dyadic fraction p/q.
fn dyadic(alpha: f64) -> (i128, i128) {
    let mut a = alpha;
    let mut q: i128 = 1;
    while a != a.trunc() && q < (1i128 << 62) {
        a *= 2.0;
        q *= 2;
    }
    (a.round() as i128, q)
}

/// Ollivier-Ricci curvature of the edge (i, j):
/// kappa = 1 - W1(m_i, m_j) / D(i, j), with lazy random-walk measures
/// m_v = alpha at v and (1 - alpha)/deg(v) at each neighbor. W1 is computed
/// exactly in integer arithmetic; D(i, j) = 1 since (i, j) is an edge.
pub fn ollivier_ricci_edge(graph: &Graph, i: usize, j: usize, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Invariant(format!(
            "ricci alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let (u, v) = (i.min(j), i.max(j));
    if !graph.edges.contains(&(u, v)) {
        return Err(Error::NoSuchEdge(i, j));
    }
    let adj = graph.neighbor_lists();
    let (deg_i, deg_j) = (adj[i].len() as i128, adj[j].len() as i128);
    let (p, q) = dyadic(alpha);
    let scale = q * deg_i * deg_j;

    // supply = m_i, demand = m_j, both scaled to total q * deg_i * deg_j
    let mut supply_nodes = vec![i];
    supply_nodes.extend(&adj[i]);
    let mut supply = vec![p * deg_i * deg_j];
    supply.extend(std::iter::repeat((q - p) * deg_j).take(adj[i].len()));

    let mut demand_nodes = vec![j];
    demand_nodes.extend(&adj[j]);
    let mut demand = vec![p * deg_i * deg_j];
    demand.extend(std::iter::repeat((q - p) * deg_i).take(adj[j].len()));

    let mut cost = vec![vec![0i128; demand_nodes.len()]; supply_nodes.len()];
    for (si, &sn) in supply_nodes.iter().enumerate() {
        let dist = bfs_distances(&adj, sn);
        for (di, &dn) in demand_nodes.iter().enumerate() {
            if supply[si] > 0 && demand[di] > 0 && dist[dn] == usize::MAX {
                return Err(Error::DisconnectedSupports(sn, dn));
            }
            cost[si][di] = if dist[dn] == usize::MAX {
                i128::MAX / 8
            } else {
                dist[dn] as i128
            };
        }
    }
    let w1 = min_cost_transport(&supply, &demand, &cost) as f64 / scale as f64;
    Ok(1.0 - w1)
}

/// Mean Ollivier-Ricci curvature over the edges incident to `node`
/// (0 for isolated nodes).
pub fn node_ricci(graph: &Graph, node: usize, alpha: f64) -> Result<f64> {
    let adj = graph.neighbor_lists();
    if adj[node].is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for &nbr in &adj[node] {
        sum += ollivier_ricci_edge(graph, node, nbr, alpha)?;
    }
    Ok(sum / adj[node].len() as f64)
}

/// Mutual k-nearest-neighbor graph over the rows of `points`: an edge exists
/// iff each endpoint is among the other's k nearest. k is clamped to n - 1.
pub fn mutual_knn_graph(points: &Matrix, labels: &[usize], k: usize) -> Result<Graph> {
    let n = points.rows();
    let k = k.min(n.saturating_sub(1));
    let mut neighbor_sets: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        neighbor_sets.push(if k == 0 {
            Vec::new()
        } else {
            knn(points, points.row(i), k, i)?
        });
    }
    let mut edges = Vec::new();
    for (i, nbrs) in neighbor_sets.iter().enumerate() {
        for &j in nbrs {
            if j > i && neighbor_sets[j].contains(&i) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(points.to_rows(), edges, labels.to_vec())
}

/// Per-node weights for the curvature regularizer: node Ricci curvature on a
/// mutual-kNN auxiliary graph over the full cloud, min-max normalized on
/// -kappa within each class (uniform 1.0 when a class's values all tie).
pub fn ricci_weights(points: &Matrix, labels: &[usize], k: usize, alpha: f64) -> Result<Vec<f64>> {
    let n = points.rows();
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "ricci_weights: {} points but {} labels",
            n,
            labels.len()
        )));
    }
    let aux = mutual_knn_graph(points, labels, k)?;
    let mut kappa = vec![0.0; n];
    for (i, value) in kappa.iter_mut().enumerate() {
        *value = node_ricci(&aux, i, alpha)?;
    }

    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut weights = vec![1.0; n];
    for c in 0..n_classes {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let neg: Vec<f64> = members.iter().map(|&i| -kappa[i]).collect();
        let lo = neg.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = neg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > 0.0 {
            for (&i, v) in members.iter().zip(&neg) {
                weights[i] = (v - lo) / (hi - lo);
            }
        }
    }
    Ok(weights)
}

/// Weighted sum of |Gaussian curvature| with class-local curvature fits,
/// given precomputed per-node weights. Classes too small to support a
/// tangent frame contribute |K| = 0.
pub fn curvature_alignment(
    points: &Matrix,
    labels: &[usize],
    k: usize,
    weights: &[f64],
) -> Result<f64> {
    let n = points.rows();
    if weights.len() != n || labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "curvature_alignment: {} points, {} labels, {} weights",
            n,
            labels.len(),
            weights.len()
        )));
    }
    let d = points.cols();
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut total = 0.0;
    for c in 0..n_classes {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let class_points = points.select_rows(&members);
        let k_eff = k.min(members.len().saturating_sub(1));
        for (local, &i) in members.iter().enumerate() {
            let abs_k = if d < 2 || k_eff < d {
                0.0
            } else {
                fit_gaussian_curvature(&class_points, local, k_eff)?.gaussian.abs()
            };
            total += weights[i] * abs_k;
        }
    }
    Ok(total)
}

/// Curvature-alignment regularizer over a reduced point cloud: Ricci-derived
/// weights times class-local |Gaussian curvature|.
pub fn loss_cur(points: &Matrix, labels: &[usize], k: usize, alpha: f64) -> Result<f64> {
    if points.rows() == 0 {
        return Ok(0.0);
    }
    let weights = ricci_weights(points, labels, k, alpha)?;
    curvature_alignment(points, labels, k, &weights)
}
