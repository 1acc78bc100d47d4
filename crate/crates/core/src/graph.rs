//! Graph data model and I/O.
//!
//! Two on-disk formats:
//! * a single JSON file with `{"num_nodes", "features", "edges", "labels"}`;
//! * a CSV triplet: a directory holding `features.csv`, `edges.csv`,
//!   `labels.csv` (no header rows).
//!
//! Edges are undirected, stored as normalized `(min, max)` pairs with no
//! self-loops and no duplicates.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dist_sq, Matrix};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Graph {
    pub num_nodes: usize,
    /// num_nodes x d feature matrix, row per node.
    pub features: Matrix,
    /// normalized undirected edges (u < v), sorted, unique.
    pub edges: Vec<(usize, usize)>,
    pub labels: Vec<usize>,
}

/// Serialization mirror of `Graph` with features as plain row vectors.
#[derive(Serialize, Deserialize)]
struct GraphJson {
    num_nodes: usize,
    features: Vec<Vec<f64>>,
    edges: Vec<(usize, usize)>,
    labels: Vec<usize>,
}

impl Graph {
    pub fn new(
        features: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
        labels: Vec<usize>,
    ) -> Result<Graph> {
        let num_nodes = features.len();
        let features = Matrix::from_rows(&features)?;
        let g = Graph {
            num_nodes,
            features,
            edges: normalize_edges(&edges, num_nodes)?,
            labels,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.rows() != self.num_nodes {
            return Err(Error::Invariant(format!(
                "feature rows {} != num_nodes {}",
                self.features.rows(),
                self.num_nodes
            )));
        }
        if self.labels.len() != self.num_nodes {
            return Err(Error::Invariant(format!(
                "labels length {} != num_nodes {}",
                self.labels.len(),
                self.num_nodes
            )));
        }
        for &(u, v) in &self.edges {
            if u >= v {
                return Err(Error::Invariant(format!(
                    "edge ({u},{v}) not normalized (need u < v)"
                )));
            }
            if v >= self.num_nodes {
                return Err(Error::Invariant(format!(
                    "edge ({u},{v}) out of range for {} nodes",
                    self.num_nodes
                )));
            }
        }
        if !self.features.is_finite() {
            return Err(Error::Invariant("non-finite feature value".into()));
        }
        Ok(())
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    /// Sorted adjacency lists.
    pub fn neighbor_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for lst in &mut adj {
            lst.sort_unstable();
        }
        adj
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Node indices per class label, in ascending node order.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); self.num_classes()];
        for (i, &c) in self.labels.iter().enumerate() {
            by_class[c].push(i);
        }
        by_class
    }

    /// Two-hop aggregated representation Z = A(AX) with the raw binary
    /// adjacency (no self-loops, no normalization).
    pub fn representation(&self) -> Matrix {
        let adj = self.neighbor_lists();
        let d = self.feature_dim();
        let mut ax = Matrix::zeros(self.num_nodes, d);
        for (i, nbrs) in adj.iter().enumerate() {
            for &j in nbrs {
                let src = self.features.row(j).to_vec();
                let dst = ax.row_mut(i);
                for (a, b) in dst.iter_mut().zip(&src) {
                    *a += b;
                }
            }
        }
        let mut z = Matrix::zeros(self.num_nodes, d);
        for (i, nbrs) in adj.iter().enumerate() {
            for &j in nbrs {
                let src = ax.row(j).to_vec();
                let dst = z.row_mut(i);
                for (a, b) in dst.iter_mut().zip(&src) {
                    *a += b;
                }
            }
        }
        z
    }

    pub fn load(path: &Path) -> Result<Graph> {
        if path.is_dir() {
            Graph::load_csv_dir(path)
        } else {
            Graph::load_json(path)
        }
    }

    pub fn load_json(path: &Path) -> Result<Graph> {
        let text = fs::read_to_string(path)?;
        let raw: GraphJson = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if raw.features.len() != raw.num_nodes {
            return Err(Error::Parse(format!(
                "{}: num_nodes {} but {} feature rows",
                path.display(),
                raw.num_nodes,
                raw.features.len()
            )));
        }
        Graph::new(raw.features, raw.edges, raw.labels)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let raw = GraphJson {
            num_nodes: self.num_nodes,
            features: self.features.to_rows(),
            edges: self.edges.clone(),
            labels: self.labels.clone(),
        };
        fs::write(path, serde_json::to_string_pretty(&raw).expect("serialize graph"))?;
        Ok(())
    }

    pub fn load_csv_dir(dir: &Path) -> Result<Graph> {
        let features = read_csv_f64(&dir.join("features.csv"))?;
        let edges: Vec<(usize, usize)> = read_csv_f64(&dir.join("edges.csv"))?
            .into_iter()
            .map(|row| parse_edge_row(&row))
            .collect::<Result<_>>()?;
        let labels: Vec<usize> = read_csv_f64(&dir.join("labels.csv"))?
            .into_iter()
            .map(|row| parse_label_row(&row))
            .collect::<Result<_>>()?;
        Graph::new(features, edges, labels)
    }

    pub fn save_csv_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let feat = self
            .features
            .row_iter()
            .map(|row| {
                row.iter()
                    .map(|v| format_float(*v))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("\n");
        fs::write(dir.join("features.csv"), feat + "\n")?;
        let edges = self
            .edges
            .iter()
            .map(|(u, v)| format!("{u},{v}"))
            .collect::<Vec<_>>()
            .join("\n");
        fs::write(dir.join("edges.csv"), edges + "\n")?;
        let labels = self
            .labels
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join("\n");
        fs::write(dir.join("labels.csv"), labels + "\n")?;
        Ok(())
    }
}

/// A condensed graph: structure-free by convention, so the representation of
/// a condensed graph is just its feature matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CondensedGraph {
    pub features: Matrix,
    pub labels: Vec<usize>,
}

impl CondensedGraph {
    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }

    pub fn to_graph(&self) -> Graph {
        Graph {
            num_nodes: self.num_nodes(),
            features: self.features.clone(),
            edges: Vec::new(),
            labels: self.labels.clone(),
        }
    }

    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let n_classes = self.labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut by_class = vec![Vec::new(); n_classes];
        for (i, &c) in self.labels.iter().enumerate() {
            by_class[c].push(i);
        }
        by_class
    }
}

fn normalize_edges(edges: &[(usize, usize)], num_nodes: usize) -> Result<Vec<(usize, usize)>> {
    let mut set = BTreeSet::new();
    for &(u, v) in edges {
        if u == v {
            return Err(Error::Invariant(format!("self-loop on node {u}")));
        }
        if u >= num_nodes || v >= num_nodes {
            return Err(Error::Invariant(format!(
                "edge ({u},{v}) out of range for {num_nodes} nodes"
            )));
        }
        set.insert((u.min(v), u.max(v)));
    }
    Ok(set.into_iter().collect())
}

fn read_csv_f64(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "{}:{}: invalid number {:?}",
                        path.display(),
                        lineno + 1,
                        cell
                    ))
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn parse_edge_row(row: &[f64]) -> Result<(usize, usize)> {
    if row.len() != 2 || row.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
        return Err(Error::Parse(format!("invalid edge row {row:?}")));
    }
    Ok((row[0] as usize, row[1] as usize))
}

fn parse_label_row(row: &[f64]) -> Result<usize> {
    if row.len() != 1 || row[0].fract() != 0.0 || row[0] < 0.0 {
        return Err(Error::Parse(format!("invalid label row {row:?}")));
    }
    Ok(row[0] as usize)
}

fn format_float(v: f64) -> String {
    // shortest representation that round-trips exactly
    let mut s = serde_json::to_string(&v).expect("finite float");
    if !s.contains('.') && !s.contains('e') && !s.contains('E') {
        s.push_str(".0");
    }
    s
}

/// Indices of the k nearest neighbors of `query` among `points` rows,
/// excluding `exclude` (pass usize::MAX to keep all). Distance ties break by
/// ascending index. Errors if fewer than k candidates exist.
pub fn knn(points: &Matrix, query: &[f64], k: usize, exclude: usize) -> Result<Vec<usize>> {
    let mut cand: Vec<(f64, usize)> = (0..points.rows())
        .filter(|&i| i != exclude)
        .map(|i| (dist_sq(points.row(i), query), i))
        .collect();
    if cand.len() < k {
        return Err(Error::KTooLarge(format!(
            "k={} but only {} candidate points",
            k,
            cand.len()
        )));
    }
    cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(cand.into_iter().take(k).map(|(_, i)| i).collect())
}
