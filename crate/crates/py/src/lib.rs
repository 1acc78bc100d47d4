//! Python bindings for the mrgc toolkit.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mrgc::attack;
use mrgc::complexity;
use mrgc::condense::{self, CondenseConfig, EpsilonMode, GradMode};
use mrgc::curvature;
use mrgc::graph::CondensedGraph;
use mrgc::manifold::{self, IdEstimatorConfig};
use mrgc::Matrix;

fn to_py_err(e: mrgc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(to_py_err)
}

/// A labeled undirected graph with node features.
#[pyclass(name = "Graph")]
#[derive(Clone)]
struct PyGraph {
    inner: mrgc::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(
        features: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
        labels: Vec<usize>,
    ) -> PyResult<Self> {
        Ok(PyGraph {
            inner: mrgc::Graph::new(features, edges, labels).map_err(to_py_err)?,
        })
    }

    /// Load from a JSON file or a CSV-triplet directory.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyGraph {
            inner: mrgc::Graph::load(std::path::Path::new(path)).map_err(to_py_err)?,
        })
    }

    fn save_json(&self, path: &str) -> PyResult<()> {
        self.inner
            .save_json(std::path::Path::new(path))
            .map_err(to_py_err)
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn features(&self) -> Vec<Vec<f64>> {
        self.inner.features.to_rows()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges.clone()
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.inner.labels.clone()
    }

    /// Two-hop aggregated representation A(AX) as row vectors.
    fn representation(&self) -> Vec<Vec<f64>> {
        self.inner.representation().to_rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(num_nodes={}, num_edges={}, dim={})",
            self.inner.num_nodes,
            self.inner.num_edges(),
            self.inner.feature_dim()
        )
    }
}

/// Result of a condensation run.
#[pyclass(name = "CondenseResult")]
struct PyCondenseResult {
    #[pyo3(get)]
    features: Vec<Vec<f64>>,
    #[pyo3(get)]
    labels: Vec<usize>,
    #[pyo3(get)]
    diverged: bool,
    #[pyo3(get)]
    outlier_fallback: bool,
    /// per-epoch (loss_gc, loss_dim, loss_cur, loss_sep, total)
    #[pyo3(get)]
    history: Vec<(f64, f64, f64, f64, f64)>,
}

/// Maximum-likelihood intrinsic dimension of a point cloud.
#[pyfunction]
#[pyo3(signature = (points, k = 8))]
fn mle_id(points: Vec<Vec<f64>>, k: usize) -> PyResult<f64> {
    let m = matrix_from_rows(points)?;
    let cfg = IdEstimatorConfig {
        k,
        ..IdEstimatorConfig::default()
    };
    manifold::mle_id(&m, &cfg).map_err(to_py_err)
}

/// Dimension regularizer: manifold volume times Dirichlet energy.
#[pyfunction]
#[pyo3(signature = (points, epsilon = None))]
fn loss_dim(points: Vec<Vec<f64>>, epsilon: Option<f64>) -> PyResult<f64> {
    let m = matrix_from_rows(points)?;
    manifold::loss_dim(&m, epsilon).map_err(to_py_err)
}

/// Ollivier-Ricci curvature of the edge (i, j).
#[pyfunction]
#[pyo3(signature = (graph, i, j, alpha = 0.5))]
fn ricci_edge(graph: &PyGraph, i: usize, j: usize, alpha: f64) -> PyResult<f64> {
    curvature::ollivier_ricci_edge(&graph.inner, i, j, alpha).map_err(to_py_err)
}

/// Mean Ollivier-Ricci curvature over the edges incident to a node.
#[pyfunction]
#[pyo3(signature = (graph, node, alpha = 0.5))]
fn ricci_node(graph: &PyGraph, node: usize, alpha: f64) -> PyResult<f64> {
    curvature::node_ricci(&graph.inner, node, alpha).map_err(to_py_err)
}

/// Gaussian curvature at points[i] from a local quadratic fit on k neighbors.
#[pyfunction]
fn gaussian_curvature(points: Vec<Vec<f64>>, i: usize, k: usize) -> PyResult<f64> {
    let m = matrix_from_rows(points)?;
    Ok(curvature::fit_gaussian_curvature(&m, i, k)
        .map_err(to_py_err)?
        .gaussian)
}

/// Fisher discriminant ratio complexity.
#[pyfunction]
fn fdr(points: Vec<Vec<f64>>, labels: Vec<usize>) -> PyResult<f64> {
    let m = matrix_from_rows(points)?;
    complexity::fdr(&m, &labels).map_err(to_py_err)
}

/// Fraction of hyperspheres covering.
#[pyfunction]
fn fhc(points: Vec<Vec<f64>>, labels: Vec<usize>) -> PyResult<f64> {
    let m = matrix_from_rows(points)?;
    complexity::fhc(&m, &labels).map_err(to_py_err)
}

/// Separation regularizer.
#[pyfunction]
fn loss_sep(points: Vec<Vec<f64>>, labels: Vec<usize>) -> PyResult<f64> {
    let m = matrix_from_rows(points)?;
    complexity::loss_sep(&m, &labels).map_err(to_py_err)
}

/// Seeded feature-noise attack; returns the attacked graph and the affected
/// node indices.
#[pyfunction]
fn feature_attack(graph: &PyGraph, percent: f64, seed: u64) -> PyResult<(PyGraph, Vec<usize>)> {
    let (g, t) = attack::feature_attack(&graph.inner, percent, seed).map_err(to_py_err)?;
    Ok((PyGraph { inner: g }, t))
}

/// Seeded label-flip attack.
#[pyfunction]
fn label_attack(graph: &PyGraph, percent: f64, seed: u64) -> PyResult<(PyGraph, Vec<usize>)> {
    let (g, t) = attack::label_attack(&graph.inner, percent, seed).map_err(to_py_err)?;
    Ok((PyGraph { inner: g }, t))
}

/// Seeded structure attack; returns the attacked graph and the flipped pairs.
#[pyfunction]
fn structure_attack(
    graph: &PyGraph,
    percent: f64,
    seed: u64,
) -> PyResult<(PyGraph, Vec<(usize, usize)>)> {
    let (g, p) = attack::structure_attack(&graph.inner, percent, seed).map_err(to_py_err)?;
    Ok((PyGraph { inner: g }, p))
}

/// Backbone condensation loss between a graph and a condensed feature cloud.
#[pyfunction]
fn loss_gc(graph: &PyGraph, features: Vec<Vec<f64>>, labels: Vec<usize>) -> PyResult<f64> {
    let cond = CondensedGraph {
        features: matrix_from_rows(features)?,
        labels,
    };
    condense::loss_gc(&graph.inner, &cond).map_err(to_py_err)
}

/// Run the condensation loop.
#[pyfunction]
#[pyo3(signature = (graph, ratio = 0.1, epochs = 50, lr = 1e-2, k = 8,
                    pca_dims = 8, alpha = 1.0, beta = 1.0, gamma = 1.0,
                    epsilon = None, full_numeric = false, ricci_alpha = 0.5,
                    seed = 0))]
#[allow(clippy::too_many_arguments)]
fn condense_graph(
    graph: &PyGraph,
    ratio: f64,
    epochs: usize,
    lr: f64,
    k: usize,
    pca_dims: usize,
    alpha: f64,
    beta: f64,
    gamma: f64,
    epsilon: Option<f64>,
    full_numeric: bool,
    ricci_alpha: f64,
    seed: u64,
) -> PyResult<PyCondenseResult> {
    let cfg = CondenseConfig {
        ratio,
        epochs,
        lr,
        k,
        pca_dims,
        alpha,
        beta,
        gamma,
        epsilon: match epsilon {
            Some(e) => EpsilonMode::Fixed(e),
            None => EpsilonMode::MedianHeuristic,
        },
        grad_mode: if full_numeric {
            GradMode::FullNumeric
        } else {
            GradMode::Hybrid
        },
        ricci_alpha,
        seed,
    };
    let result = condense::condense(&graph.inner, &cfg).map_err(to_py_err)?;
    Ok(PyCondenseResult {
        features: result.condensed.features.to_rows(),
        labels: result.condensed.labels,
        diverged: result.diverged,
        outlier_fallback: result.outlier_fallback,
        history: result
            .history
            .iter()
            .map(|r| (r.loss_gc, r.loss_dim, r.loss_cur, r.loss_sep, r.total))
            .collect(),
    })
}

#[pymodule]
fn mrgc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyCondenseResult>()?;
    m.add_function(wrap_pyfunction!(mle_id, m)?)?;
    m.add_function(wrap_pyfunction!(loss_dim, m)?)?;
    m.add_function(wrap_pyfunction!(ricci_edge, m)?)?;
    m.add_function(wrap_pyfunction!(ricci_node, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(fdr, m)?)?;
    m.add_function(wrap_pyfunction!(fhc, m)?)?;
    m.add_function(wrap_pyfunction!(loss_sep, m)?)?;
    m.add_function(wrap_pyfunction!(feature_attack, m)?)?;
    m.add_function(wrap_pyfunction!(label_attack, m)?)?;
    m.add_function(wrap_pyfunction!(structure_attack, m)?)?;
    m.add_function(wrap_pyfunction!(loss_gc, m)?)?;
    m.add_function(wrap_pyfunction!(condense_graph, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
