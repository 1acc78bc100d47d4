//! Manifold-constrained robust graph condensation.
//!
//! The crate condenses a labeled graph into a small structure-free synthetic
//! graph whose class means track the original's two-hop representation, with
//! optional regularizers that preserve intrinsic dimension, curvature
//! structure, and class separation. Supporting machinery — a self-contained
//! dense eigensolver, intrinsic-dimension estimation, Ollivier-Ricci
//! curvature with exact transport, complexity metrics, and seeded corruption
//! attacks — is exposed directly.

pub mod attack;
pub mod complexity;
pub mod condense;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod graph;
pub mod manifest;
pub mod manifold;
pub mod matrix;
pub mod numerics;

pub use error::{Error, Result};
pub use graph::{CondensedGraph, Graph};
pub use matrix::Matrix;
