//! Seeded corruption attacks on graphs: feature noise, label flips, and
//! structure (edge-set) perturbation. All attacks are deterministic in the
//! seed via ChaCha8.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::Graph;

fn budget(total: usize, percent: f64) -> Result<usize> {
    if !(0.0..=100.0).contains(&percent) {
        return Err(Error::Invariant(format!(
            "attack percent must lie in [0, 100], got {percent}"
        )));
    }
    Ok((percent / 100.0 * total as f64).floor() as usize)
}

/// Replace the features of floor(percent% * n) distinct nodes with standard
/// normal noise. Returns the attacked graph and the affected node indices
/// (ascending).
pub fn feature_attack(graph: &Graph, percent: f64, seed: u64) -> Result<(Graph, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = budget(graph.num_nodes, percent)?;
    let mut targets = rand::seq::index::sample(&mut rng, graph.num_nodes, count).into_vec();
    targets.sort_unstable();
    let mut out = graph.clone();
    for &i in &targets {
        for v in out.features.row_mut(i) {
            *v = rng.sample(StandardNormal);
        }
    }
    Ok((out, targets))
}

/// Flip the labels of floor(percent% * n) distinct nodes, each uniformly to
/// one of the other classes. Errors with `SingleClass` when there is nothing
/// to flip to. Returns the attacked graph and the affected node indices.
pub fn label_attack(graph: &Graph, percent: f64, seed: u64) -> Result<(Graph, Vec<usize>)> {
    let n_classes = graph.num_classes();
    if n_classes < 2 {
        return Err(Error::SingleClass);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = budget(graph.num_nodes, percent)?;
    let mut targets = rand::seq::index::sample(&mut rng, graph.num_nodes, count).into_vec();
    targets.sort_unstable();
    let mut out = graph.clone();
    for &i in &targets {
        let old = out.labels[i];
        // uniform over the other n_classes - 1 labels
        let pick = rng.gen_range(0..n_classes - 1);
        out.labels[i] = if pick >= old { pick + 1 } else { pick };
    }
    Ok((out, targets))
}

/// Flip floor(percent% * |E|) distinct unordered node pairs: existing edges
/// are removed, missing ones are added. Errors with `EmptyGraph` when the
/// graph has no edges to set the budget from. Returns the attacked graph and
/// the flipped pairs (ascending).
pub fn structure_attack(
    graph: &Graph,
    percent: f64,
    seed: u64,
) -> Result<(Graph, Vec<(usize, usize)>)> {
    if graph.edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let n = graph.num_nodes;
    let total_pairs = n * (n - 1) / 2;
    let count = budget(graph.num_edges(), percent)?.min(total_pairs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut flips: Vec<(usize, usize)> = Vec::with_capacity(count);
    while flips.len() < count {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let pair = (u.min(v), u.max(v));
        if !flips.contains(&pair) {
            flips.push(pair);
        }
    }
    flips.sort_unstable();

    let mut edges: std::collections::BTreeSet<(usize, usize)> =
        graph.edges.iter().copied().collect();
    for &pair in &flips {
        if !edges.remove(&pair) {
            edges.insert(pair);
        }
    }
    let mut out = graph.clone();
    out.edges = edges.into_iter().collect();
    Ok((out, flips))
}
