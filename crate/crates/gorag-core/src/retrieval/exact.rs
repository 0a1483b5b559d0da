//! Exact minimum Steiner tree by exhaustive node-subset search.
//!
//! Every subset of nodes that contains all terminals is spanned with Kruskal;
//! the cheapest spanning tree over any such subset is the exact optimum.
//! Cost is O(2^n * m alpha(n)), so the search refuses graphs beyond 16 nodes.
//! This exists purely as an oracle for testing the approximation.

use std::collections::BTreeSet;

use super::{Dsu, RetrievalError, RetrievalOptions, TerminalSet};
use crate::graph::WeightedGraph;

const MAX_EXACT_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSteiner {
    pub tree_nodes: BTreeSet<String>,
    pub tree_edges: Vec<(String, String)>,
    pub total_cost: f64,
}

/// Find the true minimum Steiner tree connecting `terminals.exist`.
pub fn steiner_exact(
    graph: &WeightedGraph,
    terminals: &TerminalSet,
    options: &RetrievalOptions,
) -> Result<ExactSteiner, RetrievalError> {
    let keys: Vec<&str> = graph.node_keys().collect();
    let n = keys.len();
    if n > MAX_EXACT_NODES {
        return Err(RetrievalError::TooLarge { nodes: n });
    }
    let term_set: BTreeSet<&str> = terminals.exist.iter().map(String::as_str).collect();
    if term_set.is_empty() {
        return Err(RetrievalError::EmptyTerminals);
    }
    let mut term_mask: u32 = 0;
    for t in &term_set {
        let idx = keys
            .iter()
            .position(|k| k == t)
            .ok_or_else(|| RetrievalError::UnknownTerminal(t.to_string()))?;
        term_mask |= 1 << idx;
    }

    let mut edges: Vec<(usize, usize, f64)> = graph
        .edges_iter()
        .map(|rec| {
            let a = keys.iter().position(|k| *k == rec.a).unwrap();
            let b = keys.iter().position(|k| *k == rec.b).unwrap();
            let cost = if options.unit_weights { 1.0 } else { rec.weight };
            (a, b, cost)
        })
        .collect();
    edges.sort_by(|x, y| {
        x.2.partial_cmp(&y.2)
            .expect("edge costs are finite")
            .then(x.0.cmp(&y.0))
            .then(x.1.cmp(&y.1))
    });

    let mut best: Option<(f64, Vec<usize>)> = None;
    // Ascending mask order makes the first minimum found deterministic.
    for mask in 0..(1u32 << n) {
        if mask & term_mask != term_mask {
            continue;
        }
        let size = mask.count_ones() as usize;
        if let Some(tree) = span_subset(&edges, mask, size, n) {
            let cost: f64 = tree.iter().map(|&i| edges[i].2).sum();
            let better = match &best {
                None => true,
                Some((c, _)) => cost < *c - 1e-12,
            };
            if better {
                best = Some((cost, tree));
            }
        }
    }

    let (total_cost, tree) = best.ok_or(RetrievalError::Disconnected)?;
    let mut tree_nodes: BTreeSet<String> =
        term_set.iter().map(|s| s.to_string()).collect();
    let mut tree_edges = Vec::with_capacity(tree.len());
    for &i in &tree {
        let (a, b, _) = edges[i];
        tree_nodes.insert(keys[a].to_string());
        tree_nodes.insert(keys[b].to_string());
        tree_edges.push((keys[a].to_string(), keys[b].to_string()));
    }
    tree_edges.sort();
    Ok(ExactSteiner {
        tree_nodes,
        tree_edges,
        total_cost,
    })
}

/// Kruskal restricted to nodes in `mask`; None unless the subset spans into
/// a single tree.
fn span_subset(
    edges: &[(usize, usize, f64)],
    mask: u32,
    size: usize,
    n: usize,
) -> Option<Vec<usize>> {
    if size == 1 {
        return Some(Vec::new());
    }
    let mut dsu = Dsu::new(n);
    let mut picked = Vec::with_capacity(size - 1);
    for (i, &(a, b, _)) in edges.iter().enumerate() {
        if mask & (1 << a) == 0 || mask & (1 << b) == 0 {
            continue;
        }
        if dsu.union(a, b) {
            picked.push(i);
            if picked.len() == size - 1 {
                return Some(picked);
            }
        }
    }
    None
}
