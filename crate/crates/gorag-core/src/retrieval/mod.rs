//! Candidate label retrieval via approximate Steiner trees.
//!
//! A query's extracted keywords split into terminals the graph knows and
//! keywords it has never seen. The known terminals are connected by an
//! approximate minimum Steiner tree and the label nodes on that tree, ordered
//! by how cheaply they sit in it, become the candidate set for
//! classification.
//!
//! The approximation builds a minimum spanning tree of the whole graph,
//! connects the terminals along their (unique) paths inside that tree, spans
//! the resulting terminal distance network with a second MST, and unions the
//! realized paths. `PathDomain::Graph` swaps the tree paths for true shortest
//! paths in the full graph (the classic distance-network construction, whose
//! union is re-spanned and pruned); that variant carries the usual factor-2
//! optimality bound and is what the approximation tests exercise against the
//! exact oracle in [`steiner_exact`].
//!
//! Everything here is deterministic: edges sort by (cost, endpoint keys) and
//! all remaining ties break on lexicographic node keys.

mod exact;
pub mod synthgraph;

pub use exact::{steiner_exact, ExactSteiner};

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::graph::{NodeKind, WeightedGraph};

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("no terminals: none of the query keywords exist in the graph")]
    EmptyTerminals,
    #[error("terminal {0} is not a node of the graph")]
    UnknownTerminal(String),
    #[error("graph is disconnected; retrieval needs a connected graph")]
    Disconnected,
    #[error("no candidate labels reachable from the terminals")]
    NoCandidates,
    #[error("exact search is limited to 16 nodes, graph has {nodes}")]
    TooLarge { nodes: usize },
}

/// Query keywords partitioned by graph membership, in extraction order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TerminalSet {
    pub exist: Vec<String>,
    pub not_exist: Vec<String>,
}

/// Partition extracted keywords into those present in the graph (including
/// keys that are label ids) and those unseen.
pub fn split_keywords(graph: &WeightedGraph, keywords: &[String]) -> TerminalSet {
    let mut out = TerminalSet::default();
    for kw in keywords {
        if graph.contains_node(kw) {
            out.exist.push(kw.clone());
        } else {
            out.not_exist.push(kw.clone());
        }
    }
    debug_assert_eq!(out.exist.len() + out.not_exist.len(), keywords.len());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathDomain {
    /// Terminal-to-terminal paths run inside the graph's MST (the default).
    Mst,
    /// Terminal-to-terminal paths are true shortest paths in the graph.
    Graph,
}

impl std::str::FromStr for PathDomain {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mst" => Ok(PathDomain::Mst),
            "graph" => Ok(PathDomain::Graph),
            other => Err(format!("unknown path domain {other:?}, expected mst or graph")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalOptions {
    pub paths: PathDomain,
    /// Treat every edge as weight 1 (structure-only retrieval).
    pub unit_weights: bool,
}

impl Default for RetrievalOptions {
    fn default() -> Self {
        RetrievalOptions {
            paths: PathDomain::Mst,
            unit_weights: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    /// Sum of tree-edge costs incident to the label (or the fallback edge
    /// cost when the candidate came from a terminal's neighborhood).
    pub incident_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackKind {
    /// Candidates came from the tree itself.
    None,
    /// Tree had no label; candidates are the terminals' cheapest label
    /// neighbors.
    NeighborEdge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinerResult {
    pub tree_nodes: BTreeSet<String>,
    /// Tree edges as sorted (smaller, larger) key pairs, in sorted order.
    pub tree_edges: Vec<(String, String)>,
    pub total_cost: f64,
    /// Candidate labels, ascending incident cost, ties lexicographic.
    pub candidates: Vec<Candidate>,
    pub fallback: FallbackKind,
}

/// Connect the exist-terminals with an approximate Steiner tree and read the
/// candidate labels off it.
pub fn steiner_candidates(
    graph: &WeightedGraph,
    terminals: &TerminalSet,
    options: &RetrievalOptions,
) -> Result<SteinerResult, RetrievalError> {
    let terminal_keys: BTreeSet<&str> = terminals.exist.iter().map(String::as_str).collect();
    if terminal_keys.is_empty() {
        return Err(RetrievalError::EmptyTerminals);
    }
    for t in &terminal_keys {
        if !graph.contains_node(t) {
            return Err(RetrievalError::UnknownTerminal(t.to_string()));
        }
    }
    let view = GraphView::build(graph, options);
    if view.component_count() > 1 {
        return Err(RetrievalError::Disconnected);
    }
    let term_idx: Vec<usize> = terminal_keys.iter().map(|k| view.index[*k]).collect();

    let tree_edge_ids: BTreeSet<usize> = if term_idx.len() == 1 {
        BTreeSet::new()
    } else {
        match options.paths {
            PathDomain::Mst => tree_via_mst_paths(&view, &term_idx)?,
            PathDomain::Graph => tree_via_graph_paths(&view, &term_idx),
        }
    };
    let result = assemble(graph, &view, &term_idx, &tree_edge_ids)?;
    debug_assert!(validate_tree(&view, &term_idx, &tree_edge_ids));
    Ok(result)
}

// Internal view of the graph: sorted node keys as indices, edge list, and
// adjacency, with costs resolved per the retrieval options.
struct GraphView<'a> {
    keys: Vec<&'a str>,
    index: BTreeMap<&'a str, usize>,
    edges: Vec<(usize, usize, f64)>,
    adj: Vec<Vec<(usize, f64, usize)>>,
    sorted_edge_ids: Vec<usize>,
    components: usize,
}

impl<'a> GraphView<'a> {
    fn build(graph: &'a WeightedGraph, options: &RetrievalOptions) -> Self {
        let keys: Vec<&str> = graph.node_keys().collect();
        let index: BTreeMap<&str, usize> =
            keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let mut edges = Vec::with_capacity(graph.edge_count());
        let mut adj: Vec<Vec<(usize, f64, usize)>> = vec![Vec::new(); keys.len()];
        for rec in graph.edges_iter() {
            let a = index[rec.a.as_str()];
            let b = index[rec.b.as_str()];
            let cost = if options.unit_weights { 1.0 } else { rec.weight };
            let id = edges.len();
            edges.push((a, b, cost));
            adj[a].push((b, cost, id));
            adj[b].push((a, cost, id));
        }
        for list in &mut adj {
            list.sort_by(|x, y| x.0.cmp(&y.0));
        }
        let mut sorted_edge_ids: Vec<usize> = (0..edges.len()).collect();
        sorted_edge_ids.sort_by(|&x, &y| {
            let ex = &edges[x];
            let ey = &edges[y];
            ex.2.partial_cmp(&ey.2)
                .expect("edge costs are finite")
                .then(ex.0.cmp(&ey.0))
                .then(ex.1.cmp(&ey.1))
        });
        let mut dsu = Dsu::new(keys.len());
        for &(a, b, _) in &edges {
            dsu.union(a, b);
        }
        let components = (0..keys.len()).filter(|&i| dsu.find(i) == i).count();
        GraphView {
            keys,
            index,
            edges,
            adj,
            sorted_edge_ids,
            components,
        }
    }

    fn component_count(&self) -> usize {
        self.components
    }

    /// Kruskal over the given edge ids (already cost-sorted). Returns picked
    /// edge ids.
    fn kruskal(&self, candidate_ids: &[usize]) -> Vec<usize> {
        let mut dsu = Dsu::new(self.keys.len());
        let mut picked = Vec::new();
        for &id in candidate_ids {
            let (a, b, _) = self.edges[id];
            if dsu.union(a, b) {
                picked.push(id);
            }
        }
        picked
    }
}

pub(crate) struct Dsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

struct Traversal {
    dist: Vec<f64>,
    parent_node: Vec<usize>,
    parent_edge: Vec<usize>,
}

const UNVISITED: usize = usize::MAX;

/// Distances and parents from `source` along the given adjacency (a tree:
/// plain traversal reaches every node once).
fn tree_traversal(adj: &[Vec<(usize, f64, usize)>], source: usize) -> Traversal {
    let n = adj.len();
    let mut t = Traversal {
        dist: vec![f64::INFINITY; n],
        parent_node: vec![UNVISITED; n],
        parent_edge: vec![UNVISITED; n],
    };
    t.dist[source] = 0.0;
    let mut stack = vec![source];
    while let Some(u) = stack.pop() {
        for &(v, cost, id) in &adj[u] {
            if t.dist[v].is_infinite() && v != source {
                t.dist[v] = t.dist[u] + cost;
                t.parent_node[v] = u;
                t.parent_edge[v] = id;
                stack.push(v);
            }
        }
    }
    t
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Reversed: BinaryHeap is a max-heap, we want cheapest (then lowest
        // index) first.
        other
            .cost
            .partial_cmp(&self.cost)
            .expect("costs are finite")
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(view: &GraphView<'_>, source: usize) -> Traversal {
    let n = view.keys.len();
    let mut t = Traversal {
        dist: vec![f64::INFINITY; n],
        parent_node: vec![UNVISITED; n],
        parent_edge: vec![UNVISITED; n],
    };
    t.dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        cost: 0.0,
        node: source,
    });
    let mut settled = vec![false; n];
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if settled[node] {
            continue;
        }
        settled[node] = true;
        for &(v, w, id) in &view.adj[node] {
            let next = cost + w;
            if next < t.dist[v] {
                t.dist[v] = next;
                t.parent_node[v] = node;
                t.parent_edge[v] = id;
                heap.push(HeapEntry { cost: next, node: v });
            }
        }
    }
    t
}

/// MST of the terminal distance network, as (i, j) index pairs into
/// `term_idx`. Ties break on terminal key order.
fn aux_mst(traversals: &[Traversal], term_idx: &[usize]) -> Vec<(usize, usize)> {
    let k = term_idx.len();
    let mut aux_edges: Vec<(usize, usize, f64)> = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            aux_edges.push((i, j, traversals[i].dist[term_idx[j]]));
        }
    }
    aux_edges.sort_by(|x, y| {
        x.2.partial_cmp(&y.2)
            .expect("distances are finite")
            .then(x.0.cmp(&y.0))
            .then(x.1.cmp(&y.1))
    });
    let mut dsu = Dsu::new(k);
    let mut picked = Vec::with_capacity(k - 1);
    for (i, j, _) in aux_edges {
        if dsu.union(i, j) {
            picked.push((i, j));
        }
    }
    picked
}

/// Collect the realized path i -> j using i's traversal parents.
fn realize_path(
    traversal: &Traversal,
    from: usize,
    to: usize,
    out: &mut BTreeSet<usize>,
) {
    let mut cursor = to;
    while cursor != from {
        let edge = traversal.parent_edge[cursor];
        debug_assert_ne!(edge, UNVISITED, "path realization fell off the traversal");
        out.insert(edge);
        cursor = traversal.parent_node[cursor];
    }
}

fn tree_via_mst_paths(
    view: &GraphView<'_>,
    term_idx: &[usize],
) -> Result<BTreeSet<usize>, RetrievalError> {
    let mst_ids = view.kruskal(&view.sorted_edge_ids);
    if mst_ids.len() + 1 != view.keys.len() {
        return Err(RetrievalError::Disconnected);
    }
    let mut mst_adj: Vec<Vec<(usize, f64, usize)>> = vec![Vec::new(); view.keys.len()];
    for &id in &mst_ids {
        let (a, b, cost) = view.edges[id];
        mst_adj[a].push((b, cost, id));
        mst_adj[b].push((a, cost, id));
    }
    for list in &mut mst_adj {
        list.sort_by(|x, y| x.0.cmp(&y.0));
    }
    let traversals: Vec<Traversal> = term_idx
        .iter()
        .map(|&t| tree_traversal(&mst_adj, t))
        .collect();
    let mut union = BTreeSet::new();
    for (i, j) in aux_mst(&traversals, term_idx) {
        realize_path(&traversals[i], term_idx[i], term_idx[j], &mut union);
    }
    Ok(union)
}

fn tree_via_graph_paths(view: &GraphView<'_>, term_idx: &[usize]) -> BTreeSet<usize> {
    let traversals: Vec<Traversal> = term_idx.iter().map(|&t| dijkstra(view, t)).collect();
    let mut union = BTreeSet::new();
    for (i, j) in aux_mst(&traversals, term_idx) {
        realize_path(&traversals[i], term_idx[i], term_idx[j], &mut union);
    }
    // The union of shortest paths can contain cycles: span it and prune
    // non-terminal leaves so a tree remains.
    let union_sorted: Vec<usize> = view
        .sorted_edge_ids
        .iter()
        .copied()
        .filter(|id| union.contains(id))
        .collect();
    let spanned = view.kruskal(&union_sorted);
    prune_non_terminal_leaves(view, term_idx, spanned)
}

fn prune_non_terminal_leaves(
    view: &GraphView<'_>,
    term_idx: &[usize],
    edges: Vec<usize>,
) -> BTreeSet<usize> {
    let terminal: BTreeSet<usize> = term_idx.iter().copied().collect();
    let mut kept: BTreeSet<usize> = edges.into_iter().collect();
    loop {
        let mut degree: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &id in &kept {
            let (a, b, _) = view.edges[id];
            degree.entry(a).or_default().push(id);
            degree.entry(b).or_default().push(id);
        }
        let removable: Vec<usize> = degree
            .iter()
            .filter(|(node, incident)| incident.len() == 1 && !terminal.contains(node))
            .map(|(_, incident)| incident[0])
            .collect();
        if removable.is_empty() {
            return kept;
        }
        for id in removable {
            kept.remove(&id);
        }
    }
}

fn assemble(
    graph: &WeightedGraph,
    view: &GraphView<'_>,
    term_idx: &[usize],
    tree_edge_ids: &BTreeSet<usize>,
) -> Result<SteinerResult, RetrievalError> {
    let mut tree_nodes: BTreeSet<String> = term_idx
        .iter()
        .map(|&t| view.keys[t].to_string())
        .collect();
    let mut tree_edges: Vec<(String, String)> = Vec::with_capacity(tree_edge_ids.len());
    let mut total_cost = 0.0;
    let mut incident: BTreeMap<&str, f64> = BTreeMap::new();
    for &id in tree_edge_ids {
        let (a, b, cost) = view.edges[id];
        let (ka, kb) = (view.keys[a], view.keys[b]);
        tree_nodes.insert(ka.to_string());
        tree_nodes.insert(kb.to_string());
        tree_edges.push((ka.to_string(), kb.to_string()));
        total_cost += cost;
        for k in [ka, kb] {
            *incident.entry(k).or_insert(0.0) += cost;
        }
    }
    tree_edges.sort();

    let mut candidates: Vec<Candidate> = tree_nodes
        .iter()
        .filter(|k| graph.node_kind(k) == Some(NodeKind::Label))
        .map(|k| Candidate {
            label: k.clone(),
            incident_cost: incident.get(k.as_str()).copied().unwrap_or(0.0),
        })
        .collect();
    sort_candidates(&mut candidates);
    let mut fallback = FallbackKind::None;

    if candidates.is_empty() {
        // No label in the tree (single keyword terminal, typically): offer
        // each terminal's cheapest label neighbor instead.
        let mut best: BTreeMap<&str, f64> = BTreeMap::new();
        for &t in term_idx {
            let mut cheapest: Option<(f64, &str)> = None;
            for &(v, cost, _) in &view.adj[t] {
                let key = view.keys[v];
                if graph.node_kind(key) != Some(NodeKind::Label) {
                    continue;
                }
                cheapest = match cheapest {
                    None => Some((cost, key)),
                    Some((c, k)) if cost < c || (cost == c && key < k) => Some((cost, key)),
                    keep => keep,
                };
            }
            if let Some((cost, key)) = cheapest {
                best.entry(key)
                    .and_modify(|c| *c = c.min(cost))
                    .or_insert(cost);
            }
        }
        candidates = best
            .into_iter()
            .map(|(label, incident_cost)| Candidate {
                label: label.to_string(),
                incident_cost,
            })
            .collect();
        sort_candidates(&mut candidates);
        fallback = FallbackKind::NeighborEdge;
        if candidates.is_empty() {
            return Err(RetrievalError::NoCandidates);
        }
    }

    Ok(SteinerResult {
        tree_nodes,
        tree_edges,
        total_cost,
        candidates,
        fallback,
    })
}

fn sort_candidates(candidates: &mut [Candidate]) {
    candidates.sort_by(|x, y| {
        x.incident_cost
            .partial_cmp(&y.incident_cost)
            .expect("costs are finite")
            .then_with(|| x.label.cmp(&y.label))
    });
}

/// Structural tree check used by debug assertions: acyclic over its edges and
/// every terminal connected into one component.
fn validate_tree(view: &GraphView<'_>, term_idx: &[usize], edge_ids: &BTreeSet<usize>) -> bool {
    let mut dsu = Dsu::new(view.keys.len());
    for &id in edge_ids {
        let (a, b, _) = view.edges[id];
        if !dsu.union(a, b) {
            return false; // cycle
        }
    }
    let root = dsu.find(term_idx[0]);
    term_idx.iter().all(|&t| dsu.find(t) == root)
}
