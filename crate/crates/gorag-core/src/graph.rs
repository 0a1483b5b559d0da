//! The weighted keyword/label graph and its round-by-round construction.
//!
//! Nodes are keywords or labels, identified by their normalized string key; a
//! string that is both a label id and an extracted keyword maps to the label
//! node. Keyword-label edges carry an occurrence list: every (text, label,
//! keyword) triple appends the keyword's correlation score as frozen at
//! insertion time, and the edge weight is the mean of `1 - score` over the
//! list, so low-correlation occurrences push the edge toward 1 and an edge's
//! weight is always re-derivable from its own record. Label-label edges are
//! added when a round merges in, connecting every new label to every older
//! label with a weight averaged from the two labels' keyword neighborhoods;
//! those weights are frozen at merge time and carry no occurrence list.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, CorpusStats, LabelDef, RoundSpec, TextDoc};
use crate::llm::Gateway;

pub const GRAPH_SCHEMA_VERSION: u64 = 1;

/// Prefix for the pseudo-text ids that carry label descriptions into the
/// corpus statistics.
pub const LABEL_PSEUDO_TEXT_PREFIX: &str = "label-description:";

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("text {0} is not in the corpus statistics")]
    UnknownText(String),
    #[error("label {0} is not a label node of the graph")]
    UnknownLabel(String),
    #[error("cannot merge a round-{got} subgraph into a round-{base} graph")]
    RoundMismatch { base: u32, got: u32 },
    #[error("label {0} exists in both graphs; label sets must be disjoint across rounds")]
    OverlappingLabels(String),
    #[error("unsupported graph schema version {found}, this build reads version {GRAPH_SCHEMA_VERSION}")]
    SchemaVersion { found: u64 },
    #[error("graph file {path}: {message}")]
    Format { path: String, message: String },
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Keyword,
    Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    KeywordLabel,
    LabelLabel,
}

/// One recorded (text, keyword, label) co-occurrence with the correlation
/// score frozen at insertion time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occurrence {
    pub text_id: String,
    pub cs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub a: String,
    pub b: String,
    pub kind: EdgeKind,
    pub weight: f64,
    pub occurrences: Vec<Occurrence>,
}

impl EdgeRecord {
    /// Mean of `1 - cs` over the occurrence list; the stored weight of every
    /// keyword-label edge equals this.
    pub fn derived_weight(&self) -> f64 {
        if self.occurrences.is_empty() {
            return self.weight;
        }
        let sum: f64 = self.occurrences.iter().map(|o| 1.0 - o.cs).sum();
        sum / self.occurrences.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMeta {
    pub id: String,
    pub name: Option<String>,
    pub round_introduced: u32,
    /// Keywords generated from the label's description; shown as the label's
    /// gloss in classification prompts.
    #[serde(default)]
    pub keywords: Vec<String>,
}

fn edge_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    round: u32,
    nodes: BTreeMap<String, NodeKind>,
    labels: BTreeMap<String, LabelMeta>,
    /// Keyed by sorted endpoint pair in memory; stored as a flat edge list in
    /// the JSON file, sorted the same way.
    #[serde(with = "edge_list")]
    edges: BTreeMap<(String, String), EdgeRecord>,
}

mod edge_list {
    use super::{edge_key, EdgeRecord};
    use serde::{Deserialize, Deserializer, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(
        edges: &BTreeMap<(String, String), EdgeRecord>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        ser.collect_seq(edges.values())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<(String, String), EdgeRecord>, D::Error> {
        let list = Vec::<EdgeRecord>::deserialize(de)?;
        Ok(list
            .into_iter()
            .map(|rec| (edge_key(&rec.a, &rec.b), rec))
            .collect())
    }
}

/// What `record_occurrence` did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordEffect {
    /// Occurrence appended (node and/or edge possibly created).
    Recorded { new_node: bool, new_edge: bool },
    /// Keyword equals the target label: a self-loop would result, skipped.
    SelfLoop,
    /// The endpoints are joined by a frozen label-label edge; occurrence
    /// dropped to keep that weight and the cross-label accounting intact.
    FrozenLabelEdge,
}

impl WeightedGraph {
    /// The empty initial graph (round 0).
    pub fn new() -> Self {
        Self::default()
    }

    pub fn empty_round(round: u32) -> Self {
        WeightedGraph {
            round,
            ..Self::default()
        }
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_node(&self, key: &str) -> bool {
        self.nodes.contains_key(key)
    }

    pub fn node_kind(&self, key: &str) -> Option<NodeKind> {
        self.nodes.get(key).copied()
    }

    pub fn is_label(&self, key: &str) -> bool {
        self.node_kind(key) == Some(NodeKind::Label)
    }

    /// Node keys in sorted order.
    pub fn node_keys(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(String::as_str)
    }

    pub fn labels(&self) -> &BTreeMap<String, LabelMeta> {
        &self.labels
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<&EdgeRecord> {
        self.edges.get(&edge_key(a, b))
    }

    /// Edges in sorted endpoint order.
    pub fn edges_iter(&self) -> impl Iterator<Item = &EdgeRecord> {
        self.edges.values()
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn cross_label_edge_count(&self) -> usize {
        self.edges
            .values()
            .filter(|e| e.kind == EdgeKind::LabelLabel)
            .count()
    }

    /// Register a label node. A keyword node with the same key is promoted:
    /// the node becomes a label and keeps its edges.
    pub fn add_label(&mut self, def: &LabelDef, keywords: Vec<String>) {
        self.nodes.insert(def.id.clone(), NodeKind::Label);
        self.labels.insert(
            def.id.clone(),
            LabelMeta {
                id: def.id.clone(),
                name: def.name.clone(),
                round_introduced: def.round_introduced,
                keywords,
            },
        );
    }

    /// Append one keyword occurrence to the `(keyword, label)` edge, creating
    /// node and edge as needed, and re-average the edge weight.
    pub fn record_occurrence(
        &mut self,
        keyword: &str,
        label: &str,
        text_id: &str,
        cs: f64,
    ) -> Result<RecordEffect, GraphError> {
        if !self.is_label(label) {
            return Err(GraphError::UnknownLabel(label.to_string()));
        }
        if keyword == label {
            return Ok(RecordEffect::SelfLoop);
        }
        debug_assert!((0.0..=1.0).contains(&cs), "correlation score out of range: {cs}");
        let new_node = !self.nodes.contains_key(keyword);
        if new_node {
            self.nodes.insert(keyword.to_string(), NodeKind::Keyword);
        }
        let key = edge_key(keyword, label);
        let new_edge = !self.edges.contains_key(&key);
        let record = self.edges.entry(key.clone()).or_insert_with(|| EdgeRecord {
            a: key.0.clone(),
            b: key.1.clone(),
            kind: EdgeKind::KeywordLabel,
            weight: 0.0,
            occurrences: Vec::new(),
        });
        if record.kind == EdgeKind::LabelLabel {
            log::debug!(
                "occurrence of {keyword} under {label} dropped: endpoints hold a frozen label-label edge"
            );
            return Ok(RecordEffect::FrozenLabelEdge);
        }
        record.occurrences.push(Occurrence {
            text_id: text_id.to_string(),
            cs,
        });
        record.weight = record.derived_weight();
        Ok(RecordEffect::Recorded { new_node, new_edge })
    }

    /// Add a frozen label-label connectivity edge unless the endpoints are
    /// already joined.
    pub(crate) fn add_connectivity_edge(&mut self, a: &str, b: &str, weight: f64) -> bool {
        let key = edge_key(a, b);
        if self.edges.contains_key(&key) {
            return false;
        }
        self.edges.insert(
            key.clone(),
            EdgeRecord {
                a: key.0,
                b: key.1,
                kind: EdgeKind::LabelLabel,
                weight,
                occurrences: Vec::new(),
            },
        );
        true
    }

    /// Sum of keyword-neighbor edge weights and neighbor count per label, in
    /// one pass over the edges. Only keyword-kind neighbors count.
    fn keyword_neighborhoods(&self) -> BTreeMap<&str, (f64, usize)> {
        let mut out: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
        for rec in self.edges.values() {
            if rec.kind != EdgeKind::KeywordLabel {
                continue;
            }
            for (node, other) in [(&rec.a, &rec.b), (&rec.b, &rec.a)] {
                if self.is_label(node) && self.node_kind(other) == Some(NodeKind::Keyword) {
                    let entry = out.entry(node.as_str()).or_insert((0.0, 0));
                    entry.0 += rec.weight;
                    entry.1 += 1;
                }
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), GraphError> {
        let file = GraphFile {
            schema_version: GRAPH_SCHEMA_VERSION,
            graph: self.clone(),
        };
        let json = serde_json::to_string(&file).expect("graph serializes");
        std::fs::write(path, json).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, GraphError> {
        let raw = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&raw).map_err(|e| match e {
            GraphError::Format { message, .. } => GraphError::Format {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            schema_version: GRAPH_SCHEMA_VERSION,
            graph: self.clone(),
        };
        serde_json::to_string(&file).expect("graph serializes")
    }

    pub fn from_json(raw: &str) -> Result<Self, GraphError> {
        let version: VersionProbe =
            serde_json::from_str(raw).map_err(|e| GraphError::Format {
                path: "<memory>".into(),
                message: e.to_string(),
            })?;
        if version.schema_version != GRAPH_SCHEMA_VERSION {
            return Err(GraphError::SchemaVersion {
                found: version.schema_version,
            });
        }
        let file: GraphFile = serde_json::from_str(raw).map_err(|e| GraphError::Format {
            path: "<memory>".into(),
            message: e.to_string(),
        })?;
        let graph = file.graph;
        for rec in graph.edges.values() {
            if !graph.nodes.contains_key(&rec.a) || !graph.nodes.contains_key(&rec.b) {
                return Err(GraphError::Format {
                    path: "<memory>".into(),
                    message: format!("edge {}--{} references a missing node", rec.a, rec.b),
                });
            }
        }
        Ok(graph)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    schema_version: u64,
    #[serde(flatten)]
    graph: WeightedGraph,
}

#[derive(Deserialize)]
struct VersionProbe {
    #[serde(default)]
    schema_version: u64,
}

/// Correlation score of `keyword` against the ingested text `text_id`:
/// occurrence share of the keyword in the text, scaled by the log inverse
/// document share, clamped to `[0, 1]`. A keyword the text does not contain
/// scores 0, so its edge occurrence contributes full weight `1 - 0`.
pub fn correlation_score(
    keyword: &str,
    text_id: &str,
    stats: &CorpusStats,
) -> Result<f64, GraphError> {
    let count = stats
        .count_in_text(keyword, text_id)
        .ok_or_else(|| GraphError::UnknownText(text_id.to_string()))?;
    let len = stats.text_len(text_id).unwrap_or(0);
    if count == 0 || len == 0 {
        return Ok(0.0);
    }
    let total = stats.total_texts() as f64;
    let df = stats.doc_freq(keyword) as f64;
    let raw = (count as f64 / len as f64) * (total / (1.0 + df)).ln();
    Ok(raw.clamp(0.0, 1.0))
}

pub fn label_pseudo_text_id(label_id: &str) -> String {
    format!("{LABEL_PSEUDO_TEXT_PREFIX}{label_id}")
}

/// Everything a round's indexing produced: the round subgraph to merge, the
/// per-label description keywords, and failure counts.
#[derive(Debug)]
pub struct RoundIndexOutcome {
    pub subgraph: WeightedGraph,
    pub label_keywords: BTreeMap<String, Vec<String>>,
    pub extraction_failures: usize,
}

/// Index one round of training texts into a fresh subgraph.
///
/// Keywords are extracted per text (in parallel when `workers > 1`; results
/// commit in text order either way), label descriptions are generated for
/// named labels, every text and description enters the corpus statistics
/// first, and only then are correlation scores computed and edges recorded,
/// so each score sees the full round. A transport failure on one text logs a
/// warning and contributes no keywords instead of aborting the round.
pub fn index_training_round(
    round: &RoundSpec,
    labels: &BTreeMap<String, LabelDef>,
    stats: &mut CorpusStats,
    gateway: &Gateway,
    workers: usize,
) -> Result<RoundIndexOutcome, GraphError> {
    let docs: Vec<&TextDoc> = round.train.values().flatten().collect();
    let mut failures = 0usize;
    let keywords_per_doc: Vec<Vec<String>> = extract_all(gateway, &docs, workers, &mut failures);

    // Label descriptions for named labels, in the order the round lists them.
    let mut label_gen: BTreeMap<String, crate::llm::LabelGen> = BTreeMap::new();
    for label_id in &round.new_labels {
        let def = match labels.get(label_id) {
            Some(def) => def,
            None => continue,
        };
        match gateway.generate_label_keywords(def) {
            Ok(Some(gen)) => {
                label_gen.insert(label_id.clone(), gen);
            }
            Ok(None) => {}
            Err(e) => {
                failures += 1;
                log::warn!("label description for {label_id} failed: {e}");
            }
        }
    }

    // Ingest everything before scoring anything: scores of this round see all
    // of this round's texts.
    for (doc, keywords) in docs.iter().zip(&keywords_per_doc) {
        stats.ingest_text(doc, keywords)?;
    }
    let mut pseudo_docs: BTreeMap<String, TextDoc> = BTreeMap::new();
    for (label_id, gen) in &label_gen {
        let doc = TextDoc::new(label_pseudo_text_id(label_id), gen.description.clone(), None);
        stats.ingest_text(&doc, &gen.keywords)?;
        pseudo_docs.insert(label_id.clone(), doc);
    }

    let mut subgraph = WeightedGraph::empty_round(round.round);
    for label_id in &round.new_labels {
        if let Some(def) = labels.get(label_id) {
            let gloss = label_gen
                .get(label_id)
                .map(|g| g.keywords.clone())
                .unwrap_or_default();
            subgraph.add_label(def, gloss);
        }
    }

    for (doc, keywords) in docs.iter().zip(&keywords_per_doc) {
        let label = doc
            .gold_label
            .as_deref()
            .expect("training texts carry labels");
        for kw in keywords {
            let cs = correlation_score(kw, &doc.id, stats)?;
            subgraph.record_occurrence(kw, label, &doc.id, cs)?;
        }
    }
    for (label_id, gen) in &label_gen {
        let doc = &pseudo_docs[label_id];
        for kw in &gen.keywords {
            let cs = correlation_score(kw, &doc.id, stats)?;
            subgraph.record_occurrence(kw, label_id, &doc.id, cs)?;
        }
    }

    Ok(RoundIndexOutcome {
        subgraph,
        label_keywords: label_gen
            .into_iter()
            .map(|(id, gen)| (id, gen.keywords))
            .collect(),
        extraction_failures: failures,
    })
}

fn extract_all(
    gateway: &Gateway,
    docs: &[&TextDoc],
    workers: usize,
    failures: &mut usize,
) -> Vec<Vec<String>> {
    let workers = workers.max(1).min(gateway.concurrency().max(1));
    let results: Vec<Result<Vec<String>, crate::llm::LlmError>> = if workers > 1 && docs.len() > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| {
            use rayon::prelude::*;
            docs.par_iter()
                .map(|doc| gateway.extract_keywords(&doc.body))
                .collect()
        })
    } else {
        docs.iter()
            .map(|doc| gateway.extract_keywords(&doc.body))
            .collect()
    };
    results
        .into_iter()
        .zip(docs)
        .map(|(res, doc)| match res {
            Ok(kws) => kws,
            Err(e) => {
                *failures += 1;
                log::warn!("keyword extraction for text {} failed: {e}", doc.id);
                Vec::new()
            }
        })
        .collect()
}

/// Merge a round subgraph into the cumulative graph: union nodes, labels, and
/// edges, then join every new label to every older label with a connectivity
/// edge averaging the two keyword neighborhoods (a label without keyword
/// neighbors contributes 0.5 as its half).
pub fn merge_round(
    base: WeightedGraph,
    new_subgraph: WeightedGraph,
) -> Result<WeightedGraph, GraphError> {
    if new_subgraph.round != base.round + 1 {
        return Err(GraphError::RoundMismatch {
            base: base.round,
            got: new_subgraph.round,
        });
    }
    for id in new_subgraph.labels.keys() {
        if base.labels.contains_key(id) {
            return Err(GraphError::OverlappingLabels(id.clone()));
        }
    }
    let old_label_ids: Vec<String> = base.labels.keys().cloned().collect();
    let new_label_ids: Vec<String> = new_subgraph.labels.keys().cloned().collect();

    let mut merged = base;
    merged.round = new_subgraph.round;
    for (key, kind) in new_subgraph.nodes {
        merged
            .nodes
            .entry(key)
            .and_modify(|existing| {
                if kind == NodeKind::Label {
                    *existing = NodeKind::Label;
                }
            })
            .or_insert(kind);
    }
    merged.labels.extend(new_subgraph.labels);
    for (key, rec) in new_subgraph.edges {
        match merged.edges.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(rec);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                // Subgraph edges always touch a label the base graph has never
                // seen, so a collision indicates misuse; fold occurrences in
                // rather than lose data.
                debug_assert!(false, "edge {}--{} merged twice", rec.a, rec.b);
                let existing = o.get_mut();
                if existing.kind == EdgeKind::KeywordLabel && rec.kind == EdgeKind::KeywordLabel {
                    existing.occurrences.extend(rec.occurrences);
                    existing.weight = existing.derived_weight();
                }
            }
        }
    }

    let neighborhoods = merged.keyword_neighborhoods();
    let half = |label: &str| -> f64 {
        match neighborhoods.get(label) {
            Some((sum, count)) if *count > 0 => sum / (2.0 * *count as f64),
            _ => 0.5,
        }
    };
    let mut pending: Vec<(String, String, f64)> = Vec::new();
    for y_new in &new_label_ids {
        for y_old in &old_label_ids {
            let weight = 0.5 * (half(y_new) + half(y_old));
            pending.push((y_new.clone(), y_old.clone(), weight));
        }
    }
    for (a, b, weight) in pending {
        merged.add_connectivity_edge(&a, &b, weight);
    }
    Ok(merged)
}

/// Index a classified query text online: unseen keywords become nodes wired
/// to the predicted label, keywords the graph already has gain a fresh
/// occurrence on their edge to that label. The text must already be in the
/// corpus statistics. A predicted label the graph does not know logs a
/// warning and changes nothing.
pub fn online_index(
    graph: &mut WeightedGraph,
    text: &TextDoc,
    terminals: &crate::retrieval::TerminalSet,
    predicted: &str,
    stats: &CorpusStats,
) -> Result<OnlineIndexSummary, GraphError> {
    let mut summary = OnlineIndexSummary::default();
    if !graph.is_label(predicted) {
        log::warn!("online indexing skipped: {predicted} is not a label of the graph");
        return Ok(summary);
    }
    if !stats.contains_text(&text.id) {
        return Err(GraphError::UnknownText(text.id.clone()));
    }
    for kw in terminals.not_exist.iter().chain(&terminals.exist) {
        let cs = correlation_score(kw, &text.id, stats)?;
        match graph.record_occurrence(kw, predicted, &text.id, cs)? {
            RecordEffect::Recorded { new_node, new_edge } => {
                summary.occurrences_added += 1;
                summary.nodes_added += usize::from(new_node);
                summary.edges_added += usize::from(new_edge);
            }
            RecordEffect::SelfLoop | RecordEffect::FrozenLabelEdge => {}
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnlineIndexSummary {
    pub nodes_added: usize,
    pub edges_added: usize,
    pub occurrences_added: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TextDoc;

    #[test]
    fn correlation_score_matches_hand_computation() {
        let mut stats = CorpusStats::new();
        // Text t: 12 tokens, "x" appears 3 times; 3 more texts without "x".
        stats
            .ingest_text(
                &TextDoc::new("t", "x a x b x c d e f g h i", None),
                &["x".to_string()],
            )
            .unwrap();
        for i in 0..3 {
            stats
                .ingest_text(&TextDoc::new(format!("o{i}"), "p q r", None), &["x".to_string()])
                .unwrap();
        }
        assert_eq!(stats.total_texts(), 4);
        assert_eq!(stats.doc_freq("x"), 1);
        let cs = correlation_score("x", "t", &stats).unwrap();
        let expected = 0.25 * 2.0f64.ln();
        assert!((cs - expected).abs() < 1e-12, "cs={cs}, expected={expected}");
    }

    #[test]
    fn correlation_score_clamps_ubiquitous_keywords_to_zero() {
        let mut stats = CorpusStats::new();
        let kw = vec!["common".to_string()];
        for i in 0..5 {
            stats
                .ingest_text(&TextDoc::new(format!("t{i}"), "common words here", None), &kw)
                .unwrap();
        }
        // df = 5, total = 5: log(5/6) < 0, clamped.
        assert_eq!(correlation_score("common", "t0", &stats).unwrap(), 0.0);
    }

    #[test]
    fn correlation_score_handles_absent_keyword_and_unknown_text() {
        let mut stats = CorpusStats::new();
        stats
            .ingest_text(&TextDoc::new("t", "alpha beta", None), &[])
            .unwrap();
        assert_eq!(correlation_score("missing", "t", &stats).unwrap(), 0.0);
        assert!(matches!(
            correlation_score("alpha", "nope", &stats),
            Err(GraphError::UnknownText(_))
        ));
    }

    fn label(id: &str, round: u32) -> LabelDef {
        LabelDef {
            id: id.into(),
            name: None,
            round_introduced: round,
        }
    }

    #[test]
    fn edge_weight_is_mean_of_one_minus_cs() {
        let mut g = WeightedGraph::empty_round(1);
        g.add_label(&label("y", 1), vec![]);
        g.record_occurrence("k", "y", "t1", 0.2).unwrap();
        let w1 = g.edge("k", "y").unwrap().weight;
        assert!((w1 - 0.8).abs() < 1e-12);
        g.record_occurrence("k", "y", "t2", 0.4).unwrap();
        let w2 = g.edge("k", "y").unwrap().weight;
        assert!((w2 - 0.7).abs() < 1e-12, "w2={w2}");

        let mut h = WeightedGraph::empty_round(1);
        h.add_label(&label("y", 1), vec![]);
        h.record_occurrence("k", "y", "t1", 0.0).unwrap();
        assert!((h.edge("k", "y").unwrap().weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stored_weight_equals_rederived_weight() {
        let mut g = WeightedGraph::empty_round(1);
        g.add_label(&label("y", 1), vec![]);
        for (i, cs) in [0.11, 0.93, 0.0, 0.5, 0.271828].iter().enumerate() {
            g.record_occurrence("k", "y", &format!("t{i}"), *cs).unwrap();
        }
        let rec = g.edge("k", "y").unwrap();
        assert!((rec.weight - rec.derived_weight()).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&rec.weight));
    }

    #[test]
    fn keyword_matching_its_own_label_is_not_a_self_loop() {
        let mut g = WeightedGraph::empty_round(1);
        g.add_label(&label("circuits", 1), vec![]);
        let effect = g.record_occurrence("circuits", "circuits", "t1", 0.3).unwrap();
        assert_eq!(effect, RecordEffect::SelfLoop);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.node_count(), 1);
    }

    #[test]
    fn keyword_matching_another_label_reuses_the_label_node() {
        let mut g = WeightedGraph::empty_round(1);
        g.add_label(&label("y1", 1), vec![]);
        g.add_label(&label("y2", 1), vec![]);
        // "y2" extracted from a text labeled y1.
        g.record_occurrence("y2", "y1", "t1", 0.3).unwrap();
        assert_eq!(g.node_count(), 2);
        let rec = g.edge("y1", "y2").unwrap();
        assert_eq!(rec.kind, EdgeKind::KeywordLabel);
        assert_eq!(rec.occurrences.len(), 1);
    }

    #[test]
    fn record_occurrence_requires_a_label_node() {
        let mut g = WeightedGraph::empty_round(1);
        assert!(matches!(
            g.record_occurrence("k", "ghost", "t", 0.1),
            Err(GraphError::UnknownLabel(_))
        ));
    }

    fn subgraph_round1() -> WeightedGraph {
        let mut g = WeightedGraph::empty_round(1);
        g.add_label(&label("y-old", 1), vec![]);
        // One keyword neighbor with weight 1.0.
        g.record_occurrence("k1", "y-old", "t1", 0.0).unwrap();
        g
    }

    #[test]
    fn merge_into_empty_graph_is_identity_plus_round() {
        let sub = subgraph_round1();
        let merged = merge_round(WeightedGraph::new(), sub.clone()).unwrap();
        assert_eq!(merged.round(), 1);
        assert_eq!(merged.node_count(), sub.node_count());
        assert_eq!(merged.edge_count(), sub.edge_count());
        assert_eq!(merged.cross_label_edge_count(), 0);
    }

    #[test]
    fn merge_adds_cross_label_edges_with_averaged_halves() {
        let base = merge_round(WeightedGraph::new(), subgraph_round1()).unwrap();
        let mut sub = WeightedGraph::empty_round(2);
        sub.add_label(&label("y-new", 2), vec![]);
        // Neighbors with weights 0.6 and 0.8: half = 1.4 / 4 = 0.35.
        sub.record_occurrence("k2", "y-new", "t2", 0.4).unwrap();
        sub.record_occurrence("k3", "y-new", "t3", 0.2).unwrap();
        let merged = merge_round(base, sub).unwrap();
        let rec = merged.edge("y-new", "y-old").unwrap();
        assert_eq!(rec.kind, EdgeKind::LabelLabel);
        // y-old half = 1.0 / 2 = 0.5; weight = 0.5 * (0.35 + 0.5).
        assert!((rec.weight - 0.425).abs() < 1e-12, "weight={}", rec.weight);
        assert_eq!(merged.cross_label_edge_count(), 1);
    }

    #[test]
    fn merge_isolated_label_contributes_half() {
        let base = merge_round(WeightedGraph::new(), subgraph_round1()).unwrap();
        let mut sub = WeightedGraph::empty_round(2);
        sub.add_label(&label("y-lonely", 2), vec![]);
        let merged = merge_round(base, sub).unwrap();
        let rec = merged.edge("y-lonely", "y-old").unwrap();
        // Lonely half = 0.5, y-old half = 0.5.
        assert!((rec.weight - 0.5).abs() < 1e-12);
    }

    #[test]
    fn merge_connects_every_new_label_to_every_old_label() {
        let mut sub1 = WeightedGraph::empty_round(1);
        for id in ["a", "b"] {
            sub1.add_label(&label(id, 1), vec![]);
        }
        let g1 = merge_round(WeightedGraph::new(), sub1).unwrap();
        assert_eq!(g1.cross_label_edge_count(), 0);

        let mut sub2 = WeightedGraph::empty_round(2);
        for id in ["c", "d", "e"] {
            sub2.add_label(&label(id, 2), vec![]);
        }
        let g2 = merge_round(g1, sub2).unwrap();
        assert_eq!(g2.cross_label_edge_count(), 6);
    }

    #[test]
    fn merge_rejects_round_gaps_and_shared_labels() {
        let g1 = merge_round(WeightedGraph::new(), subgraph_round1()).unwrap();
        let sub3 = WeightedGraph::empty_round(3);
        assert!(matches!(
            merge_round(g1.clone(), sub3),
            Err(GraphError::RoundMismatch { base: 1, got: 3 })
        ));
        let mut dup = WeightedGraph::empty_round(2);
        dup.add_label(&label("y-old", 2), vec![]);
        assert!(matches!(
            merge_round(g1, dup),
            Err(GraphError::OverlappingLabels(_))
        ));
    }

    fn stats_with(texts: &[(&str, &str)], keywords: &[&str]) -> CorpusStats {
        let mut stats = CorpusStats::new();
        let kws: Vec<String> = keywords.iter().map(|s| s.to_string()).collect();
        for (id, body) in texts {
            stats.ingest_text(&TextDoc::new(*id, *body, None), &kws).unwrap();
        }
        stats
    }

    #[test]
    fn online_index_adds_unseen_keywords_under_predicted_label() {
        let mut sub = WeightedGraph::empty_round(1);
        sub.add_label(&label("y", 1), vec![]);
        sub.record_occurrence("old", "y", "t0", 0.5).unwrap();
        let mut g = merge_round(WeightedGraph::new(), sub).unwrap();

        let query = TextDoc::new("q1", "old nova flux pulse drift spin", None);
        let stats = stats_with(
            &[("t0", "old text"), ("q1", "old nova flux pulse drift spin")],
            &["old", "nova", "flux", "pulse", "drift", "spin"],
        );
        let terminals = crate::retrieval::TerminalSet {
            exist: vec!["old".into()],
            not_exist: vec![
                "nova".into(),
                "flux".into(),
                "pulse".into(),
                "drift".into(),
                "spin".into(),
            ],
        };
        let before_nodes = g.node_count();
        let before_edges = g.edge_count();
        let summary = online_index(&mut g, &query, &terminals, "y", &stats).unwrap();
        assert_eq!(summary.nodes_added, 5);
        assert_eq!(summary.edges_added, 5);
        assert_eq!(summary.occurrences_added, 6);
        assert_eq!(g.node_count(), before_nodes + 5);
        assert_eq!(g.edge_count(), before_edges + 5);
        // The existing keyword gained an occurrence on its edge.
        assert_eq!(g.edge("old", "y").unwrap().occurrences.len(), 2);
    }

    #[test]
    fn online_index_with_unknown_label_is_a_noop() {
        let mut sub = WeightedGraph::empty_round(1);
        sub.add_label(&label("y", 1), vec![]);
        let mut g = merge_round(WeightedGraph::new(), sub).unwrap();
        let stats = stats_with(&[("q", "alpha beta")], &["alpha"]);
        let terminals = crate::retrieval::TerminalSet {
            exist: vec![],
            not_exist: vec!["alpha".into()],
        };
        let query = TextDoc::new("q", "alpha beta", None);
        let summary = online_index(&mut g, &query, &terminals, "ghost", &stats).unwrap();
        assert_eq!(summary, OnlineIndexSummary::default());
        assert_eq!(g.node_count(), 1);
    }

    #[test]
    fn save_load_round_trips_structurally() {
        let base = merge_round(WeightedGraph::new(), subgraph_round1()).unwrap();
        let mut sub = WeightedGraph::empty_round(2);
        sub.add_label(
            &LabelDef {
                id: "named".into(),
                name: Some("A Named Label".into()),
                round_introduced: 2,
            },
            vec!["named".into(), "label".into()],
        );
        sub.record_occurrence("k9", "named", "t9", 0.25).unwrap();
        let g = merge_round(base, sub).unwrap();

        let f = tempfile::NamedTempFile::new().unwrap();
        g.save(f.path()).unwrap();
        let loaded = WeightedGraph::load(f.path()).unwrap();
        assert_eq!(g, loaded);
        assert_eq!(loaded.labels()["named"].name.as_deref(), Some("A Named Label"));

        let empty = WeightedGraph::new();
        let f2 = tempfile::NamedTempFile::new().unwrap();
        empty.save(f2.path()).unwrap();
        assert_eq!(WeightedGraph::load(f2.path()).unwrap(), empty);
    }

    #[test]
    fn load_rejects_future_schema_versions() {
        let g = WeightedGraph::new();
        let json = g.to_json().replace("\"schema_version\":1", "\"schema_version\":2");
        assert!(matches!(
            WeightedGraph::from_json(&json),
            Err(GraphError::SchemaVersion { found: 2 })
        ));
    }
}
