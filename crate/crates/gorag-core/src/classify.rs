//! Per-text classification: prompt assembly, reply matching, and the glue
//! that turns one incoming text into a prediction plus optional online graph
//! growth.
//!
//! The pipeline for one text: extract keywords, enter the text into the
//! corpus statistics, split the keywords into graph terminals and unseen
//! ones, retrieve candidate labels over the graph (falling back to the full
//! label set when retrieval cannot produce any), ask the gateway to pick one
//! candidate, match the reply back to a label id, and, unless disabled,
//! index the text's keywords under the predicted label.
//!
//! A reply that matches no known label id or name counts as a hallucination
//! and yields no prediction; nothing is indexed for it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, CorpusStats, TextDoc};
use crate::graph::{online_index, GraphError, OnlineIndexSummary, WeightedGraph};
use crate::llm::{ClassifyRequest, Gateway, LlmError, Templates};
use crate::retrieval::{
    split_keywords, steiner_candidates, FallbackKind, PathDomain, RetrievalError,
    RetrievalOptions, SteinerResult, TerminalSet,
};

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("classification needs a graph with at least one label")]
    NoLabels,
}

/// Pipeline variations, each switching off one ingredient of the full system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    /// The full pipeline: weighted retrieval, online indexing, text in prompt.
    None,
    /// No online indexing: the graph stops growing after training rounds.
    Offline,
    /// Unit edge weights: retrieval sees structure only.
    Unit,
    /// Classification prompt carries keywords but not the raw text.
    Keyword,
}

impl Ablation {
    pub fn online_indexing(self) -> bool {
        self != Ablation::Offline
    }

    pub fn unit_weights(self) -> bool {
        self == Ablation::Unit
    }

    pub fn include_text(self) -> bool {
        self != Ablation::Keyword
    }

    pub fn retrieval_options(self, paths: PathDomain) -> RetrievalOptions {
        RetrievalOptions {
            paths,
            unit_weights: self.unit_weights(),
        }
    }
}

impl std::str::FromStr for Ablation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" | "full" => Ok(Ablation::None),
            "offline" => Ok(Ablation::Offline),
            "unit" | "unit-weights" => Ok(Ablation::Unit),
            "keyword" | "keyword-only" => Ok(Ablation::Keyword),
            other => Err(format!(
                "unknown ablation {other:?}, expected none, offline, unit, or keyword"
            )),
        }
    }
}

/// How a reply was matched back to a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    /// Reply equals a label id.
    Id,
    /// Reply equals a label's display name.
    Name,
    /// Reply matches nothing the run knows: a hallucination.
    NoMatch,
}

/// Where the candidate set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    /// Labels on the retrieved tree.
    Tree,
    /// Labels adjacent to the terminals (tree had no label node).
    NeighborEdge,
    /// Retrieval produced nothing; every label became a candidate.
    FullLabelSet,
}

/// One classification, as written to the results stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub text_id: String,
    /// Round the text belongs to.
    pub text_round: u32,
    /// Round of the graph that served the query.
    pub eval_round: u32,
    pub gold_label: Option<String>,
    pub predicted: Option<String>,
    pub match_kind: MatchKind,
    pub hallucination: bool,
    pub keywords: Vec<String>,
    pub terminals: TerminalSet,
    pub candidates: Vec<String>,
    pub candidate_source: CandidateSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree_cost: Option<f64>,
    pub raw_reply: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub online: Option<OnlineIndexSummary>,
}

impl OutcomeRecord {
    pub fn correct(&self) -> bool {
        match (&self.predicted, &self.gold_label) {
            (Some(p), Some(g)) => p == g,
            _ => false,
        }
    }
}

/// Result of classifying one text: the serializable record plus the
/// retrieval detail for callers that want to inspect the tree.
#[derive(Debug, Clone)]
pub struct ClassifyOutcome {
    pub record: OutcomeRecord,
    pub retrieval: Option<SteinerResult>,
}

/// A label as shown in a classification prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptCandidate {
    pub id: String,
    pub name: Option<String>,
    pub keywords: Vec<String>,
}

impl PromptCandidate {
    pub fn display(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.id)
    }
}

/// Render the classification prompt. `include_text` off drops the raw text
/// and leaves keyword evidence only.
pub fn build_prompt(
    templates: &Templates,
    text: &str,
    keywords: &[String],
    candidates: &[PromptCandidate],
    include_text: bool,
) -> String {
    let text_section = if include_text {
        format!("Text: {text}\n\n")
    } else {
        String::new()
    };
    let keywords_line = if keywords.is_empty() {
        "(none)".to_string()
    } else {
        keywords.join(", ")
    };
    let candidate_lines: String = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{}. {}\n", i + 1, c.display()))
        .collect();
    let glossed: Vec<&PromptCandidate> =
        candidates.iter().filter(|c| !c.keywords.is_empty()).collect();
    let label_keywords_section = if glossed.is_empty() {
        String::new()
    } else {
        let mut s = String::from("\nLabel keywords:\n");
        for c in &glossed {
            s.push_str(&format!("- {}: {}\n", c.display(), c.keywords.join(", ")));
        }
        s.push('\n');
        s
    };
    crate::llm::fill(
        &templates.classify.template,
        &[
            ("text_section", text_section.as_str()),
            ("keywords", keywords_line.as_str()),
            ("candidates", candidate_lines.as_str()),
            ("label_keywords_section", label_keywords_section.as_str()),
        ],
    )
}

/// Clean a raw reply down to the label it names: first line, list markers and
/// surrounding quotes stripped, trailing period dropped, case folded.
pub fn normalize_reply(raw: &str) -> String {
    let first_line = raw.trim().lines().next().unwrap_or("").trim();
    let mut s = first_line;
    // "1. foo" or "2) foo" from models that echo the menu numbering.
    if let Some(rest) = s
        .find(|c: char| !c.is_ascii_digit())
        .filter(|&i| i > 0)
        .and_then(|i| {
            let (_, tail) = s.split_at(i);
            tail.strip_prefix('.').or_else(|| tail.strip_prefix(')'))
        })
    {
        if rest.starts_with(' ') {
            s = rest.trim_start();
        }
    }
    // Peel trailing periods and matching quote pairs until neither applies,
    // so combinations like 'label'. unwrap fully.
    loop {
        let mut t = s.trim().trim_end_matches('.').trim_end();
        let stripped = t
            .strip_prefix('"')
            .and_then(|x| x.strip_suffix('"'))
            .or_else(|| t.strip_prefix('\'').and_then(|x| x.strip_suffix('\'')))
            .or_else(|| t.strip_prefix('`').and_then(|x| x.strip_suffix('`')));
        if let Some(inner) = stripped {
            if !inner.is_empty() {
                t = inner.trim();
            }
        }
        if t == s {
            break;
        }
        s = t;
    }
    s.to_lowercase()
}

fn normalize_target(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Match a reply against the candidates first, then against every label the
/// run knows. No match means the model named something outside the label
/// space: a hallucination.
pub fn parse_and_match(
    raw_reply: &str,
    candidates: &[PromptCandidate],
    all_labels: &[PromptCandidate],
) -> (Option<String>, MatchKind) {
    let norm = normalize_reply(raw_reply);
    if norm.is_empty() {
        return (None, MatchKind::NoMatch);
    }
    for pool in [candidates, all_labels] {
        for c in pool {
            if normalize_target(&c.id) == norm {
                return (Some(c.id.clone()), MatchKind::Id);
            }
        }
        for c in pool {
            if let Some(name) = &c.name {
                if normalize_target(name) == norm {
                    return (Some(c.id.clone()), MatchKind::Name);
                }
            }
        }
    }
    (None, MatchKind::NoMatch)
}

fn prompt_candidate(graph: &WeightedGraph, id: &str) -> PromptCandidate {
    match graph.labels().get(id) {
        Some(meta) => PromptCandidate {
            id: meta.id.clone(),
            name: meta.name.clone(),
            keywords: meta.keywords.clone(),
        },
        None => PromptCandidate {
            id: id.to_string(),
            name: None,
            keywords: vec![],
        },
    }
}

/// Classify one text against the graph's current label space.
///
/// `allow_online` gates indexing on top of the ablation: re-evaluations of
/// old texts run with it off so they leave the graph untouched. Keyword
/// extraction failures degrade to an empty keyword list (and the full-label
/// fallback); classification call failures abort.
#[allow(clippy::too_many_arguments)]
pub fn classify_text(
    graph: &mut WeightedGraph,
    stats: &mut CorpusStats,
    gateway: &Gateway,
    doc: &TextDoc,
    text_round: u32,
    ablation: Ablation,
    paths: PathDomain,
    allow_online: bool,
    keyword_cache: &mut BTreeMap<String, Vec<String>>,
) -> Result<ClassifyOutcome, ClassifyError> {
    if graph.label_count() == 0 {
        return Err(ClassifyError::NoLabels);
    }
    let keywords: Vec<String> = match keyword_cache.get(&doc.id) {
        Some(cached) => cached.clone(),
        None => {
            let extracted = match gateway.extract_keywords(&doc.body) {
                Ok(kws) => kws,
                Err(e) => {
                    log::warn!("keyword extraction for text {} failed: {e}", doc.id);
                    Vec::new()
                }
            };
            keyword_cache.insert(doc.id.clone(), extracted.clone());
            extracted
        }
    };
    if !stats.contains_text(&doc.id) {
        stats.ingest_text(doc, &keywords)?;
    }
    let terminals = split_keywords(graph, &keywords);

    let options = ablation.retrieval_options(paths);
    let retrieval = if terminals.exist.is_empty() {
        None
    } else {
        match steiner_candidates(graph, &terminals, &options) {
            Ok(result) => Some(result),
            Err(e) => {
                debug_assert!(
                    matches!(
                        e,
                        RetrievalError::Disconnected
                            | RetrievalError::NoCandidates
                            | RetrievalError::EmptyTerminals
                    ),
                    "unexpected retrieval failure: {e}"
                );
                log::debug!("retrieval for text {} fell back to all labels: {e}", doc.id);
                None
            }
        }
    };
    let (candidate_ids, candidate_source, tree_cost) = match &retrieval {
        Some(r) => (
            r.candidates.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
            match r.fallback {
                FallbackKind::None => CandidateSource::Tree,
                FallbackKind::NeighborEdge => CandidateSource::NeighborEdge,
            },
            Some(r.total_cost),
        ),
        None => (
            graph.labels().keys().cloned().collect(),
            CandidateSource::FullLabelSet,
            None,
        ),
    };

    let prompt_candidates: Vec<PromptCandidate> = candidate_ids
        .iter()
        .map(|id| prompt_candidate(graph, id))
        .collect();
    let prompt = build_prompt(
        gateway.templates(),
        &doc.body,
        &keywords,
        &prompt_candidates,
        ablation.include_text(),
    );
    let label_keywords: BTreeMap<String, Vec<String>> = prompt_candidates
        .iter()
        .filter(|c| !c.keywords.is_empty())
        .map(|c| (c.id.clone(), c.keywords.clone()))
        .collect();
    let raw_reply = gateway.classify(&ClassifyRequest {
        prompt: &prompt,
        query_keywords: &keywords,
        candidates: &candidate_ids,
        label_keywords: &label_keywords,
    })?;

    let all_labels: Vec<PromptCandidate> = graph
        .labels()
        .keys()
        .map(|id| prompt_candidate(graph, id))
        .collect();
    let (predicted, match_kind) = parse_and_match(&raw_reply, &prompt_candidates, &all_labels);
    let hallucination = predicted.is_none();

    let online = match &predicted {
        Some(label) if allow_online && ablation.online_indexing() => {
            Some(online_index(graph, doc, &terminals, label, stats)?)
        }
        _ => None,
    };

    Ok(ClassifyOutcome {
        record: OutcomeRecord {
            text_id: doc.id.clone(),
            text_round,
            eval_round: graph.round(),
            gold_label: doc.gold_label.clone(),
            predicted,
            match_kind,
            hallucination,
            keywords,
            terminals,
            candidates: candidate_ids,
            candidate_source,
            tree_cost,
            raw_reply,
            online,
        },
        retrieval,
    })
}
