//! Deterministic mock backend.
//!
//! The mock stands in for a chat model in tests, benchmarks, and offline
//! runs. Its behavior is a published contract (rule version 1); the test
//! suite re-derives expected outputs from these rules by hand:
//!
//! - extract: match every configured marker phrase that occurs contiguously
//!   in the text (reported in first-match order, ties lexicographic), then
//!   every token not covered by a marker match whose fixture document
//!   frequency is below `df_threshold` (fraction of fixture texts), in
//!   first-occurrence order. The fixture corpus is fixed at construction.
//! - generate description: the label name itself.
//! - classify: each candidate scores one point per query keyword that the
//!   marker table assigns to it, plus one point per shared token between the
//!   query keywords and the candidate's keyword gloss; highest score wins,
//!   ties break lexicographically. The reply is the winning label id
//!   verbatim, so it always comes from the candidate list.
//!
//! With `hallucinate_every = Some(n)`, every n-th classify call instead
//! returns a fixed non-label string; used to exercise hallucination
//! accounting.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::corpus::{normalize_keyword, tokenize, TextDoc};

use super::ClassifyRequest;

pub const MOCK_RULE_VERSION: &str = "1";
pub const HALLUCINATION_SENTINEL: &str = "none of the listed categories apply";

#[derive(Debug, Clone, PartialEq)]
pub struct MockConfig {
    /// Marker phrase (normalized) to the label it points at.
    pub marker_labels: BTreeMap<String, String>,
    /// A token is "rare" when fixture doc freq < threshold * fixture texts.
    pub df_threshold: f64,
    /// Force every n-th classify reply to a non-label string.
    pub hallucinate_every: Option<u64>,
}

impl Default for MockConfig {
    fn default() -> Self {
        MockConfig {
            marker_labels: BTreeMap::new(),
            df_threshold: 0.2,
            hallucinate_every: None,
        }
    }
}

#[derive(Debug)]
pub struct MockBackend {
    config: MockConfig,
    marker_tokens: Vec<(String, Vec<String>)>,
    fixture_df: BTreeMap<String, usize>,
    fixture_total: usize,
    classify_calls: AtomicU64,
}

impl MockBackend {
    pub fn new(config: MockConfig, fixture: &[TextDoc]) -> Self {
        let mut fixture_df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in fixture {
            let unique: BTreeSet<&String> = doc.tokens().iter().collect();
            for t in unique {
                *fixture_df.entry(t.clone()).or_insert(0) += 1;
            }
        }
        let mut marker_tokens: Vec<(String, Vec<String>)> = config
            .marker_labels
            .keys()
            .map(|phrase| {
                let normalized = normalize_keyword(phrase);
                let toks = normalized.split(' ').map(str::to_string).collect();
                (normalized, toks)
            })
            .collect();
        marker_tokens.sort();
        MockBackend {
            config,
            marker_tokens,
            fixture_df,
            fixture_total: fixture.len(),
            classify_calls: AtomicU64::new(0),
        }
    }

    pub fn config(&self) -> &MockConfig {
        &self.config
    }

    fn is_rare(&self, token: &str) -> bool {
        let df = self.fixture_df.get(token).copied().unwrap_or(0);
        (df as f64) < self.config.df_threshold * self.fixture_total as f64
    }

    /// Extraction rule; the reply is a comma-joined keyword list.
    pub fn extract(&self, text: &str) -> String {
        let tokens = tokenize(text);
        let mut covered = vec![false; tokens.len()];
        // (first match position, phrase)
        let mut matched: Vec<(usize, &str)> = Vec::new();
        for (phrase, needle) in &self.marker_tokens {
            if needle.is_empty() || needle.len() > tokens.len() {
                continue;
            }
            let mut first: Option<usize> = None;
            for start in 0..=tokens.len() - needle.len() {
                if tokens[start..start + needle.len()] == needle[..] {
                    first.get_or_insert(start);
                    for c in &mut covered[start..start + needle.len()] {
                        *c = true;
                    }
                }
            }
            if let Some(pos) = first {
                matched.push((pos, phrase));
            }
        }
        matched.sort();

        let mut out: Vec<String> = matched.iter().map(|(_, p)| p.to_string()).collect();
        for (i, token) in tokens.iter().enumerate() {
            if !covered[i] && self.is_rare(token) && !out.contains(token) {
                out.push(token.clone());
            }
        }
        out.join(", ")
    }

    /// The mock's "description" of a label is the name itself.
    pub fn generate_description(&self, label_name: &str) -> String {
        label_name.to_string()
    }

    /// Tokens of the label name, deduplicated in order.
    pub fn label_keywords(&self, label_name: &str) -> Vec<String> {
        let mut out = Vec::new();
        for t in tokenize(label_name) {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }

    pub fn classify(&self, req: &ClassifyRequest<'_>) -> String {
        let call = self.classify_calls.fetch_add(1, Ordering::SeqCst) + 1;
        if let Some(n) = self.config.hallucinate_every {
            if n > 0 && call % n == 0 {
                return HALLUCINATION_SENTINEL.to_string();
            }
        }
        let query_tokens: BTreeSet<String> = req
            .query_keywords
            .iter()
            .flat_map(|k| k.split(' '))
            .map(str::to_string)
            .collect();
        let mut best: Option<(usize, &String)> = None;
        for candidate in req.candidates {
            let marker_votes = req
                .query_keywords
                .iter()
                .filter(|k| self.config.marker_labels.get(*k) == Some(candidate))
                .count();
            let gloss_votes = req
                .label_keywords
                .get(candidate)
                .map(|gloss| {
                    let gloss_tokens: BTreeSet<&str> =
                        gloss.iter().flat_map(|k| k.split(' ')).collect();
                    gloss_tokens
                        .iter()
                        .filter(|t| query_tokens.contains(**t))
                        .count()
                })
                .unwrap_or(0);
            let score = marker_votes + gloss_votes;
            best = match best {
                None => Some((score, candidate)),
                Some((s, c)) if score > s || (score == s && candidate < c) => {
                    Some((score, candidate))
                }
                keep => keep,
            };
        }
        match best {
            Some((_, c)) => c.clone(),
            None => HALLUCINATION_SENTINEL.to_string(),
        }
    }
}
