//! Incremental corpus statistics backing the keyword/label correlation score.
//!
//! The correlation score needs, at the moment an edge occurrence is recorded:
//! the occurrence count of the keyword in the text, the text length, the
//! number of texts seen so far, and the keyword's document frequency. Texts
//! enter once and are never removed; document frequency counts a keyword at
//! most once per text, at the ingestion that carried it.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use super::{contiguous_count, CorpusError, TextDoc};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextStats {
    len: usize,
    term_counts: BTreeMap<String, usize>,
    tokens: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    total_texts: usize,
    doc_freq: BTreeMap<String, usize>,
    per_text: BTreeMap<String, TextStats>,
}

impl CorpusStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one text and bump document frequency for every given keyword
    /// that actually occurs in it. Re-ingesting an id is an error.
    pub fn ingest_text(&mut self, doc: &TextDoc, keywords: &[String]) -> Result<(), CorpusError> {
        if self.per_text.contains_key(&doc.id) {
            return Err(CorpusError::DuplicateIngest(doc.id.clone()));
        }
        let tokens = doc.tokens().to_vec();
        let mut term_counts: BTreeMap<String, usize> = BTreeMap::new();
        for t in &tokens {
            *term_counts.entry(t.clone()).or_insert(0) += 1;
        }
        let unique: BTreeSet<&String> = keywords.iter().collect();
        for kw in unique {
            if contiguous_count(&tokens, kw) > 0 {
                *self.doc_freq.entry(kw.clone()).or_insert(0) += 1;
            }
        }
        self.per_text.insert(
            doc.id.clone(),
            TextStats {
                len: tokens.len(),
                term_counts,
                tokens,
            },
        );
        self.total_texts += 1;
        debug_assert!(self.doc_freq.values().all(|&df| df <= self.total_texts));
        Ok(())
    }

    pub fn total_texts(&self) -> usize {
        self.total_texts
    }

    pub fn doc_freq(&self, keyword: &str) -> usize {
        self.doc_freq.get(keyword).copied().unwrap_or(0)
    }

    pub fn contains_text(&self, id: &str) -> bool {
        self.per_text.contains_key(id)
    }

    pub fn text_len(&self, id: &str) -> Option<usize> {
        self.per_text.get(id).map(|s| s.len)
    }

    /// Contiguous occurrences of `keyword` in the ingested text `id`, or
    /// `None` if the text is unknown. Single tokens hit the per-text count
    /// map, multi-word phrases scan the stored token sequence.
    pub fn count_in_text(&self, keyword: &str, id: &str) -> Option<usize> {
        let stats = self.per_text.get(id)?;
        if !keyword.contains(' ') {
            return Some(stats.term_counts.get(keyword).copied().unwrap_or(0));
        }
        Some(contiguous_count(&stats.tokens, keyword))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), CorpusError> {
        let json = serde_json::to_string(self).expect("stats serialize");
        std::fs::write(path, json).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CorpusError> {
        let raw = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&raw).map_err(|e| CorpusError::Parse {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })
    }
}
